/*
   Copyright 2026 The bhlab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

/** @file report.hpp
    @brief Experiment reports and their CSV / JSON forms.

    JSON layout: {"experiment", "config", "provenance", "aggregates",
    "records"?}, where a table is {"columns": [...], "rows": [[...], ...]}.
    Non-finite doubles are written as null and read back as NaN.
*/

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "bhlab/errors.hpp"

namespace bhlab {

inline constexpr const char *kVersion = "0.1.0";

using json = nlohmann::ordered_json;
/// Seeds use the unsigned alternative so they print without wrapping.
using Cell = std::variant<std::int64_t, std::uint64_t, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  std::size_t column(const std::string &name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name)
        return i;
    throw InvalidArgument("Table::column", "no column '" + name + "'");
  }

  void add_row(std::vector<Cell> row) {
    if (row.size() != columns.size())
      throw DimensionMismatch("Table::add_row", "row width != column count");
    rows.push_back(std::move(row));
  }

  double number(std::size_t row, const std::string &name) const {
    const Cell &c = rows.at(row).at(column(name));
    if (const auto *d = std::get_if<double>(&c))
      return *d;
    if (const auto *i = std::get_if<std::int64_t>(&c))
      return static_cast<double>(*i);
    if (const auto *u = std::get_if<std::uint64_t>(&c))
      return static_cast<double>(*u);
    throw InvalidArgument("Table::number", "column '" + name + "' is text");
  }

  const std::string &text(std::size_t row, const std::string &name) const {
    return std::get<std::string>(rows.at(row).at(column(name)));
  }
};

struct Provenance {
  std::uint64_t seed = 0;
  std::string version = kVersion;
  double wall_time_seconds = 0.0;
  unsigned threads = 0;
};

struct ExperimentReport {
  std::string experiment;
  json config = json::object();
  Provenance provenance;
  Table aggregates;
  std::optional<Table> records;
};

namespace detail {

inline std::string format_double(double v) {
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_escape(const std::string &s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"')
      out += '"';
    out += ch;
  }
  return out + "\"";
}

inline json cell_to_json(const Cell &c) {
  if (const auto *i = std::get_if<std::int64_t>(&c))
    return *i;
  if (const auto *u = std::get_if<std::uint64_t>(&c))
    return *u;
  if (const auto *d = std::get_if<double>(&c))
    return std::isfinite(*d) ? json(*d) : json(nullptr);
  return std::get<std::string>(c);
}

inline Cell cell_from_json(const json &j) {
  if (j.is_null())
    return std::nan("");
  if (j.is_number_unsigned() &&
      j.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
    return j.get<std::uint64_t>();
  if (j.is_number_integer())
    return j.get<std::int64_t>();
  if (j.is_number())
    return j.get<double>();
  if (j.is_string())
    return j.get<std::string>();
  throw IoError("load_report", "unsupported cell type");
}

inline json table_to_json(const Table &t) {
  json rows = json::array();
  for (const auto &r : t.rows) {
    json row = json::array();
    for (const auto &c : r)
      row.push_back(cell_to_json(c));
    rows.push_back(std::move(row));
  }
  return json{{"columns", t.columns}, {"rows", std::move(rows)}};
}

inline Table table_from_json(const json &j) {
  Table t;
  t.columns = j.at("columns").get<std::vector<std::string>>();
  for (const auto &r : j.at("rows")) {
    std::vector<Cell> row;
    for (const auto &c : r)
      row.push_back(cell_from_json(c));
    t.add_row(std::move(row));
  }
  return t;
}

// Integers compare by value: a small unsigned cell reads back as signed.
inline bool cells_equal(const Cell &a, const Cell &b) {
  auto as_int = [](const Cell &c) -> std::optional<std::pair<bool, std::uint64_t>> {
    if (const auto *i = std::get_if<std::int64_t>(&c))
      return std::pair{*i < 0, static_cast<std::uint64_t>(*i)};
    if (const auto *u = std::get_if<std::uint64_t>(&c))
      return std::pair{false, *u};
    return std::nullopt;
  };
  const auto ia = as_int(a), ib = as_int(b);
  if (ia || ib)
    return ia && ib && *ia == *ib;
  if (a.index() != b.index())
    return false;
  if (const auto *x = std::get_if<double>(&a)) {
    const double y = std::get<double>(b);
    return (std::isnan(*x) && std::isnan(y)) || *x == y;
  }
  return a == b;
}

} // namespace detail

inline std::string to_csv(const Table &t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    out += (i ? "," : "") + detail::csv_escape(t.columns[i]);
  out += "\r\n";
  for (const auto &r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i)
        out += ',';
      if (const auto *v = std::get_if<std::int64_t>(&r[i]))
        out += std::to_string(*v);
      else if (const auto *u = std::get_if<std::uint64_t>(&r[i]))
        out += std::to_string(*u);
      else if (const auto *d = std::get_if<double>(&r[i]))
        out += detail::format_double(*d);
      else
        out += detail::csv_escape(std::get<std::string>(r[i]));
    }
    out += "\r\n";
  }
  return out;
}

inline json to_json(const ExperimentReport &r) {
  json j;
  j["experiment"] = r.experiment;
  j["config"] = r.config;
  j["provenance"] = {{"seed", r.provenance.seed},
                     {"version", r.provenance.version},
                     {"wall_time_seconds", r.provenance.wall_time_seconds},
                     {"threads", r.provenance.threads}};
  j["aggregates"] = detail::table_to_json(r.aggregates);
  if (r.records)
    j["records"] = detail::table_to_json(*r.records);
  return j;
}

inline ExperimentReport report_from_json(const json &j) {
  ExperimentReport r;
  r.experiment = j.at("experiment").get<std::string>();
  r.config = j.at("config");
  const json &p = j.at("provenance");
  r.provenance.seed = p.at("seed").get<std::uint64_t>();
  r.provenance.version = p.at("version").get<std::string>();
  r.provenance.wall_time_seconds = p.at("wall_time_seconds").get<double>();
  r.provenance.threads = p.at("threads").get<unsigned>();
  r.aggregates = detail::table_from_json(j.at("aggregates"));
  if (j.contains("records"))
    r.records = detail::table_from_json(j.at("records"));
  return r;
}

inline bool tables_equal(const Table &a, const Table &b) {
  if (a.columns != b.columns || a.rows.size() != b.rows.size())
    return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    if (a.rows[i].size() != b.rows[i].size())
      return false;
    for (std::size_t k = 0; k < a.rows[i].size(); ++k)
      if (!detail::cells_equal(a.rows[i][k], b.rows[i][k]))
        return false;
  }
  return true;
}

inline void write_text_file(const std::filesystem::path &path,
                            const std::string &content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os)
    throw IoError("emit_report", "cannot open '" + path.string() + "' for writing");
  os << content;
  if (!os)
    throw IoError("emit_report", "write failed for '" + path.string() + "'");
}

inline ExperimentReport load_report(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is)
    throw IoError("load_report", "cannot open '" + path.string() + "'");
  try {
    return report_from_json(json::parse(is));
  } catch (const json::exception &e) {
    throw IoError("load_report", path.string() + ": " + e.what());
  }
}

enum class ReportFormat { csv, json };

/// Writes <dir>/<stem>.csv (aggregates, plus <stem>_records.csv when
/// records exist) or <dir>/<stem>.json. Returns the paths written.
inline std::vector<std::filesystem::path>
emit_report(const ExperimentReport &r, ReportFormat format,
            const std::filesystem::path &dir, const std::string &stem = "") {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw IoError("emit_report", "cannot create '" + dir.string() + "': " + ec.message());
  const std::string base = stem.empty() ? r.experiment : stem;
  std::vector<std::filesystem::path> written;
  if (format == ReportFormat::csv) {
    written.push_back(dir / (base + ".csv"));
    write_text_file(written.back(), to_csv(r.aggregates));
    if (r.records) {
      written.push_back(dir / (base + "_records.csv"));
      write_text_file(written.back(), to_csv(*r.records));
    }
  } else {
    written.push_back(dir / (base + ".json"));
    write_text_file(written.back(), to_json(r).dump(2) + "\n");
  }
  return written;
}

} // namespace bhlab
