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

/** @file config.hpp
    @brief A small TOML-style configuration reader.

    Supported syntax: `[section]` headers, `key = value` lines, `#` comments.
    Values are numbers, booleans, quoted strings, or flat arrays of
    those in brackets. Complex numbers are written "a+bi" (quoted or bare);
    ladder entries are "MxLxN" strings ("MxL" in a table1 section, with N
    given separately).
*/

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bhlab/errors.hpp"
#include "bhlab/types.hpp"

namespace bhlab {

/// A raw value: scalar tokens or the items of an array.
struct ConfigValue {
  std::vector<std::string> items;
  bool is_array = false;
};

class ConfigSection {
public:
  ConfigSection() = default;
  explicit ConfigSection(std::string name) : name_(std::move(name)) {}

  const std::string &name() const noexcept { return name_; }
  bool has(const std::string &key) const { return values_.count(key) > 0; }
  void set(const std::string &key, ConfigValue v) { values_[key] = std::move(v); }
  void set_scalar(const std::string &key, const std::string &token) {
    values_[key] = ConfigValue{{token}, false};
  }
  const std::map<std::string, ConfigValue> &values() const noexcept { return values_; }

  std::string qualified(const std::string &key) const {
    return name_.empty() ? key : name_ + "." + key;
  }

  std::string get_string(const std::string &key) const { return scalar(key); }

  double get_double(const std::string &key) const {
    const std::string s = scalar(key);
    double v = 0.0;
    if (!parse_double(s, &v))
      throw ConfigError(qualified(key), "expected a number, got '" + s + "'");
    return v;
  }

  std::int64_t get_int(const std::string &key) const {
    const std::string s = scalar(key);
    std::int64_t v = 0;
    if (!parse_int(s, &v))
      throw ConfigError(qualified(key), "expected an integer, got '" + s + "'");
    return v;
  }

  std::uint64_t get_uint(const std::string &key) const {
    const std::string s = scalar(key);
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
      throw ConfigError(qualified(key), "expected a non-negative integer, got '" + s + "'");
    return v;
  }

  bool get_bool(const std::string &key) const {
    const std::string s = scalar(key);
    if (s == "true")
      return true;
    if (s == "false")
      return false;
    throw ConfigError(qualified(key), "expected true or false, got '" + s + "'");
  }

  cplx get_complex(const std::string &key) const {
    const std::string s = scalar(key);
    cplx v;
    if (!parse_complex(s, &v))
      throw ConfigError(qualified(key), "expected a complex number a+bi, got '" + s + "'");
    return v;
  }

  std::vector<std::string> get_strings(const std::string &key) const {
    const ConfigValue &v = raw(key);
    return v.items;
  }

  std::vector<std::int64_t> get_ints(const std::string &key) const {
    std::vector<std::int64_t> out;
    for (const auto &s : raw(key).items) {
      std::int64_t v = 0;
      if (!parse_int(s, &v))
        throw ConfigError(qualified(key), "expected integers, got '" + s + "'");
      out.push_back(v);
    }
    return out;
  }

  double get_double_or(const std::string &key, double d) const {
    return has(key) ? get_double(key) : d;
  }
  std::int64_t get_int_or(const std::string &key, std::int64_t d) const {
    return has(key) ? get_int(key) : d;
  }
  std::uint64_t get_uint_or(const std::string &key, std::uint64_t d) const {
    return has(key) ? get_uint(key) : d;
  }
  bool get_bool_or(const std::string &key, bool d) const {
    return has(key) ? get_bool(key) : d;
  }
  std::string get_string_or(const std::string &key, const std::string &d) const {
    return has(key) ? get_string(key) : d;
  }
  cplx get_complex_or(const std::string &key, cplx d) const {
    return has(key) ? get_complex(key) : d;
  }

  static bool parse_double(const std::string &s, double *out) {
    if (s.empty())
      return false;
    const char *b = s.data(), *e = s.data() + s.size();
    if (*b == '+')
      ++b;
    const auto r = std::from_chars(b, e, *out);
    return r.ec == std::errc() && r.ptr == e && std::isfinite(*out);
  }

  static bool parse_int(const std::string &s, std::int64_t *out) {
    if (s.empty())
      return false;
    const char *b = s.data(), *e = s.data() + s.size();
    if (*b == '+')
      ++b;
    const auto r = std::from_chars(b, e, *out);
    return r.ec == std::errc() && r.ptr == e;
  }

  /// "a", "bi", "a+bi", "a-bi", with i or j as the imaginary unit.
  static bool parse_complex(std::string s, cplx *out) {
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch); }),
            s.end());
    if (s.empty())
      return false;
    const char last = s.back();
    if (last != 'i' && last != 'j') {
      double re = 0.0;
      if (!parse_double(s, &re))
        return false;
      *out = cplx(re, 0.0);
      return true;
    }
    s.pop_back();
    // Split at the last sign that is not the leading one or an exponent sign.
    std::size_t split = std::string::npos;
    for (std::size_t k = s.size(); k-- > 1;) {
      if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
        split = k;
        break;
      }
    }
    std::string re_s = split == std::string::npos ? "" : s.substr(0, split);
    std::string im_s = split == std::string::npos ? s : s.substr(split);
    if (im_s.empty() || im_s == "+")
      im_s = "1";
    else if (im_s == "-")
      im_s = "-1";
    double re = 0.0, im = 0.0;
    if (!re_s.empty() && !parse_double(re_s, &re))
      return false;
    if (!parse_double(im_s, &im))
      return false;
    *out = cplx(re, im);
    return true;
  }

private:
  const ConfigValue &raw(const std::string &key) const {
    auto it = values_.find(key);
    if (it == values_.end())
      throw ConfigError(qualified(key), "missing required key");
    return it->second;
  }

  std::string scalar(const std::string &key) const {
    const ConfigValue &v = raw(key);
    if (v.is_array || v.items.size() != 1)
      throw ConfigError(qualified(key), "expected a scalar value");
    return v.items.front();
  }

  std::string name_;
  std::map<std::string, ConfigValue> values_;
};

struct ConfigFile {
  std::map<std::string, ConfigSection> sections;

  /// The named section, or an empty one.
  ConfigSection section(const std::string &name) const {
    auto it = sections.find(name);
    return it == sections.end() ? ConfigSection(name) : it->second;
  }
};

namespace detail {

inline std::string trim(const std::string &s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
    ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
    --e;
  return s.substr(b, e - b);
}

// Strips a trailing comment outside of quotes.
inline std::string strip_comment(const std::string &line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quote == 0 && (ch == '"' || ch == '\''))
      quote = ch;
    else if (ch == quote)
      quote = 0;
    else if (ch == '#' && quote == 0)
      return line.substr(0, i);
  }
  return line;
}

inline std::string unquote(const std::string &tok, const std::string &key) {
  if (tok.empty() || (tok.front() != '"' && tok.front() != '\''))
    return tok;
  if (tok.size() >= 2 && tok.back() == tok.front())
    return tok.substr(1, tok.size() - 2);
  throw ConfigError(key, "unterminated string");
  return tok;
}

inline std::vector<std::string> split_array(const std::string &body, const std::string &key) {
  std::vector<std::string> out;
  std::string cur;
  char quote = 0;
  for (char ch : body) {
    if (quote == 0 && (ch == '"' || ch == '\''))
      quote = ch;
    else if (ch == quote)
      quote = 0;
    if (ch == ',' && quote == 0) {
      out.push_back(unquote(trim(cur), key));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (quote != 0)
    throw ConfigError(key, "unterminated string in array");
  if (!trim(cur).empty())
    out.push_back(unquote(trim(cur), key));
  return out;
}

} // namespace detail

inline ConfigFile parse_config(std::istream &is) {
  ConfigFile cfg;
  std::string current;
  cfg.sections[current] = ConfigSection(current);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string s = detail::trim(detail::strip_comment(line));
    if (s.empty())
      continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3)
        throw ConfigError("line " + std::to_string(lineno), "malformed section header");
      current = detail::trim(s.substr(1, s.size() - 2));
      if (!cfg.sections.count(current))
        cfg.sections[current] = ConfigSection(current);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string val = detail::trim(s.substr(eq + 1));
    ConfigSection &sec = cfg.sections[current];
    const std::string qkey = sec.qualified(key);
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno), "empty key");
    if (sec.has(key))
      throw ConfigError(qkey, "duplicate key");
    if (val.empty())
      throw ConfigError(qkey, "missing value");
    if (val.front() == '[') {
      if (val.back() != ']')
        throw ConfigError(qkey, "unterminated array");
      sec.set(key, ConfigValue{detail::split_array(val.substr(1, val.size() - 2), qkey), true});
    } else {
      sec.set(key, ConfigValue{{detail::unquote(val, qkey)}, false});
    }
  }
  return cfg;
}

inline ConfigFile parse_config_string(const std::string &text) {
  std::istringstream is(text);
  return parse_config(is);
}

inline ConfigFile load_config(const std::string &path) {
  std::ifstream is(path);
  if (!is)
    throw ConfigError("config", "cannot open '" + path + "'");
  return parse_config(is);
}

/// "MxLxN", or "MxL" when default_N > 0.
inline std::array<std::int64_t, 3> parse_dims(const std::string &s, std::int64_t default_N,
                                              const std::string &key) {
  std::vector<std::int64_t> parts;
  std::string cur;
  for (char ch : s + "x") {
    if (ch == 'x' || ch == 'X') {
      std::int64_t v = 0;
      if (!ConfigSection::parse_int(detail::trim(cur), &v) || v < 1)
        throw ConfigError(key, "bad ladder entry '" + s + "'");
      parts.push_back(v);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (parts.size() == 2 && default_N > 0)
    return {parts[0], parts[1], default_N};
  if (parts.size() != 3)
    throw ConfigError(key, "ladder entry '" + s + "' must be MxLxN");
  return {parts[0], parts[1], parts[2]};
}

} // namespace bhlab
