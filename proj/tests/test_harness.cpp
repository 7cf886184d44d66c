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

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "bhlab/cli.hpp"
#include "bhlab/config.hpp"
#include "bhlab/harness.hpp"
#include "bhlab/parallel.hpp"
#include "bhlab/report.hpp"
#include "bhlab/stats.hpp"

namespace {

namespace fs = std::filesystem;
using bhlab::cplx;
using bhlab::ExperimentConfig;
using bhlab::ExperimentKind;
using bhlab::ModelParams;

std::string slurp(const fs::path &p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

fs::path scratch(const std::string &name) {
  const fs::path d = fs::temp_directory_path() / ("bhlab_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "bhlab");
  std::vector<const char *> argv;
  for (auto &a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = bhlab::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

TEST(Stats, PairwiseSumAndMoments) {
  std::vector<double> x(1000);
  std::iota(x.begin(), x.end(), 1.0);
  EXPECT_EQ(bhlab::pairwise_sum(x), 500500.0);
  EXPECT_EQ(bhlab::mean(x), 500.5);
  // Var of 1..n is n(n+1)/12.
  EXPECT_NEAR(bhlab::sample_variance(x), 1000.0 * 1001.0 / 12.0, 1e-9);
  const std::vector<cplx> z{cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};
  EXPECT_NEAR(bhlab::sample_variance(z), 4.0 / 3.0, 1e-15);
  EXPECT_TRUE(std::isnan(bhlab::mean(std::vector<double>{})));
  EXPECT_EQ(bhlab::standard_error(std::vector<double>{3.0}), 0.0);
}

TEST(Stats, JackknifeOfMeanIsClassicalSE) {
  std::vector<double> x{0.3, 1.7, -2.2, 4.1, 0.0, 0.9, 3.3};
  const double jk =
      bhlab::jackknife_standard_error(x, [](const std::vector<double> &v) { return bhlab::mean(v); });
  EXPECT_NEAR(jk, bhlab::standard_error(x), 1e-14);
}

TEST(Stats, VarianceJackknifeMatchesGenericJackknife) {
  std::vector<double> x{0.3, 1.7, -2.2, 4.1, 0.0, 0.9, 3.3, -0.4};
  const double fast = bhlab::variance_jackknife_se(x);
  const double slow = bhlab::jackknife_standard_error(
      x, [](const std::vector<double> &v) { return bhlab::sample_variance(v); });
  EXPECT_NEAR(fast, slow, 1e-12);
  // All-constant input has zero variance and zero SE.
  EXPECT_EQ(bhlab::sample_variance(std::vector<double>(5, 2.0)), 0.0);
}

TEST(Parallel, OrderAndExceptions) {
  for (unsigned th : {1u, 2u, 5u}) {
    const auto v = bhlab::map_trials(100, th, [](std::int64_t i) { return i * i; });
    for (std::int64_t i = 0; i < 100; ++i)
      EXPECT_EQ(v[static_cast<std::size_t>(i)], i * i);
  }
  EXPECT_THROW(bhlab::map_trials(50, 3,
                                 [](std::int64_t i) -> int {
                                   if (i == 17)
                                     throw bhlab::DomainError("task", "boom");
                                   return 0;
                                 }),
               bhlab::DomainError);
  EXPECT_TRUE(bhlab::map_trials(0, 2, [](std::int64_t) { return 1; }).empty());
}

TEST(Report, CsvFormatting) {
  bhlab::Table t{{"name", "x", "n"}, {}};
  t.add_row({std::string("a,b"), 0.1, std::int64_t{3}});
  t.add_row({std::string("say \"hi\""), 1.0 / 3.0, std::int64_t{-1}});
  const std::string csv = bhlab::to_csv(t);
  EXPECT_EQ(csv, "name,x,n\r\n\"a,b\",0.10000000000000001,3\r\n"
                 "\"say \"\"hi\"\"\",0.33333333333333331,-1\r\n");
  EXPECT_THROW(t.add_row({1.0}), bhlab::DimensionMismatch);
  EXPECT_EQ(bhlab::to_csv(bhlab::Table{{"a", "b"}, {}}), "a,b\r\n");
}

TEST(Report, UnsignedSeedCells) {
  const std::uint64_t big = 0xF000000000000001ULL;
  bhlab::ExperimentReport r;
  r.experiment = "seeds";
  r.aggregates = bhlab::Table{{"seed"}, {}};
  r.aggregates.add_row({big});
  r.aggregates.add_row({std::uint64_t{7}});
  EXPECT_EQ(bhlab::to_csv(r.aggregates), "seed\r\n17293822569102704641\r\n7\r\n");
  const auto back = bhlab::report_from_json(bhlab::to_json(r));
  EXPECT_TRUE(bhlab::tables_equal(back.aggregates, r.aggregates));
  EXPECT_EQ(std::get<std::uint64_t>(back.aggregates.rows[0][0]), big);
}

TEST(Report, JsonRoundTrip) {
  bhlab::ExperimentReport r;
  r.experiment = "demo";
  r.config = {{"k", 1}};
  r.aggregates = bhlab::Table{{"x", "s"}, {}};
  r.aggregates.add_row({std::nan(""), std::string("u")});
  r.aggregates.add_row({2.5, std::string("v")});
  const auto j = bhlab::to_json(r);
  EXPECT_TRUE(j["aggregates"]["rows"][0][0].is_null());
  const auto back = bhlab::report_from_json(j);
  EXPECT_EQ(back.experiment, "demo");
  EXPECT_TRUE(bhlab::tables_equal(back.aggregates, r.aggregates));
  EXPECT_FALSE(back.records.has_value());

  bhlab::ExperimentReport empty;
  empty.experiment = "empty";
  const auto ej = bhlab::to_json(empty);
  EXPECT_TRUE(ej["aggregates"]["rows"].empty());
}

ExperimentConfig small_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.ladder = {ModelParams(1.0, 4, 4, 32), ModelParams(1.0, 8, 4, 64)};
  c.trials = 12;
  c.seed = 99;
  c.threads = 1;
  return c;
}

TEST(Harness, Table1Rows) {
  auto c = small_config(ExperimentKind::table1);
  c.keep_records = true;
  const auto r = bhlab::run_table1(c);
  EXPECT_EQ(r.aggregates.columns,
            (std::vector<std::string>{"M", "L", "ratio_L_over_M2", "mean_lambda1", "stderr",
                                      "reference_edge", "trials", "seed"}));
  ASSERT_EQ(r.aggregates.rows.size(), 2u);
  EXPECT_DOUBLE_EQ(r.aggregates.number(0, "ratio_L_over_M2"), 0.25);
  EXPECT_EQ(r.records->rows.size(), 24u);
  c.trials = 1;
  c.keep_records = false;
  EXPECT_EQ(bhlab::to_csv(bhlab::run_table1(c).aggregates),
            bhlab::to_csv(bhlab::run_table1(c).aggregates));
}

TEST(Harness, ReproducibleAcrossThreads) {
  for (auto kind : {ExperimentKind::table1, ExperimentKind::esd, ExperimentKind::edge_location,
                    ExperimentKind::variance_scaling, ExperimentKind::det_equiv_scaling,
                    ExperimentKind::second_order_validation}) {
    auto c = small_config(kind);
    c.keep_records = true;
    const auto a = bhlab::run_experiment(c);
    c.threads = 3;
    const auto b = bhlab::run_experiment(c);
    EXPECT_EQ(bhlab::to_csv(a.aggregates), bhlab::to_csv(b.aggregates)) << bhlab::to_string(kind);
    if (a.records)
      EXPECT_EQ(bhlab::to_csv(*a.records), bhlab::to_csv(*b.records));
  }
}

TEST(Harness, EdgeLocationExtremes) {
  auto c = small_config(ExperimentKind::edge_location);
  c.epsilon = 100.0;
  const auto r = bhlab::run_edge_location(c);
  for (std::size_t i = 0; i < r.aggregates.rows.size(); ++i)
    EXPECT_EQ(r.aggregates.number(i, "trials_with_outliers"), 0.0);
  c.ladder = {ModelParams(1.0, 8, 8, 32)};
  const auto w = bhlab::run_edge_location(c);
  EXPECT_EQ(w.aggregates.number(0, "expected_zeros"), 32.0);
  EXPECT_EQ(w.aggregates.number(0, "zero_multiplicity_ok"), 1.0);
}

TEST(Harness, EsdRecordsPerTrial) {
  auto c = small_config(ExperimentKind::esd);
  c.ladder = {c.ladder.front()};
  c.keep_records = true;
  const auto r = bhlab::run_esd(c);
  const auto j = bhlab::to_json(r);
  EXPECT_EQ(j["records"]["rows"].size(), 12u);
}

TEST(Harness, SecondOrderModes) {
  auto c = small_config(ExperimentKind::second_order_validation);
  const auto om = bhlab::run_second_order_validation(c);
  EXPECT_EQ(om.aggregates.rows.size(), 2u * 6u);
  c.mode = "first_order";
  c.ladder = {ModelParams(1.0, 2, 4, 16), ModelParams(1.0, 4, 4, 32)};
  const auto fo = bhlab::run_second_order_validation(c);
  EXPECT_EQ(fo.aggregates.rows.size(), 2u);
  EXPECT_DOUBLE_EQ(fo.aggregates.number(1, "rate_ratio_to_previous"), 4.0);
}

TEST(Harness, ValidationNamesKey) {
  auto c = small_config(ExperimentKind::variance_scaling);
  c.variant = "bogus";
  try {
    bhlab::run_experiment(c);
    FAIL();
  } catch (const bhlab::ConfigError &e) {
    EXPECT_EQ(e.key(), "variant");
  }
  c = small_config(ExperimentKind::table1);
  c.ladder.clear();
  EXPECT_THROW(bhlab::run_experiment(c), bhlab::ConfigError);
  c = small_config(ExperimentKind::table1);
  c.ladder.push_back(ModelParams(2.0, 1, 1, 4));
  EXPECT_THROW(bhlab::run_experiment(c), bhlab::ConfigError);
}

TEST(Report, EmitWritesFiles) {
  const auto dir = scratch("emit");
  auto c = small_config(ExperimentKind::table1);
  c.keep_records = true;
  const auto r = bhlab::run_table1(c);
  const auto csv = bhlab::emit_report(r, bhlab::ReportFormat::csv, dir);
  ASSERT_EQ(csv.size(), 2u);
  EXPECT_EQ(csv[0].filename(), "table1.csv");
  EXPECT_EQ(csv[1].filename(), "table1_records.csv");
  const auto js = bhlab::emit_report(r, bhlab::ReportFormat::json, dir);
  const auto back = bhlab::load_report(js.at(0));
  EXPECT_TRUE(bhlab::tables_equal(back.aggregates, r.aggregates));
  EXPECT_EQ(slurp(csv[0]), bhlab::to_csv(r.aggregates));
}

TEST(Config, ParsesSectionsAndValues) {
  const auto f = bhlab::parse_config_string(R"(
# comment
top = 1
[table1]
ladder = ["128x8", "64x16"]  # trailing
N = 2048
trials = 50
z = "1+1i"
flag = true
name = 'quoted # not a comment'
[second_order]
u = [0, 1, -2]
)");
  const auto t = f.section("table1");
  EXPECT_EQ(t.get_strings("ladder"), (std::vector<std::string>{"128x8", "64x16"}));
  EXPECT_EQ(t.get_int("N"), 2048);
  EXPECT_EQ(t.get_complex("z"), cplx(1, 1));
  EXPECT_TRUE(t.get_bool("flag"));
  EXPECT_EQ(t.get_string("name"), "quoted # not a comment");
  EXPECT_EQ(f.section("second_order").get_ints("u"), (std::vector<std::int64_t>{0, 1, -2}));
  EXPECT_EQ(f.section("absent").values().size(), 0u);
  EXPECT_EQ(f.section("").get_int("top"), 1);
  try {
    t.get_int("name");
    FAIL();
  } catch (const bhlab::ConfigError &e) {
    EXPECT_EQ(e.key(), "table1.name");
  }
  EXPECT_THROW(t.get_double("missing"), bhlab::ConfigError);
}

TEST(Config, ComplexAndDims) {
  cplx z;
  for (auto [s, v] : std::vector<std::pair<std::string, cplx>>{
           {"1+1i", cplx(1, 1)}, {"-0.5-2j", cplx(-0.5, -2)}, {"3", cplx(3, 0)},
           {"2i", cplx(0, 2)}, {"-i", cplx(0, -1)}, {"1e-3+4.5i", cplx(1e-3, 4.5)}}) {
    ASSERT_TRUE(bhlab::ConfigSection::parse_complex(s, &z)) << s;
    EXPECT_EQ(z, v) << s;
  }
  EXPECT_FALSE(bhlab::ConfigSection::parse_complex("1+", &z));
  EXPECT_FALSE(bhlab::ConfigSection::parse_complex("abc", &z));
  EXPECT_EQ(bhlab::parse_dims("8x16x256", 0, "k"), (std::array<std::int64_t, 3>{8, 16, 256}));
  EXPECT_EQ(bhlab::parse_dims("8x16", 64, "k"), (std::array<std::int64_t, 3>{8, 16, 64}));
  EXPECT_THROW(bhlab::parse_dims("8x16", 0, "k"), bhlab::ConfigError);
  EXPECT_THROW(bhlab::parse_dims("8xx16", 0, "k"), bhlab::ConfigError);
  EXPECT_THROW(bhlab::parse_config_string("[open\n"), bhlab::ConfigError);
  EXPECT_THROW(bhlab::load_config("/nonexistent/cfg.toml"), bhlab::ConfigError);
}

TEST(Cli, MpPrintsJson) {
  const auto r = cli({"mp", "--sigma2", "1", "--c", "0.5", "--z", "1+1i"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = bhlab::json::parse(r.out);
  for (const char *k : {"t", "t_tilde", "residual", "support"})
    EXPECT_TRUE(j.contains(k)) << k;
  const cplx t = bhlab::solve_mp_stieltjes(cplx(1, 1), bhlab::LawParams{1, 0.5}).t;
  EXPECT_EQ(j["t"]["re"].get<double>(), t.real());
  EXPECT_LT(j["residual"].get<double>(), 1e-12);
}

TEST(Cli, ExitCodes) {
  auto r = cli({"mp", "--z", "nonsense"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("'z'"), std::string::npos) << r.err;
  r = cli({"table1", "--ladder", "4x4x0"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("table1.ladder"), std::string::npos) << r.err;
  r = cli({"no-such-command"});
  EXPECT_EQ(r.code, 2);
  r = cli({"det-equiv", "--M", "4", "--L", "4", "--N", "32", "--z", "1+0.01i", "--out-dir",
           scratch("guard").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("solve_det_equiv"), std::string::npos) << r.err;
  r = cli({"--help"});
  EXPECT_EQ(r.code, 0);
}

TEST(Cli, Table1FromConfig) {
  const auto dir = scratch("cli_table1");
  const auto cfg = dir / "table1.toml";
  std::ofstream(cfg) << "[table1]\nN = 64\nladder = [\"8x4\", \"4x8\"]\ntrials = 3\nseed = 5\n";
  auto r = cli({"table1", "--config", cfg.string(), "--out-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(dir / "table1.csv");
  EXPECT_EQ(csv.substr(0, csv.find("\r\n")),
            "M,L,ratio_L_over_M2,mean_lambda1,stderr,reference_edge,trials,seed");
  EXPECT_TRUE(fs::exists(dir / "table1.json"));
  // Flags override the file, and reruns are byte-identical.
  r = cli({"table1", "--config", cfg.string(), "--out-dir", dir.string(), "--trials", "2",
           "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string first = slurp(dir / "table1.csv");
  EXPECT_NE(first, csv);
  r = cli({"table1", "--config", cfg.string(), "--out-dir", dir.string(), "--trials", "2",
           "--format", "csv"});
  EXPECT_EQ(slurp(dir / "table1.csv"), first);
  // Unknown keys are rejected by name.
  std::ofstream(cfg, std::ios::app) << "bogus = 1\n";
  r = cli({"table1", "--config", cfg.string(), "--out-dir", dir.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("table1.bogus"), std::string::npos) << r.err;
}

TEST(Cli, OutputDirFromEnvironment) {
  const auto dir = scratch("cli_env");
  ::setenv(bhlab::kOutputDirEnv, dir.string().c_str(), 1);
  const auto r = cli({"sample-esd", "--ladder", "4x4x32", "--trials", "2", "--bins", "8"});
  ::unsetenv(bhlab::kOutputDirEnv);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "esd.csv"));
  EXPECT_TRUE(fs::exists(dir / "esd_histogram.csv"));
}

TEST(Cli, CheckInvariantsAndDump) {
  auto r = cli({"check-invariants", "--instances", "20"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS toeplitz_ops"), std::string::npos);
  EXPECT_NE(r.out.find("PASS mp_law"), std::string::npos);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);

  const auto dir = scratch("cli_dump");
  const auto path = (dir / "s.bin").string();
  r = cli({"dump-sample", "--M", "2", "--L", "3", "--N", "8", "--seed", "4", "--trial", "1",
           "--output", path});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto back = bhlab::read_sample_dump(path, 1.0);
  EXPECT_EQ(back.sequences(), bhlab::sample(ModelParams(1.0, 2, 3, 8), 4, 1).sequences());
}

TEST(Cli, DetEquivAndSecondOrder) {
  const auto dir = scratch("cli_misc");
  auto r = cli({"det-equiv", "--ladder", "4x4x32", "--out-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = bhlab::json::parse(slurp(dir / "det_equiv_state.json"));
  EXPECT_EQ(j["states"].size(), 1u);
  EXPECT_LT(j["states"][0]["toeplitzified_gap"].get<double>(), 1e-9);
  r = cli({"det-equiv", "--mode", "scaling", "--ladder", "2x4x16", "--ladder", "4x4x32",
           "--trials", "10", "--out-dir", dir.string(), "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "det_equiv_scaling.csv"));
  r = cli({"second-order", "--ladder", "4x4x32", "--trials", "10", "--u", "0", "--u", "1",
           "--u-pairs", "1,-1", "--out-dir", dir.string(), "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  r = cli({"second-order", "--ladder", "4x4x32", "--u", "9", "--out-dir", dir.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("second_order.u"), std::string::npos) << r.err;
  r = cli({"variance-scaling", "--ladder", "2x4x16", "--ladder", "4x4x32", "--trials", "10",
           "--variant", "quadratic_form", "--out-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  r = cli({"edge-location", "--ladder", "4x4x32", "--trials", "3", "--epsilon", "0.3",
           "--out-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
}

} // namespace
