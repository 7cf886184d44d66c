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

/** @file cli.hpp
    @brief Command-line front end.

    Exit status: 0 on success, 2 for configuration errors (the message names
    the key), 1 for runtime failures (the message names the operation).
    Output files go to --out-dir, else $BHLAB_OUTPUT_DIR, else ".".
*/

#pragma once

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bhlab/block_hankel.hpp"
#include "bhlab/config.hpp"
#include "bhlab/det_equiv.hpp"
#include "bhlab/harness.hpp"
#include "bhlab/invariants.hpp"
#include "bhlab/mp_law.hpp"
#include "bhlab/report.hpp"

namespace bhlab {

inline constexpr const char *kOutputDirEnv = "BHLAB_OUTPUT_DIR";

namespace cli_detail {

// Keys accepted in each experiment section.
inline const std::set<std::string> &common_keys() {
  static const std::set<std::string> k{"sigma2", "N", "M", "L", "ladder", "trials",
                                       "seed", "threads", "z", "records"};
  return k;
}

inline void check_keys(const ConfigSection &sec, const std::set<std::string> &extra) {
  for (const auto &[key, value] : sec.values())
    if (!common_keys().count(key) && !extra.count(key))
      throw ConfigError(sec.qualified(key), "unknown key");
}

inline std::vector<ModelParams> ladder_from(const ConfigSection &sec) {
  const double sigma2 = sec.get_double_or("sigma2", 1.0);
  const std::int64_t N = sec.get_int_or("N", 0);
  std::vector<std::array<std::int64_t, 3>> dims;
  if (sec.has("ladder")) {
    for (const auto &s : sec.get_strings("ladder"))
      dims.push_back(parse_dims(s, N, sec.qualified("ladder")));
  } else if (sec.has("M") && sec.has("L") && N > 0) {
    dims.push_back({sec.get_int("M"), sec.get_int("L"), N});
  } else {
    throw ConfigError(sec.qualified("ladder"), "missing (give ladder, or M, L and N)");
  }
  std::vector<ModelParams> out;
  for (const auto &d : dims) {
    try {
      out.emplace_back(sigma2, d[0], d[1], d[2]);
    } catch (const InvalidArgument &e) {
      throw ConfigError(sec.qualified(sigma2 > 0.0 ? "ladder" : "sigma2"), e.what());
    }
  }
  return out;
}

inline std::pair<std::int64_t, std::int64_t> parse_pair(const std::string &s,
                                                        const std::string &key) {
  const auto pos = s.find_first_of(",:");
  std::int64_t a = 0, b = 0;
  if (pos == std::string::npos ||
      !ConfigSection::parse_int(detail::trim(s.substr(0, pos)), &a) ||
      !ConfigSection::parse_int(detail::trim(s.substr(pos + 1)), &b))
    throw ConfigError(key, "expected 'u1,u2', got '" + s + "'");
  return {a, b};
}

inline ExperimentConfig experiment_from_section(ExperimentKind kind, const ConfigSection &sec,
                                                std::int64_t default_trials) {
  std::set<std::string> extra;
  switch (kind) {
  case ExperimentKind::edge_location: extra = {"epsilon"}; break;
  case ExperimentKind::variance_scaling: extra = {"variant"}; break;
  case ExperimentKind::second_order_validation:
    extra = {"mode", "u", "u_pairs", "bias_constant"};
    break;
  case ExperimentKind::det_equiv_scaling: extra = {"mode", "min_imag"}; break;
  case ExperimentKind::esd: extra = {"bins"}; break;
  default: break;
  }
  check_keys(sec, extra);
  ExperimentConfig c;
  c.kind = kind;
  c.ladder = ladder_from(sec);
  c.trials = sec.get_int_or("trials", default_trials);
  c.seed = sec.get_uint_or("seed", 0);
  const std::int64_t th = sec.get_int_or("threads", 0);
  if (th < 0)
    throw ConfigError(sec.qualified("threads"), "must be >= 0");
  c.threads = static_cast<unsigned>(th);
  c.z = sec.get_complex_or("z", cplx(1.0, 1.0));
  c.keep_records = sec.get_bool_or("records", false);
  if (!(c.z.imag() > 0.0))
    throw ConfigError(sec.qualified("z"), "requires Im z > 0");
  if (sec.has("epsilon"))
    c.epsilon = sec.get_double("epsilon");
  if (sec.has("variant"))
    c.variant = sec.get_string("variant");
  if (kind == ExperimentKind::second_order_validation) {
    if (sec.has("mode"))
      c.mode = sec.get_string("mode");
    if (sec.has("u"))
      c.u_values = sec.get_ints("u");
    if (sec.has("u_pairs")) {
      c.u_pairs.clear();
      for (const auto &s : sec.get_strings("u_pairs"))
        c.u_pairs.push_back(parse_pair(s, sec.qualified("u_pairs")));
    }
    c.bias_constant = sec.get_double_or("bias_constant", c.bias_constant);
    for (const auto &p : c.ladder) {
      for (auto u : c.u_values)
        if (std::abs(u) > p.L() - 1)
          throw ConfigError(sec.qualified("u"), "|u| must be <= L-1");
      for (auto [a, b] : c.u_pairs)
        if (std::abs(a) > p.L() - 1 || std::abs(b) > p.L() - 1 || std::abs(a + b) > p.L() - 1)
          throw ConfigError(sec.qualified("u_pairs"), "shifts must be <= L-1 in magnitude");
    }
  }
  try {
    c.validate();
  } catch (const ConfigError &e) {
    throw ConfigError(sec.qualified(e.key()), e.what());
  }
  return c;
}

/// Raw flag values, applied over the config section.
struct Overrides {
  std::optional<std::string> config, out_dir, format, sigma2, N, M, L, trials, seed, z,
      epsilon, variant, mode, bias_constant, min_imag, bins;
  std::vector<std::string> ladder, u, u_pairs;
  bool records = false;

  void apply(ConfigSection &sec) const {
    auto put = [&](const char *key, const std::optional<std::string> &v) {
      if (v)
        sec.set_scalar(key, *v);
    };
    put("sigma2", sigma2);
    put("N", N);
    put("M", M);
    put("L", L);
    put("trials", trials);
    put("seed", seed);
    put("z", z);
    put("epsilon", epsilon);
    put("variant", variant);
    put("mode", mode);
    put("bias_constant", bias_constant);
    put("min_imag", min_imag);
    put("bins", bins);
    if (!ladder.empty()) {
      sec.set("ladder", ConfigValue{ladder, true});
      // An explicit ladder replaces single-setting keys from the file.
    }
    if (!u.empty())
      sec.set("u", ConfigValue{u, true});
    if (!u_pairs.empty())
      sec.set("u_pairs", ConfigValue{u_pairs, true});
    if (records)
      sec.set_scalar("records", "true");
  }
};

inline void add_experiment_options(CLI::App *sub, Overrides &o) {
  sub->add_option("--config", o.config, "Configuration file");
  sub->add_option("--out-dir", o.out_dir, "Output directory");
  sub->add_option("--format", o.format, "csv, json or both (default both)");
  sub->add_option("--sigma2", o.sigma2, "Variance scale");
  sub->add_option("--N", o.N, "Number of columns");
  sub->add_option("--M", o.M, "Number of blocks (single setting)");
  sub->add_option("--L", o.L, "Block height (single setting)");
  sub->add_option("--ladder", o.ladder, "Ladder entries MxLxN (or MxL with --N)");
  sub->add_option("--trials", o.trials, "Trials per ladder entry");
  sub->add_option("--seed", o.seed, "Master seed");
  sub->add_option("--z", o.z, "Complex evaluation point a+bi");
  sub->add_flag("--records", o.records, "Also emit per-trial records");
}

inline std::filesystem::path output_dir(const Overrides &o) {
  if (o.out_dir)
    return *o.out_dir;
  if (const char *env = std::getenv(kOutputDirEnv); env && *env)
    return env;
  return ".";
}

inline ConfigSection load_section(const Overrides &o, const std::string &name) {
  ConfigSection sec(name);
  if (o.config)
    sec = load_config(*o.config).section(name);
  o.apply(sec);
  return sec;
}

inline void emit(const ExperimentReport &rep, const Overrides &o, std::ostream &out) {
  const std::string fmt = o.format.value_or("both");
  if (fmt != "csv" && fmt != "json" && fmt != "both")
    throw ConfigError("format", "expected csv, json or both");
  const auto dir = output_dir(o);
  std::vector<std::filesystem::path> paths;
  if (fmt != "json")
    for (auto &p : emit_report(rep, ReportFormat::csv, dir))
      paths.push_back(p);
  if (fmt != "csv")
    for (auto &p : emit_report(rep, ReportFormat::json, dir))
      paths.push_back(p);
  out << to_csv(rep.aggregates);
  for (const auto &p : paths)
    out << "wrote " << p.string() << "\n";
}

inline json state_json(const DetEquivState &s, cplx t, const ModelParams &p) {
  json R = json::array();
  for (Index i = 0; i < s.R.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < s.R.cols(); ++j)
      row.push_back(complex_json(s.R(i, j)));
    R.push_back(row);
  }
  json tauH = json::array();
  for (auto v : s.tauH.values())
    tauH.push_back(complex_json(v));
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return json{{"M", p.M()},
              {"L", p.L()},
              {"N", p.N()},
              {"sigma2", p.sigma2()},
              {"z", complex_json(s.z)},
              {"mode", s.mode},
              {"iterations", s.iterations},
              {"residual", s.residual},
              {"t", complex_json(t)},
              {"toeplitzified_gap", toeplitzified_gap(s, t)},
              {"h_norm", num(s.h_norm)},
              {"h_bound", std::abs(s.z) / s.z.imag()},
              {"r_norm", num(s.r_norm)},
              {"r_bound", 1.0 / s.z.imag()},
              {"tauH", tauH},
              {"R", R}};
}

} // namespace cli_detail

/// Parses argv and runs one subcommand.
inline int run_cli(int argc, const char *const *argv, std::ostream &out = std::cout,
                   std::ostream &err = std::cerr) {
  using namespace cli_detail;
  CLI::App app{"bhlab: block-Hankel random matrix laboratory"};
  app.require_subcommand(1, 1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = hardware)");

  // mp
  double mp_sigma2 = 1.0, mp_c = 1.0;
  std::string mp_z = "1+1i";
  auto *mp = app.add_subcommand("mp", "Stieltjes transform of the Marcenko-Pastur law");
  mp->add_option("--sigma2", mp_sigma2, "Variance scale");
  mp->add_option("--c", mp_c, "Aspect ratio");
  mp->add_option("--z", mp_z, "Complex point a+bi");

  Overrides esd_o, de_o, t1_o, edge_o, var_o, so_o;
  auto *esd = app.add_subcommand("sample-esd", "ESD versus the Marcenko-Pastur law");
  add_experiment_options(esd, esd_o);
  esd->add_option("--bins", esd_o.bins, "Histogram bins for the first trial");

  auto *de = app.add_subcommand("det-equiv", "Deterministic equivalents R(z), H(z)");
  add_experiment_options(de, de_o);
  de->add_option("--mode", de_o.mode, "self_consistent, from_mean_q or scaling");
  de->add_option("--min-imag", de_o.min_imag, "Smallest admissible Im z");

  auto *t1 = app.add_subcommand("table1", "Mean largest eigenvalue across (M, L)");
  add_experiment_options(t1, t1_o);

  auto *edge = app.add_subcommand("edge-location", "Eigenvalues outside the support");
  add_experiment_options(edge, edge_o);
  edge->add_option("--epsilon", edge_o.epsilon, "Neighbourhood half-width");

  auto *var = app.add_subcommand("variance-scaling", "Variance of resolvent functionals");
  add_experiment_options(var, var_o);
  var->add_option("--variant", var_o.variant, "trace or quadratic_form");

  auto *so = app.add_subcommand("second-order", "Second-order trace formulas");
  add_experiment_options(so, so_o);
  so->add_option("--mode", so_o.mode, "omega or first_order");
  so->add_option("--u", so_o.u, "Shifts u for omega(u, -u)");
  so->add_option("--u-pairs", so_o.u_pairs, "Pairs u1,u2 for omega(u1, u2, -(u1+u2))");
  so->add_option("--bias-constant", so_o.bias_constant, "Allowance constant C");

  auto *inv = app.add_subcommand("check-invariants", "Property suites");
  int inv_instances = 100;
  std::uint64_t inv_seed = 12345;
  inv->add_option("--instances", inv_instances, "Random instances for the Toeplitz suite");
  inv->add_option("--seed", inv_seed, "Seed for the Toeplitz suite");

  auto *dump = app.add_subcommand("dump-sample", "Write one sample's sequences");
  double d_sigma2 = 1.0;
  std::int64_t d_M = 1, d_L = 1, d_N = 1;
  std::uint64_t d_seed = 0, d_trial = 0;
  std::string d_out;
  dump->add_option("--sigma2", d_sigma2, "Variance scale");
  dump->add_option("--M", d_M, "Number of blocks")->required();
  dump->add_option("--L", d_L, "Block height")->required();
  dump->add_option("--N", d_N, "Number of columns")->required();
  dump->add_option("--seed", d_seed, "Seed");
  dump->add_option("--trial", d_trial, "Trial index");
  dump->add_option("--output", d_out, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError &e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    auto with_threads = [&](ConfigSection sec) {
      if (threads > 0 && !sec.has("threads"))
        sec.set_scalar("threads", std::to_string(threads));
      return sec;
    };

    if (mp->parsed()) {
      cplx z;
      if (!ConfigSection::parse_complex(mp_z, &z))
        throw ConfigError("z", "expected a complex number a+bi, got '" + mp_z + "'");
      LawParams law;
      try {
        law = LawParams::make(mp_sigma2, mp_c);
      } catch (const InvalidArgument &e) {
        throw ConfigError(mp_sigma2 > 0.0 ? "c" : "sigma2", e.what());
      }
      const StieltjesPair sp = solve_mp_stieltjes(z, law);
      const MPSupport sup = mp_support(law);
      json j{{"z", complex_json(z)},
             {"sigma2", law.sigma2},
             {"c", law.c},
             {"t", complex_json(sp.t)},
             {"t_tilde", complex_json(sp.t_tilde)},
             {"residual", sp.residual},
             {"support",
              {{"lower", sup.lower},
               {"upper", sup.upper},
               {"has_atom_at_zero", sup.has_atom_at_zero},
               {"atom_mass", sup.atom_mass(law.c)}}}};
      if (z.imag() > 0.0)
        j["zttt_gap"] = zttt_bound_gap(z, law);
      out << j.dump(2) << "\n";
      return 0;
    }

    if (esd->parsed()) {
      const ConfigSection sec = with_threads(load_section(esd_o, "esd"));
      const ExperimentConfig c = experiment_from_section(ExperimentKind::esd, sec, 10);
      const ExperimentReport rep = run_esd(c);
      emit(rep, esd_o, out);
      // Histogram of the first trial of the first entry, for plotting.
      const std::int64_t bins = sec.get_int_or("bins", 50);
      if (bins < 1)
        throw ConfigError(sec.qualified("bins"), "must be >= 1");
      const ModelParams &p = c.ladder.front();
      const auto r = eigen(HankelEnsembleSample::draw(p, derive_seed(c.seed, 0), 0));
      const MPSupport sup = mp_support(p.law());
      const double lo = 0.0, hi = std::max(sup.upper, r.max()) * 1.05;
      Table h{{"bin_lower", "bin_upper", "empirical_density", "mp_density"}, {}};
      std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
      const double w = (hi - lo) / static_cast<double>(bins);
      for (Index i = 0; i < r.eigenvalues.size(); ++i) {
        auto b = static_cast<std::int64_t>((r.eigenvalues(i) - lo) / w);
        b = std::clamp<std::int64_t>(b, 0, bins - 1);
        ++counts[static_cast<std::size_t>(b)];
      }
      for (std::int64_t b = 0; b < bins; ++b) {
        const double a = lo + w * static_cast<double>(b);
        h.add_row({a, a + w,
                   static_cast<double>(counts[static_cast<std::size_t>(b)]) /
                       (static_cast<double>(r.size()) * w),
                   mp_density(a + 0.5 * w, p.law())});
      }
      const auto path = output_dir(esd_o) / "esd_histogram.csv";
      write_text_file(path, to_csv(h));
      out << "wrote " << path.string() << "\n";
      return 0;
    }

    if (de->parsed()) {
      const ConfigSection sec = with_threads(load_section(de_o, "det_equiv"));
      const std::string mode = sec.get_string_or("mode", "self_consistent");
      if (mode != "self_consistent" && mode != "from_mean_q" && mode != "scaling")
        throw ConfigError(sec.qualified("mode"),
                          "expected self_consistent, from_mean_q or scaling");
      const ExperimentConfig c = experiment_from_section(
          ExperimentKind::det_equiv_scaling, sec, mode == "self_consistent" ? 1 : 100);
      DetEquivOptions opt;
      opt.min_imag = sec.get_double_or("min_imag", opt.min_imag);
      if (mode == "scaling") {
        emit(run_det_equiv_scaling(c, opt), de_o, out);
        return 0;
      }
      json states = json::array();
      for (std::size_t k = 0; k < c.ladder.size(); ++k) {
        const ModelParams &p = c.ladder[k];
        const cplx t = solve_mp_stieltjes(c.z, p).t;
        DetEquivState s;
        if (mode == "self_consistent") {
          s = solve_det_equiv(p, c.z, SelfConsistent{}, opt);
        } else {
          if (c.trials < 10)
            throw ConfigError(sec.qualified("trials"), "from_mean_q needs >= 10 trials");
          s = estimate_mean_resolvent(p, c.z, c.trials, derive_seed(c.seed, k), c.threads, opt)
                  .state;
        }
        states.push_back(state_json(s, t, p));
      }
      json j{{"config", config_to_json(c)}, {"states", states}};
      j["config"]["mode"] = mode;
      const auto dir = output_dir(de_o);
      std::filesystem::create_directories(dir);
      const auto path = dir / "det_equiv_state.json";
      write_text_file(path, j.dump(2) + "\n");
      out << j.dump(2) << "\nwrote " << path.string() << "\n";
      return 0;
    }

    struct Simple {
      CLI::App *sub;
      Overrides *o;
      const char *section;
      ExperimentKind kind;
      std::int64_t default_trials;
    };
    for (const Simple &s : {Simple{t1, &t1_o, "table1", ExperimentKind::table1, 50},
                            Simple{edge, &edge_o, "edge_location", ExperimentKind::edge_location, 50},
                            Simple{var, &var_o, "variance_scaling", ExperimentKind::variance_scaling, 200},
                            Simple{so, &so_o, "second_order", ExperimentKind::second_order_validation, 200}}) {
      if (!s.sub->parsed())
        continue;
      const ConfigSection sec = with_threads(load_section(*s.o, s.section));
      const ExperimentConfig c = experiment_from_section(s.kind, sec, s.default_trials);
      emit(run_experiment(c), *s.o, out);
      return 0;
    }

    if (inv->parsed()) {
      bool all = true;
      auto print = [&](const std::vector<InvariantResult> &rs) {
        for (const auto &r : rs) {
          out << (r.passed ? "PASS " : "FAIL ") << r.suite << ": " << r.name << " ("
              << r.detail << ")\n";
          all = all && r.passed;
        }
      };
      print(mp_law_invariants());
      print(toeplitz_invariants(inv_instances, inv_seed));
      return all ? 0 : 1;
    }

    if (dump->parsed()) {
      ModelParams p;
      try {
        p = ModelParams(d_sigma2, d_M, d_L, d_N);
      } catch (const InvalidArgument &e) {
        throw ConfigError(d_sigma2 > 0.0 ? "M/L/N" : "sigma2", e.what());
      }
      const auto smp = sample(p, d_seed, d_trial);
      write_sample_dump(d_out, smp);
      out << json{{"path", d_out},     {"M", p.M()},        {"L", p.L()},
                  {"N", p.N()},        {"seed", d_seed},    {"trial_index", d_trial},
                  {"bytes", 40 + 16 * smp.sequences().size()}}
                 .dump(2)
          << "\n";
      return 0;
    }
  } catch (const ConfigError &e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error &e) {
    err << "error in " << e.operation() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

} // namespace bhlab
