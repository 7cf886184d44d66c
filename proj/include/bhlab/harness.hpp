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

/** @file harness.hpp
    @brief Reproducible Monte Carlo experiment drivers.

    Ladder entry k draws its trials from seed derive_seed(master, k), trial
    indices 0..trials-1. Per-trial records are produced in parallel but
    stored by trial index and reduced with pairwise sums in that order.
*/

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bhlab/block_hankel.hpp"
#include "bhlab/det_equiv.hpp"
#include "bhlab/mp_law.hpp"
#include "bhlab/parallel.hpp"
#include "bhlab/report.hpp"
#include "bhlab/second_order.hpp"
#include "bhlab/spectral.hpp"
#include "bhlab/stats.hpp"
#include "bhlab/toeplitz.hpp"

namespace bhlab {

enum class ExperimentKind {
  table1,
  esd,
  edge_location,
  variance_scaling,
  det_equiv_scaling,
  second_order_validation
};

inline std::string to_string(ExperimentKind k) {
  switch (k) {
  case ExperimentKind::table1: return "table1";
  case ExperimentKind::esd: return "esd";
  case ExperimentKind::edge_location: return "edge_location";
  case ExperimentKind::variance_scaling: return "variance_scaling";
  case ExperimentKind::det_equiv_scaling: return "det_equiv_scaling";
  case ExperimentKind::second_order_validation: return "second_order_validation";
  }
  return "unknown";
}

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::table1;
  std::vector<ModelParams> ladder;
  std::int64_t trials = 1;
  std::uint64_t seed = 0;
  cplx z{1.0, 1.0};
  unsigned threads = 0;
  bool keep_records = false;

  /// edge_location: half-width of the neighbourhood of the support.
  double epsilon = 0.3;
  /// variance_scaling: "trace" or "quadratic_form".
  std::string variant = "trace";
  /// second_order_validation: "omega" or "first_order".
  std::string mode = "omega";
  std::vector<std::int64_t> u_values{0, 1, 2};
  std::vector<std::pair<std::int64_t, std::int64_t>> u_pairs{{0, 0}, {1, -1}, {1, 2}};
  /// Additive allowance constant C in 3 SE + C L/(MN).
  double bias_constant = 10.0;

  void validate() const {
    if (trials < 1)
      throw ConfigError("trials", "must be >= 1");
    if (ladder.empty())
      throw ConfigError("ladder", "needs at least one entry");
    for (const auto &p : ladder)
      if (p.sigma2() != ladder.front().sigma2())
        throw ConfigError("ladder", "all entries must share sigma2");
    if (kind == ExperimentKind::edge_location && !(epsilon > 0.0))
      throw ConfigError("epsilon", "must be positive");
    if (kind == ExperimentKind::variance_scaling && variant != "trace" &&
        variant != "quadratic_form")
      throw ConfigError("variant", "expected 'trace' or 'quadratic_form'");
    if (kind == ExperimentKind::second_order_validation && mode != "omega" &&
        mode != "first_order")
      throw ConfigError("mode", "expected 'omega' or 'first_order'");
  }
};

inline json complex_json(cplx v) { return json{{"re", v.real()}, {"im", v.imag()}}; }

inline json config_to_json(const ExperimentConfig &c) {
  json ladder = json::array();
  for (const auto &p : c.ladder)
    ladder.push_back({{"M", p.M()}, {"L", p.L()}, {"N", p.N()}});
  json j{{"experiment", to_string(c.kind)},
         {"sigma2", c.ladder.empty() ? 1.0 : c.ladder.front().sigma2()},
         {"ladder", ladder},
         {"trials", c.trials},
         {"seed", c.seed},
         {"z", complex_json(c.z)},
         {"threads", c.threads},
         {"records", c.keep_records}};
  switch (c.kind) {
  case ExperimentKind::edge_location:
    j["epsilon"] = c.epsilon;
    break;
  case ExperimentKind::variance_scaling:
    j["variant"] = c.variant;
    break;
  case ExperimentKind::second_order_validation: {
    j["mode"] = c.mode;
    j["u"] = c.u_values;
    json pairs = json::array();
    for (auto [a, b] : c.u_pairs)
      pairs.push_back(json::array({a, b}));
    j["u_pairs"] = pairs;
    j["bias_constant"] = c.bias_constant;
    break;
  }
  default:
    break;
  }
  return j;
}

namespace detail {

class Stopwatch {
public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

private:
  std::chrono::steady_clock::time_point start_;
};

inline ExperimentReport start_report(const ExperimentConfig &c) {
  c.validate();
  ExperimentReport r;
  r.experiment = to_string(c.kind);
  r.config = config_to_json(c);
  r.provenance.seed = c.seed;
  r.provenance.threads = resolve_threads(c.threads);
  return r;
}

inline std::vector<double> real_parts(const std::vector<cplx> &v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (auto x : v)
    out.push_back(x.real());
  return out;
}

} // namespace detail

/// Largest eigenvalue per trial; one row per (M, L).
inline ExperimentReport run_table1(const ExperimentConfig &cfg) {
  detail::Stopwatch sw;
  ExperimentReport rep = detail::start_report(cfg);
  rep.aggregates.columns = {"M", "L", "ratio_L_over_M2", "mean_lambda1", "stderr",
                            "reference_edge", "trials", "seed"};
  Table rec{{"entry", "trial", "lambda1"}, {}};
  for (std::size_t k = 0; k < cfg.ladder.size(); ++k) {
    const ModelParams &p = cfg.ladder[k];
    const std::uint64_t s = derive_seed(cfg.seed, k);
    auto lam = map_trials(cfg.trials, cfg.threads, [&](std::int64_t t) {
      return eigen(HankelEnsembleSample::draw(p, s, static_cast<std::uint64_t>(t))).max();
    });
    const double ratio = static_cast<double>(p.L()) /
                         (static_cast<double>(p.M()) * static_cast<double>(p.M()));
    rep.aggregates.add_row({p.M(), p.L(), ratio, mean(lam), standard_error(lam),
                            mp_support(p.law()).upper, cfg.trials, Cell{s}});
    for (std::size_t t = 0; t < lam.size(); ++t)
      rec.add_row({static_cast<std::int64_t>(k), static_cast<std::int64_t>(t), lam[t]});
  }
  if (cfg.keep_records)
    rep.records = std::move(rec);
  rep.provenance.wall_time_seconds = sw.seconds();
  return rep;
}

/// Kolmogorov-Smirnov distance of each trial's ESD to the MP law.
inline ExperimentReport run_esd(const ExperimentConfig &cfg) {
  detail::Stopwatch sw;
  ExperimentReport rep = detail::start_report(cfg);
  rep.aggregates.columns = {"M", "L", "N", "c", "trials", "mean_ks", "stderr_ks",
                            "max_ks", "seed"};
  Table rec{{"entry", "trial", "ks", "lambda_min", "lambda_max"}, {}};
  for (std::size_t k = 0; k < cfg.ladder.size(); ++k) {
    const ModelParams &p = cfg.ladder[k];
    const std::uint64_t s = derive_seed(cfg.seed, k);
    auto res = map_trials(cfg.trials, cfg.threads, [&](std::int64_t t) {
      const auto r = eigen(HankelEnsembleSample::draw(p, s, static_cast<std::uint64_t>(t)));
      return std::array<double, 3>{esd_ks_distance(r), r.min(), r.max()};
    });
    std::vector<double> ks;
    for (const auto &a : res)
      ks.push_back(a[0]);
    double mx = 0.0;
    for (double v : ks)
      mx = std::max(mx, v);
    rep.aggregates.add_row({p.M(), p.L(), p.N(), p.c(), cfg.trials, mean(ks),
                            standard_error(ks), mx, Cell{s}});
    for (std::size_t t = 0; t < res.size(); ++t)
      rec.add_row({static_cast<std::int64_t>(k), static_cast<std::int64_t>(t),
                   res[t][0], res[t][1], res[t][2]});
  }
  if (cfg.keep_records)
    rep.records = std::move(rec);
  rep.provenance.wall_time_seconds = sw.seconds();
  return rep;
}

/// Threshold below which an eigenvalue is a structural zero.
inline double structural_zero_threshold(const LawParams &law) {
  return 1e-8 * mp_support(law).upper;
}

/// Eigenvalues outside [lower - eps, upper + eps], structural zeros
/// excluded when c > 1.
inline ExperimentReport run_edge_location(const ExperimentConfig &cfg) {
  detail::Stopwatch sw;
  ExperimentReport rep = detail::start_report(cfg);
  rep.aggregates.columns = {"M", "L", "N", "c", "epsilon", "lower", "upper", "trials",
                            "trials_with_outliers", "outlier_fraction", "mean_outliers",
                            "expected_zeros", "min_zeros", "max_zeros",
                            "zero_multiplicity_ok", "seed"};
  Table rec{{"entry", "trial", "outliers", "zeros", "lambda_max"}, {}};
  for (std::size_t k = 0; k < cfg.ladder.size(); ++k) {
    const ModelParams &p = cfg.ladder[k];
    const std::uint64_t s = derive_seed(cfg.seed, k);
    const MPSupport sup = mp_support(p.law());
    const bool zeros_expected = p.c() > 1.0;
    const double zt = structural_zero_threshold(p.law());
    const std::int64_t expected_zeros = std::max<std::int64_t>(0, p.rows() - p.N());
    auto res = map_trials(cfg.trials, cfg.threads, [&](std::int64_t t) {
      const auto r = eigen(HankelEnsembleSample::draw(p, s, static_cast<std::uint64_t>(t)));
      std::int64_t zeros = 0, out = 0;
      for (Index i = 0; i < r.eigenvalues.size(); ++i) {
        const double l = r.eigenvalues(i);
        if (zeros_expected && std::abs(l) <= zt) {
          ++zeros;
          continue;
        }
        if (l < sup.lower - cfg.epsilon || l > sup.upper + cfg.epsilon)
          ++out;
      }
      if (!zeros_expected)
        zeros = count_near_zero(r.eigenvalues, zt);
      return std::array<double, 3>{static_cast<double>(out), static_cast<double>(zeros),
                                   r.max()};
    });
    std::int64_t with_out = 0, zmin = p.rows(), zmax = 0;
    std::vector<double> counts;
    for (const auto &a : res) {
      counts.push_back(a[0]);
      with_out += a[0] > 0 ? 1 : 0;
      zmin = std::min<std::int64_t>(zmin, static_cast<std::int64_t>(a[1]));
      zmax = std::max<std::int64_t>(zmax, static_cast<std::int64_t>(a[1]));
    }
    const bool ok = zmin == expected_zeros && zmax == expected_zeros;
    rep.aggregates.add_row({p.M(), p.L(), p.N(), p.c(), cfg.epsilon, sup.lower, sup.upper,
                            cfg.trials, with_out,
                            static_cast<double>(with_out) / static_cast<double>(cfg.trials),
                            mean(counts), expected_zeros, zmin, zmax,
                            std::int64_t{ok ? 1 : 0}, Cell{s}});
    for (std::size_t t = 0; t < res.size(); ++t)
      rec.add_row({static_cast<std::int64_t>(k), static_cast<std::int64_t>(t),
                   static_cast<std::int64_t>(res[t][0]), static_cast<std::int64_t>(res[t][1]),
                   res[t][2]});
  }
  if (cfg.keep_records)
    rep.records = std::move(rec);
  rep.provenance.wall_time_seconds = sw.seconds();
  return rep;
}

/// Unit probe vectors for quadratic forms b1^* Qhat b2.
inline std::pair<VectorXc, VectorXc> quadratic_form_probes(std::int64_t L) {
  return {fourier_vector(L, 0.0), fourier_vector(L, 0.25)};
}

/// Var[(1/ML) Tr Q(z)] (variant "trace") or Var[b1^* Qhat b2] with
/// Qhat = (1/M) sum_m Q^{m,m} (variant "quadratic_form").
inline ExperimentReport run_variance_scaling(const ExperimentConfig &cfg) {
  detail::Stopwatch sw;
  ExperimentReport rep = detail::start_report(cfg);
  require_upper_half_plane(cfg.z, "run_variance_scaling");
  const bool quad = cfg.variant == "quadratic_form";
  rep.aggregates.columns = {"M", "L", "N", "variant", "trials", "mean_re", "mean_im",
                            "variance", "variance_se", "rate", "ratio_to_previous",
                            "rate_ratio_to_previous", "seed"};
  Table rec{{"entry", "trial", "value_re", "value_im"}, {}};
  double prev_var = std::nan(""), prev_rate = std::nan("");
  for (std::size_t k = 0; k < cfg.ladder.size(); ++k) {
    const ModelParams &p = cfg.ladder[k];
    const std::uint64_t s = derive_seed(cfg.seed, k);
    const auto probes = quadratic_form_probes(p.L());
    auto vals = map_trials(cfg.trials, cfg.threads, [&](std::int64_t t) -> cplx {
      const auto smp = HankelEnsembleSample::draw(p, s, static_cast<std::uint64_t>(t));
      if (!quad)
        return stieltjes_of_spectrum(eigen(smp).eigenvalues, cfg.z);
      const MatrixXc Q = resolvent_of_gram(smp.gram(), cfg.z);
      const MatrixXc hat = block_average(Q, p.L());
      return probes.first.dot(hat * probes.second);
    });
    const double var = sample_variance(vals);
    const double rate = quad ? static_cast<double>(p.L()) / static_cast<double>(p.M() * p.N())
                             : 1.0 / static_cast<double>(p.M() * p.N());
    const cplx m = mean(vals);
    rep.aggregates.add_row({p.M(), p.L(), p.N(), cfg.variant, cfg.trials, m.real(), m.imag(),
                            var, variance_jackknife_se(vals), rate, prev_var / var,
                            prev_rate / rate, Cell{s}});
    prev_var = var;
    prev_rate = rate;
    for (std::size_t t = 0; t < vals.size(); ++t)
      rec.add_row({static_cast<std::int64_t>(k), static_cast<std::int64_t>(t),
                   vals[t].real(), vals[t].imag()});
  }
  if (cfg.keep_records)
    rep.records = std::move(rec);
  rep.provenance.wall_time_seconds = sw.seconds();
  return rep;
}

/// Toeplitzified gap sup_nu |a^*(R - tI)a| with R from the Monte Carlo
/// E(Q), against the L^{3/2}/(MN) rate, plus the Delta diagnostics and the
/// distance to the self-consistent solution.
inline ExperimentReport run_det_equiv_scaling(const ExperimentConfig &cfg,
                                              const DetEquivOptions &opt = {}) {
  detail::Stopwatch sw;
  ExperimentReport rep = detail::start_report(cfg);
  if (cfg.trials < 10)
    throw ConfigError("trials", "det_equiv_scaling needs >= 10 trials");
  rep.aggregates.columns = {"M", "L", "N", "trials", "gap", "rate", "ratio_to_previous",
                            "rate_ratio_to_previous", "trace_delta", "quad_form_delta",
                            "self_consistent_gap", "h_norm", "h_bound", "r_norm",
                            "r_bound", "seed"};
  double prev_gap = std::nan(""), prev_rate = std::nan("");
  for (std::size_t k = 0; k < cfg.ladder.size(); ++k) {
    const ModelParams &p = cfg.ladder[k];
    const std::uint64_t s = derive_seed(cfg.seed, k);
    const MeanResolventResult mr =
        estimate_mean_resolvent(p, cfg.z, cfg.trials, s, cfg.threads, opt);
    const cplx t = solve_mp_stieltjes(cfg.z, p).t;
    const double gap = toeplitzified_gap(mr.state, t);
    DetEquivOptions sc_opt = opt;
    sc_opt.compute_norms = false;
    const DetEquivState sc = solve_det_equiv(p, cfg.z, SelfConsistent{}, sc_opt);
    const double Ld = static_cast<double>(p.L());
    const double rate = Ld * std::sqrt(Ld) / static_cast<double>(p.M() * p.N());
    const auto probes = quadratic_form_probes(p.L());
    const double qf = std::abs(probes.first.dot(mr.estimate.hat_delta * probes.second));
    const double trd = std::abs(mr.estimate.delta.trace()) / static_cast<double>(p.rows());
    rep.aggregates.add_row({p.M(), p.L(), p.N(), cfg.trials, gap, rate, prev_gap / gap,
                            prev_rate / rate, trd, qf, (sc.R - mr.state.R).norm(),
                            mr.state.h_norm, std::abs(cfg.z) / cfg.z.imag(), mr.state.r_norm,
                            1.0 / cfg.z.imag(), Cell{s}});
    prev_gap = gap;
    prev_rate = rate;
  }
  rep.provenance.wall_time_seconds = sw.seconds();
  return rep;
}

/// Mode "omega": Monte Carlo mixed traces against omegabar. Mode
/// "first_order": |E (1/ML) Tr Q - t| across the ladder.
inline ExperimentReport run_second_order_validation(const ExperimentConfig &cfg) {
  detail::Stopwatch sw;
  ExperimentReport rep = detail::start_report(cfg);
  if (cfg.mode == "first_order") {
    if (cfg.ladder.size() < 2)
      throw ConfigError("ladder", "first_order mode needs >= 2 entries");
    rep.aggregates.columns = {"M", "L", "N", "trials", "mean_re", "mean_im", "t_re",
                              "t_im", "gap", "stderr", "rate", "ratio_to_previous",
                              "rate_ratio_to_previous", "seed"};
    const auto rows = first_order_gap(cfg.ladder, cfg.z, cfg.trials, cfg.seed, cfg.threads);
    double prev_gap = std::nan(""), prev_rate = std::nan("");
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto &r = rows[k];
      rep.aggregates.add_row({r.params.M(), r.params.L(), r.params.N(), cfg.trials,
                              r.mean_trace.real(), r.mean_trace.imag(), r.t.real(),
                              r.t.imag(), r.gap, r.standard_error, r.rate,
                              prev_gap / r.gap, prev_rate / r.rate,
                              Cell{derive_seed(cfg.seed, k)}});
      prev_gap = r.gap;
      prev_rate = r.rate;
    }
    rep.provenance.wall_time_seconds = sw.seconds();
    return rep;
  }

  rep.aggregates.columns = {"M", "L", "N", "kind", "u1", "u2", "estimate_re",
                            "estimate_im", "formula_re", "formula_im", "abs_diff",
                            "stderr", "allowance", "pass", "seed"};
  Table rec{{"entry", "trial", "kind", "u1", "u2", "value_re", "value_im"}, {}};
  for (std::size_t k = 0; k < cfg.ladder.size(); ++k) {
    const ModelParams &p = cfg.ladder[k];
    const std::uint64_t s = derive_seed(cfg.seed, k);
    const SecondOrderContext ctx = SecondOrderContext::make(p, cfg.z);
    std::vector<std::vector<std::int64_t>> tuples;
    std::vector<cplx> formulas;
    std::vector<std::string> kinds;
    std::vector<std::pair<std::int64_t, std::int64_t>> us;
    for (auto u : cfg.u_values) {
      tuples.push_back({u, -u});
      formulas.push_back(omega_bar(ctx, u));
      kinds.emplace_back("omega2");
      us.emplace_back(u, -u);
    }
    for (auto [a, b] : cfg.u_pairs) {
      tuples.push_back({a, b, -(a + b)});
      formulas.push_back(omega_bar3(ctx, a, b));
      kinds.emplace_back("omega3");
      us.emplace_back(a, b);
    }
    const auto est = estimate_mixed_traces(p, cfg.z, tuples, cfg.trials, s, cfg.threads);
    const double bias = cfg.bias_constant * static_cast<double>(p.L()) /
                        static_cast<double>(p.M() * p.N());
    for (std::size_t i = 0; i < est.size(); ++i) {
      const double diff = std::abs(est[i].mean - formulas[i]);
      const double allow = 3.0 * est[i].standard_error + bias;
      rep.aggregates.add_row({p.M(), p.L(), p.N(), kinds[i], us[i].first, us[i].second,
                              est[i].mean.real(), est[i].mean.imag(), formulas[i].real(),
                              formulas[i].imag(), diff, est[i].standard_error, allow,
                              std::int64_t{diff < allow ? 1 : 0}, Cell{s}});
      for (std::size_t t = 0; t < est[i].records.size(); ++t)
        rec.add_row({static_cast<std::int64_t>(k), static_cast<std::int64_t>(t), kinds[i],
                     us[i].first, us[i].second, est[i].records[t].real(),
                     est[i].records[t].imag()});
    }
  }
  if (cfg.keep_records)
    rep.records = std::move(rec);
  rep.provenance.wall_time_seconds = sw.seconds();
  return rep;
}

inline ExperimentReport run_experiment(const ExperimentConfig &cfg) {
  switch (cfg.kind) {
  case ExperimentKind::table1: return run_table1(cfg);
  case ExperimentKind::esd: return run_esd(cfg);
  case ExperimentKind::edge_location: return run_edge_location(cfg);
  case ExperimentKind::variance_scaling: return run_variance_scaling(cfg);
  case ExperimentKind::det_equiv_scaling: return run_det_equiv_scaling(cfg);
  case ExperimentKind::second_order_validation: return run_second_order_validation(cfg);
  }
  throw InvalidArgument("run_experiment", "unknown experiment kind");
}

} // namespace bhlab
