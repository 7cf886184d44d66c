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

/** @file second_order.hpp
    @brief Second-order trace formulas and their Monte Carlo counterparts.

    With Q the resolvent of W W^* and S_u = I_M (x) J_L^u,

        omega(u1, u2)     = (1/ML) Tr(Q S_u1 Q S_u2),
        omega(u1, u2, u3) = (1/ML) Tr(Q S_u1 Q S_u2 Q S_u3),

    and E omega(u, -u) ~ omegabar(u), E omega(u1, u2, -(u1+u2)) ~
    omegabar(u1, u2), both up to O(L/MN).
*/

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "bhlab/block_hankel.hpp"
#include "bhlab/mp_law.hpp"
#include "bhlab/parallel.hpp"
#include "bhlab/spectral.hpp"
#include "bhlab/stats.hpp"

namespace bhlab {

/// (1/K) Tr(J^{a_1} J^{a_2} ... J^{a_r}) with J^{-a} = (J^*)^a, by counting
/// the basis vectors that survive every shift.
inline double shift_product_trace(std::int64_t K,
                                  const std::vector<std::int64_t> &powers) {
  if (K < 1)
    throw InvalidArgument("shift_product_trace", "K must be >= 1");
  // J^a sends e_j to e_{j-a}; apply the rightmost factor first.
  std::int64_t s = 0, lo = 0, hi = 0;
  for (auto it = powers.rbegin(); it != powers.rend(); ++it) {
    s += *it;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  if (s != 0)
    return 0.0;
  return static_cast<double>(std::max<std::int64_t>(0, K - (hi - lo))) /
         static_cast<double>(K);
}

/// (1/K) Tr(J_K^{u1} J_K^{u2} J_K^{*(u1+u2)}).
inline double shift_triple_trace(std::int64_t K, std::int64_t u1, std::int64_t u2) {
  return shift_product_trace(K, {u1, u2, -(u1 + u2)});
}

struct SecondOrderContext {
  ModelParams params;
  cplx z;
  cplx t;
  cplx t_tilde;
  /// d(l, z) for l = -(L-1)..L-1.
  std::vector<cplx> dz_profile;

  static SecondOrderContext make(const ModelParams &p, cplx z) {
    if (!(z.imag() > 0.0))
      throw DomainError("SecondOrderContext", "requires Im z > 0");
    const StieltjesPair sp = solve_mp_stieltjes(z, p);
    SecondOrderContext ctx{p, z, sp.t, sp.t_tilde, {}};
    for (std::int64_t l = -(p.L() - 1); l <= p.L() - 1; ++l)
      ctx.dz_profile.push_back(ctx.d(l));
    return ctx;
  }

  cplx ztt() const { return z * t * t_tilde; }

  /// sigma2^2 c (z t t~)^2 (1 - |l|/L)_+ (1 - |l|/N)_+, for any integer l.
  cplx d(std::int64_t l) const {
    const double al = static_cast<double>(std::abs(l));
    const double fl = std::max(0.0, 1.0 - al / static_cast<double>(params.L()));
    const double fn = std::max(0.0, 1.0 - al / static_cast<double>(params.N()));
    const double s2 = params.sigma2();
    return s2 * s2 * params.c() * ztt() * ztt() * fl * fn;
  }
};

inline cplx omega_bar(const SecondOrderContext &ctx, std::int64_t u) {
  if (std::abs(u) > ctx.params.L() - 1)
    throw InvalidArgument("omega_bar", "|u| must be <= L-1");
  const double fl = 1.0 - std::abs(static_cast<double>(u)) / static_cast<double>(ctx.params.L());
  return fl * ctx.t * ctx.t / (1.0 - ctx.d(u));
}

inline cplx omega_bar3(const SecondOrderContext &ctx, std::int64_t u1,
                       std::int64_t u2) {
  const std::int64_t L = ctx.params.L(), N = ctx.params.N();
  if (std::abs(u1) > L - 1 || std::abs(u2) > L - 1)
    throw InvalidArgument("omega_bar3", "|u1|, |u2| must be <= L-1");
  const double Ld = static_cast<double>(L);
  const double f1 = 1.0 - std::abs(static_cast<double>(u1)) / Ld;
  const double f2 = 1.0 - std::abs(static_cast<double>(u2)) / Ld;
  const double f12 = std::max(0.0, 1.0 - std::abs(static_cast<double>(u1 + u2)) / Ld);
  const double s2 = ctx.params.sigma2(), c = ctx.params.c();
  const cplx w = ctx.ztt();
  const cplx num =
      shift_product_trace(L, {u2, u1, -(u1 + u2)}) +
      s2 * s2 * s2 * c * c * w * w * w * f1 * f2 * f12 *
          shift_product_trace(N, {u1, u2, -(u1 + u2)});
  const cplx den = (1.0 - ctx.d(u1)) * (1.0 - ctx.d(u2)) * (1.0 - ctx.d(u1 + u2));
  return ctx.t * ctx.t * ctx.t * num / den;
}

/// t'(z) = t^2 / (1 - sigma2^2 c (z t t~)^2), from implicit differentiation.
inline cplx mp_stieltjes_derivative(const SecondOrderContext &ctx) {
  return ctx.t * ctx.t / (1.0 - ctx.d(0));
}

/// Q (I_M (x) J_L^u): column j of each block takes column j - u of Q.
inline MatrixXc right_shift(const MatrixXc &Q, std::int64_t M, std::int64_t L,
                            std::int64_t u) {
  MatrixXc out = MatrixXc::Zero(Q.rows(), Q.cols());
  for (std::int64_t m = 0; m < M; ++m)
    for (std::int64_t j = 0; j < L; ++j) {
      const std::int64_t src = j - u;
      if (src >= 0 && src < L)
        out.col(m * L + j) = Q.col(m * L + src);
    }
  return out;
}

/// (1/ML) Tr(Q S_{u_1} Q S_{u_2} ... Q S_{u_r}).
inline cplx mixed_trace(const MatrixXc &Q, std::int64_t M, std::int64_t L,
                        const std::vector<std::int64_t> &shifts) {
  if (shifts.empty())
    throw InvalidArgument("mixed_trace", "need at least one shift");
  MatrixXc acc = right_shift(Q, M, L, shifts[0]);
  for (std::size_t r = 1; r + 1 < shifts.size(); ++r)
    acc = acc * right_shift(Q, M, L, shifts[r]);
  cplx tr;
  if (shifts.size() == 1) {
    tr = acc.trace();
  } else {
    const MatrixXc last = right_shift(Q, M, L, shifts.back());
    // Tr(A B) = sum_ij A_ij B_ji.
    tr = (acc.array() * last.transpose().array()).sum();
  }
  return tr / static_cast<double>(M * L);
}

struct MixedTraceEstimate {
  std::vector<std::int64_t> shifts;
  cplx mean;
  /// Standard error of the complex mean (sqrt(E|x - mean|^2 / n)).
  double standard_error = 0.0;
  std::vector<cplx> records;
};

/// Monte Carlo E omega(shifts) over trials 0..trials-1, one full resolvent
/// per trial shared by all shift tuples.
inline std::vector<MixedTraceEstimate>
estimate_mixed_traces(const ModelParams &p, cplx z,
                      const std::vector<std::vector<std::int64_t>> &tuples,
                      std::int64_t trials, std::uint64_t seed, unsigned threads = 0,
                      const SpectralOptions &sopt = {}) {
  require_upper_half_plane(z, "estimate_mixed_traces");
  detail::check_size_guard(p.rows(), sopt, "estimate_mixed_traces");
  for (const auto &tp : tuples)
    for (auto u : tp)
      if (std::abs(u) > p.L() - 1)
        throw InvalidArgument("estimate_mixed_traces", "shift out of range");
  auto per_trial = map_trials(trials, threads, [&](std::int64_t t) {
    const auto smp = HankelEnsembleSample::draw(p, seed, static_cast<std::uint64_t>(t));
    const MatrixXc Q = resolvent_of_gram(smp.gram(), z);
    std::vector<cplx> vals;
    vals.reserve(tuples.size());
    for (const auto &tp : tuples)
      vals.push_back(mixed_trace(Q, p.M(), p.L(), tp));
    return vals;
  });
  std::vector<MixedTraceEstimate> out;
  for (std::size_t k = 0; k < tuples.size(); ++k) {
    MixedTraceEstimate e;
    e.shifts = tuples[k];
    for (const auto &v : per_trial)
      e.records.push_back(v[k]);
    e.mean = mean(e.records);
    e.standard_error = standard_error(e.records);
    out.push_back(std::move(e));
  }
  return out;
}

struct FirstOrderGapRow {
  ModelParams params;
  cplx mean_trace;
  cplx t;
  double gap = 0.0;
  double standard_error = 0.0;
  /// L / (M N).
  double rate = 0.0;
  std::int64_t trials = 0;
};

/// |E[(1/ML) Tr Q(z)] - t(z)| per ladder entry; entry k uses trials
/// 0..trials-1 under derive_seed(seed, k).
inline std::vector<FirstOrderGapRow>
first_order_gap(const std::vector<ModelParams> &ladder, cplx z,
                std::int64_t trials, std::uint64_t seed, unsigned threads = 0,
                const SpectralOptions &sopt = {}) {
  if (ladder.size() < 2)
    throw InvalidArgument("first_order_gap", "ladder needs >= 2 settings");
  for (const auto &p : ladder)
    if (p.sigma2() != ladder.front().sigma2() || p.c() != ladder.front().c())
      throw InvalidArgument("first_order_gap",
                            "ladder entries must share sigma2 and c");
  require_upper_half_plane(z, "first_order_gap");
  std::vector<FirstOrderGapRow> rows;
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    const ModelParams &p = ladder[k];
    const std::uint64_t s = derive_seed(seed, k);
    auto traces = map_trials(trials, threads, [&](std::int64_t t) {
      const auto r = eigen(HankelEnsembleSample::draw(p, s, static_cast<std::uint64_t>(t)), sopt);
      return stieltjes_of_spectrum(r.eigenvalues, z);
    });
    FirstOrderGapRow row;
    row.params = p;
    row.trials = trials;
    row.mean_trace = mean(traces);
    row.t = solve_mp_stieltjes(z, p).t;
    row.gap = std::abs(row.mean_trace - row.t);
    row.standard_error = standard_error(traces);
    row.rate = static_cast<double>(p.L()) / static_cast<double>(p.M() * p.N());
    rows.push_back(row);
  }
  return rows;
}

} // namespace bhlab
