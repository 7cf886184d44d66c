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

/** @file det_equiv.hpp
    @brief Matrix deterministic equivalents H(z), R(z) and the error E(Q) - I_M (x) R.

    The coupled system is

        H = [I_N + sigma2 c T^{(M)}_{N,L}(E Q)]^{-1},
        R = [-z I_L + sigma2 T_{L,L}(H)]^{-1}.

    In the self-consistent closure E Q is replaced by I_M (x) R, for which
    T^{(M)}_{N,L}(I_M (x) R) = T_{N,L}(R).
*/

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/LU>

#include "bhlab/block_hankel.hpp"
#include "bhlab/linalg.hpp"
#include "bhlab/mp_law.hpp"
#include "bhlab/parallel.hpp"
#include "bhlab/spectral.hpp"
#include "bhlab/stats.hpp"
#include "bhlab/toeplitz.hpp"

namespace bhlab {

struct SelfConsistent {};

/// Uses a supplied estimate of E(Q) (ML x ML) in the H equation.
struct FromMeanQ {
  MatrixXc mean_Q;
};

using DetEquivMode = std::variant<SelfConsistent, FromMeanQ>;

struct DetEquivOptions {
  double damping = 0.5;
  double tolerance = 1e-10;
  int max_iterations = 1000;
  std::int64_t n_guard = 4096;
  /// Smallest admissible Im z. Quantitative statements only hold away from
  /// the real axis; set to 0 to accept any Im z > 0.
  double min_imag = 0.05;
  /// Dense spectral norms of H and R (an SVD of size N).
  bool compute_norms = true;
  /// Starting point; defaults to t(z) I_L.
  std::optional<MatrixXc> R0;
};

struct DetEquivState {
  cplx z;
  MatrixXc R;
  /// tau(H)(k) for |k| <= L-1.
  DiagonalProfile tauH;
  double residual = 0.0;
  int iterations = 0;
  /// NaN when norms were not requested.
  double h_norm = std::nan("");
  double r_norm = std::nan("");
  std::string mode;
};

namespace detail {

inline MatrixXc solve_H(const ModelParams &p, const BandToeplitzMatrix &T) {
  MatrixXc A = T.dense();
  A *= p.sigma2() * p.c();
  A.diagonal().array() += 1.0;
  return A.partialPivLu().inverse();
}

// R = [-z I + sigma2 T_{L,L}(H)]^{-1}, also returning tau(H).
inline MatrixXc solve_R(const ModelParams &p, cplx z, const MatrixXc &H,
                        DiagonalProfile *tauH) {
  const std::int64_t L = p.L();
  *tauH = tau_profile(H, p.N(), L - 1);
  MatrixXc B = band_from_profile(*tauH, L, L).dense();
  B *= p.sigma2();
  B.diagonal().array() -= z;
  return B.partialPivLu().inverse();
}

inline void check_det_equiv_domain(const ModelParams &p, cplx z,
                                   const DetEquivOptions &opt) {
  if (!(z.imag() > 0.0))
    throw DomainError("solve_det_equiv", "requires Im z > 0");
  if (z.imag() < opt.min_imag)
    throw DomainError("solve_det_equiv",
                      "Im z below the configured guard " +
                          std::to_string(opt.min_imag));
  if (p.N() > opt.n_guard)
    throw SizeGuardExceeded("solve_det_equiv",
                            "N = " + std::to_string(p.N()) + " exceeds guard");
  if (p.L() > p.N())
    throw DimensionMismatch("solve_det_equiv", "requires L <= N");
}

inline void finish_state(DetEquivState &s, const MatrixXc &H,
                         const DetEquivOptions &opt) {
  if (opt.compute_norms) {
    s.h_norm = spectral_norm(H);
    s.r_norm = spectral_norm(s.R);
  }
}

} // namespace detail

inline DetEquivState solve_det_equiv(const ModelParams &p, cplx z,
                                     const DetEquivMode &mode,
                                     const DetEquivOptions &opt = {}) {
  detail::check_det_equiv_domain(p, z, opt);
  const std::int64_t L = p.L();
  DetEquivState s;
  s.z = z;

  if (const auto *fm = std::get_if<FromMeanQ>(&mode)) {
    if (fm->mean_Q.rows() != p.rows() || fm->mean_Q.cols() != p.rows())
      throw DimensionMismatch("solve_det_equiv", "mean_Q must be ML x ML");
    const MatrixXc H =
        detail::solve_H(p, toeplitzify(fm->mean_Q, L, p.N(), L));
    s.R = detail::solve_R(p, z, H, &s.tauH);
    s.mode = "from_mean_Q";
    s.iterations = 1;
    s.residual = 0.0;
    detail::finish_state(s, H, opt);
    return s;
  }

  s.mode = "self_consistent";
  MatrixXc R;
  if (opt.R0) {
    if (opt.R0->rows() != L || opt.R0->cols() != L)
      throw DimensionMismatch("solve_det_equiv", "R0 must be L x L");
    R = *opt.R0;
  } else {
    R = solve_mp_stieltjes(z, p).t * MatrixXc::Identity(L, L);
  }
  MatrixXc H;
  DiagonalProfile tauH;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    H = detail::solve_H(p, toeplitzify(R, L, p.N(), L));
    const MatrixXc F = detail::solve_R(p, z, H, &tauH);
    const double res = (F - R).norm();
    if (!std::isfinite(res))
      throw NoConvergence("solve_det_equiv", "iteration diverged");
    if (res <= opt.tolerance) {
      s.R = F;
      s.tauH = tauH;
      s.residual = res;
      s.iterations = it;
      detail::finish_state(s, H, opt);
      return s;
    }
    R = (1.0 - opt.damping) * R + opt.damping * F;
  }
  throw NoConvergence("solve_det_equiv",
                      "no convergence after " +
                          std::to_string(opt.max_iterations) + " iterations");
}

/// sup over nu of |a_L(nu)^* (R - t I) a_L(nu)| on grid_size points
/// (default 8L).
inline double toeplitzified_gap(const DetEquivState &s, cplx t,
                                std::int64_t grid_size = -1) {
  const std::int64_t L = s.R.rows();
  MatrixXc D = s.R;
  D.diagonal().array() -= t;
  return symbol_sup(D, L, grid_size < 0 ? 8 * L : grid_size);
}

struct DeltaEstimate {
  cplx z;
  MatrixXc mean_Q;
  /// mean_Q - I_M (x) R.
  MatrixXc delta;
  /// (1/M) sum_m delta^{m,m}.
  MatrixXc hat_delta;
  std::int64_t trials = 0;
  /// (1/ML) Tr Q(z) per trial, in trial order.
  std::vector<cplx> trace_records;
};

struct MeanResolventResult {
  DeltaEstimate estimate;
  DetEquivState state;
};

/// Number of fixed summation blocks used for E(Q); independent of threads.
inline constexpr std::int64_t kMeanResolventBlocks = 32;

/// Monte Carlo E(Q(z)) over trials 0..trials-1 of `seed`, then the
/// from_mean_Q deterministic equivalent and Delta. Trials are summed in
/// min(trials, 32) contiguous blocks which are then combined pairwise, so
/// the result is bit-identical for any thread count.
inline MeanResolventResult
estimate_mean_resolvent(const ModelParams &p, cplx z, std::int64_t trials,
                        std::uint64_t seed, unsigned threads = 0,
                        const DetEquivOptions &opt = {},
                        const SpectralOptions &sopt = {}) {
  if (trials < 10)
    throw InvalidArgument("estimate_mean_resolvent", "trials must be >= 10");
  require_upper_half_plane(z, "estimate_mean_resolvent");
  detail::check_size_guard(p.rows(), sopt, "estimate_mean_resolvent");
  const std::int64_t n = p.rows();
  const std::int64_t blocks = std::min(trials, kMeanResolventBlocks);

  struct Block {
    MatrixXc sum;
    std::vector<cplx> traces;
  };
  auto blocks_out = map_trials(blocks, threads, [&](std::int64_t b) {
    const std::int64_t lo = b * trials / blocks;
    const std::int64_t hi = (b + 1) * trials / blocks;
    Block blk{MatrixXc::Zero(n, n), {}};
    for (std::int64_t t = lo; t < hi; ++t) {
      const auto smp = HankelEnsembleSample::draw(p, seed, static_cast<std::uint64_t>(t));
      const MatrixXc Q = resolvent_of_gram(smp.gram(), z);
      blk.traces.push_back(Q.trace() / static_cast<double>(n));
      blk.sum += Q;
    }
    return blk;
  });

  // Pairwise combination of the block sums.
  std::vector<MatrixXc> level;
  level.reserve(blocks_out.size());
  DeltaEstimate est;
  for (auto &blk : blocks_out) {
    level.push_back(std::move(blk.sum));
    est.trace_records.insert(est.trace_records.end(), blk.traces.begin(),
                             blk.traces.end());
  }
  while (level.size() > 1) {
    std::vector<MatrixXc> next;
    for (std::size_t i = 0; i + 1 < level.size(); i += 2)
      next.push_back(level[i] + level[i + 1]);
    if (level.size() % 2)
      next.push_back(std::move(level.back()));
    level = std::move(next);
  }

  est.z = z;
  est.trials = trials;
  est.mean_Q = level.front() / static_cast<double>(trials);

  MeanResolventResult out;
  out.state = solve_det_equiv(p, z, FromMeanQ{est.mean_Q}, opt);
  est.delta = est.mean_Q - kron_identity(p.M(), out.state.R);
  est.hat_delta = block_average(est.delta, p.L());
  out.estimate = std::move(est);
  return out;
}

} // namespace bhlab
