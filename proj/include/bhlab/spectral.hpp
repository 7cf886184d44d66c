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

/** @file spectral.hpp
    @brief Spectrum, resolvent and empirical distribution of W W^*.
*/

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "bhlab/block_hankel.hpp"
#include "bhlab/mp_law.hpp"
#include "bhlab/types.hpp"

namespace bhlab {

struct SpectralOptions {
  /// Largest ML accepted by the dense eigensolver.
  std::int64_t size_guard = 4096;
};

struct SpectralResult {
  ModelParams params;
  std::uint64_t seed = 0;
  std::uint64_t trial_index = 0;
  /// Ascending.
  Eigen::VectorXd eigenvalues;

  std::int64_t size() const noexcept { return eigenvalues.size(); }
  double max() const { return eigenvalues.size() ? eigenvalues(eigenvalues.size() - 1) : 0.0; }
  double min() const { return eigenvalues.size() ? eigenvalues(0) : 0.0; }
  /// Magnitude used for relative thresholds: max(|lambda|, sigma2).
  double scale() const {
    double s = params.sigma2();
    for (Index k = 0; k < eigenvalues.size(); ++k)
      s = std::max(s, std::abs(eigenvalues(k)));
    return s;
  }
};

struct EigenDecomposition {
  Eigen::VectorXd eigenvalues;
  MatrixXc eigenvectors;
};

namespace detail {

inline void check_size_guard(std::int64_t n, const SpectralOptions &opt,
                             const char *op) {
  if (n > opt.size_guard)
    throw SizeGuardExceeded(op, "ML = " + std::to_string(n) +
                                    " exceeds size guard " +
                                    std::to_string(opt.size_guard));
}

inline EigenDecomposition hermitian_eigen(const MatrixXc &G, bool vectors,
                                          const char *op) {
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(
      G, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw ConvergenceFailure(op, "Hermitian eigensolver did not converge");
  EigenDecomposition out;
  out.eigenvalues = es.eigenvalues();
  if (vectors)
    out.eigenvectors = es.eigenvectors();
  return out;
}

} // namespace detail

/// Eigenvalues of W W^*, ascending.
inline SpectralResult eigen(const HankelEnsembleSample &s,
                            const SpectralOptions &opt = {}) {
  detail::check_size_guard(s.params().rows(), opt, "eigen");
  SpectralResult r;
  r.params = s.params();
  r.seed = s.seed();
  r.trial_index = s.trial_index();
  r.eigenvalues = detail::hermitian_eigen(s.gram(), false, "eigen").eigenvalues;
  return r;
}

/// Eigenpairs of W W^*, for residual checks.
inline EigenDecomposition eigen_decompose(const HankelEnsembleSample &s,
                                          const SpectralOptions &opt = {}) {
  detail::check_size_guard(s.params().rows(), opt, "eigen_decompose");
  return detail::hermitian_eigen(s.gram(), true, "eigen_decompose");
}

struct ResolventEvaluation {
  cplx z;
  /// (1/ML) Tr Q(z).
  cplx trace_normalized;
  std::optional<MatrixXc> Q;
};

inline void require_upper_half_plane(cplx z, const char *op) {
  if (!(z.imag() > 0.0) || !std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw DomainError(op, "requires finite z with Im z > 0");
}

/// (1/n) sum_k 1/(lambda_k - z).
inline cplx stieltjes_of_spectrum(const Eigen::VectorXd &eigs, cplx z) {
  cplx acc = 0.0;
  for (Index k = 0; k < eigs.size(); ++k)
    acc += 1.0 / (eigs(k) - z);
  return acc / static_cast<double>(eigs.size());
}

inline ResolventEvaluation resolvent_trace(const SpectralResult &r, cplx z) {
  require_upper_half_plane(z, "resolvent_trace");
  return {z, stieltjes_of_spectrum(r.eigenvalues, z), std::nullopt};
}

/// Q(z) = (G - z I)^{-1} for a Hermitian G, by LU with partial pivoting.
inline MatrixXc resolvent_of_gram(const MatrixXc &G, cplx z) {
  require_upper_half_plane(z, "resolvent");
  MatrixXc A = G;
  A.diagonal().array() -= z;
  return A.partialPivLu().inverse();
}

/// Full resolvent of W W^* together with its normalized trace.
inline ResolventEvaluation resolvent(const HankelEnsembleSample &s, cplx z,
                                     const SpectralOptions &opt = {}) {
  require_upper_half_plane(z, "resolvent");
  detail::check_size_guard(s.params().rows(), opt, "resolvent");
  MatrixXc Q = resolvent_of_gram(s.gram(), z);
  const cplx tr = Q.trace() / static_cast<double>(Q.rows());
  return {z, tr, std::move(Q)};
}

/// Kolmogorov-Smirnov distance between the empirical distribution of the
/// eigenvalues and mu_{sigma2,c}. Eigenvalues with |lambda| <= zero_tol are
/// treated as exact zeros so that the atom for c > 1 is matched; the default
/// tolerance is 1e-8 sigma2 (1 + sqrt c)^2.
inline double esd_ks_distance(const Eigen::VectorXd &eigenvalues,
                              const LawParams &law, double zero_tol = -1.0,
                              double cdf_tol = 1e-10) {
  const Index n = eigenvalues.size();
  if (n == 0)
    return 0.0;
  if (zero_tol < 0.0)
    zero_tol = 1e-8 * mp_support(law).upper;
  std::vector<double> v(eigenvalues.data(), eigenvalues.data() + n);
  for (double &x : v)
    if (std::abs(x) <= zero_tol)
      x = 0.0;
  std::sort(v.begin(), v.end());
  const double inv_n = 1.0 / static_cast<double>(n);
  double d = 0.0;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i])
      ++j;
    const double x = v[i];
    const double f_after = mp_cdf(x, law, cdf_tol);
    // The law has a single jump, at zero.
    const double f_before = (x == 0.0) ? 0.0 : f_after;
    d = std::max(d, std::abs(f_before - static_cast<double>(i) * inv_n));
    d = std::max(d, std::abs(f_after - static_cast<double>(j) * inv_n));
    i = j;
  }
  return std::min(d, 1.0);
}

inline double esd_ks_distance(const SpectralResult &r, double zero_tol = -1.0) {
  return esd_ks_distance(r.eigenvalues, r.params.law(), zero_tol);
}

/// sum_k phi(lambda_k).
inline double trace_functional(const SpectralResult &r,
                               const std::function<double(double)> &phi) {
  double acc = 0.0;
  for (Index k = 0; k < r.eigenvalues.size(); ++k)
    acc += phi(r.eigenvalues(k));
  return acc;
}

/// Number of eigenvalues with |lambda| <= threshold.
inline std::int64_t count_near_zero(const Eigen::VectorXd &eigs, double threshold) {
  std::int64_t n = 0;
  for (Index k = 0; k < eigs.size(); ++k)
    if (std::abs(eigs(k)) <= threshold)
      ++n;
  return n;
}

} // namespace bhlab
