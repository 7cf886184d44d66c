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

/** @file toeplitz.hpp
    @brief Diagonal averaging and band-Toeplitz lifting of block matrices.

    For a PK x PK matrix A with K x K diagonal blocks A^{p,p}, the averaged
    diagonal sequence is

        tau(A)(k) = 1/(PK) sum_p sum_{i - j = k} A^{p,p}_{i,j},  |k| <= K-1,

    and the R x R band-Toeplitz lifting keeps lags |k| <= Q-1:

        T_{R,Q}(A)_{i,j} = tau(A)(i - j) 1{|i - j| <= Q-1}.

    Shift matrices follow (J_K)_{i,j} = delta(j - i = 1); a negative power
    J_K^{-u} denotes the adjoint power (J_K^*)^u, never an inverse.
*/

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "bhlab/types.hpp"

namespace bhlab {

/// Averaged diagonals tau(A)(k) for |k| <= max_lag of a matrix with P
/// diagonal blocks of size K.
class DiagonalProfile {
public:
  DiagonalProfile() = default;

  DiagonalProfile(std::int64_t K, std::int64_t P, std::int64_t max_lag,
                  std::vector<cplx> values)
      : K_(K), P_(P), max_lag_(max_lag), values_(std::move(values)) {
    if (K < 1 || P < 1 || max_lag < 0 || max_lag > K - 1)
      throw DimensionMismatch("DiagonalProfile", "invalid shape");
    if (static_cast<std::int64_t>(values_.size()) != 2 * max_lag + 1)
      throw DimensionMismatch("DiagonalProfile",
                              "expected 2*max_lag+1 coefficients");
  }

  std::int64_t K() const noexcept { return K_; }
  std::int64_t P() const noexcept { return P_; }
  std::int64_t max_lag() const noexcept { return max_lag_; }

  /// tau(A)(k); lags beyond max_lag are a DimensionMismatch.
  cplx operator()(std::int64_t k) const {
    if (k < -max_lag_ || k > max_lag_)
      throw DimensionMismatch("DiagonalProfile",
                              "lag " + std::to_string(k) + " not stored");
    return values_[static_cast<std::size_t>(k + max_lag_)];
  }

  const std::vector<cplx> &values() const noexcept { return values_; }

  /// Sum_k tau(k) exp(-2 i pi k nu): the symbol of the infinite band
  /// Toeplitz matrix built from the profile.
  cplx symbol(double nu) const {
    cplx s = 0.0;
    for (std::int64_t k = -max_lag_; k <= max_lag_; ++k)
      s += (*this)(k) * std::polar(1.0, -2.0 * kPi * static_cast<double>(k) * nu);
    return s;
  }

private:
  std::int64_t K_ = 1;
  std::int64_t P_ = 1;
  std::int64_t max_lag_ = 0;
  std::vector<cplx> values_{cplx(0.0)};
};

/// R x R band-Toeplitz matrix stored by its 2Q-1 coefficients.
class BandToeplitzMatrix {
public:
  BandToeplitzMatrix() = default;

  BandToeplitzMatrix(std::int64_t size, std::int64_t bandwidth,
                     std::vector<cplx> coefficients)
      : size_(size), bandwidth_(bandwidth), coeffs_(std::move(coefficients)) {
    if (size < 1 || bandwidth < 1 || bandwidth > size)
      throw DimensionMismatch("BandToeplitzMatrix",
                              "need 1 <= bandwidth <= size");
    if (static_cast<std::int64_t>(coeffs_.size()) != 2 * bandwidth - 1)
      throw DimensionMismatch("BandToeplitzMatrix",
                              "expected 2*bandwidth-1 coefficients");
  }

  std::int64_t size() const noexcept { return size_; }
  std::int64_t bandwidth() const noexcept { return bandwidth_; }
  const std::vector<cplx> &coefficients() const noexcept { return coeffs_; }

  /// Coefficient on diagonal i - j = k, zero outside the band.
  cplx coefficient(std::int64_t k) const noexcept {
    if (k <= -bandwidth_ || k >= bandwidth_)
      return 0.0;
    return coeffs_[static_cast<std::size_t>(k + bandwidth_ - 1)];
  }

  cplx entry(std::int64_t i, std::int64_t j) const noexcept {
    return coefficient(i - j);
  }

  MatrixXc dense() const {
    MatrixXc out = MatrixXc::Zero(size_, size_);
    for (std::int64_t k = -(bandwidth_ - 1); k <= bandwidth_ - 1; ++k) {
      const cplx v = coefficient(k);
      for (std::int64_t j = std::max<std::int64_t>(0, -k);
           j < size_ && j + k < size_; ++j)
        out(j + k, j) = v;
    }
    return out;
  }

  bool is_hermitian(double tol = 0.0) const noexcept {
    for (std::int64_t k = 0; k < bandwidth_; ++k)
      if (std::abs(coefficient(-k) - std::conj(coefficient(k))) > tol)
        return false;
    return true;
  }

  /// y = T x without materializing T.
  VectorXc apply(const VectorXc &x) const {
    if (x.size() != size_)
      throw DimensionMismatch("BandToeplitzMatrix::apply", "size mismatch");
    VectorXc y = VectorXc::Zero(size_);
    for (std::int64_t i = 0; i < size_; ++i) {
      const std::int64_t jlo = std::max<std::int64_t>(0, i - bandwidth_ + 1);
      const std::int64_t jhi = std::min<std::int64_t>(size_ - 1, i + bandwidth_ - 1);
      cplx acc = 0.0;
      for (std::int64_t j = jlo; j <= jhi; ++j)
        acc += coefficient(i - j) * x(j);
      y(i) = acc;
    }
    return y;
  }

private:
  std::int64_t size_ = 1;
  std::int64_t bandwidth_ = 1;
  std::vector<cplx> coeffs_{cplx(0.0)};
};

namespace detail {

inline std::int64_t checked_block_count(const MatrixXc &A, std::int64_t K,
                                        const char *op) {
  if (A.rows() != A.cols())
    throw DimensionMismatch(op, "matrix must be square");
  if (K < 1 || A.rows() % K != 0 || A.rows() == 0)
    throw DimensionMismatch(op, "size " + std::to_string(A.rows()) +
                                    " is not a multiple of block size " +
                                    std::to_string(K));
  return A.rows() / K;
}

} // namespace detail

/// tau^{(P)}(A)(k) for a single lag; P = A.rows() / K.
inline cplx tau(const MatrixXc &A, std::int64_t K, std::int64_t k) {
  const std::int64_t P = detail::checked_block_count(A, K, "tau");
  if (k < -(K - 1) || k > K - 1)
    throw DimensionMismatch("tau", "lag out of range");
  cplx acc = 0.0;
  for (std::int64_t p = 0; p < P; ++p) {
    const std::int64_t off = p * K;
    for (std::int64_t u = std::max<std::int64_t>(0, -k); u < K && u + k < K; ++u)
      acc += A(off + u + k, off + u);
  }
  return acc / static_cast<double>(P * K);
}

/// All averaged diagonals up to max_lag (default K-1).
inline DiagonalProfile tau_profile(const MatrixXc &A, std::int64_t K,
                                   std::int64_t max_lag = -1) {
  const std::int64_t P = detail::checked_block_count(A, K, "tau_profile");
  if (max_lag < 0)
    max_lag = K - 1;
  if (max_lag > K - 1)
    throw DimensionMismatch("tau_profile", "max_lag exceeds K-1");
  std::vector<cplx> vals(static_cast<std::size_t>(2 * max_lag + 1), cplx(0.0));
  for (std::int64_t p = 0; p < P; ++p) {
    const std::int64_t off = p * K;
    for (std::int64_t k = -max_lag; k <= max_lag; ++k) {
      cplx acc = 0.0;
      for (std::int64_t u = std::max<std::int64_t>(0, -k); u < K && u + k < K; ++u)
        acc += A(off + u + k, off + u);
      vals[static_cast<std::size_t>(k + max_lag)] += acc;
    }
  }
  const double scale = 1.0 / static_cast<double>(P * K);
  for (auto &v : vals)
    v *= scale;
  return DiagonalProfile(K, P, max_lag, std::move(vals));
}

/// Band-Toeplitz matrix of size R with bandwidth Q built from a profile.
inline BandToeplitzMatrix band_from_profile(const DiagonalProfile &profile,
                                            std::int64_t R, std::int64_t Q) {
  if (Q < 1 || Q > profile.max_lag() + 1 || R < Q)
    throw DimensionMismatch("band_from_profile",
                            "need 1 <= Q <= stored lags + 1 and R >= Q");
  std::vector<cplx> coeffs(static_cast<std::size_t>(2 * Q - 1));
  for (std::int64_t k = -(Q - 1); k <= Q - 1; ++k)
    coeffs[static_cast<std::size_t>(k + Q - 1)] = profile(k);
  return BandToeplitzMatrix(R, Q, std::move(coeffs));
}

/// T^{(P)}_{R,Q}(A) for A with blocks of size K. Requires Q <= K, R >= Q.
inline BandToeplitzMatrix toeplitzify(const MatrixXc &A, std::int64_t K,
                                      std::int64_t R, std::int64_t Q) {
  if (Q < 1 || Q > K || R < Q)
    throw DimensionMismatch("toeplitzify", "need 1 <= Q <= K and R >= Q");
  return band_from_profile(tau_profile(A, K, Q - 1), R, Q);
}

/// Dense J_K^u; negative u gives (J_K^*)^{|u|}.
inline MatrixXc shift_matrix(std::int64_t K, std::int64_t u) {
  MatrixXc J = MatrixXc::Zero(K, K);
  if (u >= 0) {
    for (std::int64_t i = 0; i + u < K; ++i)
      J(i, i + u) = 1.0;
  } else {
    for (std::int64_t j = 0; j - u < K; ++j)
      J(j - u, j) = 1.0;
  }
  return J;
}

/// a_K(nu) = K^{-1/2} (1, e^{2 i pi nu}, ..., e^{2 i pi (K-1) nu})^T.
inline VectorXc fourier_vector(std::int64_t K, double nu) {
  VectorXc a(K);
  const double scale = 1.0 / std::sqrt(static_cast<double>(K));
  for (std::int64_t i = 0; i < K; ++i)
    a(i) = std::polar(scale, 2.0 * kPi * nu * static_cast<double>(i));
  return a;
}

/// Average of the P diagonal K x K blocks.
inline MatrixXc block_average(const MatrixXc &A, std::int64_t K) {
  const std::int64_t P = detail::checked_block_count(A, K, "block_average");
  MatrixXc out = MatrixXc::Zero(K, K);
  for (std::int64_t p = 0; p < P; ++p)
    out += A.block(p * K, p * K, K, K);
  return out / static_cast<double>(P);
}

/// a_K(nu)^* hat(A) a_K(nu).
inline cplx symbol(const MatrixXc &A, std::int64_t K, double nu) {
  const MatrixXc hat = block_average(A, K);
  const VectorXc a = fourier_vector(K, nu);
  return a.dot(hat * a);
}

/// Max of |symbol| over grid_size equispaced nu in [0,1). The symbol is a
/// trigonometric polynomial of degree K-1, so this is a lower bound on the
/// true supremum with O(1/grid_size) error.
inline double symbol_sup(const DiagonalProfile &profile, std::int64_t grid_size) {
  if (grid_size < 2 * profile.max_lag() + 2)
    throw InvalidArgument("symbol_sup", "grid_size must be >= 2K");
  double best = 0.0;
  for (std::int64_t g = 0; g < grid_size; ++g) {
    const double nu = static_cast<double>(g) / static_cast<double>(grid_size);
    best = std::max(best, std::abs(profile.symbol(nu)));
  }
  return best;
}

inline double symbol_sup(const MatrixXc &A, std::int64_t K,
                         std::int64_t grid_size = -1) {
  if (grid_size < 0)
    grid_size = 8 * K;
  return symbol_sup(tau_profile(A, K), grid_size);
}

} // namespace bhlab
