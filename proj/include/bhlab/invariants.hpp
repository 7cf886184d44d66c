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

/** @file invariants.hpp
    @brief Property suites for the scalar law and the Toeplitz calculus.

    Each check reports the worst value observed next to its threshold.
*/

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "bhlab/linalg.hpp"
#include "bhlab/mp_law.hpp"
#include "bhlab/toeplitz.hpp"

namespace bhlab {

struct InvariantResult {
  std::string suite;
  std::string name;
  bool passed = false;
  /// Worst observed value of the checked quantity.
  double worst = 0.0;
  std::string detail;
};

namespace detail {

inline MatrixXc random_complex(std::mt19937_64 &rng, Index rows, Index cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXc A(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i)
      A(i, j) = cplx(g(rng), g(rng));
  return A;
}

inline MatrixXc random_hpd(std::mt19937_64 &rng, Index n) {
  const MatrixXc X = random_complex(rng, n, n);
  MatrixXc A = X * X.adjoint();
  A.diagonal().array() += 1e-3 * static_cast<double>(n);
  return A;
}

// Random R x R Toeplitz matrix and its coefficients a(k), |k| <= R-1.
inline BandToeplitzMatrix random_toeplitz(std::mt19937_64 &rng, std::int64_t R) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<cplx> c(static_cast<std::size_t>(2 * R - 1));
  for (auto &v : c)
    v = cplx(g(rng), g(rng));
  return BandToeplitzMatrix(R, R, std::move(c));
}

inline std::int64_t uniform_int(std::mt19937_64 &rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

inline InvariantResult make_result(const std::string &suite, const std::string &name,
                                   double worst, double threshold, bool below) {
  InvariantResult r{suite, name, below ? worst <= threshold : worst >= threshold, worst, ""};
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s %.3e %s %.3e", below ? "max" : "min", worst,
                below ? "<=" : ">=", threshold);
  r.detail = buf;
  return r;
}

} // namespace detail

/// Properties of t(z) on a grid of (sigma2, c, z).
inline std::vector<InvariantResult> mp_law_invariants() {
  const std::string S = "mp_law";
  const std::vector<LawParams> laws{{1.0, 0.5}, {1.0, 1.0}, {2.0, 0.25}, {0.5, 2.0}, {1.0, 4.0}};
  double min_im_t = 1e300, min_im_zt = 1e300, max_bound = -1e300, max_conj = 0.0;
  double max_res = 0.0, min_gap = 1e300;
  for (const auto &law : laws)
    for (int ix = 0; ix <= 40; ++ix)
      for (double y : {0.01, 0.05, 0.5, 2.0, 50.0}) {
        const cplx z(-3.0 + 0.25 * ix, y);
        const StieltjesPair sp = solve_mp_stieltjes(z, law);
        min_im_t = std::min(min_im_t, sp.t.imag());
        min_im_zt = std::min(min_im_zt, (z * sp.t).imag());
        max_bound = std::max(max_bound, std::abs(sp.t) - 1.0 / y);
        max_conj = std::max(max_conj, std::abs(solve_mp_stieltjes(std::conj(z), law).t -
                                               std::conj(sp.t)));
        max_res = std::max(max_res, sp.residual / std::max(1.0, std::abs(sp.t)));
        min_gap = std::min(min_gap, zttt_bound_gap(z, law));
      }
  std::vector<InvariantResult> out;
  out.push_back(detail::make_result(S, "Im t(z) > 0", min_im_t, 0.0, false));
  out.back().passed = min_im_t > 0.0;
  out.push_back(detail::make_result(S, "Im z t(z) > 0", min_im_zt, 0.0, false));
  out.back().passed = min_im_zt > 0.0;
  out.push_back(detail::make_result(S, "|t(z)| <= 1/Im z", max_bound, 1e-14, true));
  out.push_back(detail::make_result(S, "t(conj z) = conj t(z)", max_conj, 1e-14, true));
  out.push_back(detail::make_result(S, "fixed-point residual", max_res, 1e-12, true));
  out.push_back(detail::make_result(S, "1 - sigma2^2 c |z t t~|^2 > 0", min_gap, 0.0, false));
  out.back().passed = min_gap > 0.0;

  // Boundary values: (1/pi) Im t(x + iy) -> density, with a two-point
  // Richardson step from y = 1e-3 and 1e-4 (the error is linear in y).
  double max_inv = 0.0;
  for (const auto &law : laws) {
    const MPSupport sup = mp_support(law);
    for (int k = 1; k <= 9; ++k) {
      const double x = sup.lower + (sup.upper - sup.lower) * k / 10.0;
      std::array<double, 3> f{};
      const std::array<double, 3> ys{1e-2, 1e-3, 1e-4};
      for (int j = 0; j < 3; ++j)
        f[j] = solve_mp_stieltjes(cplx(x, ys[j]), law).t.imag() / kPi;
      const double extrap = (10.0 * f[2] - f[1]) / 9.0;
      max_inv = std::max(max_inv, std::abs(extrap - mp_density(x, law)));
    }
  }
  out.push_back(detail::make_result(S, "(1/pi) Im t(x+iy) -> density", max_inv, 1e-3, true));
  return out;
}

/// Identities and inequalities of the Toeplitzification operators on
/// `instances` random cases with P <= 3, K <= 8, R <= 16.
inline std::vector<InvariantResult> toeplitz_invariants(int instances = 100,
                                                        std::uint64_t seed = 12345) {
  const std::string S = "toeplitz_ops";
  std::mt19937_64 rng(seed);
  double e_trab = 0.0, e_trtab = 0.0, e_trbta = 0.0, e_utile = 0.0, e_sym = 0.0;
  double min_pos = 1e300, min_ineq = 1e300, min_ineq_bis = 1e300, max_contr = -1e300;
  for (int it = 0; it < instances; ++it) {
    const std::int64_t P = detail::uniform_int(rng, 1, 3);
    const std::int64_t K = detail::uniform_int(rng, 1, 8);
    const std::int64_t R = detail::uniform_int(rng, K, 16);
    const std::int64_t Q = detail::uniform_int(rng, 1, K);

    // (1/R) Tr(A B) = sum_k A(-k) tau(B)(k) for Toeplitz A.
    {
      const BandToeplitzMatrix A = detail::random_toeplitz(rng, R);
      const MatrixXc B = detail::random_complex(rng, R, R);
      const DiagonalProfile tb = tau_profile(B, R);
      cplx rhs = 0.0;
      for (std::int64_t k = -(R - 1); k <= R - 1; ++k)
        rhs += A.coefficient(-k) * tb(k);
      const cplx lhs = (A.dense() * B).trace() / static_cast<double>(R);
      e_trab = std::max(e_trab, std::abs(lhs - rhs) / (1.0 + B.norm() * A.dense().norm() / R));
    }
    // (1/R) Tr(T_{R,Q}(A) B) = sum_{|q|<Q} tau(A)(-q) tau(B)(q) = (1/R) Tr(A T_{R,Q}(B)).
    {
      const MatrixXc A = detail::random_complex(rng, R, R);
      const MatrixXc B = detail::random_complex(rng, R, R);
      const DiagonalProfile ta = tau_profile(A, R), tb = tau_profile(B, R);
      cplx sum = 0.0;
      for (std::int64_t q = -(Q - 1); q <= Q - 1; ++q)
        sum += ta(-q) * tb(q);
      const cplx l1 = (toeplitzify(A, R, R, Q).dense() * B).trace() / static_cast<double>(R);
      const cplx l2 = (A * toeplitzify(B, R, R, Q).dense()).trace() / static_cast<double>(R);
      const double scale = 1.0 + A.norm() * B.norm() / static_cast<double>(R);
      e_trtab = std::max(e_trtab, std::max(std::abs(l1 - sum), std::abs(l2 - sum)) / scale);
    }
    // (1/R) Tr(B T^{(P)}_{R,Q}(A)) = sum tau(B)(k) tau(A)(-k)
    //                              = (1/PK) Tr((I_P (x) T_{K,Q}(B)) A).
    {
      const MatrixXc A = detail::random_complex(rng, P * K, P * K);
      const MatrixXc B = detail::random_complex(rng, R, R);
      const DiagonalProfile ta = tau_profile(A, K), tb = tau_profile(B, R);
      cplx sum = 0.0;
      for (std::int64_t q = -(Q - 1); q <= Q - 1; ++q)
        sum += tb(q) * ta(-q);
      const cplx l1 = (B * toeplitzify(A, K, R, Q).dense()).trace() / static_cast<double>(R);
      const std::int64_t Qb = std::min(Q, K);
      const cplx l2 = (kron_identity(P, toeplitzify(B, R, K, Qb).dense()) * A).trace() /
                      static_cast<double>(P * K);
      const double scale = 1.0 + A.norm() * B.norm() / static_cast<double>(R);
      e_trbta = std::max(e_trbta, std::max(std::abs(l1 - sum), std::abs(l2 - sum)) / scale);
    }
    // (1/K) Tr[B T_{K,K}(D T^{(P)}_{R,K}(C) E)] = (1/PK) Tr[C (I_P (x) T_{K,K}(E T_{R,K}(B) D))].
    {
      const MatrixXc B = detail::random_complex(rng, K, K);
      const MatrixXc C = detail::random_complex(rng, P * K, P * K);
      const MatrixXc D = detail::random_complex(rng, R, R);
      const MatrixXc E = detail::random_complex(rng, R, R);
      const MatrixXc inner_l = D * toeplitzify(C, K, R, K).dense() * E;
      const cplx lhs = (B * toeplitzify(inner_l, R, K, K).dense()).trace() / static_cast<double>(K);
      const MatrixXc inner_r = E * toeplitzify(B, K, R, K).dense() * D;
      const cplx rhs =
          (C * kron_identity(P, toeplitzify(inner_r, R, K, K).dense())).trace() /
          static_cast<double>(P * K);
      const double scale = 1.0 + B.norm() * C.norm() * D.norm() * E.norm() /
                                     static_cast<double>(R * K);
      e_utile = std::max(e_utile, std::abs(lhs - rhs) / scale);
    }
    // Symbol: a^* Ahat a = sum_k tau(A)(k) e^{-2 i pi k nu}; sup <= ||A||.
    {
      const MatrixXc A = detail::random_complex(rng, P * K, P * K);
      const double nu = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      e_sym = std::max(e_sym, std::abs(symbol(A, K, nu) - tau_profile(A, K).symbol(nu)) /
                                  (1.0 + A.norm()));
      max_contr = std::max(max_contr, symbol_sup(A, K) - spectral_norm(A));
    }
    // Positivity of T^{(P)}_{R,K}(A) for A > 0.
    {
      const MatrixXc A = detail::random_hpd(rng, P * K);
      const MatrixXc T = toeplitzify(A, K, R, K).dense();
      min_pos = std::min(min_pos, min_hermitian_eigenvalue(T) / std::max(1.0, A.norm()));
    }
    // T(A) T(A)^* <= T(A A^*), R >= K and R <= K.
    {
      const MatrixXc A = detail::random_complex(rng, K, K);
      const MatrixXc T = toeplitzify(A, K, R, K).dense();
      const MatrixXc diff = toeplitzify(A * A.adjoint(), K, R, K).dense() - T * T.adjoint();
      min_ineq = std::min(min_ineq, min_hermitian_eigenvalue(diff) / std::max(1.0, A.squaredNorm()));
      const std::int64_t Rs = detail::uniform_int(rng, 1, K);
      const MatrixXc Ts = toeplitzify(A, K, Rs, Rs).dense();
      const MatrixXc diff_s = toeplitzify(A * A.adjoint(), K, Rs, Rs).dense() - Ts * Ts.adjoint();
      min_ineq_bis = std::min(min_ineq_bis,
                              min_hermitian_eigenvalue(diff_s) / std::max(1.0, A.squaredNorm()));
    }
  }
  std::vector<InvariantResult> out;
  out.push_back(detail::make_result(S, "(1/R)Tr(AB) = sum A(-k) tau(B)(k)", e_trab, 1e-12, true));
  out.push_back(detail::make_result(S, "(1/R)Tr(T(A)B) = sum tau(A)(-q) tau(B)(q)", e_trtab, 1e-12, true));
  out.push_back(detail::make_result(S, "(1/R)Tr(B T(A)) = (1/PK)Tr((I (x) T(B))A)", e_trbta, 1e-12, true));
  out.push_back(detail::make_result(S, "exchange identity", e_utile, 1e-12, true));
  out.push_back(detail::make_result(S, "symbol = Fourier sum of tau", e_sym, 1e-12, true));
  out.push_back(detail::make_result(S, "symbol_sup <= ||A||", max_contr, 1e-10, true));
  out.push_back(detail::make_result(S, "T(A) > 0 for A > 0", min_pos, 0.0, false));
  out.back().passed = min_pos > 0.0;
  out.push_back(detail::make_result(S, "T(A)T(A)^* <= T(AA^*), R >= K", min_ineq, -1e-10, false));
  out.push_back(detail::make_result(S, "T(A)T(A)^* <= T(AA^*), R <= K", min_ineq_bis, -1e-10, false));
  return out;
}

} // namespace bhlab
