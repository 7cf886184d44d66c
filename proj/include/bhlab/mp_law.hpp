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

/** @file mp_law.hpp
    @brief Scalar Marcenko-Pastur machinery.

    The Stieltjes transform t(z) of the law mu_{sigma2,c} is the root of

        t = 1 / (-z + sigma2 / (1 + sigma2 c t)),

    which after clearing the fraction is the quadratic

        sigma2 c z t^2 + (z - sigma2 + sigma2 c) t + 1 = 0.

    The companion transform t~(z) = -1 / (z (1 + sigma2 c t)) is the Stieltjes
    transform of c mu + (1 - c) delta_0.
*/

#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bhlab/types.hpp"

namespace bhlab {

struct MPSupport {
  double lower = 0.0;
  double upper = 0.0;
  bool has_atom_at_zero = false;

  /// Mass 1 - 1/c of the atom at zero (0 when c <= 1).
  double atom_mass(double c) const noexcept {
    return has_atom_at_zero ? 1.0 - 1.0 / c : 0.0;
  }

  /// True when real x lies in the support of the law, atom included.
  bool contains(double x) const noexcept {
    return (x >= lower && x <= upper) || (has_atom_at_zero && x == 0.0);
  }
};

struct StieltjesPair {
  cplx z;
  cplx t;
  cplx t_tilde;
  /// |t - 1/(-z + sigma2/(1 + sigma2 c t))| at the returned t.
  double residual = 0.0;
};

inline MPSupport mp_support(const LawParams &law) {
  const double s = std::sqrt(law.c);
  return MPSupport{law.sigma2 * (1.0 - s) * (1.0 - s),
                   law.sigma2 * (1.0 + s) * (1.0 + s), law.c > 1.0};
}

/// Residual of the defining fixed-point equation at (z, t).
inline double mp_residual(cplx z, cplx t, const LawParams &law) {
  const cplx rhs =
      1.0 / (-z + law.sigma2 / (1.0 + law.sigma2 * law.c * t));
  return std::abs(t - rhs);
}

inline cplx mp_t_tilde(cplx z, cplx t, const LawParams &law) {
  return -1.0 / (z * (1.0 + law.sigma2 * law.c * t));
}

namespace detail {

// Both roots of a t^2 + b t + 1 = 0, computed without cancellation.
inline std::array<cplx, 2> mp_quadratic_roots(cplx z, const LawParams &law) {
  const cplx a = law.sigma2 * law.c * z;
  const cplx b = z - law.sigma2 + law.sigma2 * law.c;
  const cplx disc = std::sqrt(b * b - 4.0 * a);
  const cplx q1 = -0.5 * (b + disc);
  const cplx q2 = -0.5 * (b - disc);
  const cplx q = std::abs(q1) >= std::abs(q2) ? q1 : q2;
  // Roots are q / a and 1 / q.
  return {q / a, 1.0 / q};
}

inline cplx mp_newton_polish(cplx z, cplx t, const LawParams &law) {
  const cplx a = law.sigma2 * law.c * z;
  const cplx b = z - law.sigma2 + law.sigma2 * law.c;
  const cplx p = (a * t + b) * t + 1.0;
  const cplx dp = 2.0 * a * t + b;
  if (std::abs(dp) == 0.0)
    return t;
  return t - p / dp;
}

inline cplx mp_root_upper_half_plane(cplx z, const LawParams &law) {
  const auto roots = mp_quadratic_roots(z, law);
  return roots[0].imag() >= roots[1].imag() ? roots[0] : roots[1];
}

} // namespace detail

/// Stieltjes transform pair (t, t~) of mu_{sigma2,c} at z.
///
/// Accepts Im z != 0 (lower half plane by conjugation) and real z outside
/// the support. Real z inside the support is a DomainError; the boundary
/// value there is obtained from mp_density instead.
inline StieltjesPair solve_mp_stieltjes(cplx z, const LawParams &law) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw DomainError("solve_mp_stieltjes", "z must be finite");
  if (z.imag() < 0.0) {
    StieltjesPair up = solve_mp_stieltjes(std::conj(z), law);
    return StieltjesPair{z, std::conj(up.t), std::conj(up.t_tilde),
                         up.residual};
  }

  const MPSupport sup = mp_support(law);
  cplx t;
  if (z.imag() == 0.0) {
    const double x = z.real();
    if (sup.contains(x))
      throw DomainError("solve_mp_stieltjes",
                        "real z = " + std::to_string(x) +
                            " lies in the support of the law");
    // Branch selection by continuity from Im z = 1e-8.
    const cplx ref = detail::mp_root_upper_half_plane(cplx(x, 1e-8), law);
    const auto roots = detail::mp_quadratic_roots(z, law);
    t = std::abs(roots[0] - ref) <= std::abs(roots[1] - ref) ? roots[0]
                                                              : roots[1];
    t = cplx(t.real(), 0.0);
  } else {
    t = detail::mp_root_upper_half_plane(z, law);
  }

  const double tol = 1e-12 * std::max(1.0, std::abs(t));
  double res = mp_residual(z, t, law);
  for (int step = 0; step < 8 && res > tol; ++step) {
    cplx next = detail::mp_newton_polish(z, t, law);
    if (z.imag() == 0.0)
      next = cplx(next.real(), 0.0);
    const double next_res = mp_residual(z, next, law);
    if (!(next_res < res))
      break;
    t = next;
    res = next_res;
  }
  if (!(res <= tol))
    throw NoConvergence("solve_mp_stieltjes",
                        "residual " + std::to_string(res) +
                            " above tolerance at z = (" +
                            std::to_string(z.real()) + ", " +
                            std::to_string(z.imag()) + ")");
  return StieltjesPair{z, t, mp_t_tilde(z, t, law), res};
}

inline StieltjesPair solve_mp_stieltjes(cplx z, const ModelParams &p) {
  return solve_mp_stieltjes(z, p.law());
}

/// Absolutely continuous part of the density. The atom at zero (c > 1) is
/// not included; see MPSupport::atom_mass.
inline double mp_density(double x, const LawParams &law) {
  const MPSupport sup = mp_support(law);
  if (!(x > sup.lower && x < sup.upper))
    return 0.0;
  return std::sqrt((sup.upper - x) * (x - sup.lower)) /
         (2.0 * kPi * law.sigma2 * law.c * x);
}

/// Cumulative distribution function of mu_{sigma2,c}, atom included.
/// The continuous part is integrated by adaptive Gauss-Kronrod after the
/// substitution x = lower + (upper - lower)(1 - cos theta)/2, which removes
/// the square-root edge behaviour.
inline double mp_cdf(double x, const LawParams &law, double tol = 1e-10) {
  const MPSupport sup = mp_support(law);
  const double atom = (x >= 0.0) ? sup.atom_mass(law.c) : 0.0;
  if (x <= sup.lower)
    return atom;
  const double total = law.c > 1.0 ? 1.0 / law.c : 1.0;
  if (x >= sup.upper)
    return atom + total;
  const double half = 0.5 * (sup.upper - sup.lower);
  const double theta_end = std::acos(std::clamp(1.0 - (x - sup.lower) / half,
                                                -1.0, 1.0));
  auto integrand = [&](double theta) {
    const double s = std::sin(theta);
    const double xv = sup.lower + half * (1.0 - std::cos(theta));
    if (xv <= 0.0) {
      // lower == 0: sin^2(theta) / x(theta) -> 2 / half as theta -> 0.
      return half * half * (2.0 / half) / (2.0 * kPi * law.sigma2 * law.c);
    }
    return half * half * s * s / (2.0 * kPi * law.sigma2 * law.c * xv);
  };
  const double cont = boost::math::quadrature::gauss_kronrod<double, 31>::
      integrate(integrand, 0.0, theta_end, 20, tol);
  return atom + std::clamp(cont, 0.0, total);
}

/// 1 - sigma2^2 c |z t t~|^2, strictly positive on the upper half plane.
inline double zttt_bound_gap(cplx z, const LawParams &law) {
  if (!(z.imag() > 0.0))
    throw DomainError("zttt_bound_gap", "requires Im z > 0");
  const StieltjesPair sp = solve_mp_stieltjes(z, law);
  return 1.0 - law.sigma2 * law.sigma2 * law.c *
                   std::norm(z * sp.t * sp.t_tilde);
}

} // namespace bhlab
