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

/** @file helffer_sjostrand.hpp
    @brief Recovering int phi dmu from a Stieltjes transform.

    With the almost-analytic extension

        phibar_k(x + iy) = sum_{l<=k} phi^(l)(x) (iy)^l / l! chi(y)

    and d = d/dx + i d/dy, the identity checked here is

        int phi dmu = (1/pi) Re int_{y>0} d phibar_k(z) s(z) dx dy,

    where d phibar_k = phi^(k+1)(x) (iy)^k / k! chi(y)
                       + i chi'(y) sum_{l<=k} phi^(l)(x) (iy)^l / l!.
*/

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>

#include <boost/math/differentiation/autodiff.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bhlab/spectral.hpp"
#include "bhlab/types.hpp"

namespace bhlab {

/// Highest derivative order a SmoothTestFunction may be asked for.
inline constexpr int kMaxDerivativeOrder = 8;

/// A compactly supported smooth function with derivatives on demand.
struct SmoothTestFunction {
  double support_lower = 0.0;
  double support_upper = 0.0;
  /// derivatives(x) returns phi^(l)(x) for l = 0..kMaxDerivativeOrder.
  std::function<std::array<double, kMaxDerivativeOrder + 1>(double)> derivatives;

  double operator()(double x) const { return derivatives(x)[0]; }
};

/// height * exp(1 - 1/(1 - r^2)), r = (x - center)/half_width; equal to
/// `height` at the center and supported on center +- half_width.
inline SmoothTestFunction smooth_bump(double center, double half_width,
                                      double height = 1.0) {
  if (!(half_width > 0.0))
    throw InvalidArgument("smooth_bump", "half_width must be positive");
  SmoothTestFunction f;
  f.support_lower = center - half_width;
  f.support_upper = center + half_width;
  f.derivatives = [=](double x) {
    std::array<double, kMaxDerivativeOrder + 1> out{};
    const double r = (x - center) / half_width;
    if (!(std::abs(r) < 1.0))
      return out;
    using namespace boost::math::differentiation;
    const auto xv = make_fvar<double, kMaxDerivativeOrder>(x);
    const auto rv = (xv - center) / half_width;
    const auto val = height * exp(1.0 - 1.0 / (1.0 - rv * rv));
    for (int l = 0; l <= kMaxDerivativeOrder; ++l) {
      const double v = val.derivative(static_cast<std::size_t>(l));
      // Very close to the edge the chain rule multiplies 0 by huge powers.
      out[static_cast<std::size_t>(l)] = std::isfinite(v) ? v : 0.0;
    }
    return out;
  };
  return f;
}

namespace detail {

inline double mollifier_f(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

inline double mollifier_df(double t) {
  return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0;
}

// Smooth step from 0 (t <= 0) to 1 (t >= 1).
inline double smooth_step(double t) {
  const double a = mollifier_f(t), b = mollifier_f(1.0 - t);
  return a / (a + b);
}

inline double smooth_step_derivative(double t) {
  if (t <= 0.0 || t >= 1.0)
    return 0.0;
  const double a = mollifier_f(t), b = mollifier_f(1.0 - t);
  const double da = mollifier_df(t), db = -mollifier_df(1.0 - t);
  return (da * b - a * db) / ((a + b) * (a + b));
}

} // namespace detail

/// Plateau cutoff: 1 on |y| <= 1/2, 0 on |y| >= 1, C^infinity.
inline double plateau_cutoff(double y) {
  return detail::smooth_step(2.0 * (1.0 - std::abs(y)));
}

inline double plateau_cutoff_derivative(double y) {
  const double s = y >= 0.0 ? 1.0 : -1.0;
  return -2.0 * s * detail::smooth_step_derivative(2.0 * (1.0 - std::abs(y)));
}

/// d phibar_k at z = x + iy.
inline cplx almost_analytic_dbar(const SmoothTestFunction &phi, int k, double x,
                                 double y) {
  const auto d = phi.derivatives(x);
  const cplx iy(0.0, y);
  cplx pw = 1.0;   // (iy)^l / l!
  cplx sum = 0.0;  // sum_{l<=k} phi^(l) (iy)^l / l!
  for (int l = 0; l <= k; ++l) {
    if (l > 0)
      pw *= iy / static_cast<double>(l);
    sum += d[static_cast<std::size_t>(l)] * pw;
  }
  const cplx main = d[static_cast<std::size_t>(k + 1)] * pw * plateau_cutoff(y);
  return main + cplx(0.0, 1.0) * plateau_cutoff_derivative(y) * sum;
}

struct HelfferSjostrandOptions {
  int k = 2;
  double y_min = 1e-4;
  /// Absolute tolerance on the final quadrature value.
  double tolerance = 1e-6;
  /// Cap on evaluations of the Stieltjes transform.
  std::int64_t max_evaluations = 20'000'000;
};

struct HelfferSjostrandResult {
  double direct = 0.0;
  double quadrature = 0.0;
  double error_estimate = 0.0;
  std::int64_t evaluations = 0;
};

namespace detail {

// Adaptive Gauss-Kronrod with an absolute tolerance shared proportionally
// to interval length. Boost supplies the rule and its error estimate.
class AbsoluteGK {
public:
  AbsoluteGK(std::int64_t *counter, std::int64_t budget)
      : counter_(counter), budget_(budget) {}

  template <class F>
  double integrate(const F &f, double a, double b, double tol, double *err) {
    double e = 0.0;
    const double v = recurse(f, a, b, tol / (b - a), 0, &e);
    if (err)
      *err = e;
    return v;
  }

private:
  template <class F>
  double recurse(const F &f, double a, double b, double density, int depth,
                 double *err) {
    double e = 0.0;
    *counter_ += 15;
    if (*counter_ > budget_)
      throw QuadratureBudgetExceeded("helffer_sjostrand_check",
                                     "evaluation budget of " +
                                         std::to_string(budget_) + " exhausted");
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, 0, 0.0, &e);
    if (e <= density * (b - a) || depth >= 40) {
      *err += e;
      return v;
    }
    const double m = 0.5 * (a + b);
    return recurse(f, a, m, density, depth + 1, err) +
           recurse(f, m, b, density, depth + 1, err);
  }

  std::int64_t *counter_;
  std::int64_t budget_;
};

} // namespace detail

/// Compares (1/n) sum phi(lambda_k) with the Helffer-Sjostrand quadrature
/// against s(z) = (1/n) sum 1/(lambda_k - z). The y-range (0, 1] is cut at
/// y_min and split geometrically; the neglected strip contributes
/// O(y_min^(k+1)).
inline HelfferSjostrandResult
helffer_sjostrand_check(const Eigen::VectorXd &eigenvalues,
                        const SmoothTestFunction &phi,
                        const HelfferSjostrandOptions &opt = {}) {
  if (opt.k < 1 || opt.k + 1 > kMaxDerivativeOrder)
    throw InvalidArgument("helffer_sjostrand_check", "k out of range");
  if (!(opt.y_min > 0.0 && opt.y_min < 0.5))
    throw InvalidArgument("helffer_sjostrand_check", "y_min must lie in (0, 1/2)");
  if (eigenvalues.size() == 0)
    throw InvalidArgument("helffer_sjostrand_check", "empty spectrum");

  HelfferSjostrandResult out;
  for (Index j = 0; j < eigenvalues.size(); ++j)
    out.direct += phi(eigenvalues(j));
  out.direct /= static_cast<double>(eigenvalues.size());

  std::int64_t evals = 0;
  detail::AbsoluteGK inner(&evals, opt.max_evaluations);
  detail::AbsoluteGK outer(&evals, std::numeric_limits<std::int64_t>::max());
  const double xa = phi.support_lower, xb = phi.support_upper;

  // Break points: geometric decades from y_min up to 1/2, then [1/2, 1].
  std::vector<double> cuts{opt.y_min};
  while (cuts.back() * 10.0 < 0.5)
    cuts.push_back(cuts.back() * 10.0);
  cuts.push_back(0.5);
  cuts.push_back(1.0);

  const double seg_tol = opt.tolerance * kPi / static_cast<double>(cuts.size());
  double total = 0.0, err_total = 0.0;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    auto fy = [&](double y) {
      auto fx = [&](double x) {
        return (almost_analytic_dbar(phi, opt.k, x, y) *
                stieltjes_of_spectrum(eigenvalues, cplx(x, y)))
            .real();
      };
      double e = 0.0;
      return inner.integrate(fx, xa, xb, 0.1 * seg_tol, &e);
    };
    double e = 0.0;
    total += outer.integrate(fy, cuts[s], cuts[s + 1], seg_tol, &e);
    err_total += e;
  }
  out.quadrature = total / kPi;
  out.error_estimate = err_total / kPi;
  out.evaluations = evals;
  return out;
}

inline HelfferSjostrandResult
helffer_sjostrand_check(const SpectralResult &r, const SmoothTestFunction &phi,
                        const HelfferSjostrandOptions &opt = {}) {
  return helffer_sjostrand_check(r.eigenvalues, phi, opt);
}

} // namespace bhlab
