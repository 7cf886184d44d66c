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
#include <functional>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "bhlab/block_hankel.hpp"
#include "bhlab/helffer_sjostrand.hpp"
#include "bhlab/linalg.hpp"
#include "bhlab/spectral.hpp"

namespace {

using bhlab::cplx;
using bhlab::HankelEnsembleSample;
using bhlab::LawParams;
using bhlab::MatrixXc;
using bhlab::ModelParams;

HankelEnsembleSample zero_sample(const ModelParams &p) {
  return HankelEnsembleSample(
      p, std::vector<cplx>(static_cast<std::size_t>(p.M() * p.sequence_length()), 0.0));
}

// Oracle CDF by tanh-sinh quadrature of the density formula.
double cdf_oracle(double x, const LawParams &law) {
  const double s = std::sqrt(law.c);
  const double a = law.sigma2 * (1 - s) * (1 - s), b = law.sigma2 * (1 + s) * (1 + s);
  const double atom = (law.c > 1 && x >= 0) ? 1 - 1 / law.c : 0.0;
  if (x <= a)
    return atom;
  const double hi = std::min(x, b);
  boost::math::quadrature::tanh_sinh<double> ts;
  const double cont = ts.integrate(
      [&](double v) {
        return std::sqrt(std::max(0.0, (b - v) * (v - a))) / (2 * M_PI * law.sigma2 * law.c * v);
      },
      a, hi, 1e-13);
  return atom + cont;
}

Eigen::VectorXd quantile_spectrum(const LawParams &law, int n) {
  const double b = law.sigma2 * std::pow(1 + std::sqrt(law.c), 2);
  Eigen::VectorXd out(n);
  for (int k = 0; k < n; ++k) {
    const double u = (k + 0.5) / n;
    double lo = 0.0, hi = b;
    if (cdf_oracle(0.0, law) >= u) {
      out(k) = 0.0;
      continue;
    }
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (cdf_oracle(mid, law) < u ? lo : hi) = mid;
    }
    out(k) = 0.5 * (lo + hi);
  }
  return out;
}

// Smooth step from an exp(-1/t) mollifier, used for a cutoff chosen
// independently of the library's.
double h(double t) { return t > 0 ? std::exp(-1 / t) : 0.0; }
double dh(double t) { return t > 0 ? std::exp(-1 / t) / (t * t) : 0.0; }
double step(double s) { return h(s) / (h(s) + h(1 - s)); }
double dstep(double s) {
  const double d = h(s) + h(1 - s);
  return (dh(s) * h(1 - s) + h(s) * dh(1 - s)) / (d * d);
}
double chi(double y) { return 1 - step((y - 0.3) / 0.6); }
double dchi(double y) { return -dstep((y - 0.3) / 0.6) / 0.6; }

// Oracle: with dbar = (d/dx + i d/dy)/2 and F the order-k almost analytic
// extension, sum_j phi(l_j)/n = (2/pi) Re int_{y>0} dbar F(z) s(z) dx dy.
double hs_oracle(const bhlab::SmoothTestFunction &phi, int k, const Eigen::VectorXd &eigs) {
  boost::math::quadrature::tanh_sinh<double> ts;
  auto dbarF = [&](double x, double y) {
    const auto d = phi.derivatives(x);
    cplx iy(0, y), pw = 1.0, sum = 0.0;
    double fact = 1.0;
    for (int l = 0; l <= k; ++l) {
      if (l > 0) {
        pw *= iy;
        fact *= l;
      }
      sum += d[static_cast<std::size_t>(l)] * pw / fact;
    }
    return 0.5 * (d[static_cast<std::size_t>(k + 1)] * pw / fact * chi(y) +
                  cplx(0, 1) * dchi(y) * sum);
  };
  double total = 0.0;
  const double cuts[] = {0.0, 1e-3, 1e-2, 0.1, 0.3, 0.6, 0.9};
  for (int c = 0; c + 1 < 7; ++c) {
    total += ts.integrate(
        [&](double y) {
          return ts.integrate(
              [&](double x) {
                return (dbarF(x, y) * bhlab::stieltjes_of_spectrum(eigs, cplx(x, y))).real();
              },
              phi.support_lower, phi.support_upper, 1e-10);
        },
        cuts[c], cuts[c + 1], 1e-10);
  }
  return 2 * total / M_PI;
}

TEST(Spectral, ScalarCase) {
  const ModelParams p(1.0, 1, 1, 25);
  const auto s = bhlab::sample(p, 8, 0);
  double sum = 0;
  for (const cplx &v : s.sequences())
    sum += std::norm(v);
  const auto r = bhlab::eigen(s);
  ASSERT_EQ(r.size(), 1);
  EXPECT_NEAR(r.eigenvalues(0), sum, 1e-14 * sum);
}

TEST(Spectral, ZeroInput) {
  const ModelParams p(1.0, 2, 3, 5);
  const auto r = bhlab::eigen(zero_sample(p));
  EXPECT_EQ(r.size(), 6);
  EXPECT_EQ(r.eigenvalues.cwiseAbs().maxCoeff(), 0.0);
  const auto ev = bhlab::resolvent_trace(r, cplx(0, 1));
  EXPECT_NEAR(std::abs(ev.trace_normalized - cplx(0, 1)), 0.0, 1e-15);
}

TEST(Spectral, EigenvaluesSortedAndReconstruct) {
  const ModelParams p(1.0, 4, 16, 100);
  const auto s = bhlab::sample(p, 3, 1);
  const auto r = bhlab::eigen(s);
  for (bhlab::Index k = 1; k < r.size(); ++k)
    EXPECT_LE(r.eigenvalues(k - 1), r.eigenvalues(k));
  EXPECT_GE(r.min(), -1e-10 * r.scale());
  const auto d = bhlab::eigen_decompose(s);
  const MatrixXc G = s.gram();
  const double gn = bhlab::spectral_norm(G);
  for (bhlab::Index k : {0, 17, 40, 63}) {
    const auto v = d.eigenvectors.col(k);
    EXPECT_LT((G * v - d.eigenvalues(k) * v).norm(), 1e-8 * gn);
    EXPECT_NEAR(d.eigenvalues(k), r.eigenvalues(k), 1e-12 * gn);
  }
}

TEST(Spectral, RankDeficiencyWhenWide) {
  const ModelParams p(1.0, 8, 8, 40);
  for (std::uint64_t t = 0; t < 3; ++t) {
    const auto r = bhlab::eigen(bhlab::sample(p, 2, t));
    EXPECT_EQ(bhlab::count_near_zero(r.eigenvalues, 1e-8 * r.scale()), 64 - 40);
    EXPECT_GT(r.eigenvalues(24), 1e-8 * r.scale());
  }
}

TEST(Spectral, ResolventBounds) {
  const ModelParams p(1.0, 4, 8, 64);
  const auto s = bhlab::sample(p, 21, 0);
  const auto r = bhlab::eigen(s);
  const double upper = bhlab::mp_support(p.law()).upper;
  for (double y : {0.1, 0.5, 1.0})
    for (double x = -2; x <= upper + 2; x += 0.25) {
      const cplx z(x, y);
      const cplx tr = bhlab::resolvent_trace(r, z).trace_normalized;
      EXPECT_GT(tr.imag(), 0.0);
      EXPECT_GT((z * tr).imag(), 0.0);
      EXPECT_LE(std::abs(tr), 1 / y + 1e-12);
    }
  for (cplx z : {cplx(0, 1), cplx(1, 0.3), cplx(-1, 2)}) {
    const auto ev = bhlab::resolvent(s, z);
    ASSERT_TRUE(ev.Q.has_value());
    EXPECT_LE(bhlab::spectral_norm(*ev.Q), 1 / z.imag() * (1 + 1e-12));
    EXPECT_NEAR(std::abs(ev.trace_normalized - bhlab::resolvent_trace(r, z).trace_normalized),
                0.0, 1e-12);
  }
}

TEST(Spectral, ResolventIdentity) {
  const ModelParams p(1.0, 4, 16, 128);
  const cplx z(1, 1);
  for (std::uint64_t t = 0; t < 3; ++t) {
    const auto s = bhlab::sample(p, 4, t);
    const MatrixXc G = s.gram();
    const MatrixXc Q = *bhlab::resolvent(s, z).Q;
    const MatrixXc I = MatrixXc::Identity(G.rows(), G.rows());
    const double res = (Q + I / z - Q * G / z).norm();
    EXPECT_LE(res, 1e-10 * bhlab::spectral_norm(Q) * bhlab::spectral_norm(G));
  }
}

TEST(Spectral, DomainAndSizeErrors) {
  const ModelParams p(1.0, 2, 4, 16);
  const auto s = bhlab::sample(p, 1, 0);
  const auto r = bhlab::eigen(s);
  EXPECT_THROW(bhlab::resolvent_trace(r, cplx(1, 0)), bhlab::DomainError);
  EXPECT_THROW(bhlab::resolvent_trace(r, cplx(1, -1)), bhlab::DomainError);
  EXPECT_THROW(bhlab::resolvent(s, cplx(0, 0)), bhlab::DomainError);
  bhlab::SpectralOptions small;
  small.size_guard = 4;
  EXPECT_THROW(bhlab::eigen(s, small), bhlab::SizeGuardExceeded);
}

TEST(Spectral, KsOfExactQuantiles) {
  for (auto law : {LawParams{1, 0.5}, LawParams{1, 2}, LawParams{2, 0.25}}) {
    const int n = 400;
    const Eigen::VectorXd q = quantile_spectrum(law, n);
    const double d = bhlab::esd_ks_distance(q, law);
    EXPECT_LE(d, 0.5 / n + 1e-7) << "c=" << law.c;
    EXPECT_GE(d, 0.5 / n - 1e-7) << "c=" << law.c;
  }
}

TEST(Spectral, KsDegenerate) {
  EXPECT_NEAR(bhlab::esd_ks_distance(Eigen::VectorXd::Zero(10), LawParams{1, 0.5}), 1.0, 1e-15);
  // For c > 1 zeros match the atom, leaving the continuous mass 1/c.
  EXPECT_NEAR(bhlab::esd_ks_distance(Eigen::VectorXd::Zero(10), LawParams{1, 4}), 0.25, 1e-12);
}

TEST(Spectral, KsSingleLargeTrial) {
  const ModelParams p(1.0, 32, 32, 2048);
  const auto r = bhlab::eigen(bhlab::sample(p, 1, 0));
  EXPECT_LT(bhlab::esd_ks_distance(r), 0.05);
}

TEST(Spectral, KsWithAtom) {
  const ModelParams p(1.0, 8, 16, 64);
  const auto r = bhlab::eigen(bhlab::sample(p, 1, 0));
  EXPECT_LT(bhlab::esd_ks_distance(r), 0.1);
}

TEST(Spectral, TraceFunctional) {
  const ModelParams p(1.0, 4, 8, 64);
  const auto s = bhlab::sample(p, 5, 0);
  const auto r = bhlab::eigen(s);
  EXPECT_NEAR(bhlab::trace_functional(r, [](double) { return 1.0; }), 32.0, 1e-12);
  const double fro = s.assemble().squaredNorm();
  EXPECT_NEAR(bhlab::trace_functional(r, [](double x) { return x; }), fro, 1e-12 * fro);
  // A bump living outside the support neighbourhood sees nothing.
  const auto far = bhlab::smooth_bump(bhlab::mp_support(p.law()).upper + 1.5, 0.5);
  EXPECT_EQ(bhlab::trace_functional(r, [&](double x) { return far(x); }), 0.0);
}

TEST(Spectral, SmoothBumpDerivatives) {
  const auto b = bhlab::smooth_bump(1.0, 0.5, 2.0);
  EXPECT_NEAR(b(1.0), 2.0, 1e-15);
  EXPECT_EQ(b(1.6), 0.0);
  EXPECT_EQ(b(0.4), 0.0);
  // Finite-difference check of the first three derivatives.
  for (double x : {0.7, 0.95, 1.2}) {
    const double hstep = 1e-4;
    const auto d = b.derivatives(x), dp = b.derivatives(x + hstep), dm = b.derivatives(x - hstep);
    for (int l = 0; l < 3; ++l)
      EXPECT_NEAR((dp[l] - dm[l]) / (2 * hstep), d[l + 1], 1e-5 * (1 + std::abs(d[l + 1])));
  }
}

TEST(Spectral, CutoffIsPlateau) {
  EXPECT_EQ(bhlab::plateau_cutoff(0.0), 1.0);
  EXPECT_EQ(bhlab::plateau_cutoff(0.5), 1.0);
  EXPECT_EQ(bhlab::plateau_cutoff(-0.3), 1.0);
  EXPECT_EQ(bhlab::plateau_cutoff(1.0), 0.0);
  EXPECT_EQ(bhlab::plateau_cutoff(2.0), 0.0);
  for (double y : {0.6, 0.75, 0.9}) {
    const double hstep = 1e-6;
    EXPECT_NEAR((bhlab::plateau_cutoff(y + hstep) - bhlab::plateau_cutoff(y - hstep)) / (2 * hstep),
                bhlab::plateau_cutoff_derivative(y), 1e-6);
  }
}

TEST(HelfferSjostrand, ZeroOnSpectrum) {
  Eigen::VectorXd eigs(3);
  eigs << 0.5, 1.0, 1.5;
  const auto r = bhlab::helffer_sjostrand_check(eigs, bhlab::smooth_bump(5.0, 0.5));
  EXPECT_EQ(r.direct, 0.0);
  EXPECT_NEAR(r.quadrature, 0.0, 1e-4);
}

TEST(HelfferSjostrand, PointMass) {
  Eigen::VectorXd eigs(1);
  eigs << 1.0;
  const auto phi = bhlab::smooth_bump(1.0, 0.8);
  const auto r = bhlab::helffer_sjostrand_check(eigs, phi);
  EXPECT_NEAR(r.direct, 1.0, 1e-15);
  EXPECT_NEAR(r.quadrature, 1.0, 1e-3);
  const double oracle = hs_oracle(phi, 2, eigs);
  EXPECT_NEAR(oracle, 1.0, 1e-3);
  EXPECT_NEAR(r.quadrature, oracle, 1e-3);
}

TEST(HelfferSjostrand, HigherOrder) {
  Eigen::VectorXd eigs(4);
  eigs << 0.2, 0.9, 1.1, 2.4;
  const auto phi = bhlab::smooth_bump(1.0, 1.2, 0.7);
  bhlab::HelfferSjostrandOptions opt;
  opt.k = 4;
  const auto r = bhlab::helffer_sjostrand_check(eigs, phi, opt);
  EXPECT_NEAR(r.quadrature, r.direct, 1e-3);
}

TEST(HelfferSjostrand, MarcenkoPasturSpectrum) {
  const ModelParams p(1.0, 16, 16, 512);
  const auto r = bhlab::eigen(bhlab::sample(p, 12, 0));
  const auto phi = bhlab::smooth_bump(1.5, 1.8);
  const auto hs = bhlab::helffer_sjostrand_check(r, phi);
  EXPECT_NEAR(hs.direct, hs.quadrature, 1e-3);
  EXPECT_GT(hs.evaluations, 0);
}

TEST(HelfferSjostrand, BudgetAndArguments) {
  Eigen::VectorXd eigs(1);
  eigs << 1.0;
  bhlab::HelfferSjostrandOptions opt;
  opt.max_evaluations = 100;
  EXPECT_THROW(bhlab::helffer_sjostrand_check(eigs, bhlab::smooth_bump(1.0, 0.8), opt),
               bhlab::QuadratureBudgetExceeded);
  opt = {};
  opt.k = 0;
  EXPECT_THROW(bhlab::helffer_sjostrand_check(eigs, bhlab::smooth_bump(1.0, 0.8), opt),
               bhlab::InvalidArgument);
}

} // namespace
