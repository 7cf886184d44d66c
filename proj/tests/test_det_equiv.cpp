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
#include <random>

#include <gtest/gtest.h>

#include "bhlab/det_equiv.hpp"
#include "bhlab/linalg.hpp"

namespace {

using bhlab::cplx;
using bhlab::DetEquivOptions;
using bhlab::FromMeanQ;
using bhlab::Index;
using bhlab::MatrixXc;
using bhlab::ModelParams;
using bhlab::SelfConsistent;

// Oracle Toeplitzification straight from the definition: coefficient k is
// the mean of the k-th lower diagonals of the P diagonal blocks of size K.
MatrixXc toeplitz_dense(const MatrixXc &A, Index K, Index R, Index Q) {
  const Index P = A.rows() / K;
  MatrixXc T = MatrixXc::Zero(R, R);
  for (Index i = 0; i < R; ++i)
    for (Index j = 0; j < R; ++j) {
      const Index k = i - j;
      if (std::abs(k) > Q - 1)
        continue;
      cplx acc = 0.0;
      for (Index p = 0; p < P; ++p)
        for (Index u = 0; u < K; ++u)
          if (u + k >= 0 && u + k < K)
            acc += A(p * K + u + k, p * K + u);
      T(i, j) = acc / double(P * K);
    }
  return T;
}

// Recomputes R from a mean Q estimate with plain dense algebra.
MatrixXc R_oracle(const ModelParams &p, cplx z, const MatrixXc &EQ) {
  const Index L = p.L(), N = p.N();
  MatrixXc A = MatrixXc::Identity(N, N) + p.sigma2() * p.c() * toeplitz_dense(EQ, L, N, L);
  const MatrixXc H = A.inverse();
  MatrixXc B = p.sigma2() * toeplitz_dense(H, N, L, L);
  B.diagonal().array() -= z;
  return B.inverse();
}

TEST(DetEquiv, CollapseAtLEqualsOne) {
  for (auto z : {cplx(1, 1), cplx(-0.5, 0.2), cplx(3, 0.1)}) {
    const ModelParams p(1.0, 16, 1, 32);
    const auto s = bhlab::solve_det_equiv(p, z, SelfConsistent{});
    const cplx t = bhlab::solve_mp_stieltjes(z, p).t;
    EXPECT_NEAR(std::abs(s.R(0, 0) - t), 0.0, 1e-10);
    EXPECT_NEAR(bhlab::toeplitzified_gap(s, t), 0.0, 1e-10);
  }
}

TEST(DetEquiv, SelfConsistentFixedPointIsScalar) {
  const ModelParams p(1.0, 8, 8, 128);
  const cplx z(1, 1);
  const auto s = bhlab::solve_det_equiv(p, z, SelfConsistent{});
  const cplx t = bhlab::solve_mp_stieltjes(z, p).t;
  EXPECT_LT((s.R - t * MatrixXc::Identity(8, 8)).norm(), 1e-9);
  EXPECT_LE(s.residual, 1e-10);
  EXPECT_EQ(s.mode, "self_consistent");
  // The returned state satisfies the coupled equations.
  const MatrixXc EQ = bhlab::kron_identity(p.M(), s.R);
  EXPECT_LT((R_oracle(p, z, EQ) - s.R).norm(), 1e-9);
}

TEST(DetEquiv, ConvergesFromOtherStart) {
  const ModelParams p(1.0, 4, 6, 48);
  const cplx z(0.5, 0.8);
  std::mt19937_64 g(1);
  std::normal_distribution<double> d;
  MatrixXc R0(6, 6);
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 6; ++j)
      R0(i, j) = 0.1 * cplx(d(g), d(g));
  DetEquivOptions opt;
  opt.R0 = R0;
  const auto s = bhlab::solve_det_equiv(p, z, SelfConsistent{}, opt);
  const cplx t = bhlab::solve_mp_stieltjes(z, p).t;
  EXPECT_LT((s.R - t * MatrixXc::Identity(6, 6)).norm(), 1e-8);
}

TEST(DetEquiv, FromMeanQMatchesOracle) {
  const ModelParams p(1.3, 3, 4, 24);
  const cplx z(0.7, 0.6);
  std::mt19937_64 g(2);
  std::normal_distribution<double> d;
  // A Hermitian-part-positive perturbation of the scalar solution.
  const cplx t = bhlab::solve_mp_stieltjes(z, p).t;
  MatrixXc EQ = t * MatrixXc::Identity(12, 12);
  for (Index i = 0; i < 12; ++i)
    for (Index j = 0; j < 12; ++j)
      EQ(i, j) += 0.01 * cplx(d(g), d(g));
  const auto s = bhlab::solve_det_equiv(p, z, FromMeanQ{EQ});
  EXPECT_EQ(s.mode, "from_mean_Q");
  EXPECT_LT((s.R - R_oracle(p, z, EQ)).norm(), 1e-12);
  // tau(H) profile length.
  EXPECT_EQ(s.tauH.max_lag(), 3);
}

TEST(DetEquiv, FromScalarMeanReproducesSelfConsistent) {
  const ModelParams p(1.0, 4, 8, 64);
  const cplx z(1, 0.5);
  const auto sc = bhlab::solve_det_equiv(p, z, SelfConsistent{});
  const auto fm =
      bhlab::solve_det_equiv(p, z, FromMeanQ{bhlab::kron_identity(p.M(), sc.R)});
  EXPECT_LT((sc.R - fm.R).norm(), 1e-9);
}

TEST(DetEquiv, NormBounds) {
  for (auto z : {cplx(1, 1), cplx(0.2, 0.05), cplx(-1, 3)}) {
    const ModelParams p(1.0, 4, 8, 64);
    const auto s = bhlab::solve_det_equiv(p, z, SelfConsistent{});
    EXPECT_LE(s.h_norm, std::abs(z) / z.imag() + 1e-8);
    EXPECT_LE(s.r_norm, 1 / z.imag() + 1e-8);
    EXPECT_GE(bhlab::min_hermitian_eigenvalue(bhlab::hermitian_imag_part(s.R)), 0.0);
  }
}

TEST(DetEquiv, LargeImaginaryTail) {
  const ModelParams p(1.0, 4, 8, 64);
  const cplx z(0, 1e4);
  const auto s = bhlab::solve_det_equiv(p, z, SelfConsistent{});
  const MatrixXc D = s.R + MatrixXc::Identity(8, 8) / z;
  EXPECT_LT(bhlab::spectral_norm(D), 10 / std::norm(z));
}

TEST(DetEquiv, DomainGuards) {
  const ModelParams p(1.0, 4, 8, 64);
  EXPECT_THROW(bhlab::solve_det_equiv(p, cplx(1, 0), SelfConsistent{}), bhlab::DomainError);
  EXPECT_THROW(bhlab::solve_det_equiv(p, cplx(1, 0.01), SelfConsistent{}), bhlab::DomainError);
  DetEquivOptions opt;
  opt.min_imag = 0.0;
  EXPECT_NO_THROW(bhlab::solve_det_equiv(p, cplx(1, 0.01), SelfConsistent{}, opt));
  opt = {};
  opt.n_guard = 32;
  EXPECT_THROW(bhlab::solve_det_equiv(p, cplx(1, 1), SelfConsistent{}, opt),
               bhlab::SizeGuardExceeded);
  EXPECT_THROW(bhlab::solve_det_equiv(p, cplx(1, 1), FromMeanQ{MatrixXc::Identity(3, 3)}),
               bhlab::DimensionMismatch);
  opt = {};
  opt.max_iterations = 1;
  opt.tolerance = 0.0;
  EXPECT_THROW(bhlab::solve_det_equiv(p, cplx(1, 1), SelfConsistent{}, opt),
               bhlab::NoConvergence);
}

TEST(DetEquiv, MeanResolventIsThreadInvariant) {
  const ModelParams p(1.0, 4, 4, 32);
  const cplx z(1, 1);
  const auto a = bhlab::estimate_mean_resolvent(p, z, 40, 9, 1);
  const auto b = bhlab::estimate_mean_resolvent(p, z, 40, 9, 3);
  EXPECT_EQ((a.estimate.mean_Q - b.estimate.mean_Q).norm(), 0.0);
  EXPECT_EQ(a.estimate.trace_records, b.estimate.trace_records);
  EXPECT_EQ(a.estimate.trials, 40);
  EXPECT_EQ(a.estimate.trace_records.size(), 40u);
  EXPECT_THROW(bhlab::estimate_mean_resolvent(p, z, 5, 9), bhlab::InvalidArgument);
}

TEST(DetEquiv, DeltaDefinition) {
  const ModelParams p(1.0, 3, 4, 24);
  const cplx z(1, 1);
  const auto r = bhlab::estimate_mean_resolvent(p, z, 20, 3);
  // mean_Q is the plain average of the per-trial resolvents.
  MatrixXc sum = MatrixXc::Zero(12, 12);
  for (std::uint64_t t = 0; t < 20; ++t) {
    const auto s = bhlab::sample(p, 3, t);
    MatrixXc A = s.gram();
    A.diagonal().array() -= z;
    sum += A.inverse();
  }
  EXPECT_LT((r.estimate.mean_Q - sum / 20.0).norm(), 1e-12);
  const MatrixXc expect = r.estimate.mean_Q - bhlab::kron_identity(p.M(), r.state.R);
  EXPECT_LT((r.estimate.delta - expect).norm(), 1e-14);
  MatrixXc hat = MatrixXc::Zero(4, 4);
  for (Index m = 0; m < 3; ++m)
    hat += r.estimate.delta.block(m * 4, m * 4, 4, 4);
  EXPECT_LT((r.estimate.hat_delta - hat / 3.0).norm(), 1e-14);
  EXPECT_LT((r.state.R - R_oracle(p, z, r.estimate.mean_Q)).norm(), 1e-12);
}

TEST(DetEquiv, DeltaShrinksWithSize) {
  // (1/ML)|Tr Delta| at a larger setting is smaller than at a small one.
  const cplx z(1, 1);
  const auto small = bhlab::estimate_mean_resolvent(ModelParams(1.0, 2, 4, 16), z, 400, 1);
  const auto large = bhlab::estimate_mean_resolvent(ModelParams(1.0, 8, 4, 64), z, 400, 1);
  auto tr = [](const bhlab::DeltaEstimate &e) {
    return std::abs(e.delta.trace()) / double(e.delta.rows());
  };
  EXPECT_LT(tr(large.estimate), tr(small.estimate));
}

} // namespace
