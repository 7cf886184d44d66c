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

/** @file block_hankel.hpp
    @brief The Gaussian block-Hankel ensemble.

    W is the ML x N matrix obtained by stacking M Hankel blocks W^{(m)} of
    size L x N with W^{(m)}_{i,j} = w_{m,i+j-1} (1-based). The scalars
    w_{m,n}, n = 1..N+L-1, are i.i.d. circular complex Gaussians with
    E|w|^2 = sigma2 / N and E w^2 = 0.

    Indices in the code are 0-based, so W^{(m)}(i,j) = w(m, i+j).
*/

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "bhlab/rng.hpp"
#include "bhlab/types.hpp"

namespace bhlab {

class HankelEnsembleSample {
public:
  HankelEnsembleSample() = default;

  /// Wraps explicit sequences; `w` holds M rows of N+L-1 values, row-major.
  HankelEnsembleSample(ModelParams params, std::vector<cplx> w,
                       std::uint64_t seed = 0, std::uint64_t trial_index = 0)
      : params_(params), seed_(seed), trial_(trial_index), w_(std::move(w)) {
    if (static_cast<std::int64_t>(w_.size()) !=
        params_.M() * params_.sequence_length())
      throw DimensionMismatch("HankelEnsembleSample",
                              "expected M*(N+L-1) sequence values");
  }

  /// Draws the sample for (seed, trial_index). Each w_{m,n} depends only on
  /// (seed, trial_index, m, n).
  static HankelEnsembleSample draw(const ModelParams &params,
                                   std::uint64_t seed,
                                   std::uint64_t trial_index) {
    const std::int64_t len = params.sequence_length();
    if (params.M() > 0xffffffffLL || len > 0xffffffffLL)
      throw SizeGuardExceeded("sample", "sequence index exceeds 32 bits");
    const double scale =
        std::sqrt(params.sigma2() / (2.0 * static_cast<double>(params.N())));
    std::vector<cplx> w(static_cast<std::size_t>(params.M() * len));
    for (std::int64_t m = 0; m < params.M(); ++m)
      for (std::int64_t n = 0; n < len; ++n)
        w[static_cast<std::size_t>(m * len + n)] =
            scale * ensemble_normal(seed, trial_index,
                                    static_cast<std::uint64_t>(m),
                                    static_cast<std::uint64_t>(n));
    return HankelEnsembleSample(params, std::move(w), seed, trial_index);
  }

  const ModelParams &params() const noexcept { return params_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t trial_index() const noexcept { return trial_; }
  const std::vector<cplx> &sequences() const noexcept { return w_; }

  /// w_{m,n} with 0-based m and n.
  cplx w(std::int64_t m, std::int64_t n) const {
    return w_[static_cast<std::size_t>(m * params_.sequence_length() + n)];
  }

  /// Dense ML x N matrix.
  MatrixXc assemble() const {
    const std::int64_t L = params_.L(), N = params_.N();
    MatrixXc W(params_.rows(), N);
    for (std::int64_t m = 0; m < params_.M(); ++m)
      for (std::int64_t j = 0; j < N; ++j)
        for (std::int64_t i = 0; i < L; ++i)
          W(m * L + i, j) = w(m, i + j);
    return W;
  }

  /// W W^*, full Hermitian storage.
  MatrixXc gram() const {
    const MatrixXc W = assemble();
    MatrixXc G = MatrixXc::Zero(W.rows(), W.rows());
    G.selfadjointView<Eigen::Lower>().rankUpdate(W);
    G.triangularView<Eigen::StrictlyUpper>() = G.adjoint();
    return G;
  }

  /// y = W x without forming W (a correlation per block row).
  VectorXc apply(const VectorXc &x) const {
    if (x.size() != params_.N())
      throw DimensionMismatch("HankelEnsembleSample::apply", "size mismatch");
    const std::int64_t L = params_.L(), N = params_.N();
    VectorXc y = VectorXc::Zero(params_.rows());
    for (std::int64_t m = 0; m < params_.M(); ++m)
      for (std::int64_t i = 0; i < L; ++i) {
        cplx acc = 0.0;
        for (std::int64_t j = 0; j < N; ++j)
          acc += w(m, i + j) * x(j);
        y(m * L + i) = acc;
      }
    return y;
  }

  /// x = W^* y without forming W.
  VectorXc apply_adjoint(const VectorXc &y) const {
    if (y.size() != params_.rows())
      throw DimensionMismatch("HankelEnsembleSample::apply_adjoint",
                              "size mismatch");
    const std::int64_t L = params_.L(), N = params_.N();
    VectorXc x = VectorXc::Zero(N);
    for (std::int64_t j = 0; j < N; ++j) {
      cplx acc = 0.0;
      for (std::int64_t m = 0; m < params_.M(); ++m)
        for (std::int64_t i = 0; i < L; ++i)
          acc += std::conj(w(m, i + j)) * y(m * L + i);
      x(j) = acc;
    }
    return x;
  }

private:
  ModelParams params_;
  std::uint64_t seed_ = 0;
  std::uint64_t trial_ = 0;
  std::vector<cplx> w_;
};

inline HankelEnsembleSample sample(const ModelParams &params,
                                   std::uint64_t seed,
                                   std::uint64_t trial_index) {
  return HankelEnsembleSample::draw(params, seed, trial_index);
}

inline MatrixXc assemble(const HankelEnsembleSample &s) { return s.assemble(); }

/// One probe E(W^{m1}_{i1,j1} conj(W^{m2}_{i2,j2})), 0-based indices.
struct CorrelationProbe {
  std::int64_t m1, i1, j1, m2, i2, j2;
  cplx estimate = 0.0;
  double expected = 0.0;
};

struct CorrelationCheck {
  std::vector<CorrelationProbe> probes;
  double max_deviation = 0.0;
  std::int64_t trials = 0;
};

/// Monte Carlo check of E(W^{m1}_{i1,j1} conj(W^{m2}_{i2,j2})) =
/// (sigma2/N) delta(i1 - i2 = j2 - j1) delta(m1 = m2) on a fixed probe set.
inline CorrelationCheck empirical_correlation_check(const ModelParams &params,
                                                    std::int64_t trials,
                                                    std::uint64_t seed) {
  if (trials < 100)
    throw InvalidArgument("empirical_correlation_check", "trials must be >= 100");
  CorrelationCheck out;
  out.trials = trials;
  auto add = [&](std::int64_t m1, std::int64_t i1, std::int64_t j1,
                 std::int64_t m2, std::int64_t i2, std::int64_t j2) {
    if (m1 < params.M() && m2 < params.M() && i1 < params.L() &&
        i2 < params.L() && j1 < params.N() && j2 < params.N())
      out.probes.push_back({m1, i1, j1, m2, i2, j2});
  };
  add(0, 0, 0, 0, 0, 0);
  add(0, 1, 0, 0, 0, 1);
  add(0, 0, 1, 0, 1, 0);
  add(0, 1, 1, 0, 0, 0);
  add(0, 0, 0, 0, 0, 1);
  add(0, 0, 0, 1, 0, 0);
  add(0, 1, 0, 1, 0, 1);
  const double var = params.sigma2() / static_cast<double>(params.N());
  for (auto &p : out.probes)
    p.expected = (p.m1 == p.m2 && p.i1 - p.i2 == p.j2 - p.j1) ? var : 0.0;

  for (std::int64_t t = 0; t < trials; ++t) {
    const HankelEnsembleSample s =
        HankelEnsembleSample::draw(params, seed, static_cast<std::uint64_t>(t));
    for (auto &p : out.probes)
      p.estimate += s.w(p.m1, p.i1 + p.j1) * std::conj(s.w(p.m2, p.i2 + p.j2));
  }
  for (auto &p : out.probes) {
    p.estimate /= static_cast<double>(trials);
    out.max_deviation = std::max(out.max_deviation, std::abs(p.estimate - p.expected));
  }
  return out;
}

// Binary dump: five little-endian u64 {M, L, N, seed, trial_index}, then the
// sequences as interleaved (re, im) little-endian doubles, block by block.

namespace detail {

inline std::uint64_t to_le64(std::uint64_t v) noexcept {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int b = 0; b < 8; ++b)
      r |= ((v >> (8 * b)) & 0xffu) << (8 * (7 - b));
    return r;
  }
  return v;
}

} // namespace detail

inline void write_sample_dump(const std::string &path,
                              const HankelEnsembleSample &s) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os)
    throw IoError("write_sample_dump", "cannot open '" + path + "'");
  const ModelParams &p = s.params();
  const std::uint64_t header[5] = {
      static_cast<std::uint64_t>(p.M()), static_cast<std::uint64_t>(p.L()),
      static_cast<std::uint64_t>(p.N()), s.seed(), s.trial_index()};
  for (std::uint64_t h : header) {
    const std::uint64_t le = detail::to_le64(h);
    os.write(reinterpret_cast<const char *>(&le), 8);
  }
  for (const cplx &v : s.sequences()) {
    for (double d : {v.real(), v.imag()}) {
      const std::uint64_t le = detail::to_le64(std::bit_cast<std::uint64_t>(d));
      os.write(reinterpret_cast<const char *>(&le), 8);
    }
  }
  if (!os)
    throw IoError("write_sample_dump", "write failed for '" + path + "'");
}

/// Reads a dump; sigma2 is not stored in the file and must be supplied.
inline HankelEnsembleSample read_sample_dump(const std::string &path,
                                             double sigma2) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw IoError("read_sample_dump", "cannot open '" + path + "'");
  auto read_u64 = [&]() {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char *>(&v), 8);
    if (!is)
      throw IoError("read_sample_dump", "truncated file '" + path + "'");
    return detail::to_le64(v);
  };
  std::uint64_t header[5];
  for (auto &h : header)
    h = read_u64();
  const ModelParams p(sigma2, static_cast<std::int64_t>(header[0]),
                      static_cast<std::int64_t>(header[1]),
                      static_cast<std::int64_t>(header[2]));
  std::vector<cplx> w(static_cast<std::size_t>(p.M() * p.sequence_length()));
  for (auto &v : w) {
    const double re = std::bit_cast<double>(read_u64());
    const double im = std::bit_cast<double>(read_u64());
    v = cplx(re, im);
  }
  return HankelEnsembleSample(p, std::move(w), header[3], header[4]);
}

} // namespace bhlab
