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

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "bhlab/errors.hpp"

namespace bhlab {

using cplx = std::complex<double>;
using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr double kPi = 3.14159265358979323846264338327950288;

/// Parameters of a Marcenko-Pastur law: variance scale and aspect ratio.
struct LawParams {
  double sigma2 = 1.0;
  double c = 1.0;

  static LawParams make(double sigma2, double c) {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
      throw InvalidArgument("LawParams", "sigma2 must be positive");
    if (!(c > 0.0) || !std::isfinite(c))
      throw InvalidArgument("LawParams", "c must be positive");
    return LawParams{sigma2, c};
  }
};

/// Dimensions of the block-Hankel ensemble: M blocks of L x N Hankel
/// matrices, entry variance sigma2 / N. The aspect ratio c = M L / N.
class ModelParams {
public:
  ModelParams() = default;

  ModelParams(double sigma2, std::int64_t M, std::int64_t L, std::int64_t N)
      : sigma2_(sigma2), M_(M), L_(L), N_(N) {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
      throw InvalidArgument("ModelParams", "sigma2 must be positive");
    if (M < 1 || L < 1 || N < 1)
      throw InvalidArgument("ModelParams", "M, L, N must all be >= 1");
    c_ = static_cast<double>(M * L) / static_cast<double>(N);
  }

  double sigma2() const noexcept { return sigma2_; }
  std::int64_t M() const noexcept { return M_; }
  std::int64_t L() const noexcept { return L_; }
  std::int64_t N() const noexcept { return N_; }
  double c() const noexcept { return c_; }

  /// Number of rows M L of the stacked matrix.
  std::int64_t rows() const noexcept { return M_ * L_; }
  /// Length N + L - 1 of each generating sequence.
  std::int64_t sequence_length() const noexcept { return N_ + L_ - 1; }

  LawParams law() const noexcept { return LawParams{sigma2_, c_}; }

  std::string label() const {
    return "M=" + std::to_string(M_) + ",L=" + std::to_string(L_) +
           ",N=" + std::to_string(N_);
  }

  friend bool operator==(const ModelParams &, const ModelParams &) = default;

private:
  double sigma2_ = 1.0;
  std::int64_t M_ = 1;
  std::int64_t L_ = 1;
  std::int64_t N_ = 1;
  double c_ = 1.0;
};

} // namespace bhlab
