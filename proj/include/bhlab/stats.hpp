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

/** @file stats.hpp
    @brief Order-fixed reductions and simple Monte Carlo statistics.

    Sums are pairwise over the index range, so a result depends only on the
    input sequence, not on how it was produced.
*/

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace bhlab {

template <class T>
T pairwise_sum(const T *x, std::size_t n) {
  if (n == 0)
    return T(0);
  if (n <= 8) {
    T acc = x[0];
    for (std::size_t i = 1; i < n; ++i)
      acc += x[i];
    return acc;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

template <class T> T pairwise_sum(const std::vector<T> &x) {
  return pairwise_sum(x.data(), x.size());
}

template <class T> T mean(const std::vector<T> &x) {
  if (x.empty())
    return T(std::nan(""));
  return pairwise_sum(x) / static_cast<double>(x.size());
}

/// Unbiased sample variance (n - 1 denominator); |.|^2 for complex input.
template <class T> double sample_variance(const std::vector<T> &x) {
  const std::size_t n = x.size();
  if (n < 2)
    return n == 1 ? 0.0 : std::nan("");
  const T m = mean(x);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i)
    sq[i] = std::norm(x[i] - m);
  return pairwise_sum(sq) / static_cast<double>(n - 1);
}

/// Standard error of the mean. This coincides with the delete-one
/// jackknife standard error of the mean.
template <class T> double standard_error(const std::vector<T> &x) {
  if (x.size() < 2)
    return x.size() == 1 ? 0.0 : std::nan("");
  return std::sqrt(sample_variance(x) / static_cast<double>(x.size()));
}

/// Delete-one jackknife standard error of an arbitrary statistic.
template <class T, class Stat>
double jackknife_standard_error(const std::vector<T> &x, Stat stat) {
  const std::size_t n = x.size();
  if (n < 2)
    return n == 1 ? 0.0 : std::nan("");
  std::vector<double> loo(n);
  std::vector<T> sub;
  sub.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    sub.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i)
        sub.push_back(x[j]);
    loo[i] = stat(sub);
  }
  const double m = pairwise_sum(loo) / static_cast<double>(n);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i)
    sq[i] = (loo[i] - m) * (loo[i] - m);
  return std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n) *
                   pairwise_sum(sq));
}

/// Jackknife standard error of the sample variance, in O(n) via the
/// leave-one-out update formulas.
template <class T> double variance_jackknife_se(const std::vector<T> &x) {
  const std::size_t n = x.size();
  if (n < 3)
    return std::nan("");
  const T m = mean(x);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i)
    d2[i] = std::norm(x[i] - m);
  const double ss = pairwise_sum(d2);
  const double nd = static_cast<double>(n);
  std::vector<double> loo(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Removing x_i from the sum of squares about the mean.
    const double ss_i = ss - d2[i] * nd / (nd - 1.0);
    loo[i] = ss_i / (nd - 2.0);
  }
  const double lm = pairwise_sum(loo) / nd;
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i)
    sq[i] = (loo[i] - lm) * (loo[i] - lm);
  return std::sqrt((nd - 1.0) / nd * pairwise_sum(sq));
}

} // namespace bhlab
