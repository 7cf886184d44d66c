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

// Small end-to-end tour: one sample, its spectrum against the limiting
// law, the deterministic equivalent and a second-order trace.

#include <cstdio>

#include "bhlab.hpp"

int main() {
  using namespace bhlab;
  const ModelParams p(1.0, 8, 16, 256);
  const cplx z(1.0, 1.0);

  const auto s = HankelEnsembleSample::draw(p, 2026, 0);
  const SpectralResult r = eigen(s);
  const MPSupport sup = mp_support(p.law());
  std::printf("%s  c=%.3f  support=[%.4f, %.4f]\n", p.label().c_str(), p.c(), sup.lower,
              sup.upper);
  std::printf("eigenvalues: min=%.4f max=%.4f  KS=%.4f\n", r.min(), r.max(),
              esd_ks_distance(r));

  const cplx t = solve_mp_stieltjes(z, p).t;
  const cplx emp = resolvent_trace(r, z).trace_normalized;
  std::printf("t(z)=%.6f%+.6fi  (1/ML)Tr Q=%.6f%+.6fi\n", t.real(), t.imag(), emp.real(),
              emp.imag());

  const auto est = estimate_mean_resolvent(p, z, 50, 7, 0);
  std::printf("||E Q - I (x) R||=%.3e over %lld trials\n", spectral_norm(est.estimate.delta),
              static_cast<long long>(est.estimate.trials));

  const auto ctx = SecondOrderContext::make(p, z);
  const cplx w = omega_bar(ctx, 1);
  std::printf("omega(1,-1)=%.6f%+.6fi\n", w.real(), w.imag());
  return 0;
}
