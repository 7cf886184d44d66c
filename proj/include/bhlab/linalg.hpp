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

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "bhlab/types.hpp"

namespace bhlab {

/// Largest singular value.
inline double spectral_norm(const MatrixXc &A) {
  if (A.size() == 0)
    return 0.0;
  Eigen::BDCSVD<MatrixXc> svd(A);
  return svd.singularValues()(0);
}

/// Smallest eigenvalue of the Hermitian part (A + A^*)/2.
inline double min_hermitian_eigenvalue(const MatrixXc &A) {
  const MatrixXc h = 0.5 * (A + A.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw ConvergenceFailure("min_hermitian_eigenvalue",
                             "eigensolver did not converge");
  return es.eigenvalues()(0);
}

/// Imaginary part (A - A^*)/(2i), Hermitian.
inline MatrixXc hermitian_imag_part(const MatrixXc &A) {
  return (A - A.adjoint()) / cplx(0.0, 2.0);
}

/// I_P (x) B.
inline MatrixXc kron_identity(std::int64_t P, const MatrixXc &B) {
  const Index K = B.rows();
  MatrixXc out = MatrixXc::Zero(P * K, P * B.cols());
  for (std::int64_t p = 0; p < P; ++p)
    out.block(p * K, p * B.cols(), K, B.cols()) = B;
  return out;
}

} // namespace bhlab
