#pragma once

#include "spinline/types.hpp"

namespace spinline {

struct EigenDecomposition {
  RealVector values;  // descending
  Matrix vectors;     // columns match values
};

// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
EigenDecomposition hermitian_eig(const Matrix& m);

// Square root of a positive semidefinite matrix. Eigenvalues in
// [-tol*scale, 0) clamp to zero; anything more negative throws.
Matrix psd_sqrt(const Matrix& m);

// Nearest density matrix in Frobenius norm: eigenvalue simplex projection of
// the Hermitian part, renormalized to unit trace.
Matrix nearest_density(const Matrix& m);

double trace_distance(const Matrix& a, const Matrix& b);

// Uhlmann fidelity F(rho, sigma) = Tr sqrt(sqrt(rho) sigma sqrt(rho)),
// the square-root convention (F = |<psi|phi>| for pure states).
double fidelity(const Matrix& rho, const Matrix& sigma);
double fidelity(const Matrix& rho, const Vector& psi);

}  // namespace spinline
