#include "spinline/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

namespace spinline {

EigenDecomposition hermitian_eig(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("hermitian_eig needs a square matrix");
  if (max_abs_diff(m, m.adjoint()) > 1e-10)
    throw std::invalid_argument("hermitian_eig input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");

  // Eigen sorts ascending; flip to descending.
  const long n = m.rows();
  EigenDecomposition out;
  out.values = RealVector(n);
  out.vectors = Matrix(n, n);
  for (long i = 0; i < n; ++i) {
    out.values(i) = solver.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  return out;
}

Matrix psd_sqrt(const Matrix& m) {
  EigenDecomposition eig = hermitian_eig(m);
  const double scale = std::max(1.0, eig.values.cwiseAbs().maxCoeff());
  RealVector roots(eig.values.size());
  for (long i = 0; i < eig.values.size(); ++i) {
    double v = eig.values(i);
    if (v < -1e-6 * scale)
      throw std::invalid_argument("psd_sqrt input has a significantly negative eigenvalue");
    roots(i) = v > 0.0 ? std::sqrt(v) : 0.0;
  }
  return eig.vectors * roots.asDiagonal() * eig.vectors.adjoint();
}

Matrix nearest_density(const Matrix& m) {
  Matrix herm = (m + m.adjoint()) / 2.0;
  EigenDecomposition eig = hermitian_eig(herm);
  const long n = eig.values.size();

  // Euclidean projection of the spectrum onto the probability simplex.
  std::vector<double> v(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = eig.values(i);  // descending
  double cumulative = 0.0, theta = 0.0;
  long support = 0;
  for (long i = 0; i < n; ++i) {
    cumulative += v[static_cast<std::size_t>(i)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (v[static_cast<std::size_t>(i)] - candidate > 0.0) {
      support = i + 1;
      theta = candidate;
    }
  }
  RealVector projected(n);
  for (long i = 0; i < n; ++i)
    projected(i) = i < support ? std::max(0.0, v[static_cast<std::size_t>(i)] - theta) : 0.0;
  return eig.vectors * projected.asDiagonal() * eig.vectors.adjoint();
}

double trace_distance(const Matrix& a, const Matrix& b) {
  EigenDecomposition eig = hermitian_eig(((a - b) + (a - b).adjoint()) / 2.0);
  return eig.values.cwiseAbs().sum() / 2.0;
}

double fidelity(const Matrix& rho, const Matrix& sigma) {
  Matrix root = psd_sqrt(rho);
  Matrix inner = psd_sqrt(root * sigma * root);
  return inner.trace().real();
}

double fidelity(const Matrix& rho, const Vector& psi) {
  const Complex overlap = (psi.adjoint() * rho * psi)(0, 0);
  return std::sqrt(std::max(0.0, overlap.real()));
}

}  // namespace spinline
