#include "spinline/metrics.hpp"

#include <array>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "spinline/rng.hpp"

#include <Eigen/QR>

namespace spinline {

int quinit_level(int n_left, int n_right) {
  if (n_left == 1 && n_right == 0) return 0;
  if (n_left == 0 && n_right == 1) return 1;
  if (n_left == 2 && n_right == 0) return 2;
  if (n_left == 0 && n_right == 2) return 3;
  if (n_left == 0 && n_right == 0) return 4;
  return -1;
}

QuinitState to_quinits(const DensityMatrix& modes, double unmapped_tol) {
  const SlotLayout& layout = modes.layout;
  std::vector<int> mode_pos;
  for (int i = 0; i < layout.slot_count(); ++i)
    if (layout.slot(i).role == SlotRole::mode) mode_pos.push_back(i);
  if (mode_pos.size() != 4)
    throw std::invalid_argument("quinit compression needs exactly four mode slots");

  // Basis index -> quinit pair index, or -1 where the occupation is unmapped.
  const long d = layout.dim();
  std::vector<long> to_q(static_cast<std::size_t>(d), -1);
  std::vector<long> from_q(25, -1);
  for (long n = 0; n < d; ++n) {
    std::vector<int> digits = layout.decode(n);
    const int qa = quinit_level(digits[static_cast<std::size_t>(mode_pos[0])],
                                digits[static_cast<std::size_t>(mode_pos[1])]);
    const int qb = quinit_level(digits[static_cast<std::size_t>(mode_pos[2])],
                                digits[static_cast<std::size_t>(mode_pos[3])]);
    bool rest_empty = true;
    for (int i = 0; i < layout.slot_count(); ++i) {
      bool is_mode = false;
      for (int pos : mode_pos) is_mode = is_mode || pos == i;
      if (!is_mode && digits[static_cast<std::size_t>(i)] != 0) rest_empty = false;
    }
    if (qa >= 0 && qb >= 0 && rest_empty) {
      to_q[static_cast<std::size_t>(n)] = qa * 5 + qb;
      from_q[static_cast<std::size_t>(qa * 5 + qb)] = n;
    }
  }

  QuinitState out;
  out.rho = Matrix::Zero(25, 25);
  for (long n = 0; n < d; ++n)
    if (to_q[static_cast<std::size_t>(n)] < 0) out.unmapped_weight += modes.mat(n, n).real();
  if (out.unmapped_weight > unmapped_tol)
    throw std::invalid_argument("state weight outside the five-level map exceeds tolerance");

  for (long a = 0; a < 25; ++a)
    for (long b = 0; b < 25; ++b) {
      const long na = from_q[static_cast<std::size_t>(a)];
      const long nb = from_q[static_cast<std::size_t>(b)];
      if (na >= 0 && nb >= 0) out.rho(a, b) = modes.mat(na, nb);
    }
  return out;
}

Vector bell_plus_modes() {
  Vector psi = Vector::Zero(81);
  psi(1 * 27 + 0 * 9 + 0 * 3 + 1) = 1.0 / std::sqrt(2.0);
  psi(0 * 27 + 1 * 9 + 1 * 3 + 0) = 1.0 / std::sqrt(2.0);
  return psi;
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (!(rho.layout == sigma.layout))
    throw std::invalid_argument("fidelity needs states on the same register");
  return fidelity(rho.mat, sigma.mat);
}

double fidelity(const DensityMatrix& rho, const StateVector& psi) {
  if (!(rho.layout == psi.layout))
    throw std::invalid_argument("fidelity needs states on the same register");
  return fidelity(rho.mat, psi.amps);
}

double binary_entropy(double x) {
  double h = 0.0;
  if (x > 0.0) h -= x * std::log2(x);
  if (x < 1.0) h -= (1.0 - x) * std::log2(1.0 - x);
  return h;
}

double wootters_concurrence(const Matrix& rho) {
  if (rho.rows() != 4 || rho.cols() != 4)
    throw std::invalid_argument("spin-flip concurrence is defined on 4x4 states");
  Matrix herm = 0.5 * (rho + rho.adjoint());

  Matrix yy = Matrix::Zero(4, 4);
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  Matrix tilde = yy * herm.conjugate() * yy;

  // Eigenvalues of rho * tilde through the Hermitian form
  // sqrt(rho) * tilde * sqrt(rho).
  Matrix root = psd_sqrt(nearest_density(herm));
  EigenDecomposition eig = hermitian_eig(Matrix(root * tilde * root));
  std::array<double, 4> lam{};
  for (int i = 0; i < 4; ++i) lam[static_cast<std::size_t>(i)] =
      std::sqrt(std::max(0.0, eig.values(i)));
  return std::max(0.0, lam[0] - lam[1] - lam[2] - lam[3]);
}

double entanglement_of_formation(const Matrix& rho) {
  const double c = wootters_concurrence(rho);
  return binary_entropy(0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - c * c))));
}

double i_concurrence_pure(const Vector& psi, long dim_a, long dim_b) {
  if (psi.size() != dim_a * dim_b)
    throw std::invalid_argument("state length does not match the bipartition");
  const double n2 = psi.squaredNorm();
  if (n2 <= 0.0) throw std::invalid_argument("zero state has no concurrence");
  Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> a(
      psi.data(), dim_a, dim_b);
  Matrix rho_a = (a * a.adjoint()) / n2;
  return 2.0 * (1.0 - rho_a.squaredNorm());
}

double i_concurrence_pure(const StateVector& psi, const std::vector<std::string>& side_a) {
  DensityMatrix rho_a = partial_trace(to_density(psi), side_a);
  const double n2 = rho_a.trace_real();
  if (n2 <= 0.0) throw std::invalid_argument("zero state has no concurrence");
  Matrix scaled = rho_a.mat / n2;
  return 2.0 * (1.0 - scaled.squaredNorm());
}

namespace {

// Average squared I-concurrence of the ensemble {phi_j = sum_i U_ji w_i} and
// its Wirtinger gradient dF/dUbar, for rho = W W^dag on a dim_a x dim_b
// space. f(U) = 2 tr(rho) - 2 sum_j h_j / p_j with p_j = |phi_j|^2 and
// h_j = Tr((A_j A_j^dag)^2), A_j the dim_a x dim_b matricization of phi_j.
struct RoofObjective {
  Matrix w;  // D x r
  long da = 0, db = 0;
  double trace_rho = 0.0;

  double eval(const Matrix& u, Matrix* grad) const {
    const long k = u.rows();
    if (grad) grad->setZero(k, w.cols());
    Matrix phi = w * u.transpose();  // column j is phi_j
    double value = 2.0 * trace_rho;
    for (long j = 0; j < k; ++j) {
      const double p = phi.col(j).squaredNorm();
      if (p < 1e-14) continue;
      Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
          a(phi.col(j).data(), da, db);
      Matrix rho_a = a * a.adjoint();
      const double h = rho_a.squaredNorm();
      value -= 2.0 * h / p;
      if (grad) {
        Matrix b = rho_a * a;  // A A^dag A
        Vector bvec(da * db);
        for (long i = 0; i < da; ++i)
          for (long l = 0; l < db; ++l) bvec(i * db + l) = b(i, l);
        Vector g = (-4.0 / p) * bvec + (2.0 * h / (p * p)) * phi.col(j);
        grad->row(j) = (w.adjoint() * g).transpose();
      }
    }
    return value;
  }
};

double stiefel_inner(const Matrix& a, const Matrix& b) {
  return (a.adjoint() * b).trace().real();
}

Matrix stiefel_project(const Matrix& u, const Matrix& g) {
  Matrix m = u.adjoint() * g;
  return g - u * (0.5 * (m + m.adjoint()));
}

// Thin-QR retraction with a phase-canonical factor, so retracting the zero
// tangent returns u itself.
Matrix stiefel_retract(const Matrix& u, const Matrix& step) {
  Matrix moved = u + step;
  Eigen::HouseholderQR<Matrix> qr(moved);
  Matrix q = qr.householderQ() * Matrix::Identity(u.rows(), u.cols());
  Matrix r = qr.matrixQR().topRows(u.cols()).triangularView<Eigen::Upper>();
  for (long i = 0; i < u.cols(); ++i) {
    const Complex rii = r(i, i);
    if (std::abs(rii) > 1e-300) q.col(i) *= rii / std::abs(rii);
  }
  return q;
}

struct StartOutcome {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

StartOutcome minimize_from(const RoofObjective& objective, Matrix u,
                           const ConvexRoofOptions& opts) {
  struct Pair {
    Matrix s, y;
    double inv_sy;
  };
  std::deque<Pair> memory;
  const int lbfgs_m = 8;

  Matrix grad;
  double f = objective.eval(u, &grad);
  Matrix gt = stiefel_project(u, grad);
  StartOutcome out;
  int stalled = 0;

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    ++out.iterations;
    const double gnorm = std::sqrt(stiefel_inner(gt, gt));
    if (gnorm < 1e-10 * std::max(1.0, std::abs(f))) {
      out.converged = true;
      break;
    }

    // Two-loop recursion on the tangent space.
    Matrix q = gt;
    std::vector<double> alpha(memory.size());
    for (std::size_t i = memory.size(); i-- > 0;) {
      alpha[i] = memory[i].inv_sy * stiefel_inner(memory[i].s, q);
      q -= alpha[i] * memory[i].y;
    }
    if (!memory.empty()) {
      const Pair& last = memory.back();
      const double yy = stiefel_inner(last.y, last.y);
      if (yy > 0.0) q *= 1.0 / (last.inv_sy * yy);
    }
    for (std::size_t i = 0; i < memory.size(); ++i) {
      const double beta = memory[i].inv_sy * stiefel_inner(memory[i].y, q);
      q += (alpha[i] - beta) * memory[i].s;
    }
    Matrix dir = stiefel_project(u, -q);
    double slope = 2.0 * stiefel_inner(gt, dir);
    if (slope >= 0.0) {
      dir = -gt;
      slope = 2.0 * stiefel_inner(gt, dir);
    }

    double step = 1.0;
    Matrix u_next;
    double f_next = f;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      u_next = stiefel_retract(u, step * dir);
      f_next = objective.eval(u_next, nullptr);
      if (f_next <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.converged = true;  // no descent left at machine resolution
      break;
    }

    Matrix grad_next;
    objective.eval(u_next, &grad_next);
    Matrix gt_next = stiefel_project(u_next, grad_next);

    Matrix s = stiefel_project(u_next, step * dir);
    Matrix y = gt_next - stiefel_project(u_next, gt);
    const double sy = stiefel_inner(s, y);
    if (sy > 1e-12 * std::sqrt(stiefel_inner(s, s) * stiefel_inner(y, y))) {
      memory.push_back({std::move(s), std::move(y), 1.0 / sy});
      if (static_cast<int>(memory.size()) > lbfgs_m) memory.pop_front();
    }

    stalled = std::abs(f - f_next) < opts.tol * std::max(1.0, std::abs(f)) ? stalled + 1 : 0;
    u = std::move(u_next);
    f = f_next;
    gt = std::move(gt_next);
    if (stalled >= 2) {
      out.converged = true;
      break;
    }
  }
  out.value = f;
  return out;
}

}  // namespace

ConvexRoofResult convex_roof_c2(const Matrix& rho, long dim_a, long dim_b,
                                const ConvexRoofOptions& opts) {
  if (rho.rows() != dim_a * dim_b || rho.cols() != dim_a * dim_b)
    throw std::invalid_argument("state size does not match the bipartition");

  Matrix herm = 0.5 * (rho + rho.adjoint());
  EigenDecomposition eig = hermitian_eig(herm);
  const double cutoff = 1e-12 * std::max(1.0, eig.values.cwiseAbs().maxCoeff());
  long rank = 0;
  while (rank < eig.values.size() && eig.values(rank) > cutoff) ++rank;
  if (rank == 0) throw std::invalid_argument("state has no support");

  RoofObjective objective;
  objective.da = dim_a;
  objective.db = dim_b;
  objective.w = eig.vectors.leftCols(rank);
  for (long i = 0; i < rank; ++i) objective.w.col(i) *= std::sqrt(eig.values(i));
  objective.trace_rho = eig.values.head(rank).sum();

  ConvexRoofResult result;
  if (rank == 1) {
    result.value = i_concurrence_pure(Vector(objective.w.col(0)), dim_a, dim_b) *
                   objective.trace_rho;
    return result;
  }

  const long k = opts.ensemble_size > 0
                     ? std::max<long>(rank, opts.ensemble_size)
                     : std::min<long>(2 * rank, rank * rank);
  RandomStream rng(opts.seed);

  double best = 0.0, worst = 0.0;
  bool all_converged = true;
  int total_iters = 0;
  for (int start = 0; start < std::max(1, opts.starts); ++start) {
    Matrix u0;
    if (start == 0) {
      u0 = Matrix::Zero(k, rank);
      u0.topRows(rank) = Matrix::Identity(rank, rank);
    } else {
      Matrix g(k, rank);
      for (long i = 0; i < k; ++i)
        for (long j = 0; j < rank; ++j) g(i, j) = rng.complex_gaussian();
      Eigen::HouseholderQR<Matrix> qr(g);
      u0 = qr.householderQ() * Matrix::Identity(k, rank);
    }
    StartOutcome outcome = minimize_from(objective, std::move(u0), opts);
    total_iters += outcome.iterations;
    all_converged = all_converged && outcome.converged;
    if (start == 0 || outcome.value < best) {
      best = outcome.value;
      result.best_start = start;
    }
    if (start == 0 || outcome.value > worst) worst = outcome.value;
  }
  result.value = std::max(0.0, best);
  result.spread = worst - best;
  result.iterations = total_iters;
  result.converged = all_converged;
  return result;
}

ConvexRoofResult convex_roof_c2(const QuinitState& rho, const ConvexRoofOptions& opts) {
  return convex_roof_c2(rho.rho, 5, 5, opts);
}

namespace {

constexpr std::array<int, 4> kCompLevels = {0, 1, 5, 6};

bool is_comp_level(long q) { return q == 0 || q == 1 || q == 5 || q == 6; }

}  // namespace

QuinitState dephase_outside(const QuinitState& rho, bool uniform) {
  QuinitState out;
  out.unmapped_weight = rho.unmapped_weight;
  out.rho = Matrix::Zero(25, 25);
  for (int a : kCompLevels)
    for (int b : kCompLevels) out.rho(a, b) = rho.rho(a, b);

  double outside = 0.0;
  for (long q = 0; q < 25; ++q)
    if (!is_comp_level(q)) outside += rho.rho(q, q).real();

  if (uniform) {
    for (long q = 0; q < 25; ++q)
      if (!is_comp_level(q)) out.rho(q, q) = outside / 21.0;
  } else {
    for (long q = 0; q < 25; ++q)
      if (!is_comp_level(q)) out.rho(q, q) = rho.rho(q, q).real();
  }
  return out;
}

DiscountResult discount(const QuinitState& rho) {
  DiscountResult out;
  out.rho = Matrix::Zero(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int a2 = 0; a2 < 2; ++a2)
        for (int b2 = 0; b2 < 2; ++b2)
          out.rho(a * 2 + b, a2 * 2 + b2) = rho.rho(a * 5 + b, a2 * 5 + b2);

  for (long q = 0; q < 25; ++q) {
    if (is_comp_level(q)) continue;
    const double w = rho.rho(q, q).real();
    const int a = static_cast<int>(q / 5), b = static_cast<int>(q % 5);
    const bool to_zero = (a == 4 && b == 2) || (a == 2 && b == 4);
    const bool to_one = (a == 4 && b == 3) || (a == 3 && b == 4);
    if (to_zero) {
      out.rho(0, 0) += w;
    } else if (to_one) {
      out.rho(3, 3) += w;
    } else {
      out.rho(0, 0) += 0.5 * w;
      out.rho(3, 3) += 0.5 * w;
      out.unrecognized += w;
    }
  }
  return out;
}

Matrix discounted_final_state(double eta1) {
  Matrix rho = Matrix::Zero(4, 4);
  rho(1, 1) = rho(2, 2) = rho(1, 2) = rho(2, 1) = 0.5;
  rho(0, 0) = rho(3, 3) = 0.5 * eta1;
  return rho / (1.0 + eta1);
}

double computational_weight(const QuinitState& rho) {
  double w = 0.0;
  for (int q : kCompLevels) w += rho.rho(q, q).real();
  return w;
}

EntanglementReport entanglement_report(const DensityMatrix& modes, StateVariant variant,
                                       const ConvexRoofOptions& opts) {
  EntanglementReport report;
  report.variant = variant;

  QuinitState q = to_quinits(modes);
  if (variant == StateVariant::dephased_outside) q = dephase_outside(q);

  Vector bell;
  Matrix two_qubit;
  if (variant == StateVariant::discounted) {
    DiscountResult disc = discount(q);
    two_qubit = disc.rho;
    bell = Vector::Zero(4);
    bell(1) = bell(2) = 1.0 / std::sqrt(2.0);
    report.fidelity_with_psi_plus = std::sqrt(std::max(0.0, (bell.adjoint() * disc.rho * bell)(0).real()));
    report.c2_squared = convex_roof_c2(disc.rho, 2, 2, opts).value;
  } else {
    bell = Vector::Zero(25);
    bell(1) = bell(5) = 1.0 / std::sqrt(2.0);
    report.fidelity_with_psi_plus = std::sqrt(std::max(0.0, (bell.adjoint() * q.rho * bell)(0).real()));
    report.c2_squared = convex_roof_c2(q, opts).value;

    const double weight = computational_weight(q);
    if (weight < 1e-12) throw std::runtime_error("no population left on the dual-rail block");
    two_qubit = Matrix::Zero(4, 4);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        two_qubit(a, b) = q.rho(kCompLevels[static_cast<std::size_t>(a)],
                                kCompLevels[static_cast<std::size_t>(b)]) / weight;
  }

  report.wootters_c = wootters_concurrence(two_qubit);
  report.e_f = entanglement_of_formation(two_qubit);
  return report;
}

}  // namespace spinline
