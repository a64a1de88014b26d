#include "spinline/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace spinline {

namespace {

const std::string& find_cavity(const SlotLayout& layout) {
  for (int i = 0; i < layout.slot_count(); ++i)
    if (layout.slot(i).role == SlotRole::cavity) return layout.slot(i).label;
  throw std::invalid_argument("layout has no cavity slot");
}

void check_pair_dims(const SlotLayout& layout, const std::string& mode, const std::string& cavity) {
  if (layout.slot(layout.index_of(mode)).dim != 3 ||
      layout.slot(layout.index_of(cavity)).dim != 3)
    throw std::invalid_argument("pair evolution requires three-level mode and cavity slots");
}

// Weight on pair occupations with more than two total excitations, which the
// propagator freezes and the protocol never populates.
template <typename StateT, typename WeightFn>
double overflow_weight(const StateT& state, int mode_pos, int cavity_pos, WeightFn weight) {
  const SlotLayout& layout = state.layout;
  double acc = 0.0;
  for (long n = 0; n < layout.dim(); ++n) {
    const long nm = (n / layout.stride(mode_pos)) % layout.slot(mode_pos).dim;
    const long nc = (n / layout.stride(cavity_pos)) % layout.slot(cavity_pos).dim;
    if (nm + nc > 2) acc += weight(n);
  }
  return acc;
}

}  // namespace

Matrix build_h1(const PhysicalParams& p) {
  Matrix h(2, 2);
  h << p.epsilon, p.coupling_j, p.coupling_j, p.epsilon;
  return h;
}

Matrix build_h2(const PhysicalParams& p) {
  const double r = std::sqrt(2.0) * p.coupling_j;
  Matrix h(3, 3);
  h << 2.0 * p.epsilon, r, 0.0, r, 2.0 * p.epsilon, r, 0.0, r, 2.0 * p.epsilon;
  return h;
}

PairPropagator pair_propagator(const PhysicalParams& p, double t) {
  if (t < 0.0) throw std::invalid_argument("negative evolution time");
  const double jt = p.coupling_j * t;
  const Complex e1 = std::exp(Complex(0.0, -p.epsilon * t));
  const Complex e2 = std::exp(Complex(0.0, -2.0 * p.epsilon * t));
  const double c = std::cos(jt), s = std::sin(jt);
  const double c2 = std::cos(2.0 * jt), s2 = std::sin(2.0 * jt);
  const Complex mi(0.0, -1.0);
  const double inv_r2 = 1.0 / std::sqrt(2.0);

  // Pair index n_mode*3 + n_cav; one-excitation basis (|10>,|01>) lives on
  // indices (3,1), two-excitation (|20>,|11>,|02>) on (6,4,2).
  Matrix u = Matrix::Identity(9, 9);
  u(3, 3) = e1 * c;
  u(3, 1) = e1 * mi * s;
  u(1, 3) = e1 * mi * s;
  u(1, 1) = e1 * c;

  const long two[3] = {6, 4, 2};
  Matrix s2mat(3, 3);
  s2mat << c * c, mi * inv_r2 * s2, -s * s,
           mi * inv_r2 * s2, c2, mi * inv_r2 * s2,
           -s * s, mi * inv_r2 * s2, c * c;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) u(two[a], two[b]) = e2 * s2mat(a, b);

  return PairPropagator{std::move(u), t};
}

void couple(StateVector& psi, const std::string& mode, double t, const PhysicalParams& p) {
  const std::string& cavity = find_cavity(psi.layout);
  check_pair_dims(psi.layout, mode, cavity);
  const int mp = psi.layout.index_of(mode), cp = psi.layout.index_of(cavity);
  const double overflow = overflow_weight(psi, mp, cp, [&](long n) {
    return std::norm(psi.amps(n));
  });
  if (overflow > 1e-12)
    throw std::runtime_error("state populates pair excitations above the supported total of two");
  apply_to(psi, Operator{{mode, cavity}, pair_propagator(p, t).mat});
}

void couple(DensityMatrix& rho, const std::string& mode, double t, const PhysicalParams& p) {
  const std::string& cavity = find_cavity(rho.layout);
  check_pair_dims(rho.layout, mode, cavity);
  const int mp = rho.layout.index_of(mode), cp = rho.layout.index_of(cavity);
  const double overflow = overflow_weight(rho, mp, cp, [&](long n) {
    return rho.mat(n, n).real();
  });
  if (overflow > 1e-12)
    throw std::runtime_error("state populates pair excitations above the supported total of two");
  apply_to(rho, Operator{{mode, cavity}, pair_propagator(p, t).mat});
}

void full_swap(StateVector& psi, const std::string& mode, const PhysicalParams& p) {
  couple(psi, mode, p.tau(), p);
}

void full_swap(DensityMatrix& rho, const std::string& mode, const PhysicalParams& p) {
  couple(rho, mode, p.tau(), p);
}

namespace {

Operator detune_operator(const SlotLayout& layout, const std::string& slot, double delta,
                         double t) {
  const int dim = layout.slot(layout.index_of(slot)).dim;
  Matrix u = Matrix::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) u(n, n) = std::exp(Complex(0.0, -delta * t * n));
  return Operator{{slot}, std::move(u)};
}

}  // namespace

void detune_phase(StateVector& psi, const std::string& slot, double delta, double t) {
  apply_to(psi, detune_operator(psi.layout, slot, delta, t));
}

void detune_phase(DensityMatrix& rho, const std::string& slot, double delta, double t) {
  apply_to(rho, detune_operator(rho.layout, slot, delta, t));
}

std::vector<Operator> cavity_loss_kraus(const std::string& slot, double kappa, double t) {
  if (kappa < 0.0 || t < 0.0) throw std::invalid_argument("loss needs kappa >= 0 and t >= 0");
  const double gamma = 1.0 - std::exp(-kappa * t);
  Matrix k0 = Matrix::Zero(3, 3), k1 = Matrix::Zero(3, 3), k2 = Matrix::Zero(3, 3);
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(1.0 - gamma);
  k0(2, 2) = 1.0 - gamma;
  k1(0, 1) = std::sqrt(gamma);
  k1(1, 2) = std::sqrt(2.0 * gamma * (1.0 - gamma));
  k2(0, 2) = gamma;
  return {Operator{{slot}, std::move(k0)}, Operator{{slot}, std::move(k1)},
          Operator{{slot}, std::move(k2)}};
}

void cavity_loss(DensityMatrix& rho, double t, const PhysicalParams& p) {
  const std::string& cavity = find_cavity(rho.layout);
  if (rho.layout.slot(rho.layout.index_of(cavity)).dim != 3)
    throw std::invalid_argument("loss channel requires a three-level cavity");
  apply_kraus(rho, cavity_loss_kraus(cavity, p.kappa, t));
}

LeakageBudget leakage_budget(double kappa, double active_time) {
  LeakageBudget b;
  b.active_time = active_time;
  b.linear = kappa * active_time;
  b.exponential = 1.0 - std::exp(-kappa * active_time);
  return b;
}

}  // namespace spinline
