#include "spinline/logical.hpp"

#include <cmath>
#include <stdexcept>

namespace spinline {

namespace {

std::string cavity_label(const SlotLayout& layout) {
  for (int i = 0; i < layout.slot_count(); ++i)
    if (layout.slot(i).role == SlotRole::cavity) return layout.slot(i).label;
  throw std::invalid_argument("layout has no cavity slot");
}

double occupied_weight(const StateVector& psi, const std::string& label) {
  const int pos = psi.layout.index_of(label);
  const long stride = psi.layout.stride(pos);
  const long dim = psi.layout.slot(pos).dim;
  double w = 0.0;
  for (long n = 0; n < psi.amps.size(); ++n)
    if ((n / stride) % dim != 0) w += std::norm(psi.amps(n));
  return w;
}

// The swap legs around the detuning pulse contribute (-i)^2 on the rail0
// branch; alpha = phi + pi puts the same -1 on the rail1 branch, so the
// sequence lands on -diag(1, e^{-i phi}) exactly.
template <typename State>
void rotate_z_impl(State& state, const DualRailQubit& q, double phi, const PhysicalParams& p) {
  full_swap(state, q.rail0, p);
  detune_phase(state, q.rail1, phi + pi, 1.0);
  full_swap(state, q.rail0, p);
}

// Between the phase gates the swap-couple-swap leg is a reflection
// [[-c,-s],[-s,c]]; conjugating by rotate_z(pi/2) turns it into
// -exp(-i theta X).
template <typename State>
void rotate_x_impl(State& state, const DualRailQubit& q, double theta, const PhysicalParams& p) {
  rotate_z_impl(state, q, pi / 2.0, p);
  full_swap(state, q.rail0, p);
  couple(state, q.rail1, theta / p.coupling_j, p);
  full_swap(state, q.rail0, p);
  rotate_z_impl(state, q, pi / 2.0, p);
}

}  // namespace

void prepare_zero(StateVector& psi, const DualRailQubit& q, const PhysicalParams& p) {
  const std::string cav = cavity_label(psi.layout);
  for (const std::string& label : {q.rail0, q.rail1, cav})
    if (occupied_weight(psi, label) > 1e-12)
      throw std::invalid_argument("prepare_zero needs slot '" + label + "' empty");

  // Load one cavity photon (unitary completion never acts past the guard),
  // then swap it into rail0: -i |10> on the rails.
  Matrix load = Matrix::Zero(3, 3);
  load(1, 0) = 1.0;
  load(0, 1) = 1.0;
  load(2, 2) = 1.0;
  apply_to(psi, Operator{{cav}, load});
  full_swap(psi, q.rail0, p);
}

void prepare_plus(StateVector& psi, const DualRailQubit& q, const PhysicalParams& p) {
  prepare_zero(psi, q, p);
  rotate_x(psi, q, pi / 4.0, p);
  rotate_z(psi, q, -pi / 2.0, p);
}

void prepare_bloch(StateVector& psi, const DualRailQubit& q, double theta, double phi,
                   const PhysicalParams& p) {
  prepare_zero(psi, q, p);
  rotate_x(psi, q, theta / 2.0, p);
  rotate_z(psi, q, -phi - pi / 2.0, p);
}

void rotate_x(StateVector& psi, const DualRailQubit& q, double theta, const PhysicalParams& p) {
  rotate_x_impl(psi, q, theta, p);
}
void rotate_x(DensityMatrix& rho, const DualRailQubit& q, double theta, const PhysicalParams& p) {
  rotate_x_impl(rho, q, theta, p);
}

void rotate_z(StateVector& psi, const DualRailQubit& q, double phi, const PhysicalParams& p) {
  rotate_z_impl(psi, q, phi, p);
}
void rotate_z(DensityMatrix& rho, const DualRailQubit& q, double phi, const PhysicalParams& p) {
  rotate_z_impl(rho, q, phi, p);
}

namespace {

// Basis index of the rail pattern encoding bits `b` with every other slot
// empty; bit i of b (counting from the most significant of k) selects rail1
// of qubit i.
std::vector<long> pattern_indices(const SlotLayout& layout,
                                  const std::vector<DualRailQubit>& qubits) {
  const int k = static_cast<int>(qubits.size());
  std::vector<long> idx(static_cast<std::size_t>(1) << k);
  std::vector<int> digits(static_cast<std::size_t>(layout.slot_count()), 0);
  for (long b = 0; b < static_cast<long>(idx.size()); ++b) {
    for (auto& d : digits) d = 0;
    for (int i = 0; i < k; ++i) {
      const bool one = (b >> (k - 1 - i)) & 1;
      const DualRailQubit& q = qubits[static_cast<std::size_t>(i)];
      digits[static_cast<std::size_t>(layout.index_of(one ? q.rail1 : q.rail0))] = 1;
    }
    idx[static_cast<std::size_t>(b)] = layout.encode(digits);
  }
  return idx;
}

}  // namespace

LogicalTable logical_amplitudes(const StateVector& psi,
                                const std::vector<DualRailQubit>& qubits) {
  const std::vector<long> idx = pattern_indices(psi.layout, qubits);
  LogicalTable out;
  out.amps = Vector::Zero(static_cast<long>(idx.size()));
  double inside = 0.0;
  for (std::size_t b = 0; b < idx.size(); ++b) {
    out.amps(static_cast<long>(b)) = psi.amps(idx[b]);
    inside += std::norm(psi.amps(idx[b]));
  }
  out.leakage = psi.amps.squaredNorm() - inside;
  return out;
}

LogicalBlock logical_amplitudes(const DensityMatrix& rho,
                                const std::vector<DualRailQubit>& qubits) {
  const std::vector<long> idx = pattern_indices(rho.layout, qubits);
  const long m = static_cast<long>(idx.size());
  LogicalBlock out;
  out.rho = Matrix::Zero(m, m);
  for (long a = 0; a < m; ++a)
    for (long b = 0; b < m; ++b)
      out.rho(a, b) = rho.mat(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
  out.leakage = rho.trace_real() - out.rho.trace().real();
  return out;
}

}  // namespace spinline
