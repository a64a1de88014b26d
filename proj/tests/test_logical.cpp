#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "spinline/dynamics.hpp"
#include "spinline/logical.hpp"
#include "spinline/state.hpp"
#include "spinline/types.hpp"
#include "support/testkit.hpp"

using namespace spinline;
using namespace spinline::testkit;

namespace {

const Complex kMinusI(0.0, -1.0);

SlotLayout one_qubit_layout() {
  return SlotLayout({{"m1", 3, SlotRole::mode},
                     {"m2", 3, SlotRole::mode},
                     {"c", 3, SlotRole::cavity}});
}

SlotLayout two_qubit_layout() {
  return SlotLayout({{"m1", 3, SlotRole::mode},
                     {"m2", 3, SlotRole::mode},
                     {"m3", 3, SlotRole::mode},
                     {"m4", 3, SlotRole::mode},
                     {"c", 3, SlotRole::cavity}});
}

double cavity_weight(const StateVector& psi) {
  const int cp = psi.layout.index_of("c");
  double acc = 0.0;
  for (long n = 0; n < psi.layout.dim(); ++n)
    if (digit_at(psi.layout, n, cp) > 0) acc += std::norm(psi.amps(n));
  return acc;
}

}  // namespace

TEST_CASE("state preparation") {
  PhysicalParams p;
  DualRailQubit q{"m1", "m2"};

  StateVector psi = vacuum(one_qubit_layout());
  prepare_zero(psi, q, p);
  CHECK(std::abs(psi.amp("100") - kMinusI) < 1e-12);
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cavity_weight(psi) < 1e-15);
  CHECK_THROWS_AS(prepare_zero(psi, q, p), std::invalid_argument);

  StateVector plus = vacuum(one_qubit_layout());
  prepare_plus(plus, q, p);
  const double r2 = std::sqrt(0.5);
  CHECK(std::abs(plus.amp("100") - kMinusI * r2) < 1e-12);
  CHECK(std::abs(plus.amp("010") - kMinusI * r2) < 1e-12);
  CHECK(cavity_weight(plus) < 1e-12);

  // Both qubits in |+>: the protocol input, up to the two collected -i's.
  StateVector pair = vacuum(two_qubit_layout());
  prepare_plus(pair, DualRailQubit{"m1", "m2"}, p);
  prepare_plus(pair, DualRailQubit{"m3", "m4"}, p);
  for (const char* ket : {"10100", "10010", "01100", "01010"})
    CHECK(std::abs(pair.amp(ket) + 0.5) < 1e-12);
  CHECK(cavity_weight(pair) < 1e-12);
}

TEST_CASE("bloch preparation hits the requested point exactly") {
  PhysicalParams p;
  DualRailQubit q{"m1", "m2"};

  for (double theta : {0.0, 0.3 * pi, 0.5 * pi, 0.77 * pi, pi}) {
    for (double phi : {0.0, 0.4 * pi, -0.4 * pi, pi}) {
      StateVector psi = vacuum(one_qubit_layout());
      prepare_bloch(psi, q, theta, phi, p);
      const Complex a0 = kMinusI * std::cos(theta / 2.0);
      const Complex a1 = kMinusI * std::exp(Complex(0.0, phi)) * std::sin(theta / 2.0);
      CHECK(std::abs(psi.amp("100") - a0) < 1e-12);
      CHECK(std::abs(psi.amp("010") - a1) < 1e-12);
      CHECK(cavity_weight(psi) < 1e-12);

      LogicalTable table = logical_amplitudes(psi, {q});
      CHECK(table.leakage < 1e-12);
      CHECK(std::abs(table.amps(0) - a0) < 1e-12);
      CHECK(std::abs(table.amps(1) - a1) < 1e-12);
    }
  }
}

TEST_CASE("phase rotation") {
  PhysicalParams p;
  DualRailQubit q{"m1", "m2"};

  // rotate_z acts as -diag(1, e^{-i phi}) on the logical pair.
  for (double phi : {0.0, 0.21 * pi, 0.5 * pi, 1.4 * pi}) {
    StateVector psi = vacuum(one_qubit_layout());
    prepare_plus(psi, q, p);
    rotate_z(psi, q, phi, p);
    const Complex scale = Complex(0.0, 1.0) / std::sqrt(2.0);
    CHECK(std::abs(psi.amp("100") - scale) < 1e-12);
    CHECK(std::abs(psi.amp("010") - scale * std::exp(Complex(0.0, -phi))) < 1e-12);
    CHECK(cavity_weight(psi) < 1e-12);
  }

  StateVector zero = vacuum(one_qubit_layout());
  prepare_zero(zero, q, p);
  DensityMatrix rho = to_density(zero);
  StateVector sv = zero;
  rotate_z(sv, q, 0.73, p);
  rotate_z(rho, q, 0.73, p);
  CHECK(max_abs_diff(rho.mat, to_density(sv).mat) < 1e-12);
}

TEST_CASE("bit-flip rotation") {
  PhysicalParams p;
  DualRailQubit q{"m1", "m2"};

  // rotate_x acts as -exp(-i theta X).
  for (double theta : {0.1, 0.25 * pi, 0.5 * pi, 2.1}) {
    StateVector psi = vacuum(one_qubit_layout());
    prepare_zero(psi, q, p);
    rotate_x(psi, q, theta, p);
    const Complex i(0.0, 1.0);
    CHECK(std::abs(psi.amp("100") - i * std::cos(theta)) < 1e-12);
    CHECK(std::abs(psi.amp("010") - i * kMinusI * std::sin(theta)) < 1e-12);
    CHECK(cavity_weight(psi) < 1e-12);
  }

  // Rotations compose additively up to global phase.
  StateVector split = vacuum(one_qubit_layout());
  prepare_bloch(split, q, 0.4 * pi, 0.3, p);
  StateVector joint = split;
  rotate_x(split, q, 0.31, p);
  rotate_x(split, q, 0.55, p);
  rotate_x(joint, q, 0.86, p);
  CHECK(max_abs_diff(to_density(split).mat, to_density(joint).mat) < 1e-12);

  // Two quarter turns give the identity up to phase.
  StateVector in = vacuum(one_qubit_layout());
  prepare_bloch(in, q, 0.62 * pi, -0.9, p);
  StateVector out = in;
  rotate_x(out, q, pi / 2.0, p);
  rotate_x(out, q, pi / 2.0, p);
  CHECK(std::abs(in.amps.dot(out.amps)) >= 1.0 - 1e-9);

  StateVector dm_in = vacuum(one_qubit_layout());
  prepare_plus(dm_in, q, p);
  DensityMatrix rho = to_density(dm_in);
  rotate_x(rho, q, 1.1, p);
  rotate_x(dm_in, q, 1.1, p);
  CHECK(max_abs_diff(rho.mat, to_density(dm_in).mat) < 1e-12);
}

TEST_CASE("logical amplitude extraction") {
  PhysicalParams p;
  DualRailQubit qa{"m1", "m2"}, qb{"m3", "m4"};

  // Qubit order: first listed qubit owns the most significant bit.
  StateVector psi = vacuum(two_qubit_layout());
  prepare_bloch(psi, qa, pi, 0.0, p);  // |1>_L
  prepare_zero(psi, qb, p);            // |0>_L
  LogicalTable table = logical_amplitudes(psi, {qa, qb});
  CHECK(table.amps.size() == 4);
  CHECK(table.leakage < 1e-12);
  CHECK(std::abs(table.amps(2)) == doctest::Approx(1.0).epsilon(1e-12));
  for (int i : {0, 1, 3}) CHECK(std::abs(table.amps(i)) < 1e-12);

  LogicalTable swapped = logical_amplitudes(psi, {qb, qa});
  CHECK(std::abs(swapped.amps(1)) == doctest::Approx(1.0).epsilon(1e-12));

  // A cavity photon is leakage, not a logical amplitude.
  StateVector leaky = vacuum(two_qubit_layout());
  prepare_zero(leaky, qa, p);
  prepare_zero(leaky, qb, p);
  leaky.amps *= std::sqrt(0.7);
  leaky.amps(leaky.layout.basis_index("10101")) = std::sqrt(0.3);
  LogicalTable lt = logical_amplitudes(leaky, {qa, qb});
  CHECK(lt.leakage == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(std::norm(lt.amps(0)) == doctest::Approx(0.7).epsilon(1e-12));

  LogicalBlock block = logical_amplitudes(to_density(leaky), {qa, qb});
  CHECK(block.leakage == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(max_abs_diff(block.rho, lt.amps * lt.amps.adjoint()) < 1e-12);
}
