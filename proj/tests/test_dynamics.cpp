#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "spinline/dynamics.hpp"
#include "spinline/linalg.hpp"
#include "spinline/rng.hpp"
#include "spinline/state.hpp"
#include "spinline/types.hpp"
#include "support/testkit.hpp"

using namespace spinline;
using namespace spinline::testkit;

namespace {

SlotLayout pair_layout() {
  return SlotLayout({{"m1", 3, SlotRole::mode}, {"c", 3, SlotRole::cavity}});
}

// The 9x9 pair Hamiltonian assembled by brute force from the sector blocks,
// so the propagator can be checked against a plain spectral exponential.
Matrix assembled_pair_hamiltonian(const PhysicalParams& p) {
  Matrix h = Matrix::Zero(9, 9);
  const Matrix h1 = build_h1(p);
  const Matrix h2 = build_h2(p);
  const long one[2] = {3, 1};
  const long two[3] = {6, 4, 2};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) h(one[a], one[b]) = h1(a, b);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) h(two[a], two[b]) = h2(a, b);
  return h;
}

Matrix spectral_exponential(const Matrix& h, double t) {
  EigenDecomposition eig = hermitian_eig(h);
  Matrix phases = Matrix::Zero(h.rows(), h.cols());
  for (long i = 0; i < h.rows(); ++i)
    phases(i, i) = std::exp(Complex(0.0, -eig.values(i) * t));
  return eig.vectors * phases * eig.vectors.adjoint();
}

}  // namespace

TEST_CASE("exchange hamiltonians") {
  PhysicalParams p;
  p.epsilon = 0.3 * p.coupling_j;
  const double j = p.coupling_j;

  Matrix h1 = build_h1(p);
  CHECK(h1.rows() == 2);
  CHECK(max_abs_diff(h1, h1.adjoint()) == 0.0);
  CHECK(h1(0, 0) == Complex(p.epsilon));
  CHECK(h1(0, 1) == Complex(j));

  Matrix h2 = build_h2(p);
  CHECK(h2.rows() == 3);
  CHECK(max_abs_diff(h2, h2.adjoint()) == 0.0);
  CHECK(h2(0, 0) == Complex(2.0 * p.epsilon));
  CHECK(h2(0, 1).real() == doctest::Approx(std::sqrt(2.0) * j).epsilon(1e-15));
  CHECK(h2(0, 2) == Complex(0.0));

  // One excitation splits by +-J, two excitations by 0, +-2J.
  EigenDecomposition e1 = hermitian_eig(h1);
  CHECK(std::abs(e1.values(0) - (p.epsilon + j)) < 1e-10 * j);
  CHECK(std::abs(e1.values(1) - (p.epsilon - j)) < 1e-10 * j);

  EigenDecomposition e2 = hermitian_eig(h2);
  CHECK(std::abs(e2.values(0) - 2.0 * (p.epsilon + j)) < 1e-10 * j);
  CHECK(std::abs(e2.values(1) - 2.0 * p.epsilon) < 1e-10 * j);
  CHECK(std::abs(e2.values(2) - 2.0 * (p.epsilon - j)) < 1e-10 * j);
  for (int i = 0; i < 3; ++i) {
    Vector v = e2.vectors.col(i);
    CHECK((h2 * v - e2.values(i) * v).norm() < 1e-10 * j);
  }
}

TEST_CASE("pair propagator matches the spectral exponential") {
  PhysicalParams p;
  SUBCASE("on resonance") {}
  SUBCASE("detuned") { p.epsilon = 0.7 * p.coupling_j; }

  const Matrix h = assembled_pair_hamiltonian(p);
  for (double scale : {0.0, 0.37, 0.5, 1.0, 2.318}) {
    const double t = scale * p.tau();
    PairPropagator u = pair_propagator(p, t);
    CHECK(u.duration == t);
    CHECK(u.mat.rows() == 9);
    CHECK(max_abs_diff(u.mat, spectral_exponential(h, t)) < 1e-12);
    CHECK(max_abs_diff(u.mat * u.mat.adjoint(), Matrix::Identity(9, 9)) < 1e-12);
  }

  // Sectors with more than two excitations are frozen.
  PairPropagator u = pair_propagator(p, 0.81 * p.tau());
  for (long n : {5, 7, 8}) {
    CHECK(u.mat(n, n) == Complex(1.0));
    CHECK(u.mat.col(n).cwiseAbs().sum() == 1.0);
    CHECK(u.mat.row(n).cwiseAbs().sum() == 1.0);
  }

  CHECK_THROWS_AS(pair_propagator(p, -1e-9), std::invalid_argument);
}

TEST_CASE("swap special values") {
  PhysicalParams p;  // epsilon = 0

  // Full swap: |10> <-> |01| with a -i, two-excitation sector antidiagonal -1.
  Matrix u = pair_propagator(p, p.tau()).mat;
  const Complex mi(0.0, -1.0);
  CHECK(std::abs(u(1, 3) - mi) < 1e-12);
  CHECK(std::abs(u(3, 1) - mi) < 1e-12);
  CHECK(std::abs(u(3, 3)) < 1e-12);
  CHECK(std::abs(u(2, 6) + 1.0) < 1e-12);
  CHECK(std::abs(u(6, 2) + 1.0) < 1e-12);
  CHECK(std::abs(u(4, 4) + 1.0) < 1e-12);
  CHECK(std::abs(u(4, 6)) < 1e-12);

  // Half swap splits |11> symmetrically onto |20> and |02>: the two-photon
  // interference the parity check rides on.
  Matrix h = pair_propagator(p, p.tau() / 2.0).mat;
  const Complex target = mi / std::sqrt(2.0);
  CHECK(std::abs(h(6, 4) - target) < 1e-12);
  CHECK(std::abs(h(2, 4) - target) < 1e-12);
  CHECK(std::abs(h(4, 4)) < 1e-12);
  CHECK(std::abs(h(3, 3) - 1.0 / std::sqrt(2.0)) < 1e-12);
  CHECK(std::abs(h(1, 3) - target) < 1e-12);
}

TEST_CASE("couple conserves excitation and matches its own density form") {
  PhysicalParams p;
  p.epsilon = 0.2 * p.coupling_j;
  SlotLayout layout = pair_layout();

  RandomStream rng(23);
  StateVector psi{layout, random_vector(rng, layout.dim(), false)};
  for (long n = 0; n < layout.dim(); ++n) {
    const int total = digit_at(layout, n, 0) + digit_at(layout, n, 1);
    if (total > 2) psi.amps(n) = 0.0;
  }
  psi.amps /= psi.amps.norm();

  auto sector_weight = [&](const StateVector& s, int total) {
    double acc = 0.0;
    for (long n = 0; n < layout.dim(); ++n)
      if (digit_at(layout, n, 0) + digit_at(layout, n, 1) == total) acc += std::norm(s.amps(n));
    return acc;
  };
  const double w0 = sector_weight(psi, 0), w1 = sector_weight(psi, 1), w2 = sector_weight(psi, 2);

  StateVector evolved = psi;
  couple(evolved, "m1", 0.61 * p.tau(), p);
  CHECK(evolved.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sector_weight(evolved, 0) == doctest::Approx(w0).epsilon(1e-12));
  CHECK(sector_weight(evolved, 1) == doctest::Approx(w1).epsilon(1e-12));
  CHECK(sector_weight(evolved, 2) == doctest::Approx(w2).epsilon(1e-12));

  DensityMatrix rho = to_density(psi);
  couple(rho, "m1", 0.61 * p.tau(), p);
  CHECK(max_abs_diff(rho.mat, to_density(evolved).mat) < 1e-12);

  // On resonance, two full swaps return the one-excitation sector with a sign
  // and leave the two-excitation sector exactly restored.
  PhysicalParams ideal;
  StateVector one = basis_state(layout, "10");
  full_swap(one, "m1", ideal);
  CHECK(std::abs(one.amp("01") - Complex(0.0, -1.0)) < 1e-12);
  full_swap(one, "m1", ideal);
  CHECK(std::abs(one.amp("10") + 1.0) < 1e-12);

  StateVector two = basis_state(layout, "11");
  full_swap(two, "m1", ideal);
  full_swap(two, "m1", ideal);
  CHECK(std::abs(two.amp("11") - 1.0) < 1e-12);

  StateVector overflow = basis_state(layout, "21");
  CHECK_THROWS_AS(couple(overflow, "m1", ideal.tau(), ideal), std::runtime_error);
}

TEST_CASE("detuning phase") {
  SlotLayout layout = pair_layout();
  StateVector psi{layout, Vector::Zero(layout.dim())};
  psi.amps(layout.basis_index("00")) = 0.5;
  psi.amps(layout.basis_index("10")) = 0.5;
  psi.amps(layout.basis_index("20")) = std::sqrt(0.5);

  const double delta = 3.7e6, t = 0.83e-6;
  StateVector rotated = psi;
  detune_phase(rotated, "m1", delta, t);
  for (int n = 0; n < 3; ++n) {
    const Complex expected =
        psi.amps(layout.basis_index(std::to_string(n) + "0")) *
        std::exp(Complex(0.0, -delta * t * n));
    CHECK(std::abs(rotated.amps(layout.basis_index(std::to_string(n) + "0")) - expected) < 1e-14);
  }

  DensityMatrix rho = to_density(psi);
  detune_phase(rho, "m1", delta, t);
  CHECK(max_abs_diff(rho.mat, to_density(rotated).mat) < 1e-14);
}

TEST_CASE("cavity loss channel") {
  const double kappa = 2.0 * pi / 20e-6;
  const double t = 0.4e-6;

  std::vector<Operator> kraus = cavity_loss_kraus("c", kappa, t);
  REQUIRE(kraus.size() == 3);
  Matrix sum = Matrix::Zero(3, 3);
  for (const Operator& k : kraus) sum += k.mat.adjoint() * k.mat;
  CHECK(max_abs_diff(sum, Matrix::Identity(3, 3)) < 1e-14);

  SlotLayout layout({{"c", 3, SlotRole::cavity}});
  RandomStream rng(31);
  DensityMatrix rho{layout, random_density(rng, 3, 3)};

  // Semigroup: two short applications equal one long one.
  DensityMatrix split = rho;
  apply_kraus(split, cavity_loss_kraus("c", kappa, 0.3e-6));
  apply_kraus(split, cavity_loss_kraus("c", kappa, 0.9e-6));
  DensityMatrix joint = rho;
  apply_kraus(joint, cavity_loss_kraus("c", kappa, 1.2e-6));
  CHECK(max_abs_diff(split.mat, joint.mat) < 1e-14);

  // Fock populations decay as e^{-n kappa t}.
  DensityMatrix fock{layout, Matrix::Zero(3, 3)};
  fock.mat(2, 2) = 1.0;
  PhysicalParams p;
  p.kappa = kappa;
  cavity_loss(fock, t, p);
  CHECK(fock.trace_real() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(fock.mat(2, 2).real() == doctest::Approx(std::exp(-2.0 * kappa * t)).epsilon(1e-12));

  DensityMatrix vac{layout, Matrix::Zero(3, 3)};
  vac.mat(0, 0) = 1.0;
  cavity_loss(vac, t, p);
  CHECK(vac.mat(0, 0).real() == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(cavity_loss_kraus("c", -1.0, t), std::invalid_argument);
}

TEST_CASE("leakage budget") {
  // Kappa^-1 = 3.183 us with half a microsecond of cavity occupancy: the
  // linear estimate lands at 15.7%, the exponential at 14.5%.
  LeakageBudget b = leakage_budget(1.0 / 3.183e-6, 0.5e-6);
  CHECK(b.active_time == 0.5e-6);
  CHECK(b.linear == doctest::Approx(0.15708451146716934).epsilon(1e-15));
  CHECK(b.exponential == doctest::Approx(0.1453681704241786).epsilon(1e-15));
  CHECK(b.exponential == doctest::Approx(1.0 - std::exp(-b.linear)).epsilon(1e-15));
  CHECK(b.linear > b.exponential);

  LeakageBudget lossless = leakage_budget(0.0, 1.0e-6);
  CHECK(lossless.linear == 0.0);
  CHECK(lossless.exponential == 0.0);

  PhysicalParams p;
  CHECK(p.tau() == doctest::Approx(41.6666666667e-9).epsilon(1e-10));
}
