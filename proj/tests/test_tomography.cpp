#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "spinline/linalg.hpp"
#include "spinline/metrics.hpp"
#include "spinline/state.hpp"
#include "spinline/tomography.hpp"
#include "spinline/types.hpp"
#include "support/protocol_oracle.hpp"

using namespace spinline;

namespace {

DensityMatrix final_state(double eta1) {
  SlotLayout modes = oracle::modes_register();
  return DensityMatrix{modes, oracle::final_modes(modes, eta1)};
}

const MeasurementModel kIdealReadout{0.0, 0.0, true};

std::vector<CountTable> exact_tables(const DensityMatrix& modes, const PhysicalParams& p) {
  return {exact_readout_table(modes, rotated_setting(0.0), kIdealReadout, p),
          exact_readout_table(modes, rotated_setting(pi / 2.0), kIdealReadout, p)};
}

}  // namespace

TEST_CASE("record classification") {
  // Computational records pair (1,0) or (0,1) on both qubits; 0000 is the
  // leak record; everything else is malformed.
  for (int record = 0; record < 16; ++record) {
    CAPTURE(record);
    const int a = (record >> 2) & 3, b = record & 3;
    const bool a_comp = a == 1 || a == 2, b_comp = b == 1 || b == 2;
    if (a_comp && b_comp) {
      CHECK(classify_record(record) == RecordClass::comp);
      const int value = ((a == 1 ? 1 : 0) << 1) | (b == 1 ? 1 : 0);
      CHECK(record_logical_value(record) == value);
    } else if (record == 0) {
      CHECK(classify_record(record) == RecordClass::leak);
      CHECK(record_logical_value(record) == -1);
    } else {
      CHECK(classify_record(record) == RecordClass::malformed);
      CHECK(record_logical_value(record) == -1);
    }
  }
  CHECK(record_logical_value(0b1010) == 0);
  CHECK(record_logical_value(0b1001) == 1);
  CHECK(record_logical_value(0b0110) == 2);
  CHECK(record_logical_value(0b0101) == 3);
}

TEST_CASE("exact rail statistics") {
  PhysicalParams p;
  const double eta1 = 0.1;
  CountTable z = exact_readout_table(final_state(eta1), z_setting(), kIdealReadout, p);
  CHECK(z.runs == 1.0);

  double total = 0.0;
  for (double c : z.counts) total += c;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  const double norm = 1.0 + eta1;
  CHECK(z.counts[0b1001] == doctest::Approx(0.5 / norm).epsilon(1e-12));
  CHECK(z.counts[0b0110] == doctest::Approx(0.5 / norm).epsilon(1e-12));
  CHECK(z.counts[0b1010] == doctest::Approx(eta1 / 4.0 / norm).epsilon(1e-12));
  CHECK(z.counts[0b0101] == doctest::Approx(eta1 / 4.0 / norm).epsilon(1e-12));
  // Both stray photons sit in one mode, so every detector answers NO.
  CHECK(z.counts[0b0000] == doctest::Approx(eta1 / 2.0 / norm).epsilon(1e-12));
  for (int r = 0; r < 16; ++r)
    if (r != 0b1001 && r != 0b0110 && r != 0b1010 && r != 0b0101 && r != 0)
      CHECK(z.counts[r] < 1e-14);

  // Leak weight is split onto |00> and |11>, which lands the diagonals
  // exactly on the discounted family.
  DiagonalEstimate d = estimate_diagonals(z);
  Matrix rd = oracle::rho_d(eta1);
  for (int k = 0; k < 4; ++k)
    CHECK(d.populations[std::size_t(k)] == doctest::Approx(rd(k, k).real()).epsilon(1e-12));
  CHECK(d.leak_fraction == doctest::Approx(eta1 / 2.0 / norm).epsilon(1e-12));
  CHECK(d.malformed_fraction < 1e-15);
}

TEST_CASE("rotated settings expose the coherences") {
  PhysicalParams p;
  const double eta1 = 0.1;
  std::vector<CountTable> tables = exact_tables(final_state(eta1), p);

  CoherenceEstimate c = estimate_coherences(tables);
  CHECK(std::abs(c.f - Complex(0.5 / 1.1, 0.0)) < 1e-9);
  CHECK(std::abs(c.g) < 1e-9);
  // Every computational record comes from the dual-rail block, whose weight
  // includes the sigma branches' surviving rail components.
  CHECK(c.comp_fraction == doctest::Approx((1.0 + eta1 / 2.0) / (1.0 + eta1)).epsilon(1e-9));
  CHECK(c.std_error >= 0.0);

  // Leaked pairs rotate into 00 or 11 pair records, never 10 or 01: the
  // malformed bucket is populated but no leak reaches the comp bucket.
  double malformed = 0.0, comp = 0.0;
  for (int r = 0; r < 16; ++r) {
    if (classify_record(r) == RecordClass::malformed) malformed += tables[0].counts[r];
    if (classify_record(r) == RecordClass::comp) comp += tables[0].counts[r];
  }
  CHECK(malformed > 1e-4);
  CHECK(comp == doctest::Approx((1.0 + eta1 / 2.0) / (1.0 + eta1)).epsilon(1e-9));

  CHECK_THROWS_AS(estimate_coherences({tables[0]}), std::invalid_argument);
  std::vector<CountTable> same_phase = {tables[0], tables[0]};
  CHECK_THROWS_AS(estimate_coherences(same_phase), std::invalid_argument);
  std::vector<CountTable> with_z = tables;
  with_z.push_back(exact_readout_table(final_state(eta1), z_setting(), kIdealReadout, p));
  CHECK_THROWS_AS(estimate_coherences(with_z), std::invalid_argument);
}

TEST_CASE("round trip from exact statistics") {
  PhysicalParams p;
  for (double eta1 : {0.0, 0.1, 0.5}) {
    CAPTURE(eta1);
    DensityMatrix modes = final_state(eta1);
    CountTable z = exact_readout_table(modes, z_setting(), kIdealReadout, p);
    CoherenceEstimate c = estimate_coherences(exact_tables(modes, p));
    Matrix rho = reconstruct(estimate_diagonals(z), c);
    CHECK(max_abs_diff(rho, oracle::rho_d(eta1)) < 1e-9);

    TomographyReport report = reconstruct_with_report(estimate_diagonals(z), c, eta1);
    CHECK(report.trace_distance_to_target < 1e-9);
    CHECK(report.fidelity_to_target == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("sampled reconstruction") {
  PhysicalParams p;
  const double eta1 = 0.1;
  DensityMatrix modes = final_state(eta1);
  const long runs = 100000;

  CountTable z = simulate_readout(modes, z_setting(), runs, kIdealReadout, p, 11);
  CountTable r0 = simulate_readout(modes, rotated_setting(0.0), runs, kIdealReadout, p, 12);
  CountTable r1 = simulate_readout(modes, rotated_setting(pi / 2.0), runs, kIdealReadout, p, 13);

  double total = 0.0;
  for (double c : z.counts) {
    CHECK(c == std::floor(c));
    total += c;
  }
  CHECK(total == double(runs));
  CHECK(z.runs == double(runs));

  CountTable again = simulate_readout(modes, z_setting(), runs, kIdealReadout, p, 11);
  CHECK(again.counts == z.counts);
  CountTable other = simulate_readout(modes, z_setting(), runs, kIdealReadout, p, 12);
  CHECK(other.counts != z.counts);

  TomographyReport report =
      reconstruct_with_report(estimate_diagonals(z), estimate_coherences({r0, r1}), eta1);
  CHECK(report.trace_distance_to_target < 0.05);
  CHECK(report.rho.trace().real() == doctest::Approx(1.0).epsilon(1e-12));
  EigenDecomposition eig = hermitian_eig(report.rho);
  CHECK(eig.values.minCoeff() > -1e-12);
}

TEST_CASE("faulty readout keeps the tables normalized") {
  PhysicalParams p;
  MeasurementModel faulty{0.05, 0.02, true};
  CountTable z = exact_readout_table(final_state(0.1), z_setting(), faulty, p);
  double total = 0.0;
  for (double c : z.counts) total += c;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  // Pure missed detections push weight from the single-photon records toward
  // the all-NO record.
  CountTable miss = exact_readout_table(final_state(0.1), z_setting(),
                                        MeasurementModel{0.05, 0.0, true}, p);
  CountTable ideal = exact_readout_table(final_state(0.1), z_setting(), kIdealReadout, p);
  CHECK(miss.counts[0b0000] > ideal.counts[0b0000]);
  CHECK(miss.counts[0b1001] < ideal.counts[0b1001]);
}

TEST_CASE("count table export") {
  PhysicalParams p;
  CountTable z = exact_readout_table(final_state(0.0), z_setting(), kIdealReadout, p);
  std::ostringstream out;
  write_count_csv(out, {z});
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "setting,record,count");
  int rows = 0;
  bool saw_bell_record = false;
  while (std::getline(in, line)) {
    ++rows;
    if (line.find(",1001,") != std::string::npos) saw_bell_record = true;
  }
  CHECK(rows == 16);
  CHECK(saw_bell_record);
}
