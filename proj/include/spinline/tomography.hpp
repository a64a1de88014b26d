#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "spinline/protocol.hpp"
#include "spinline/state.hpp"

namespace spinline {

enum class ReadoutBasis { z, rotated };

// One measurement configuration of the verification scheme. Z reads the rails
// directly; rotated first applies, per qubit, the phase rotation by phi0 and
// an exchange-leg rotation of angle J*t0 (default t0 = tau/2, a quarter-turn
// onto the equator), turning rail statistics into transverse correlators.
struct ReadoutSetting {
  ReadoutBasis basis = ReadoutBasis::z;
  double t0 = -1.0;    // rotation leg duration; negative means tau/2
  double phi0 = 0.0;   // pre-rotation phase
};

ReadoutSetting z_setting();
ReadoutSetting rotated_setting(double phi0);

std::string setting_name(const ReadoutSetting& s);

// Result of reading all four modes in one setting. Records are 4-bit
// integers, m1 the most significant bit, bit = 1 when the detector answered
// YES to "exactly one photon". Sampled tables hold integer counts; exact
// tables hold probabilities with runs = 1.
struct CountTable {
  ReadoutSetting setting;
  double runs = 0.0;
  std::array<double, 16> counts{};
};

// Exact record distribution: attaches an empty cavity, applies the setting's
// pre-rotations, then per mode swaps to the cavity, checks "n=1?", and swaps
// back, branching over both records at each of the four checks.
CountTable exact_readout_table(const DensityMatrix& modes, const ReadoutSetting& setting,
                               const MeasurementModel& readout_model, const PhysicalParams& p);

// Categorical sampling of `runs` records from the exact distribution.
CountTable simulate_readout(const DensityMatrix& modes, const ReadoutSetting& setting, long runs,
                            const MeasurementModel& readout_model, const PhysicalParams& p,
                            std::uint64_t seed);

enum class RecordClass { comp, leak, malformed };

// Per-qubit rail bits (1,0) -> 0_L and (0,1) -> 1_L give a computational
// record; 0000 is the leak record; anything else is malformed.
RecordClass classify_record(int record);

// Logical two-bit value of a computational record (qubit A high bit).
int record_logical_value(int record);

struct DiagonalEstimate {
  std::array<double, 4> populations{};  // |00>,|01>,|10>,|11> after leak redistribution
  double leak_fraction = 0.0;           // raw 0000 fraction before redistribution
  double malformed_fraction = 0.0;      // excluded from the estimate
};

// Populations from a Z-basis table. The leak record's weight is split evenly
// onto |00> and |11> so the estimate targets the discounted state rather
// than an optimistic projection.
DiagonalEstimate estimate_diagonals(const CountTable& z_counts);

struct CoherenceEstimate {
  Complex f;                  // <01|rho|10>, scaled to the physical state
  Complex g;                  // <00|rho|11>, same scaling
  double std_error = 0.0;     // propagated multinomial error on |f|
  double comp_fraction = 0.0; // computational-record fraction across settings
};

// Correlator-based coherence estimate from rotated settings with distinct
// phases. Each setting measures C(phi) = 2Re f_c - 2Re g_c cos(2 phi)
// + 2Im g_c sin(2 phi) on the normalized computational block; the settings'
// design rows are inverted by pseudoinverse (components no setting pair can
// see, such as Im f, resolve to zero) and rescaled by the computational
// fraction. Throws unless at least two distinct phases are supplied.
CoherenceEstimate estimate_coherences(const std::vector<CountTable>& rotated_counts);

// X-state assembly from the estimates, projected to the nearest density
// matrix (eigenvalue simplex projection).
Matrix reconstruct(const DiagonalEstimate& diagonals, const CoherenceEstimate& coherence);

struct TomographyReport {
  Matrix rho;  // reconstructed two-qubit state
  double fidelity_to_target = 0.0;
  double trace_distance_to_target = 0.0;
};

// reconstruct() compared against the discounted analytic family at eta1.
TomographyReport reconstruct_with_report(const DiagonalEstimate& diagonals,
                                         const CoherenceEstimate& coherence, double eta1);

// CSV rows "setting,record,count", records as 4-bit strings, all 16 per table.
void write_count_csv(std::ostream& out, const std::vector<CountTable>& tables);

}  // namespace spinline
