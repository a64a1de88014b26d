#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spinline/dynamics.hpp"
#include "spinline/logical.hpp"
#include "spinline/state.hpp"

namespace spinline {

// Detector faults: eta1 is the probability that a present n-photon event goes
// unseen (false NO), eta2 that an absent one is reported (false YES). With
// dephase_always the apparatus destroys coherence between the n and not-n
// blocks regardless of the record; switching it off keeps the record
// probabilities but reduces the back-action to the minimal Kraus pair
// sqrt(eta1) P + sqrt(1-eta2) Q (and its YES partner).
struct MeasurementModel {
  double eta1 = 0.0;
  double eta2 = 0.0;
  bool dephase_always = true;
};

enum class Detection { no, yes };

struct MeasurementOutcome {
  double probability = 0.0;
  DensityMatrix state;  // normalized; zero matrix when probability is 0
};

struct MeasurementBranches {
  MeasurementOutcome no;
  MeasurementOutcome yes;
};

// Faulty check for exactly n photons in the slot with the cavity role.
// Returns both conditioned branches with their record probabilities.
MeasurementBranches measure_cavity_n(const DensityMatrix& rho, int n,
                                     const MeasurementModel& model);

// Same instrument on an arbitrary slot (the deferred variant reads a flag).
MeasurementBranches measure_slot_n(const DensityMatrix& rho, const std::string& slot, int n,
                                   const MeasurementModel& model);

// In-place collapse onto the requested record; returns its probability.
// Throws if that record has zero probability.
double collapse_slot_n(DensityMatrix& rho, const std::string& slot, int n, Detection record,
                       const MeasurementModel& model);

enum class Variant {
  standard,  // two in-block cavity checks per block
  deferred,  // checks replaced by controlled flag flips, one flag readout per block
};

struct StepRecord {
  std::string op;
  double duration = 0.0;
  std::optional<double> no_probability;  // set on detector steps only
};

struct ProtocolResult {
  double success_probability = 1.0;
  std::vector<double> no_probabilities;  // detector checks in protocol order
  DensityMatrix final_state;             // four modes; cavity (and flag) verified empty and traced
  std::vector<StepRecord> step_log;
  Variant variant = Variant::standard;
  double cavity_active_time = 0.0;  // seconds the cavity can hold protocol photons
  // Full-register snapshots along the all-NO record (standard variant).
  std::optional<DensityMatrix> after_first_check;
  std::optional<DensityMatrix> after_second_check;
  std::optional<DensityMatrix> after_first_block;
};

// Register slots: modes m1..m4, cavity c (all n_max+1 levels), and a
// two-level flag f when requested.
SlotLayout protocol_register(bool with_flag = false, int n_max = 2);

// Both dual-rail qubits in (|0>_L + |1>_L)/sqrt(2) with unit-positive
// amplitudes, cavity (and flag) empty. Qubit A is (m1, m2), qubit B (m3, m4).
StateVector protocol_input(bool with_flag = false);

// One building block on the all-NO record: full swap of railA into the
// cavity, three exchange legs on railB interleaved with two two-photon
// checks, full swap back. Appends to `log`; optional snapshots are taken
// after the first and second check.
void parity_block(DensityMatrix& rho, const std::string& rail_a, const std::string& rail_b,
                  const MeasurementModel& model, const PhysicalParams& p,
                  std::vector<StepRecord>& log, DensityMatrix* snap_first_check = nullptr,
                  DensityMatrix* snap_second_check = nullptr);

// Parity projection of two dual-rail qubits, post-selected on the all-NO
// record: block(rail0s) then block(rail1s). Odd-parity logical components
// survive; even-parity ones are rejected or, on missed detections, leak
// through as the error terms of the final state.
ProtocolResult parity_projection(const StateVector& input, const DualRailQubit& q1,
                                 const DualRailQubit& q2, const MeasurementModel& model,
                                 const PhysicalParams& p);
ProtocolResult parity_projection(const DensityMatrix& input, const DualRailQubit& q1,
                                 const DualRailQubit& q2, const MeasurementModel& model,
                                 const PhysicalParams& p);

// Deferred-measurement variant: the in-block checks become controlled flips
// of a flag slot (triggered by the two-photon cavity component); the flag is
// read out once per block after the closing swap, then reset. Halves the
// detector steps per run.
ProtocolResult parity_projection_deferred(const StateVector& input, const DualRailQubit& q1,
                                          const DualRailQubit& q2, const MeasurementModel& model,
                                          const PhysicalParams& p);
ProtocolResult parity_projection_deferred(const DensityMatrix& input, const DualRailQubit& q1,
                                          const DualRailQubit& q2, const MeasurementModel& model,
                                          const PhysicalParams& p);

// Probability that every detector reports NO on the standard protocol input.
double pf_closed_form(double eta1, double eta2);

// One root-to-leaf record path through the protocol's branching tree. YES
// branches are carried through the remaining schedule so the probability-
// weighted leaf mixture reproduces the unconditional (record-ignored)
// evolution; physically such runs are simply aborted.
struct PathLeaf {
  std::vector<Detection> records;
  double probability = 0.0;
  DensityMatrix final_state;  // modes only, conditioned on this record path
};

// All record paths with exact probabilities: 16 leaves standard, 4 deferred.
// Leaf order is lexicographic with NO before YES.
std::vector<PathLeaf> enumerate_paths(const MeasurementModel& model, const PhysicalParams& p,
                                      Variant variant = Variant::standard);

struct TrajectoryResult {
  long trials = 0;
  long success_count = 0;
  std::vector<long> leaf_counts;  // parallel to enumerate_paths order
  std::vector<PathLeaf> leaves;
  double empirical_pf() const {
    return trials > 0 ? double(success_count) / double(trials) : 0.0;
  }
};

// Monte Carlo over detector records: each trial draws one record path from
// the exact branch probabilities; success means every record reads NO.
// Trial i draws from the substream derived from (seed, i), so any subset of
// trials is reproducible in isolation.
TrajectoryResult run_trajectories(long trials, std::uint64_t seed, const MeasurementModel& model,
                                  const PhysicalParams& p, Variant variant = Variant::standard);

}  // namespace spinline
