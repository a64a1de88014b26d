#pragma once

#include <string>
#include <vector>

#include "spinline/dynamics.hpp"
#include "spinline/state.hpp"

namespace spinline {

// Dual-rail logical qubit: |0>_L = one excitation in rail0, |1>_L = one in
// rail1. Gates are composed from cavity swaps, timed exchange legs and
// detuning phases; each leaves the cavity empty on validly encoded input.
// The cavity slot is located by its role in the state's layout.
struct DualRailQubit {
  std::string rail0;
  std::string rail1;
};

// Loads a cavity photon and swaps it into rail0: |0>_L up to global phase.
// Throws if the rails or the cavity are occupied.
void prepare_zero(StateVector& psi, const DualRailQubit& q, const PhysicalParams& p);

// prepare_zero followed by rotations landing on (|0>_L + |1>_L)/sqrt(2) up to
// global phase.
void prepare_plus(StateVector& psi, const DualRailQubit& q, const PhysicalParams& p);

// Logical rotation acting as exp(-i theta X) on (alpha, beta) up to global
// phase, with X the logical bit flip.
void rotate_x(StateVector& psi, const DualRailQubit& q, double theta, const PhysicalParams& p);
void rotate_x(DensityMatrix& rho, const DualRailQubit& q, double theta, const PhysicalParams& p);

// Logical phase rotation acting as diag(1, e^{-i phi}) up to global phase.
void rotate_z(StateVector& psi, const DualRailQubit& q, double phi, const PhysicalParams& p);
void rotate_z(DensityMatrix& rho, const DualRailQubit& q, double phi, const PhysicalParams& p);

// Prepares cos(theta/2)|0>_L + e^{i phi} sin(theta/2)|1>_L exactly (global
// phase aside) from empty rails.
void prepare_bloch(StateVector& psi, const DualRailQubit& q, double theta, double phi,
                   const PhysicalParams& p);

// Projection of a state onto products of {|10>,|01>} over the listed qubits.
// Index convention: qubit 0 is the most significant bit, 0_L before 1_L.
struct LogicalTable {
  Vector amps;     // 2^k complex amplitudes
  double leakage;  // weight outside the product dual-rail subspace
};
LogicalTable logical_amplitudes(const StateVector& psi, const std::vector<DualRailQubit>& qubits);

struct LogicalBlock {
  Matrix rho;      // 2^k x 2^k unnormalized computational block
  double leakage;  // weight outside the block
};
LogicalBlock logical_amplitudes(const DensityMatrix& rho, const std::vector<DualRailQubit>& qubits);

}  // namespace spinline
