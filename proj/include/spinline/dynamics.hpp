#pragma once

#include <string>
#include <vector>

#include "spinline/state.hpp"
#include "spinline/types.hpp"

namespace spinline {

struct PhysicalParams {
  double coupling_j = 2.0 * pi * 6.0e6;  // effective mode-cavity coupling, rad/s
  double epsilon = 0.0;                  // excitation energy offset, rad/s
  double kappa = 0.0;                    // cavity decay rate, 1/s
  int n_max = 2;                         // per-slot Fock cutoff
  double readout_time = 400e-9;          // s, detector step duration
  double flag_gate_time = 50e-9;         // s, controlled flag-flip duration

  // Full excitation-swap time pi/(2J).
  double tau() const { return pi / (2.0 * coupling_j); }
};

// Exchange Hamiltonians of one mode-cavity pair, restricted to the sectors
// that move: basis (|10>,|01>) resp. (|20>,|11>,|02>).
Matrix build_h1(const PhysicalParams& p);
Matrix build_h2(const PhysicalParams& p);

// exp(-i H t) on the 9-dim (mode, cavity) pair space, index n_mode*3 + n_cav,
// assembled per total-excitation sector. Sectors with total > 2 are frozen to
// identity; couple() guards against populating them.
struct PairPropagator {
  Matrix mat;  // 9x9
  double duration = 0.0;
};
PairPropagator pair_propagator(const PhysicalParams& p, double t);

// Evolve the mode named `mode` jointly with the cavity for time t. Throws if
// the state has weight above tolerance on pair sectors with total > 2.
void couple(StateVector& psi, const std::string& mode, double t, const PhysicalParams& p);
void couple(DensityMatrix& rho, const std::string& mode, double t, const PhysicalParams& p);

// couple() for the full swap duration tau: moves any single excitation
// between mode and cavity (and any pair of them), up to phases.
void full_swap(StateVector& psi, const std::string& mode, const PhysicalParams& p);
void full_swap(DensityMatrix& rho, const std::string& mode, const PhysicalParams& p);

// Occupation-conditioned phase e^{-i delta t n} on one slot (the cavity is
// never affected by the detuning pulse, so the slot is named explicitly).
void detune_phase(StateVector& psi, const std::string& slot, double delta, double t);
void detune_phase(DensityMatrix& rho, const std::string& slot, double delta, double t);

// Amplitude-damping Kraus set for a three-level slot over time t, with decay
// rate kappa. Composes as a semigroup.
std::vector<Operator> cavity_loss_kraus(const std::string& slot, double kappa, double t);

// Photon loss on the cavity slot for time t at rate p.kappa.
void cavity_loss(DensityMatrix& rho, double t, const PhysicalParams& p);

struct LeakageBudget {
  double active_time = 0.0;  // seconds the cavity holds protocol photons
  double linear = 0.0;       // kappa * t, first-order loss estimate
  double exponential = 0.0;  // 1 - e^{-kappa t}, exact single-photon loss
};

LeakageBudget leakage_budget(double kappa, double active_time);

}  // namespace spinline
