#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spinline/linalg.hpp"
#include "spinline/state.hpp"
#include "spinline/types.hpp"

namespace spinline {

// Occupation of one rail pair -> five-level label:
// (1,0)->0, (0,1)->1, (2,0)->2, (0,2)->3, (0,0)->4.
// Levels 0,1 are the computational dual-rail states; 2,3,4 are leakage.
// Returns -1 for pair occupations outside the map, e.g. (1,1).
int quinit_level(int n_left, int n_right);

struct QuinitState {
  Matrix rho;                    // 25x25 over pairs (m1,m2) and (m3,m4)
  double unmapped_weight = 0.0;  // population outside the mapped occupations
};

// Compression of a four-mode state onto two five-level systems. Throws if
// the unmapped population exceeds `unmapped_tol`.
QuinitState to_quinits(const DensityMatrix& modes, double unmapped_tol = 1e-9);

// (|1001> + |0110>)/sqrt(2) over four modes: the odd-parity Bell state the
// protocol post-selects.
Vector bell_plus_modes();

// Uhlmann fidelity between states on the same register.
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);
double fidelity(const DensityMatrix& rho, const StateVector& psi);

double binary_entropy(double x);  // base 2

// Two-qubit concurrence (spin-flip eigenvalue form) and the entanglement of
// formation it determines.
double wootters_concurrence(const Matrix& rho);
double entanglement_of_formation(const Matrix& rho);

// Squared I-concurrence of a pure bipartite state: 2(1 - Tr rho_A^2), up to
// 2(d-1)/d at equal local dimension d. The partition is given either by the
// slots forming side A or by explicit factor dimensions (A most significant).
double i_concurrence_pure(const StateVector& psi, const std::vector<std::string>& side_a);
double i_concurrence_pure(const Vector& psi, long dim_a, long dim_b);

struct ConvexRoofOptions {
  int ensemble_size = 0;  // 0 picks min(2r, r^2) for rank r
  int starts = 8;         // identity start plus seeded random restarts
  int max_iters = 400;
  double tol = 1e-11;     // stop once the objective decrease stalls below this
  std::uint64_t seed = 0x5eed5eedULL;
};

struct ConvexRoofResult {
  double value = 0.0;   // minimized average squared I-concurrence
  double spread = 0.0;  // best-to-worst gap across starts
  int iterations = 0;   // total across starts
  int best_start = 0;
  bool converged = true;  // every start stalled below tol before the cap
};

// Convex-roof extension of the squared I-concurrence: minimum over ensemble
// decompositions of rho, optimized over the isometry freedom on the
// eigenensemble with a quasi-Newton descent on the Stiefel manifold. The
// value is an upper bound on the true roof within optimizer tolerance.
ConvexRoofResult convex_roof_c2(const Matrix& rho, long dim_a, long dim_b,
                                const ConvexRoofOptions& opts = {});
ConvexRoofResult convex_roof_c2(const QuinitState& rho, const ConvexRoofOptions& opts = {});

// Kills every coherence involving a leakage level and spreads the leaked
// population uniformly over all 21 leakage levels. With `uniform` off, each
// leakage diagonal keeps its own weight instead.
QuinitState dephase_outside(const QuinitState& rho, bool uniform = true);

struct DiscountResult {
  Matrix rho;                 // 4x4 two-qubit state, unit trace
  double unrecognized = 0.0;  // leakage weight not matched by a reassignment rule
};

// Classical reassignment of leakage onto computational records: pair losses
// whose partner qubit kept a definite rail go to the matching basis state
// (|42>,|24> -> |00>; |43>,|34> -> |11>), any other leakage level splits
// evenly between |00> and |11>, and leakage coherences are dropped.
DiscountResult discount(const QuinitState& rho);

// Two-qubit family the discount rule produces from the protocol output:
// [ |psi+><psi+| + (eta1/2)(|00><00| + |11><11|) ] / (1 + eta1).
Matrix discounted_final_state(double eta1);

// Weight of a two-quinit state inside the computational block.
double computational_weight(const QuinitState& rho);

enum class StateVariant { raw, dephased_outside, discounted };

struct EntanglementReport {
  double fidelity_with_psi_plus = 0.0;
  double wootters_c = 0.0;  // on the variant's two-qubit reduction
  double e_f = 0.0;
  double c2_squared = 0.0;
  StateVariant variant = StateVariant::raw;
};

// Metrics bundle for one post-processing variant of a four-mode final state.
// For raw and dephased variants the two-qubit numbers are computed on the
// renormalized computational block; for discounted, on the discount output.
EntanglementReport entanglement_report(const DensityMatrix& modes, StateVariant variant,
                                       const ConvexRoofOptions& opts = {});

}  // namespace spinline
