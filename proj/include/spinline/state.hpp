#pragma once

#include <string>
#include <vector>

#include "spinline/layout.hpp"
#include "spinline/types.hpp"

namespace spinline {

struct StateVector {
  SlotLayout layout;
  Vector amps;

  double norm() const { return amps.norm(); }
  Complex amp(const std::string& ket) const { return amps(layout.basis_index(ket)); }
};

struct DensityMatrix {
  SlotLayout layout;
  Matrix mat;

  double trace_real() const { return mat.trace().real(); }
  Complex entry(const std::string& bra, const std::string& ket) const {
    return mat(layout.basis_index(bra), layout.basis_index(ket));
  }
  // Restores exact Hermiticity after a chain of elementwise updates.
  void symmetrize() { mat = ((mat + mat.adjoint()) / 2.0).eval(); }
};

// Matrix acting on a subset of slots, in the order listed in `targets`. The
// matrix dimension is the product of the target slot dims.
struct Operator {
  std::vector<std::string> targets;
  Matrix mat;
};

StateVector basis_state(const SlotLayout& layout, const std::string& ket);
StateVector vacuum(const SlotLayout& layout);
DensityMatrix to_density(const StateVector& psi);

StateVector tensor_product(const StateVector& a, const StateVector& b);
DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b);

// Full-dimension matrix of `op` acting on its targets inside `layout`,
// identity elsewhere. Intended for small registers and cross-checks; the
// apply_to functions below never materialize it.
Matrix embed(const Operator& op, const SlotLayout& layout);

// In-place application of a target-slot matrix: permutes the target block to
// the most significant position, applies blockwise, permutes back.
void apply_to(StateVector& psi, const Operator& op);
void apply_to(DensityMatrix& rho, const Operator& op);

// rho <- sum_k K_k rho K_k^dagger, all Kraus terms sharing one target list.
void apply_kraus(DensityMatrix& rho, const std::vector<Operator>& kraus);

// Reduced state over `keep` (kept slots retain their relative order from the
// original layout, regardless of the order given here).
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::string>& keep);

}  // namespace spinline
