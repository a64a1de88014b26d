#include "spinline/state.hpp"

#include <stdexcept>
#include <utility>

namespace spinline {

namespace {

// Flat index map listing every basis state with the target slots promoted to
// the most significant positions, in target order: map[t*rest + r] is the
// index in the original layout. `t` runs over the target block (first target
// most significant), `r` over the remaining slots in original order.
struct Promotion {
  std::vector<long> map;
  long target_dim = 1;
  long rest_dim = 1;
};

Promotion promote(const SlotLayout& layout, const std::vector<std::string>& targets) {
  const int k = layout.slot_count();
  std::vector<int> order;
  std::vector<bool> is_target(static_cast<std::size_t>(k), false);
  for (const std::string& label : targets) {
    int pos = layout.index_of(label);
    if (is_target[static_cast<std::size_t>(pos)])
      throw std::invalid_argument("target slot '" + label + "' listed twice");
    is_target[static_cast<std::size_t>(pos)] = true;
    order.push_back(pos);
  }
  for (int i = 0; i < k; ++i)
    if (!is_target[static_cast<std::size_t>(i)]) order.push_back(i);

  Promotion out;
  for (std::size_t i = 0; i < targets.size(); ++i)
    out.target_dim *= layout.slot(order[i]).dim;
  out.rest_dim = layout.dim() / out.target_dim;

  out.map.resize(static_cast<std::size_t>(layout.dim()));
  std::vector<int> digits(static_cast<std::size_t>(k), 0);
  for (long n = 0; n < layout.dim(); ++n) {
    long rem = n;
    for (int i = k - 1; i >= 0; --i) {
      const int d = layout.slot(order[static_cast<std::size_t>(i)]).dim;
      digits[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] =
          static_cast<int>(rem % d);
      rem /= d;
    }
    long orig = 0;
    for (int i = 0; i < k; ++i) orig += layout.stride(i) * digits[static_cast<std::size_t>(i)];
    out.map[static_cast<std::size_t>(n)] = orig;
  }
  return out;
}

void check_op(const Operator& op, const SlotLayout& layout) {
  if (op.targets.empty()) throw std::invalid_argument("operator needs at least one target slot");
  long dim = 1;
  for (const std::string& label : op.targets) dim *= layout.slot(layout.index_of(label)).dim;
  if (op.mat.rows() != dim || op.mat.cols() != dim)
    throw std::invalid_argument("operator matrix does not match target dimensions");
}

}  // namespace

StateVector basis_state(const SlotLayout& layout, const std::string& ket) {
  StateVector psi{layout, Vector::Zero(layout.dim())};
  psi.amps(layout.basis_index(ket)) = 1.0;
  return psi;
}

StateVector vacuum(const SlotLayout& layout) {
  StateVector psi{layout, Vector::Zero(layout.dim())};
  psi.amps(0) = 1.0;
  return psi;
}

DensityMatrix to_density(const StateVector& psi) {
  return DensityMatrix{psi.layout, psi.amps * psi.amps.adjoint()};
}

StateVector tensor_product(const StateVector& a, const StateVector& b) {
  return StateVector{concat(a.layout, b.layout), kron(a.amps, b.amps)};
}

DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix{concat(a.layout, b.layout), kron(a.mat, b.mat)};
}

Matrix embed(const Operator& op, const SlotLayout& layout) {
  check_op(op, layout);
  const Promotion pr = promote(layout, op.targets);
  Matrix full = Matrix::Zero(layout.dim(), layout.dim());
  for (long ti = 0; ti < pr.target_dim; ++ti)
    for (long tj = 0; tj < pr.target_dim; ++tj) {
      const Complex u = op.mat(ti, tj);
      if (u == Complex(0.0)) continue;
      for (long r = 0; r < pr.rest_dim; ++r)
        full(pr.map[static_cast<std::size_t>(ti * pr.rest_dim + r)],
             pr.map[static_cast<std::size_t>(tj * pr.rest_dim + r)]) = u;
    }
  return full;
}

void apply_to(StateVector& psi, const Operator& op) {
  check_op(op, psi.layout);
  const Promotion pr = promote(psi.layout, op.targets);
  Vector gathered(psi.amps.size());
  for (long n = 0; n < gathered.size(); ++n)
    gathered(n) = psi.amps(pr.map[static_cast<std::size_t>(n)]);
  // Column t holds the contiguous rest-block of target index t.
  Eigen::Map<Matrix> x(gathered.data(), pr.rest_dim, pr.target_dim);
  Matrix mixed = x * op.mat.transpose();
  Eigen::Map<Matrix>(gathered.data(), pr.rest_dim, pr.target_dim) = mixed;
  for (long n = 0; n < gathered.size(); ++n)
    psi.amps(pr.map[static_cast<std::size_t>(n)]) = gathered(n);
}

void apply_to(DensityMatrix& rho, const Operator& op) {
  check_op(op, rho.layout);
  const Promotion pr = promote(rho.layout, op.targets);
  const long d = rho.layout.dim();
  const long m = pr.target_dim, r = pr.rest_dim;

  Matrix gathered(d, d);
  for (long i = 0; i < d; ++i)
    for (long j = 0; j < d; ++j)
      gathered(i, j) = rho.mat(pr.map[static_cast<std::size_t>(i)],
                               pr.map[static_cast<std::size_t>(j)]);

  Matrix rows = Matrix::Zero(d, d);
  for (long i = 0; i < m; ++i)
    for (long j = 0; j < m; ++j) {
      const Complex u = op.mat(i, j);
      if (u != Complex(0.0)) rows.middleRows(i * r, r) += u * gathered.middleRows(j * r, r);
    }
  Matrix cols = Matrix::Zero(d, d);
  for (long i = 0; i < m; ++i)
    for (long j = 0; j < m; ++j) {
      const Complex u = std::conj(op.mat(i, j));
      if (u != Complex(0.0)) cols.middleCols(i * r, r) += u * rows.middleCols(j * r, r);
    }

  for (long i = 0; i < d; ++i)
    for (long j = 0; j < d; ++j)
      rho.mat(pr.map[static_cast<std::size_t>(i)], pr.map[static_cast<std::size_t>(j)]) =
          cols(i, j);
}

void apply_kraus(DensityMatrix& rho, const std::vector<Operator>& kraus) {
  if (kraus.empty()) throw std::invalid_argument("empty Kraus set");
  Matrix sum = Matrix::Zero(rho.layout.dim(), rho.layout.dim());
  for (const Operator& k : kraus) {
    DensityMatrix term{rho.layout, rho.mat};
    apply_to(term, k);
    sum += term.mat;
  }
  rho.mat = std::move(sum);
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::string>& keep) {
  // Kept slots keep their original relative order whatever the list order.
  std::vector<bool> keep_pos(static_cast<std::size_t>(rho.layout.slot_count()), false);
  for (const std::string& label : keep)
    keep_pos[static_cast<std::size_t>(rho.layout.index_of(label))] = true;

  std::vector<Slot> kept_slots;
  std::vector<std::string> kept_labels;
  for (int i = 0; i < rho.layout.slot_count(); ++i) {
    if (keep_pos[static_cast<std::size_t>(i)]) {
      kept_slots.push_back(rho.layout.slot(i));
      kept_labels.push_back(rho.layout.slot(i).label);
    }
  }
  SlotLayout out_layout(kept_slots);

  // Promote kept slots to the front; then the original index of (kept a,
  // traced t) is map[a*T + t].
  const Promotion pr = promote(rho.layout, kept_labels);
  const long kdim = out_layout.dim();
  const long tdim = pr.rest_dim;

  Matrix out = Matrix::Zero(kdim, kdim);
  for (long a = 0; a < kdim; ++a)
    for (long b = 0; b < kdim; ++b) {
      Complex acc = 0.0;
      for (long t = 0; t < tdim; ++t)
        acc += rho.mat(pr.map[static_cast<std::size_t>(a * tdim + t)],
                       pr.map[static_cast<std::size_t>(b * tdim + t)]);
      out(a, b) = acc;
    }
  return DensityMatrix{out_layout, std::move(out)};
}

}  // namespace spinline
