#include "spinline/protocol.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "spinline/rng.hpp"

namespace spinline {

namespace {

std::string role_label(const SlotLayout& layout, SlotRole role, const char* what) {
  for (int i = 0; i < layout.slot_count(); ++i)
    if (layout.slot(i).role == role) return layout.slot(i).label;
  throw std::invalid_argument(std::string("layout has no ") + what + " slot");
}

double occupied_weight(const DensityMatrix& rho, const std::string& label) {
  const int pos = rho.layout.index_of(label);
  const long stride = rho.layout.stride(pos);
  const long dim = rho.layout.slot(pos).dim;
  double w = 0.0;
  for (long i = 0; i < rho.mat.rows(); ++i)
    if ((i / stride) % dim != 0) w += rho.mat(i, i).real();
  return w;
}

// Exchange leg durations of one block: quarter, half, quarter swap.
struct BlockTimes {
  double t1, t2, t3;
  explicit BlockTimes(const PhysicalParams& p)
      : t1(pi / (4.0 * p.coupling_j)),
        t2(pi / (2.0 * p.coupling_j)),
        t3(pi / (4.0 * p.coupling_j)) {}
  double exchange_total(const PhysicalParams& p) const { return 2.0 * p.tau() + t1 + t2 + t3; }
};

void log_step(std::vector<StepRecord>& log, std::string op, double duration,
              std::optional<double> no_probability = std::nullopt) {
  log.push_back(StepRecord{std::move(op), duration, no_probability});
}

// Controlled flag flip: X on the flag iff the cavity holds exactly two
// photons. Index within the (cavity, flag) pair is n_c * 2 + n_f.
Operator flag_flip_op(const SlotLayout& layout) {
  const std::string cav = role_label(layout, SlotRole::cavity, "cavity");
  const std::string flag = role_label(layout, SlotRole::flag, "flag");
  Matrix u = Matrix::Identity(6, 6);
  u(4, 4) = 0.0;
  u(5, 5) = 0.0;
  u(4, 5) = 1.0;
  u(5, 4) = 1.0;
  return Operator{{cav, flag}, u};
}

void reset_flag(DensityMatrix& rho) {
  const std::string flag = role_label(rho.layout, SlotRole::flag, "flag");
  Matrix keep = Matrix::Zero(2, 2), pump = Matrix::Zero(2, 2);
  keep(0, 0) = 1.0;
  pump(0, 1) = 1.0;
  apply_kraus(rho, {Operator{{flag}, keep}, Operator{{flag}, pump}});
}

}  // namespace

MeasurementBranches measure_slot_n(const DensityMatrix& rho, const std::string& slot, int n,
                                   const MeasurementModel& model) {
  const int pos = rho.layout.index_of(slot);
  const long stride = rho.layout.stride(pos);
  const long dim = rho.layout.slot(pos).dim;
  if (n < 0 || n >= dim) throw std::invalid_argument("photon count outside the slot's range");
  const long d = rho.mat.rows();

  auto in_block = [&](long i) { return (i / stride) % dim == n; };

  double p = 0.0, tr = 0.0;
  for (long i = 0; i < d; ++i) {
    tr += rho.mat(i, i).real();
    if (in_block(i)) p += rho.mat(i, i).real();
  }

  MeasurementBranches out;
  out.no.probability = model.eta1 * p + (1.0 - model.eta2) * (tr - p);
  out.yes.probability = (1.0 - model.eta1) * p + model.eta2 * (tr - p);

  // Elementwise block weights. With dephase_always the cross blocks are
  // zeroed; otherwise the minimal Kraus pair keeps them at the geometric
  // mean, leaving every record probability unchanged.
  auto conditioned = [&](double on_p, double on_q, double prob) {
    MeasurementOutcome outcome;
    outcome.probability = prob;
    outcome.state = DensityMatrix{rho.layout, Matrix::Zero(d, d)};
    if (prob <= 0.0) return outcome;
    const double cross = model.dephase_always ? 0.0 : std::sqrt(on_p * on_q);
    Matrix& m = outcome.state.mat;
    for (long i = 0; i < d; ++i)
      for (long j = 0; j < d; ++j) {
        const bool bi = in_block(i), bj = in_block(j);
        const double w = bi == bj ? (bi ? on_p : on_q) : cross;
        m(i, j) = w * rho.mat(i, j) / prob;
      }
    outcome.state.symmetrize();
    return outcome;
  };
  out.no = conditioned(model.eta1, 1.0 - model.eta2, out.no.probability);
  out.yes = conditioned(1.0 - model.eta1, model.eta2, out.yes.probability);
  return out;
}

MeasurementBranches measure_cavity_n(const DensityMatrix& rho, int n,
                                     const MeasurementModel& model) {
  return measure_slot_n(rho, role_label(rho.layout, SlotRole::cavity, "cavity"), n, model);
}

double collapse_slot_n(DensityMatrix& rho, const std::string& slot, int n, Detection record,
                       const MeasurementModel& model) {
  MeasurementBranches branches = measure_slot_n(rho, slot, n, model);
  MeasurementOutcome& picked = record == Detection::no ? branches.no : branches.yes;
  if (picked.probability <= 0.0)
    throw std::runtime_error("requested detector record has zero probability");
  rho = std::move(picked.state);
  return picked.probability;
}

SlotLayout protocol_register(bool with_flag, int n_max) {
  const int d = n_max + 1;
  std::vector<Slot> slots = {{"m1", d, SlotRole::mode},
                             {"m2", d, SlotRole::mode},
                             {"m3", d, SlotRole::mode},
                             {"m4", d, SlotRole::mode},
                             {"c", d, SlotRole::cavity}};
  if (with_flag) slots.push_back({"f", 2, SlotRole::flag});
  return SlotLayout(slots);
}

StateVector protocol_input(bool with_flag) {
  SlotLayout layout = protocol_register(with_flag);
  StateVector psi = vacuum(layout);
  psi.amps(0) = 0.0;
  std::vector<int> digits(static_cast<std::size_t>(layout.slot_count()), 0);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      for (auto& d : digits) d = 0;
      digits[static_cast<std::size_t>(a)] = 1;      // m1 or m2
      digits[static_cast<std::size_t>(2 + b)] = 1;  // m3 or m4
      psi.amps(layout.encode(digits)) = 0.5;
    }
  return psi;
}

void parity_block(DensityMatrix& rho, const std::string& rail_a, const std::string& rail_b,
                  const MeasurementModel& model, const PhysicalParams& p,
                  std::vector<StepRecord>& log, DensityMatrix* snap_first_check,
                  DensityMatrix* snap_second_check) {
  const std::string cav = role_label(rho.layout, SlotRole::cavity, "cavity");
  const BlockTimes bt(p);

  full_swap(rho, rail_a, p);
  log_step(log, "swap(" + rail_a + ")", p.tau());

  couple(rho, rail_b, bt.t1, p);
  log_step(log, "couple(" + rail_b + ")", bt.t1);
  double pr = collapse_slot_n(rho, cav, 2, Detection::no, model);
  log_step(log, "measure(" + cav + ", n=2)", p.readout_time, pr);
  if (snap_first_check) *snap_first_check = rho;

  couple(rho, rail_b, bt.t2, p);
  log_step(log, "couple(" + rail_b + ")", bt.t2);
  pr = collapse_slot_n(rho, cav, 2, Detection::no, model);
  log_step(log, "measure(" + cav + ", n=2)", p.readout_time, pr);
  if (snap_second_check) *snap_second_check = rho;

  couple(rho, rail_b, bt.t3, p);
  log_step(log, "couple(" + rail_b + ")", bt.t3);

  full_swap(rho, rail_a, p);
  log_step(log, "swap(" + rail_a + ")", p.tau());
}

namespace {

void parity_block_deferred(DensityMatrix& rho, const std::string& rail_a,
                           const std::string& rail_b, const MeasurementModel& model,
                           const PhysicalParams& p, std::vector<StepRecord>& log) {
  const std::string flag = role_label(rho.layout, SlotRole::flag, "flag");
  const Operator cnot = flag_flip_op(rho.layout);
  const BlockTimes bt(p);

  full_swap(rho, rail_a, p);
  log_step(log, "swap(" + rail_a + ")", p.tau());
  couple(rho, rail_b, bt.t1, p);
  log_step(log, "couple(" + rail_b + ")", bt.t1);
  apply_to(rho, cnot);
  log_step(log, "flag_flip", p.flag_gate_time);
  couple(rho, rail_b, bt.t2, p);
  log_step(log, "couple(" + rail_b + ")", bt.t2);
  apply_to(rho, cnot);
  log_step(log, "flag_flip", p.flag_gate_time);
  couple(rho, rail_b, bt.t3, p);
  log_step(log, "couple(" + rail_b + ")", bt.t3);
  full_swap(rho, rail_a, p);
  log_step(log, "swap(" + rail_a + ")", p.tau());

  const double pr = collapse_slot_n(rho, flag, 1, Detection::no, model);
  log_step(log, "measure(" + flag + ", n=1)", p.readout_time, pr);
  reset_flag(rho);
  log_step(log, "reset(" + flag + ")", 0.0);
}

// Shared tail: collect detector records, verify nothing is parked in the
// cavity or flag, trace the register down to the modes.
ProtocolResult finish_protocol(DensityMatrix rho, std::vector<StepRecord> log, Variant variant,
                               double active_time) {
  ProtocolResult out;
  out.variant = variant;
  out.cavity_active_time = active_time;
  out.step_log = std::move(log);
  out.success_probability = 1.0;
  for (const StepRecord& rec : out.step_log)
    if (rec.no_probability) {
      out.no_probabilities.push_back(*rec.no_probability);
      out.success_probability *= *rec.no_probability;
    }

  std::vector<std::string> keep;
  for (int i = 0; i < rho.layout.slot_count(); ++i) {
    const Slot& slot = rho.layout.slot(i);
    if (slot.role == SlotRole::mode) {
      keep.push_back(slot.label);
    } else if (occupied_weight(rho, slot.label) > 1e-9) {
      throw std::runtime_error("slot '" + slot.label + "' still occupied at protocol end");
    }
  }
  out.final_state = partial_trace(rho, keep);
  out.final_state.symmetrize();
  return out;
}

}  // namespace

ProtocolResult parity_projection(const DensityMatrix& input, const DualRailQubit& q1,
                                 const DualRailQubit& q2, const MeasurementModel& model,
                                 const PhysicalParams& p) {
  DensityMatrix rho = input;
  std::vector<StepRecord> log;
  DensityMatrix snap1 = rho, snap2 = rho;

  parity_block(rho, q1.rail0, q2.rail0, model, p, log, &snap1, &snap2);
  DensityMatrix after_block = rho;
  parity_block(rho, q1.rail1, q2.rail1, model, p, log);

  const double per_block = BlockTimes(p).exchange_total(p) + 2.0 * p.readout_time;
  ProtocolResult out = finish_protocol(std::move(rho), std::move(log), Variant::standard,
                                       2.0 * per_block);
  out.after_first_check = std::move(snap1);
  out.after_second_check = std::move(snap2);
  out.after_first_block = std::move(after_block);
  return out;
}

ProtocolResult parity_projection(const StateVector& input, const DualRailQubit& q1,
                                 const DualRailQubit& q2, const MeasurementModel& model,
                                 const PhysicalParams& p) {
  return parity_projection(to_density(input), q1, q2, model, p);
}

ProtocolResult parity_projection_deferred(const DensityMatrix& input, const DualRailQubit& q1,
                                          const DualRailQubit& q2, const MeasurementModel& model,
                                          const PhysicalParams& p) {
  DensityMatrix rho = input;
  std::vector<StepRecord> log;
  parity_block_deferred(rho, q1.rail0, q2.rail0, model, p, log);
  parity_block_deferred(rho, q1.rail1, q2.rail1, model, p, log);

  // The flag is read after the closing swap, so the cavity is already empty
  // during readout and only the flag gates extend its busy window.
  const double per_block = BlockTimes(p).exchange_total(p) + 2.0 * p.flag_gate_time;
  return finish_protocol(std::move(rho), std::move(log), Variant::deferred, 2.0 * per_block);
}

ProtocolResult parity_projection_deferred(const StateVector& input, const DualRailQubit& q1,
                                          const DualRailQubit& q2, const MeasurementModel& model,
                                          const PhysicalParams& p) {
  return parity_projection_deferred(to_density(input), q1, q2, model, p);
}

double pf_closed_form(double eta1, double eta2) {
  // The input splits into a weight-1/2 component the checks never catch and
  // four weight-1/8 components caught at exactly one check (the exchange legs
  // move a caught two-photon branch out of the cavity before the next check).
  // All-NO survival is (1-eta2) per uncaught check and eta1 for the caught
  // one, so the product of the four conditional NO probabilities collapses to
  // (1-eta2)^3 (1 - eta2 + eta1) / 2.
  const double keep = 1.0 - eta2;
  return keep * keep * keep * (keep + eta1) / 2.0;
}

std::vector<PathLeaf> enumerate_paths(const MeasurementModel& model, const PhysicalParams& p,
                                      Variant variant) {
  const bool deferred = variant == Variant::deferred;
  DensityMatrix input = to_density(protocol_input(deferred));
  const SlotLayout& layout = input.layout;
  const DualRailQubit q1{"m1", "m2"}, q2{"m3", "m4"};
  const BlockTimes bt(p);

  // segments[i] runs the unitary ops preceding check i; the last entry is
  // the tail after the final check. Deferred checks read the flag, and the
  // segment after each deferred check starts by resetting it.
  using Segment = std::function<void(DensityMatrix&)>;
  std::vector<Segment> segments;
  std::string check_slot;
  int check_n = 0;

  if (!deferred) {
    check_slot = role_label(layout, SlotRole::cavity, "cavity");
    check_n = 2;
    auto open_block = [&p, bt](DensityMatrix& r, const std::string& a, const std::string& b) {
      full_swap(r, a, p);
      couple(r, b, bt.t1, p);
    };
    segments.push_back([=, &p](DensityMatrix& r) { open_block(r, q1.rail0, q2.rail0); });
    segments.push_back([=, &p](DensityMatrix& r) { couple(r, q2.rail0, bt.t2, p); });
    segments.push_back([=, &p](DensityMatrix& r) {
      couple(r, q2.rail0, bt.t3, p);
      full_swap(r, q1.rail0, p);
      open_block(r, q1.rail1, q2.rail1);
    });
    segments.push_back([=, &p](DensityMatrix& r) { couple(r, q2.rail1, bt.t2, p); });
    segments.push_back([=, &p](DensityMatrix& r) {
      couple(r, q2.rail1, bt.t3, p);
      full_swap(r, q1.rail1, p);
    });
  } else {
    check_slot = role_label(layout, SlotRole::flag, "flag");
    check_n = 1;
    const Operator cnot = flag_flip_op(layout);
    auto block_body = [&p, bt, cnot](DensityMatrix& r, const std::string& a,
                                     const std::string& b) {
      full_swap(r, a, p);
      couple(r, b, bt.t1, p);
      apply_to(r, cnot);
      couple(r, b, bt.t2, p);
      apply_to(r, cnot);
      couple(r, b, bt.t3, p);
      full_swap(r, a, p);
    };
    segments.push_back([=, &p](DensityMatrix& r) { block_body(r, q1.rail0, q2.rail0); });
    segments.push_back([=, &p](DensityMatrix& r) {
      reset_flag(r);
      block_body(r, q1.rail1, q2.rail1);
    });
    segments.push_back([](DensityMatrix& r) { reset_flag(r); });
  }
  const std::size_t n_checks = segments.size() - 1;

  std::vector<std::string> keep;
  for (int i = 0; i < layout.slot_count(); ++i)
    if (layout.slot(i).role == SlotRole::mode) keep.push_back(layout.slot(i).label);

  std::vector<PathLeaf> leaves;
  std::vector<Detection> records;
  std::function<void(DensityMatrix, double)> walk = [&](DensityMatrix rho, double prob) {
    segments[records.size()](rho);
    if (records.size() == n_checks) {
      PathLeaf leaf;
      leaf.records = records;
      leaf.probability = prob;
      leaf.final_state = partial_trace(rho, keep);
      leaf.final_state.symmetrize();
      leaves.push_back(std::move(leaf));
      return;
    }
    MeasurementBranches branches = measure_slot_n(rho, check_slot, check_n, model);
    records.push_back(Detection::no);
    walk(std::move(branches.no.state), prob * branches.no.probability);
    records.back() = Detection::yes;
    walk(std::move(branches.yes.state), prob * branches.yes.probability);
    records.pop_back();
  };
  walk(std::move(input), 1.0);
  return leaves;
}

TrajectoryResult run_trajectories(long trials, std::uint64_t seed, const MeasurementModel& model,
                                  const PhysicalParams& p, Variant variant) {
  TrajectoryResult out;
  out.trials = trials;
  out.leaves = enumerate_paths(model, p, variant);
  out.leaf_counts.assign(out.leaves.size(), 0);

  std::vector<double> cumulative(out.leaves.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < out.leaves.size(); ++i) {
    acc += out.leaves[i].probability;
    cumulative[i] = acc;
  }

  std::vector<bool> all_no(out.leaves.size(), true);
  for (std::size_t i = 0; i < out.leaves.size(); ++i)
    for (Detection d : out.leaves[i].records)
      if (d == Detection::yes) all_no[i] = false;

  for (long t = 0; t < trials; ++t) {
    RandomStream stream = RandomStream::for_trial(seed, static_cast<std::uint64_t>(t));
    const double u = stream.uniform() * acc;
    std::size_t pick = out.leaves.size() - 1;
    for (std::size_t i = 0; i < cumulative.size(); ++i)
      if (u < cumulative[i]) {
        pick = i;
        break;
      }
    ++out.leaf_counts[pick];
    if (all_no[pick]) ++out.success_count;
  }
  return out;
}

}  // namespace spinline
