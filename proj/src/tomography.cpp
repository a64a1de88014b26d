#include "spinline/tomography.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "spinline/linalg.hpp"
#include "spinline/metrics.hpp"
#include "spinline/rng.hpp"

#include <Eigen/SVD>

namespace spinline {

ReadoutSetting z_setting() { return ReadoutSetting{ReadoutBasis::z, -1.0, 0.0}; }

ReadoutSetting rotated_setting(double phi0) {
  return ReadoutSetting{ReadoutBasis::rotated, -1.0, phi0};
}

std::string setting_name(const ReadoutSetting& s) {
  if (s.basis == ReadoutBasis::z) return "z";
  char buf[64];
  std::snprintf(buf, sizeof buf, "rotated(phi0=%.9g)", s.phi0);
  return buf;
}

namespace {

std::vector<std::string> mode_labels_of(const SlotLayout& layout) {
  std::vector<std::string> labels;
  for (int i = 0; i < layout.slot_count(); ++i) {
    if (layout.slot(i).role != SlotRole::mode)
      throw std::invalid_argument("readout expects a modes-only state");
    labels.push_back(layout.slot(i).label);
  }
  if (labels.size() != 4) throw std::invalid_argument("readout expects four modes");
  return labels;
}

// Record bits accumulate m1 first, so m1 ends up most significant.
void readout_walk(DensityMatrix rho, double prob, std::size_t mode_idx,
                  const std::vector<std::string>& labels, int record,
                  const MeasurementModel& model, const PhysicalParams& p,
                  std::array<double, 16>& counts) {
  if (prob <= 0.0) return;
  if (mode_idx == labels.size()) {
    counts[static_cast<std::size_t>(record)] += prob;
    return;
  }
  full_swap(rho, labels[mode_idx], p);
  MeasurementBranches branches = measure_cavity_n(rho, 1, model);
  for (int bit = 0; bit < 2; ++bit) {
    MeasurementOutcome& outcome = bit ? branches.yes : branches.no;
    if (outcome.probability <= 0.0) continue;
    DensityMatrix next = std::move(outcome.state);
    full_swap(next, labels[mode_idx], p);
    readout_walk(std::move(next), prob * outcome.probability, mode_idx + 1, labels,
                 (record << 1) | bit, model, p, counts);
  }
}

}  // namespace

CountTable exact_readout_table(const DensityMatrix& modes, const ReadoutSetting& setting,
                               const MeasurementModel& readout_model, const PhysicalParams& p) {
  const std::vector<std::string> labels = mode_labels_of(modes.layout);

  SlotLayout cav_layout({{"c", p.n_max + 1, SlotRole::cavity}});
  DensityMatrix full = tensor_product(modes, to_density(vacuum(cav_layout)));

  if (setting.basis == ReadoutBasis::rotated) {
    const double t0 = setting.t0 < 0.0 ? 0.5 * p.tau() : setting.t0;
    for (const DualRailQubit& q :
         {DualRailQubit{labels[0], labels[1]}, DualRailQubit{labels[2], labels[3]}}) {
      rotate_z(full, q, setting.phi0, p);
      rotate_x(full, q, p.coupling_j * t0, p);
    }
  }

  CountTable table;
  table.setting = setting;
  table.runs = 1.0;
  readout_walk(std::move(full), 1.0, 0, labels, 0, readout_model, p, table.counts);
  return table;
}

CountTable simulate_readout(const DensityMatrix& modes, const ReadoutSetting& setting, long runs,
                            const MeasurementModel& readout_model, const PhysicalParams& p,
                            std::uint64_t seed) {
  CountTable exact = exact_readout_table(modes, setting, readout_model, p);
  CountTable out;
  out.setting = setting;
  out.runs = static_cast<double>(runs);

  std::array<double, 16> cumulative{};
  double acc = 0.0;
  for (std::size_t r = 0; r < 16; ++r) {
    acc += exact.counts[r];
    cumulative[r] = acc;
  }

  RandomStream rng(seed);
  for (long i = 0; i < runs; ++i) {
    const double u = rng.uniform() * acc;
    std::size_t pick = 15;
    for (std::size_t r = 0; r < 16; ++r)
      if (u < cumulative[r]) {
        pick = r;
        break;
      }
    out.counts[pick] += 1.0;
  }
  return out;
}

namespace {

// Per-qubit rail bits as a 2-bit value: (m_rail0, m_rail1).
int pair_bits(int record, int qubit) {
  return qubit == 0 ? (record >> 2) & 3 : record & 3;
}

bool pair_is_comp(int bits) { return bits == 1 || bits == 2; }

}  // namespace

RecordClass classify_record(int record) {
  if (pair_is_comp(pair_bits(record, 0)) && pair_is_comp(pair_bits(record, 1)))
    return RecordClass::comp;
  if (record == 0) return RecordClass::leak;
  return RecordClass::malformed;
}

int record_logical_value(int record) {
  if (classify_record(record) != RecordClass::comp) return -1;
  const int a = pair_bits(record, 0) == 2 ? 0 : 1;
  const int b = pair_bits(record, 1) == 2 ? 0 : 1;
  return a * 2 + b;
}

DiagonalEstimate estimate_diagonals(const CountTable& z_counts) {
  double total = 0.0, leak = 0.0, malformed = 0.0;
  std::array<double, 4> comp{};
  for (int r = 0; r < 16; ++r) {
    const double n = z_counts.counts[static_cast<std::size_t>(r)];
    total += n;
    switch (classify_record(r)) {
      case RecordClass::comp:
        comp[static_cast<std::size_t>(record_logical_value(r))] += n;
        break;
      case RecordClass::leak:
        leak += n;
        break;
      case RecordClass::malformed:
        malformed += n;
        break;
    }
  }
  if (total <= 0.0) throw std::invalid_argument("empty count table");
  const double denom = total - malformed;
  if (denom <= 0.0) throw std::runtime_error("every record was malformed");

  DiagonalEstimate out;
  out.leak_fraction = leak / total;
  out.malformed_fraction = malformed / total;
  for (int v = 0; v < 4; ++v) {
    double n = comp[static_cast<std::size_t>(v)];
    if (v == 0 || v == 3) n += 0.5 * leak;
    out.populations[static_cast<std::size_t>(v)] = n / denom;
  }
  return out;
}

CoherenceEstimate estimate_coherences(const std::vector<CountTable>& rotated_counts) {
  const std::size_t n = rotated_counts.size();
  if (n < 2) throw std::invalid_argument("coherence estimation needs at least two settings");

  Eigen::VectorXd correlator(static_cast<long>(n));
  Eigen::VectorXd variance(static_cast<long>(n));
  Eigen::MatrixXd design(static_cast<long>(n), 3);
  double comp_total = 0.0, grand_total = 0.0;
  bool distinct = false;

  for (std::size_t k = 0; k < n; ++k) {
    const CountTable& table = rotated_counts[k];
    if (table.setting.basis != ReadoutBasis::rotated)
      throw std::invalid_argument("coherence estimation expects rotated settings");
    if (k > 0 &&
        std::abs(table.setting.phi0 - rotated_counts[0].setting.phi0) > 1e-12)
      distinct = true;

    double comp_count = 0.0, total = 0.0, signed_sum = 0.0;
    for (int r = 0; r < 16; ++r) {
      const double c = table.counts[static_cast<std::size_t>(r)];
      total += c;
      const int v = record_logical_value(r);
      if (v < 0) continue;
      comp_count += c;
      const double sign = ((v >> 1) ? -1.0 : 1.0) * ((v & 1) ? -1.0 : 1.0);
      signed_sum += sign * c;
    }
    if (comp_count <= 0.0)
      throw std::runtime_error("no computational records in a rotated setting");
    const double c_phi = signed_sum / comp_count;
    correlator(static_cast<long>(k)) = c_phi;
    variance(static_cast<long>(k)) =
        std::max(0.0, 1.0 - c_phi * c_phi) / std::max(1.0, comp_count);
    const double two_phi = 2.0 * table.setting.phi0;
    design(static_cast<long>(k), 0) = 2.0;
    design(static_cast<long>(k), 1) = -2.0 * std::cos(two_phi);
    design(static_cast<long>(k), 2) = 2.0 * std::sin(two_phi);
    comp_total += comp_count;
    grand_total += total;
  }
  if (!distinct) throw std::invalid_argument("coherence estimation needs distinct phases");

  // Minimum-norm least squares: combinations no phase pair resolves (and the
  // absent Im f column) come out zero.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd x = svd.solve(correlator);

  Eigen::VectorXd inv_s = svd.singularValues();
  const double thresh = 1e-12 * std::max(1.0, inv_s(0));
  for (long i = 0; i < inv_s.size(); ++i) inv_s(i) = inv_s(i) > thresh ? 1.0 / inv_s(i) : 0.0;
  Eigen::MatrixXd pinv = svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().transpose();

  CoherenceEstimate out;
  out.comp_fraction = grand_total > 0.0 ? comp_total / grand_total : 0.0;
  out.f = out.comp_fraction * Complex(x(0), 0.0);
  out.g = out.comp_fraction * Complex(x(1), x(2));
  double var_f = 0.0;
  for (long k = 0; k < pinv.cols(); ++k) var_f += pinv(0, k) * pinv(0, k) * variance(k);
  out.std_error = out.comp_fraction * std::sqrt(var_f);
  return out;
}

Matrix reconstruct(const DiagonalEstimate& diagonals, const CoherenceEstimate& coherence) {
  Matrix rho = Matrix::Zero(4, 4);
  for (int v = 0; v < 4; ++v) rho(v, v) = diagonals.populations[static_cast<std::size_t>(v)];
  rho(1, 2) = coherence.f;
  rho(2, 1) = std::conj(coherence.f);
  rho(0, 3) = coherence.g;
  rho(3, 0) = std::conj(coherence.g);
  return nearest_density(rho);
}

TomographyReport reconstruct_with_report(const DiagonalEstimate& diagonals,
                                         const CoherenceEstimate& coherence, double eta1) {
  TomographyReport report;
  report.rho = reconstruct(diagonals, coherence);
  Matrix target = discounted_final_state(eta1);
  report.fidelity_to_target = fidelity(report.rho, target);
  report.trace_distance_to_target = trace_distance(report.rho, target);
  return report;
}

void write_count_csv(std::ostream& out, const std::vector<CountTable>& tables) {
  out << "setting,record,count\n";
  char buf[64];
  for (const CountTable& table : tables) {
    const std::string name = setting_name(table.setting);
    for (int r = 0; r < 16; ++r) {
      char bits[5];
      for (int b = 0; b < 4; ++b) bits[b] = (r >> (3 - b)) & 1 ? '1' : '0';
      bits[4] = '\0';
      std::snprintf(buf, sizeof buf, "%.12g", table.counts[static_cast<std::size_t>(r)]);
      out << name << ',' << bits << ',' << buf << '\n';
    }
  }
}

}  // namespace spinline
