// Experiment runner: parameter sweeps, single runs with state dumps,
// trajectory sampling, and simulated tomography. All outputs are
// deterministic for a fixed config and seed.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "spinline/dynamics.hpp"
#include "spinline/linalg.hpp"
#include "spinline/logical.hpp"
#include "spinline/metrics.hpp"
#include "spinline/protocol.hpp"
#include "spinline/state.hpp"
#include "spinline/tomography.hpp"
#include "spinline/types.hpp"

using nlohmann::ordered_json;
using namespace spinline;

namespace {

struct ExperimentConfig {
  PhysicalParams physical;
  double eta1 = 0.1;
  double eta2 = 0.0;
  bool dephase_always = true;
  Variant variant = Variant::standard;
  long trials = 100000;  // trajectory draws
  long runs = 100000;    // tomography records per setting
  std::uint64_t seed = 1;
  std::string grid;  // "start:stop:step", overridable on the command line

  ExperimentConfig() {
    // The library default leaves the cavity lossless; the tool defaults to
    // the experimental decay time of 20/(2 pi) microseconds.
    physical.kappa = 2.0 * pi / 20.0e-6;
  }
};

void require(bool ok, const std::string& diagnostic) {
  if (!ok) throw std::runtime_error(diagnostic);
}

Variant parse_variant(const std::string& name) {
  if (name == "standard") return Variant::standard;
  if (name == "deferred") return Variant::deferred;
  throw std::runtime_error("unknown variant '" + name + "' (expected standard or deferred)");
}

std::string variant_name(Variant v) {
  return v == Variant::standard ? "standard" : "deferred";
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open config file '" + path + "'");
  nlohmann::json j = nlohmann::json::parse(in);
  ExperimentConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "coupling_j")
      cfg.physical.coupling_j = value.get<double>();
    else if (key == "epsilon")
      cfg.physical.epsilon = value.get<double>();
    else if (key == "kappa")
      cfg.physical.kappa = value.get<double>();
    else if (key == "n_max")
      cfg.physical.n_max = value.get<int>();
    else if (key == "readout_time")
      cfg.physical.readout_time = value.get<double>();
    else if (key == "flag_gate_time")
      cfg.physical.flag_gate_time = value.get<double>();
    else if (key == "eta1")
      cfg.eta1 = value.get<double>();
    else if (key == "eta2")
      cfg.eta2 = value.get<double>();
    else if (key == "dephase_always")
      cfg.dephase_always = value.get<bool>();
    else if (key == "variant")
      cfg.variant = parse_variant(value.get<std::string>());
    else if (key == "trials")
      cfg.trials = value.get<long>();
    else if (key == "runs")
      cfg.runs = value.get<long>();
    else if (key == "seed")
      cfg.seed = value.get<std::uint64_t>();
    else if (key == "grid")
      cfg.grid = value.get<std::string>();
    else
      throw std::runtime_error("unknown config key '" + key + "'");
  }
  require(cfg.physical.coupling_j > 0.0, "coupling_j must be positive");
  require(cfg.physical.kappa >= 0.0, "kappa must be nonnegative");
  require(cfg.eta1 >= 0.0 && cfg.eta1 <= 1.0, "eta1 must lie in [0, 1]");
  require(cfg.eta2 >= 0.0 && cfg.eta2 <= 1.0, "eta2 must lie in [0, 1]");
  require(cfg.trials > 0, "trials must be positive");
  require(cfg.runs > 0, "runs must be positive");
  return cfg;
}

std::vector<double> parse_grid(const std::string& text) {
  double start = 0.0, stop = 0.0, step = 0.0;
  char tail = '\0';
  const int got = std::sscanf(text.c_str(), "%lf:%lf:%lf%c", &start, &stop, &step, &tail);
  require(got == 3, "grid must have the form start:stop:step, got '" + text + "'");
  require(step > 0.0, "grid step must be positive");
  require(stop >= start, "grid stop must not precede start");
  std::vector<double> values;
  for (int i = 0;; ++i) {
    const double v = start + step * i;
    if (v > stop + step * 1e-9) break;
    values.push_back(std::min(v, stop));
  }
  require(!values.empty(), "grid is empty");
  return values;
}

// 12 significant digits, scientific, for reproducible diffs.
std::string fmt12(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.11e", x);
  return buf;
}

// Output sink: a file when --out is given, stdout otherwise.
class OutputSink {
 public:
  explicit OutputSink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      require(file_.good(), "cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

ProtocolResult run_protocol(const ExperimentConfig& cfg, double eta1, double eta2) {
  const MeasurementModel model{eta1, eta2, cfg.dephase_always};
  const DualRailQubit q1{"m1", "m2"}, q2{"m3", "m4"};
  if (cfg.variant == Variant::deferred)
    return parity_projection_deferred(protocol_input(true), q1, q2, model, cfg.physical);
  return parity_projection(protocol_input(), q1, q2, model, cfg.physical);
}

ordered_json state_json(const DensityMatrix& rho) {
  ordered_json slots = ordered_json::array();
  for (const Slot& s : rho.layout.slots()) {
    const char* role = s.role == SlotRole::mode ? "mode"
                       : s.role == SlotRole::cavity ? "cavity"
                                                    : "flag";
    slots.push_back({{"label", s.label}, {"dim", s.dim}, {"role", role}});
  }
  // Row-major entries as [re, im] pairs; the first slot is the most
  // significant digit of the basis index.
  ordered_json rows = ordered_json::array();
  for (long r = 0; r < rho.mat.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (long c = 0; c < rho.mat.cols(); ++c)
      row.push_back({rho.mat(r, c).real(), rho.mat(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return ordered_json{{"slots", std::move(slots)}, {"matrix", std::move(rows)}};
}

ordered_json matrix_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (long r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (long c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

bool cavity_active_step(const StepRecord& rec, Variant variant) {
  if (rec.op.rfind("swap", 0) == 0 || rec.op.rfind("couple", 0) == 0 ||
      rec.op.rfind("flag_flip", 0) == 0)
    return true;
  // The standard variant reads the cavity itself, so the photon waits there
  // through the readout; the deferred variant reads the flag after the
  // closing swap with the cavity already empty.
  return variant == Variant::standard && rec.op.rfind("measure", 0) == 0;
}

void cmd_sweep_eta1(const ExperimentConfig& cfg, const std::string& out_path) {
  const std::vector<double> grid = parse_grid(cfg.grid.empty() ? "0:1:0.05" : cfg.grid);
  OutputSink sink(out_path);
  std::ostream& out = sink.stream();
  out << "eta1,fidelity,e_f_projected,c2_raw,c2_dephased,c2_discounted,"
         "c_wootters_discounted,e_f_discounted\n";
  for (double eta1 : grid) {
    require(eta1 >= 0.0 && eta1 <= 1.0, "eta1 grid must stay in [0, 1]");
    ProtocolResult r = run_protocol(cfg, eta1, cfg.eta2);
    const EntanglementReport raw = entanglement_report(r.final_state, StateVariant::raw);
    const EntanglementReport deph =
        entanglement_report(r.final_state, StateVariant::dephased_outside);
    const EntanglementReport disc = entanglement_report(r.final_state, StateVariant::discounted);
    for (double v : {raw.fidelity_with_psi_plus, raw.e_f, disc.wootters_c, disc.e_f})
      require(v >= -1e-9 && v <= 1.0 + 1e-9, "two-qubit metric outside [0, 1]");
    for (double v : {raw.c2_squared, deph.c2_squared, disc.c2_squared})
      require(v >= -1e-9 && v <= 1.6 + 1e-9, "squared concurrence outside [0, 8/5]");
    out << fmt12(eta1) << ',' << fmt12(raw.fidelity_with_psi_plus) << ',' << fmt12(raw.e_f) << ','
        << fmt12(raw.c2_squared) << ',' << fmt12(deph.c2_squared) << ','
        << fmt12(disc.c2_squared) << ',' << fmt12(disc.wootters_c) << ',' << fmt12(disc.e_f)
        << '\n';
  }
}

void cmd_sweep_pf(const ExperimentConfig& cfg, const std::string& out_path) {
  require(cfg.variant == Variant::standard,
          "sweep-pf rates the standard protocol; the closed form does not cover deferred");
  const std::vector<double> grid = parse_grid(cfg.grid.empty() ? "0:1:0.05" : cfg.grid);
  OutputSink sink(out_path);
  std::ostream& out = sink.stream();
  out << "eta1,eta2,pf_closed,pf_simulated\n";

  auto emit = [&](double eta1, double eta2) {
    const double closed = pf_closed_form(eta1, eta2);
    // eta2 = 1 makes the all-NO record impossible; there is no conditioned
    // run to simulate and the success rate is zero by definition.
    const double simulated =
        closed > 0.0 ? run_protocol(cfg, eta1, eta2).success_probability : 0.0;
    require(std::abs(closed - simulated) <= 1e-9,
            "closed-form and simulated success probabilities disagree at eta1=" +
                std::to_string(eta1) + ", eta2=" + std::to_string(eta2));
    out << fmt12(eta1) << ',' << fmt12(eta2) << ',' << fmt12(closed) << ',' << fmt12(simulated)
        << '\n';
  };

  for (double fixed_eta1 : {0.0, 0.1})
    for (double eta2 : grid) emit(fixed_eta1, eta2);
  for (double eta1 : grid) emit(eta1, 0.0);
}

void cmd_run(const ExperimentConfig& cfg, const std::string& out_path) {
  ProtocolResult r = run_protocol(cfg, cfg.eta1, cfg.eta2);

  if (cfg.variant == Variant::standard) {
    const double closed = pf_closed_form(cfg.eta1, cfg.eta2);
    require(std::abs(r.success_probability - closed) <= 1e-9,
            "simulated success probability disagrees with the closed form");
  }

  ordered_json report;
  report["params"] = {{"coupling_j", cfg.physical.coupling_j},
                      {"epsilon", cfg.physical.epsilon},
                      {"kappa", cfg.physical.kappa},
                      {"n_max", cfg.physical.n_max},
                      {"readout_time", cfg.physical.readout_time},
                      {"flag_gate_time", cfg.physical.flag_gate_time},
                      {"tau", cfg.physical.tau()}};
  report["model"] = {{"eta1", cfg.eta1},
                     {"eta2", cfg.eta2},
                     {"dephase_always", cfg.dephase_always}};
  report["variant"] = variant_name(cfg.variant);
  report["success_probability"] = r.success_probability;
  report["no_probabilities"] = r.no_probabilities;

  const StateVector bell{r.final_state.layout, bell_plus_modes()};
  report["fidelity_with_psi_plus"] = fidelity(r.final_state, bell);

  // Step log with cumulative cavity-busy time and the leakage it implies.
  double active = 0.0;
  ordered_json steps = ordered_json::array();
  for (const StepRecord& rec : r.step_log) {
    if (cavity_active_step(rec, cfg.variant)) active += rec.duration;
    const LeakageBudget so_far = leakage_budget(cfg.physical.kappa, active);
    ordered_json step{{"op", rec.op},
                      {"duration", rec.duration},
                      {"cumulative_active_time", active},
                      {"cumulative_leak_linear", so_far.linear},
                      {"cumulative_leak_exponential", so_far.exponential}};
    if (rec.no_probability) step["no_probability"] = *rec.no_probability;
    steps.push_back(std::move(step));
  }
  require(std::abs(active - r.cavity_active_time) <= 1e-12,
          "step log durations disagree with the reported cavity-active time");
  report["step_log"] = std::move(steps);

  const LeakageBudget budget = leakage_budget(cfg.physical.kappa, r.cavity_active_time);
  report["leakage_budget"] = {{"active_time", budget.active_time},
                              {"linear", budget.linear},
                              {"exponential", budget.exponential}};

  ordered_json states;
  if (r.after_first_check) states["rho_1"] = state_json(*r.after_first_check);
  if (r.after_second_check) states["rho_2"] = state_json(*r.after_second_check);
  if (r.after_first_block) states["post_block"] = state_json(*r.after_first_block);
  states["final"] = state_json(r.final_state);
  report["states"] = std::move(states);

  OutputSink sink(out_path);
  sink.stream() << report.dump() << '\n';
}

void cmd_trajectories(const ExperimentConfig& cfg, const std::string& out_path) {
  const MeasurementModel model{cfg.eta1, cfg.eta2, cfg.dephase_always};
  const TrajectoryResult t =
      run_trajectories(cfg.trials, cfg.seed, model, cfg.physical, cfg.variant);

  long total = 0;
  double prob_sum = 0.0;
  for (std::size_t i = 0; i < t.leaves.size(); ++i) {
    total += t.leaf_counts[i];
    prob_sum += t.leaves[i].probability;
  }
  require(total == cfg.trials, "leaf counts do not add up to the number of trials");
  require(std::abs(prob_sum - 1.0) <= 1e-9, "leaf probabilities do not add up to one");

  OutputSink sink(out_path);
  std::ostream& out = sink.stream();
  out << "record,count,empirical_rate,exact_probability\n";
  for (std::size_t i = 0; i < t.leaves.size(); ++i) {
    std::string record;
    for (Detection d : t.leaves[i].records) record += d == Detection::no ? 'N' : 'Y';
    out << record << ',' << t.leaf_counts[i] << ','
        << fmt12(double(t.leaf_counts[i]) / double(t.trials)) << ','
        << fmt12(t.leaves[i].probability) << '\n';
  }
}

void cmd_tomography(const ExperimentConfig& cfg, const std::string& out_path) {
  ProtocolResult r = run_protocol(cfg, cfg.eta1, cfg.eta2);
  const MeasurementModel ideal_readout{0.0, 0.0, true};

  const CountTable z =
      simulate_readout(r.final_state, z_setting(), cfg.runs, ideal_readout, cfg.physical,
                       cfg.seed);
  const std::vector<CountTable> rotated = {
      simulate_readout(r.final_state, rotated_setting(0.0), cfg.runs, ideal_readout,
                       cfg.physical, cfg.seed + 1),
      simulate_readout(r.final_state, rotated_setting(pi / 2.0), cfg.runs, ideal_readout,
                       cfg.physical, cfg.seed + 2)};

  std::vector<CountTable> tables = {z, rotated[0], rotated[1]};
  OutputSink sink(out_path);
  write_count_csv(sink.stream(), tables);

  const DiagonalEstimate diag = estimate_diagonals(z);
  const CoherenceEstimate coh = estimate_coherences(rotated);
  const TomographyReport rep = reconstruct_with_report(diag, coh, cfg.eta1);

  ordered_json report;
  report["eta1"] = cfg.eta1;
  report["runs_per_setting"] = cfg.runs;
  report["seed"] = cfg.seed;
  report["populations"] = diag.populations;
  report["leak_fraction"] = diag.leak_fraction;
  report["malformed_fraction"] = diag.malformed_fraction;
  report["coherence_f"] = {coh.f.real(), coh.f.imag()};
  report["coherence_g"] = {coh.g.real(), coh.g.imag()};
  report["comp_fraction"] = coh.comp_fraction;
  report["reconstructed"] = matrix_json(rep.rho);
  report["fidelity_to_target"] = rep.fidelity_to_target;
  report["trace_distance_to_target"] = rep.trace_distance_to_target;
  // The count CSV goes to --out when given; the report always lands on
  // stdout so both artifacts stay separable.
  std::cout << report.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin-ensemble parity-projection simulator"};
  app.require_subcommand(1);

  std::string config_path, out_path, variant_override, grid_override;
  std::optional<std::uint64_t> seed_override;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed_override, "RNG seed override");
  app.add_option("--out", out_path, "output path (stdout when omitted)");
  app.add_option("--variant", variant_override, "protocol variant")
      ->check(CLI::IsMember({"standard", "deferred"}));
  app.add_option("--grid", grid_override, "sweep grid as start:stop:step");

  CLI::App* sweep_eta1 = app.add_subcommand("sweep-eta1", "metric curves against eta1");
  CLI::App* sweep_pf = app.add_subcommand("sweep-pf", "success probability against both errors");
  CLI::App* run = app.add_subcommand("run", "single protocol run with state dumps");
  CLI::App* trajectories = app.add_subcommand("trajectories", "Monte Carlo record sampling");
  CLI::App* tomography = app.add_subcommand("tomography", "simulated readout and reconstruction");
  for (CLI::App* sub : {sweep_eta1, sweep_pf, run, trajectories, tomography})
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (!variant_override.empty()) cfg.variant = parse_variant(variant_override);
    if (!grid_override.empty()) cfg.grid = grid_override;

    if (sweep_eta1->parsed())
      cmd_sweep_eta1(cfg, out_path);
    else if (sweep_pf->parsed())
      cmd_sweep_pf(cfg, out_path);
    else if (run->parsed())
      cmd_run(cfg, out_path);
    else if (trajectories->parsed())
      cmd_trajectories(cfg, out_path);
    else if (tomography->parsed())
      cmd_tomography(cfg, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
