#pragma once

// Scenario configuration, episode execution, metric emission and sweeps.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "selfprop/caterpillar.hpp"

namespace selfprop::harness {

struct EnvironmentSpec {
  // "constant", "affine" or "permutation".
  std::string kind = "constant";
  unsigned width = 8;
  std::size_t dim = 1;
  std::vector<std::uint64_t> table;  // permutation
  std::vector<Word> multipliers;     // affine
  std::vector<Word> offsets;         // affine
  std::vector<Word> init;            // empty means all zeros
  double noise_q = 1.0;
  std::string geometry = "tape";  // "tape" or "lattice"

  bool operator==(const EnvironmentSpec&) const = default;
};

struct ShiftSpec {
  std::uint64_t at_cycle = 0;
  EnvironmentSpec next;  // only kind/table/multipliers/offsets are used

  bool operator==(const ShiftSpec&) const = default;
};

struct PredictorSpec {
  std::string kind = "table";  // "table" or "circuit"
  // "exact": table trained on a noise-free copy of the environment, or the
  // synthesized inverse permutation for circuits. "empty": no knowledge.
  // "random": circuit of `random_gates` gates.
  std::string init = "exact";
  std::size_t random_gates = 4;

  bool operator==(const PredictorSpec&) const = default;
};

struct PolicySpec {
  std::string kind = "forward";  // forward, fixed, round_robin, random, scripted
  std::string turn = "straight";  // fixed
  std::vector<std::string> script;

  bool operator==(const PolicySpec&) const = default;
};

struct OutputSpec {
  std::string dir = "out";
  std::string metrics = "metrics.csv";
  std::string events = "events.csv";
  std::string summary = "summary.json";
  bool snapshot = false;

  bool operator==(const OutputSpec&) const = default;
};

struct ScenarioConfig {
  std::uint64_t seed = 0;
  std::uint64_t max_cycles = 1000;
  EnvironmentSpec environment;
  std::optional<ShiftSpec> shift;
  std::size_t k = 1;
  double kT = 1.0;
  double epsilon = 1e-9;
  double c_move = 1.0;
  double c_mut = 0.1 * kLn2;
  double endowment = 50.0;
  std::size_t eval_window = 128;
  std::size_t confidence_window = 32;
  // Splitter. When reference_q is set the thresholds are 0.8 and 0.4 of the
  // analytic per-cycle optimum at that Q.
  double beta_a = 0.1;
  double lambda = 1.0;
  double theta_halt = 1.0;
  double theta_resume = 0.5;
  std::size_t rate_window = 64;
  std::optional<double> reference_q;
  PredictorSpec predictor;
  PolicySpec policy;
  OutputSpec output;

  bool operator==(const ScenarioConfig&) const = default;

  AgentParams agent_params() const;
};

// Throws ConfigError naming the offending key.
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::string& path);
std::string to_json(const ScenarioConfig& cfg);
void validate(const ScenarioConfig& cfg);

DiscreteMap build_map(const EnvironmentSpec& env);
// Circuit of width k*w applying the inverse of `perm` to each of the k words.
ReversibleCircuit blockwise_inverse(const std::vector<std::uint64_t>& perm, unsigned width, std::size_t k);
// Table model trained on a noise-free run of the environment, long enough
// to visit every context it can reach (capped at 2^16 + k steps).
TableModel trained_table(const EnvironmentSpec& env, std::size_t k);
PredictorModel build_model(const ScenarioConfig& cfg);
Caterpillar build_agent(const ScenarioConfig& cfg);

struct RunOutput {
  EpisodeResult episode;
  std::string metrics_csv;
  std::string events_csv;
  std::string summary_json;
  std::string snapshot;
};

// Runs one episode in memory. Deterministic for a given config.
RunOutput run_scenario(const ScenarioConfig& cfg);
// Writes metrics, events and summary (and the lattice snapshot when asked)
// under cfg.output.dir.
void write_outputs(const ScenarioConfig& cfg, const RunOutput& out);

std::string metrics_header();
void append_metrics_row(std::string& csv, const CycleReport& r, std::uint64_t mutations);

// %.17g keeps doubles round-trippable and the output byte-stable.
std::string format_double(double x);

struct QCurvePoint {
  double q;
  double r;
  double analytic;
  double empirical;
  double std_error;
};

struct RGridPoint {
  double r;
  double empirical;
  double std_error;
};

struct SweepOptions {
  std::uint64_t seed = 0;
  std::size_t bits = 200000;
  ThermoParams thermo;
  // Fault injection for the verification suite.
  bool flip_gain_sign = false;
};

// Empirical per-bit energy at R = clamp(Q) for each Q, with the analytic
// expected gain alongside.
std::vector<QCurvePoint> sweep_q_curve(const std::vector<double>& qs, const SweepOptions& opt);
// Per-bit energy at fixed Q across R. Every grid point sees the same bit
// sequence, so differences between points are due to R alone.
std::vector<RGridPoint> sweep_r_grid(double q, const std::vector<double>& rs, const SweepOptions& opt);

std::string q_curve_csv(const std::vector<QCurvePoint>& pts);
std::string r_grid_csv(const std::vector<RGridPoint>& pts);

std::vector<double> grid(double lo, double hi, double step);

}  // namespace selfprop::harness
