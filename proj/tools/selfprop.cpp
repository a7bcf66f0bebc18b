// Command-line front end: run, sweep, verify, synth, resonance.
//
// Exit codes: 0 success, 1 validation error, 2 acceptance failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "selfprop/acceptance.hpp"
#include "selfprop/error.hpp"
#include "selfprop/harness.hpp"
#include "selfprop/resonance.hpp"
#include "selfprop/revcomp.hpp"

namespace fs = std::filesystem;
using namespace selfprop;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kAcceptanceFailed = 2;

void emit(const std::string& out_dir, const std::string& name, const std::string& content) {
  if (out_dir.empty()) {
    std::cout << content;
    return;
  }
  fs::create_directories(out_dir);
  std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (fs::path(out_dir) / name).string());
  f << content;
  std::cerr << "wrote " << (fs::path(out_dir) / name).string() << '\n';
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::uint64_t cycles = 0;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "Scenario or tool config (JSON)");
  sub->add_option("--seed", c.seed, "Seed override");
  sub->add_option("--out", c.out, "Output directory");
  sub->add_option("--cycles", c.cycles, "Cycle count override");
}

int cmd_run(CLI::App* sub, const Common& c) {
  if (c.config.empty()) throw ConfigError("config", "--config is required for run");
  harness::ScenarioConfig cfg = harness::load_config(c.config);
  if (sub->count("--seed")) cfg.seed = c.seed;
  if (sub->count("--cycles")) cfg.max_cycles = c.cycles;
  if (sub->count("--out")) cfg.output.dir = c.out;
  harness::validate(cfg);
  const harness::RunOutput out = harness::run_scenario(cfg);
  harness::write_outputs(cfg, out);
  std::cout << out.summary_json;
  return kOk;
}

int cmd_sweep(CLI::App* sub, const Common& c, const std::string& kind, double q, std::size_t bits, double lo,
              double hi, double step) {
  harness::SweepOptions opt;
  opt.seed = c.seed;
  opt.bits = bits;
  if (!c.config.empty()) {
    const auto j = nlohmann::json::parse(read_file(c.config), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ConfigError("config", "not a JSON object");
    if (j.contains("kT")) opt.thermo.kT = j.at("kT").get<double>();
    if (j.contains("epsilon")) opt.thermo.epsilon = j.at("epsilon").get<double>();
    if (j.contains("seed") && !sub->count("--seed")) opt.seed = j.at("seed").get<std::uint64_t>();
  }
  if (bits == 0) throw ConfigError("bits", "must be positive");
  try {
    opt.thermo.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError("thermo", e.what());
  }
  if (kind == "q-curve") {
    if (!sub->count("--lo")) lo = 0.5;
    if (!sub->count("--hi")) hi = 1.0;
    if (!sub->count("--step")) step = 0.05;
    if (lo < 0.0 || hi > 1.0) throw ConfigError("grid", "Q grid must lie in [0, 1]");
    emit(c.out, "q_curve.csv", harness::q_curve_csv(harness::sweep_q_curve(harness::grid(lo, hi, step), opt)));
  } else {
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("q", "must be in [0, 1]");
    if (lo < opt.thermo.epsilon || hi > 1.0 - opt.thermo.epsilon) {
      throw ConfigError("grid", "R grid must lie in [epsilon, 1 - epsilon]");
    }
    emit(c.out, "r_grid.csv", harness::r_grid_csv(harness::sweep_r_grid(q, harness::grid(lo, hi, step), opt)));
  }
  return kOk;
}

int cmd_verify(CLI::App* sub, const Common& c, const std::vector<int>& only, const std::string& fault) {
  acceptance::Options opt;
  if (sub->count("--seed")) opt.seed = c.seed;
  opt.only = only;
  for (int id : only) {
    if (id < 1 || id > acceptance::kCriterionCount) throw ConfigError("only", "criterion ids are 1..15");
  }
  if (fault == "gain-sign") {
    opt.flip_gain_sign = true;
  } else if (!fault.empty()) {
    throw ConfigError("inject-fault", "unknown fault '" + fault + "'");
  }
  const auto results = acceptance::run(opt, &std::cout);
  const std::string report = acceptance::format_report(results);
  std::cout << report.substr(report.rfind('\n', report.size() - 2) + 1);
  if (!c.out.empty()) emit(c.out, "verify.txt", report);
  return acceptance::all_passed(results) ? kOk : kAcceptanceFailed;
}

int cmd_synth(const Common& c, std::vector<std::uint64_t> table, unsigned width) {
  if (!c.config.empty()) {
    const auto j = nlohmann::json::parse(read_file(c.config), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ConfigError("config", "not a JSON object");
    if (!j.contains("table")) throw ConfigError("table", "required key is missing");
    table = j.at("table").get<std::vector<std::uint64_t>>();
    if (j.contains("width")) width = j.at("width").get<unsigned>();
  }
  if (table.empty()) throw ConfigError("table", "give --table or a config with a table");
  if (width == 0) {
    while ((std::uint64_t{1} << width) < table.size()) ++width;
  }
  if (width < 1 || width > 8 || table.size() != (std::uint64_t{1} << width)) {
    throw ConfigError("table", "needs 2^width entries with width in 1..8");
  }
  if (!is_bijective(table, width)) throw ConfigError("table", "is not a permutation");
  const ReversibleCircuit circuit = synthesize(table, width);
  if (circuit.table() != table) {
    std::cerr << "synthesized circuit does not reproduce the table\n";
    return kAcceptanceFailed;
  }
  emit(c.out, "circuit.txt", circuit.to_text());
  std::cerr << circuit.size() << " gates\n";
  return kOk;
}

int cmd_resonance(const Common& c, const std::string& policy, double gamma, double alpha, std::size_t samples,
                  double dt, double amplitude, double omega, double e0) {
  using namespace selfprop::resonance;
  VelocityPolicy p;
  if (policy == "matched") {
    if (!(gamma > 0.0)) throw ConfigError("gamma", "matched policy needs gamma > 0");
    p = VelocityPolicy::matched(gamma);
  } else if (policy == "scaled") {
    p = VelocityPolicy::scaled(alpha);
  } else if (policy == "antiphase") {
    p = VelocityPolicy::antiphase();
  } else {
    throw ConfigError("policy", "must be matched, scaled or antiphase");
  }
  if (samples == 0) throw ConfigError("samples", "must be positive");
  if (!(dt > 0.0)) throw ConfigError("dt", "must be positive");
  if (gamma < 0.0) throw ConfigError("gamma", "must be non-negative");
  const EnergyTrace trace = simulate(ForceSignal::sine(samples, dt, amplitude, omega), p, gamma, e0);
  std::string csv = "t,energy\n";
  for (const EnergySample& s : trace) csv += harness::format_double(s.t) + ',' + harness::format_double(s.energy) + '\n';
  emit(c.out, "resonance.csv", csv);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-harvesting tape agent: simulation, sweeps and verification"};
  app.require_subcommand(1);

  Common run_c, sweep_c, verify_c, synth_c, res_c;

  CLI::App* run = app.add_subcommand("run", "Run one episode from a scenario config");
  add_common(run, run_c);

  CLI::App* sweep = app.add_subcommand("sweep", "Energy per bit over a Q or R grid");
  add_common(sweep, sweep_c);
  std::string kind = "q-curve";
  double q = 0.8, lo = 0.5, hi = 0.99, step = 0.01;
  std::size_t bits = 200000;
  sweep->add_option("--kind", kind, "q-curve or r-grid")->check(CLI::IsMember({"q-curve", "r-grid"}));
  sweep->add_option("--q", q, "Fixed Q for r-grid");
  sweep->add_option("--bits", bits, "Bits per grid point");
  sweep->add_option("--lo", lo, "Grid start");
  sweep->add_option("--hi", hi, "Grid end");
  sweep->add_option("--step", step, "Grid step");

  CLI::App* verify = app.add_subcommand("verify", "Run the acceptance suite");
  add_common(verify, verify_c);
  std::vector<int> only;
  std::string fault;
  verify->add_option("--only", only, "Criterion ids to run")->delimiter(',');
  verify->add_option("--inject-fault", fault, "Deliberate fault (gain-sign)");

  CLI::App* synth = app.add_subcommand("synth", "Synthesize a reversible circuit for a permutation");
  add_common(synth, synth_c);
  std::vector<std::uint64_t> table;
  unsigned width = 0;
  synth->add_option("--table", table, "Permutation table, comma separated")->delimiter(',');
  synth->add_option("--width", width, "Bit width (default: from table size)");

  CLI::App* res = app.add_subcommand("resonance", "Energy trace of a driven variable");
  add_common(res, res_c);
  std::string policy = "matched";
  double gamma = 1.0, alpha = 1.0, dt = 0.01, amplitude = 1.0, omega = 1.0, e0 = 0.0;
  std::size_t samples = 10000;
  res->add_option("--policy", policy, "matched, scaled or antiphase");
  res->add_option("--gamma", gamma, "Friction coefficient");
  res->add_option("--alpha", alpha, "Gain for the scaled policy");
  res->add_option("--samples", samples, "Number of force samples");
  res->add_option("--dt", dt, "Time step");
  res->add_option("--amplitude", amplitude, "Force amplitude");
  res->add_option("--omega", omega, "Force angular frequency");
  res->add_option("--e0", e0, "Initial energy");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*run) return cmd_run(run, run_c);
    if (*sweep) return cmd_sweep(sweep, sweep_c, kind, q, bits, lo, hi, step);
    if (*verify) return cmd_verify(verify, verify_c, only, fault);
    if (*synth) return cmd_synth(synth_c, table, width);
    if (*res) return cmd_resonance(res_c, policy, gamma, alpha, samples, dt, amplitude, omega, e0);
  } catch (const ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kInvalid;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInvalid;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kOk;
}
