#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "selfprop/acceptance.hpp"
#include "selfprop/error.hpp"
#include "selfprop/harness.hpp"
#include "selfprop/resonance.hpp"
#include "selfprop/revcomp.hpp"
#include "selfprop/thermo.hpp"

namespace py = pybind11;
using namespace selfprop;

namespace {

ThermoParams thermo(double kT, double epsilon) {
  ThermoParams p{kT, epsilon};
  p.validate();
  return p;
}

py::dict run_scenario(const std::string& config_json) {
  const harness::ScenarioConfig cfg = harness::parse_config(config_json);
  harness::validate(cfg);
  const harness::RunOutput out = harness::run_scenario(cfg);
  py::dict d;
  d["status"] = std::string(to_string(out.episode.status));
  d["cycles_survived"] = out.episode.cycles_survived;
  d["net_energy"] = out.episode.net_energy;
  d["final_balance"] = out.episode.final_balance;
  d["metrics_csv"] = out.metrics_csv;
  d["events_csv"] = out.events_csv;
  d["summary_json"] = out.summary_json;
  d["snapshot"] = out.snapshot;
  return d;
}

harness::SweepOptions sweep_options(std::uint64_t seed, std::size_t bits, double kT, double epsilon) {
  if (bits == 0) throw InvalidInput("bits must be positive");
  harness::SweepOptions opt;
  opt.seed = seed;
  opt.bits = bits;
  opt.thermo = thermo(kT, epsilon);
  return opt;
}

py::list q_curve(const std::vector<double>& qs, std::uint64_t seed, std::size_t bits, double kT, double epsilon) {
  py::list rows;
  for (const auto& p : harness::sweep_q_curve(qs, sweep_options(seed, bits, kT, epsilon))) {
    py::dict d;
    d["q"] = p.q;
    d["r"] = p.r;
    d["analytic"] = p.analytic;
    d["empirical"] = p.empirical;
    d["stderr"] = p.std_error;
    rows.append(d);
  }
  return rows;
}

py::list r_grid(double q, const std::vector<double>& rs, std::uint64_t seed, std::size_t bits, double kT,
                double epsilon) {
  py::list rows;
  for (const auto& p : harness::sweep_r_grid(q, rs, sweep_options(seed, bits, kT, epsilon))) {
    py::dict d;
    d["r"] = p.r;
    d["empirical"] = p.empirical;
    d["stderr"] = p.std_error;
    rows.append(d);
  }
  return rows;
}

py::list verify(const std::vector<int>& only, std::uint64_t seed, bool inject_gain_sign_fault) {
  acceptance::Options opt;
  opt.seed = seed;
  opt.only = only;
  opt.flip_gain_sign = inject_gain_sign_fault;
  for (int id : only) {
    if (id < 1 || id > acceptance::kCriterionCount) throw InvalidInput("criterion ids are 1..15");
  }
  py::list rows;
  for (const auto& r : acceptance::run(opt)) {
    py::dict d;
    d["id"] = r.id;
    d["name"] = r.name;
    d["passed"] = r.passed;
    d["measured"] = r.measured;
    rows.append(d);
  }
  return rows;
}

py::dict synth(const std::vector<std::uint64_t>& table, unsigned width) {
  if (!is_bijective(table, width)) throw InvalidInput("table is not a permutation of 2^width states");
  const ReversibleCircuit c = synthesize(table, width);
  py::dict d;
  d["gates"] = c.size();
  d["text"] = c.to_text();
  d["table"] = c.table();
  return d;
}

std::vector<std::pair<double, double>> resonance_trace(const std::string& policy, double gamma, double alpha,
                                                       std::size_t samples, double dt, double amplitude,
                                                       double omega, double e0) {
  using namespace selfprop::resonance;
  VelocityPolicy p;
  if (policy == "matched") {
    p = VelocityPolicy::matched(gamma);
  } else if (policy == "scaled") {
    p = VelocityPolicy::scaled(alpha);
  } else if (policy == "antiphase") {
    p = VelocityPolicy::antiphase();
  } else {
    throw InvalidInput("policy must be matched, scaled or antiphase");
  }
  std::vector<std::pair<double, double>> out;
  for (const EnergySample& s : simulate(ForceSignal::sine(samples, dt, amplitude, omega), p, gamma, e0)) {
    out.emplace_back(s.t, s.energy);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Energy-harvesting tape agent: core operations";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_RuntimeError);

  m.def(
      "expected_gain", [](double q, double r, double kT, double eps) { return expected_gain(q, r, thermo(kT, eps)); },
      py::arg("q"), py::arg("r"), py::arg("kT") = 1.0, py::arg("epsilon") = 1e-9);
  m.def(
      "optimal_engine",
      [](double q, double kT, double eps) {
        const OptimalEngine e = optimal_engine(q, thermo(kT, eps));
        return std::make_pair(e.r, e.gain);
      },
      py::arg("q"), py::arg("kT") = 1.0, py::arg("epsilon") = 1e-9, "Returns (R, expected gain per bit).");
  m.def("binary_entropy", &binary_entropy, py::arg("q"), "Binary entropy in nats.");
  m.def(
      "landauer_bit", [](double kT) { return landauer_bit(thermo(kT, 1e-9)); }, py::arg("kT") = 1.0);

  m.def("run_scenario", &run_scenario, py::arg("config_json"),
        "Runs one episode from a JSON scenario config and returns its outputs.");
  m.def("sweep_q_curve", &q_curve, py::arg("qs"), py::arg("seed") = 0, py::arg("bits") = 200000,
        py::arg("kT") = 1.0, py::arg("epsilon") = 1e-9);
  m.def("sweep_r_grid", &r_grid, py::arg("q"), py::arg("rs"), py::arg("seed") = 0, py::arg("bits") = 200000,
        py::arg("kT") = 1.0, py::arg("epsilon") = 1e-9);
  m.def("verify", &verify, py::arg("only") = std::vector<int>{}, py::arg("seed") = acceptance::Options{}.seed,
        py::arg("inject_gain_sign_fault") = false);
  m.def("synthesize", &synth, py::arg("table"), py::arg("width"));
  m.def("resonance_trace", &resonance_trace, py::arg("policy") = "matched", py::arg("gamma") = 1.0,
        py::arg("alpha") = 1.0, py::arg("samples") = 10000, py::arg("dt") = 0.01, py::arg("amplitude") = 1.0,
        py::arg("omega") = 1.0, py::arg("e0") = 0.0);
}
