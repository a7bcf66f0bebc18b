#include <doctest.h>

#include <cmath>
#include <string>

#include "selfprop/acceptance.hpp"
#include "selfprop/error.hpp"
#include "selfprop/harness.hpp"

using namespace selfprop;
using namespace selfprop::harness;

namespace {

const std::string kConfigDir = SELFPROP_CONFIG_DIR;

std::string config_error_key(const std::string& text) {
  try {
    validate(parse_config(text));
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

}  // namespace

TEST_CASE("config round-trips through JSON") {
  for (const char* name : {"constant.json", "regime_shift.json", "lattice.json", "lattice_spiral.json"}) {
    const ScenarioConfig cfg = load_config(kConfigDir + "/" + name);
    CHECK(parse_config(to_json(cfg)) == cfg);
  }
  ScenarioConfig cfg;
  cfg.seed = 42;
  cfg.reference_q = 0.9;
  cfg.shift = ShiftSpec{10, EnvironmentSpec{}};
  CHECK(parse_config(to_json(cfg)) == cfg);
}

TEST_CASE("config errors name the offending key") {
  CHECK(config_error_key(R"({"max_cycles": 10})") == "seed");
  CHECK(config_error_key(R"({"seed": 1, "bogus": 2})") == "bogus");
  CHECK(config_error_key(R"({"seed": 1, "thermo": {"kT": -1}})") == "thermo.kT");
  CHECK(config_error_key(R"({"seed": 1, "agent": {"c_move": -0.5}})") == "agent.c_move");
  CHECK(config_error_key(R"({"seed": 1, "environment": {"noise_q": 1.5}})") == "environment.noise_q");
  CHECK(config_error_key(R"({"seed": 1, "environment": {"kind": "permutation", "width": 2, "table": [0, 0, 1, 2]}})") ==
        "environment.table");
  CHECK(config_error_key("[1, 2]") != "");
  CHECK(config_error_key(R"({"seed": 1})") == "");
}

TEST_CASE("constant sample completes with positive net energy") {
  ScenarioConfig cfg = load_config(kConfigDir + "/constant.json");
  const RunOutput out = run_scenario(cfg);
  CHECK(out.episode.status == Status::Completed);
  CHECK(out.episode.net_energy > 0.0);
  CHECK(out.metrics_csv.rfind(metrics_header(), 0) == 0);
  CHECK(out.summary_json.find("\"status\": \"completed\"") != std::string::npos);
}

TEST_CASE("re-running a scenario is byte-identical") {
  for (const char* name : {"constant.json", "regime_shift.json", "lattice.json"}) {
    ScenarioConfig cfg = load_config(kConfigDir + "/" + name);
    cfg.max_cycles = std::min<std::uint64_t>(cfg.max_cycles, 1500);
    const RunOutput a = run_scenario(cfg);
    const RunOutput b = run_scenario(cfg);
    CHECK(a.metrics_csv == b.metrics_csv);
    CHECK(a.events_csv == b.events_csv);
    CHECK(a.summary_json == b.summary_json);
    CHECK(a.snapshot == b.snapshot);
  }
}

TEST_CASE("seed changes the noisy run") {
  ScenarioConfig cfg = load_config(kConfigDir + "/lattice.json");
  const RunOutput a = run_scenario(cfg);
  cfg.seed += 1;
  const RunOutput b = run_scenario(cfg);
  CHECK(a.metrics_csv != b.metrics_csv);
}

TEST_CASE("exact circuit inverts the permutation block by block") {
  const std::vector<std::uint64_t> perm{3, 6, 0, 5, 1, 7, 2, 4};
  const ReversibleCircuit c = blockwise_inverse(perm, 3, 2);
  for (std::uint64_t a = 0; a < 8; ++a) {
    for (std::uint64_t b = 0; b < 8; ++b) {
      const std::uint64_t in = perm[a] | (perm[b] << 3);
      CHECK(c.apply(in) == (a | (b << 3)));
    }
  }
}

TEST_CASE("q-curve matches ln 2 at Q = 1") {
  SweepOptions opt;
  opt.seed = 7;
  opt.bits = 20000;
  const auto pts = sweep_q_curve({1.0}, opt);
  REQUIRE(pts.size() == 1);
  CHECK(std::abs(pts[0].empirical - std::log(2.0)) < 1e-3);
  CHECK(pts[0].analytic == doctest::Approx(std::log(2.0)).epsilon(1e-6));
  CHECK(q_curve_csv(pts).rfind("Q,R,analytic,empirical,stderr\n", 0) == 0);
}

TEST_CASE("r-grid peaks near R = Q") {
  SweepOptions opt;
  opt.seed = 11;
  opt.bits = 100000;
  const auto pts = sweep_r_grid(0.8, grid(0.6, 0.95, 0.05), opt);
  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].empirical > pts[best].empirical) best = i;
  }
  CHECK(pts[best].r == doctest::Approx(0.8).epsilon(0.06));
}

TEST_CASE("grid covers both ends") {
  const auto g = grid(0.5, 1.0, 0.05);
  CHECK(g.size() == 11);
  CHECK(g.front() == 0.5);
  CHECK(g.back() == doctest::Approx(1.0));
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("verification detects an injected gain-sign fault") {
  acceptance::Options opt;
  opt.only = {1};
  const auto clean = acceptance::run(opt);
  REQUIRE(clean.size() == 1);
  CHECK(clean[0].passed);
  opt.flip_gain_sign = true;
  const auto faulty = acceptance::run(opt);
  CHECK_FALSE(faulty[0].passed);
  CHECK_FALSE(acceptance::all_passed(faulty));
}

TEST_CASE("verification report is reproducible") {
  acceptance::Options opt;
  opt.only = {2, 5, 9};
  const std::string a = acceptance::format_report(acceptance::run(opt));
  const std::string b = acceptance::format_report(acceptance::run(opt));
  CHECK(a == b);
  CHECK(a.find("3/3 criteria passed") != std::string::npos);
}
