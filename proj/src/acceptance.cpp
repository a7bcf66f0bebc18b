#include "selfprop/acceptance.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <numeric>
#include <ostream>

#include "selfprop/caterpillar.hpp"
#include "selfprop/controller.hpp"
#include "selfprop/dynsys.hpp"
#include "selfprop/harness.hpp"
#include "selfprop/predictor.hpp"
#include "selfprop/resonance.hpp"
#include "selfprop/revcomp.hpp"
#include "selfprop/thermo.hpp"

namespace selfprop::acceptance {

namespace {

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

std::string label(const char* prefix, std::uint64_t i) { return std::string(prefix) + "/" + std::to_string(i); }

std::vector<std::uint64_t> random_permutation(std::uint64_t n, Rng& rng) {
  std::vector<std::uint64_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  for (std::uint64_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
  return p;
}

// Sattolo's algorithm: a uniformly random single n-cycle, so a trajectory
// visits every state.
std::vector<std::uint64_t> random_cycle(std::uint64_t n, Rng& rng) {
  std::vector<std::uint64_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  for (std::uint64_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.below(i - 1)]);
  return p;
}

harness::ScenarioConfig permutation_scenario(std::uint64_t seed, unsigned width, std::vector<std::uint64_t> table) {
  harness::ScenarioConfig cfg;
  cfg.seed = seed;
  cfg.environment.kind = "permutation";
  cfg.environment.width = width;
  cfg.environment.table = std::move(table);
  return cfg;
}

// --- thermodynamic curve -------------------------------------------------------

std::vector<double> q_values() { return harness::grid(0.5, 1.0, 0.05); }

CriterionResult c01(const Options& opt) {
  harness::SweepOptions so;
  so.seed = Rng::derive_seed(opt.seed, "c01");
  so.bits = 200000;
  so.flip_gain_sign = opt.flip_gain_sign;
  const auto pts = harness::sweep_q_curve(q_values(), so);
  bool ok = true;
  double worst = 0.0, worst_q = 0.0;
  for (const auto& p : pts) {
    const double dev = std::abs(p.empirical - p.analytic);
    const double tol = std::max(0.01 * std::abs(p.analytic), 3.0 * p.std_error);
    if (!(dev <= tol)) ok = false;
    const double ratio = tol > 0 ? dev / tol : (dev > 0 ? INFINITY : 0.0);
    if (ratio >= worst) {
      worst = ratio;
      worst_q = p.q;
    }
  }
  return {1, "energy curve vs kT(ln2 - H(Q))", ok,
          fmt("11 points, N=200000; worst deviation/tolerance = %.3f at Q=%.2f", worst, worst_q)};
}

CriterionResult c02(const Options& opt) {
  harness::SweepOptions so;
  so.seed = Rng::derive_seed(opt.seed, "c02");
  const auto p = harness::sweep_q_curve({1.0}, so).front();
  const double dev = std::abs(p.empirical - 0.693147);
  return {2, "Landauer endpoint Q=1", dev <= 1e-6, fmt("per-bit gain %.9f kT, |dev| = %.2e", p.empirical, dev)};
}

CriterionResult c03(const Options& opt) {
  harness::SweepOptions so;
  so.seed = Rng::derive_seed(opt.seed, "c03");
  const auto p = harness::sweep_q_curve({0.5}, so).front();
  return {3, "zero endpoint Q=1/2", std::abs(p.empirical) <= 3.0 * p.std_error,
          fmt("mean %.3e kT, stderr %.3e", p.empirical, p.std_error)};
}

CriterionResult c04(const Options& opt) {
  harness::SweepOptions so;
  so.seed = Rng::derive_seed(opt.seed, "c04");
  so.bits = 100000;
  const auto pts = harness::sweep_r_grid(0.8, harness::grid(0.5, 0.99, 0.01), so);
  const auto best = std::max_element(pts.begin(), pts.end(),
                                     [](const auto& a, const auto& b) { return a.empirical < b.empirical; });
  return {4, "optimum at R = Q = 0.8", std::abs(best->r - 0.8) <= 0.03 + 1e-12,
          fmt("argmax R = %.2f, gain %.5f kT", best->r, best->empirical)};
}

// --- dynamics ------------------------------------------------------------------

CriterionResult c05(const Options& opt) {
  std::uint64_t states = 0, mismatches = 0;
  auto check = [&](const DiscreteMap& f, const CoordinateTransform& xi) {
    const DiscreteMap phi = conjugate_map(f, xi);
    for (std::uint64_t s = 0; s < f.state_count(); ++s) {
      const StateVector x = unpack(s, f.dimension(), f.width());
      ++states;
      if (xi.forward(f(x)) != phi(xi.forward(x))) ++mismatches;
    }
  };
  for (std::uint64_t i = 0; i < 20; ++i) {
    Rng rng = Rng::stream(opt.seed, label("c05", i));
    const std::size_t dim = 1 + i % 3;
    const unsigned width = 2 + static_cast<unsigned>(i % 2);
    const std::uint64_t n = std::uint64_t{1} << (dim * width);
    const DiscreteMap f = DiscreteMap::permutation(dim, width, random_permutation(n, rng));
    check(f, CoordinateTransform::table(dim, width, random_permutation(n, rng)));
  }
  // Non-tabulated map through a rule-based transform.
  const DiscreteMap aff = DiscreteMap::affine(4, {5, 3}, {7, 1});
  const CoordinateTransform shear = CoordinateTransform::from_rules(
      2, 4, [](const StateVector& x) { return StateVector{x[0], (x[1] + x[0]) & 0xf}; },
      [](const StateVector& x) { return StateVector{x[0], (x[1] - x[0]) & 0xf}; });
  check(aff, shear);
  check(aff, CoordinateTransform::swap(2, 4, 0, 1));
  return {5, "covariance of conjugated maps", mismatches == 0 && states > 0,
          fmt("%llu states over 22 map/transform pairs, %llu mismatches", static_cast<unsigned long long>(states),
              static_cast<unsigned long long>(mismatches))};
}

CriterionResult c06(const Options&) {
  const double omega = 0.1;
  const double c = std::cos(omega), s = std::sin(omega);
  std::vector<std::vector<double>> traj{{1.5, 0.25}};
  for (int t = 0; t < 1000; ++t) {
    const auto& p = traj.back();
    traj.push_back({c * p[0] - s * p[1], s * p[0] + c * p[1]});
  }
  const CanonicalReport r = canonical_check(RealTransform::polar(omega), traj, 1e-9);
  const bool ok = r.coordinates[0].constant && r.time_like_uniform && std::abs(r.time_increment - 1.0) <= 1e-9;
  return {6, "canonical form of a rotation", ok,
          fmt("radius drift %.2e, time increment %.12f, spread %.2e", r.coordinates[0].drift, r.time_increment,
              r.increment_spread)};
}

CriterionResult c07(const Options&) {
  struct Case {
    TimeSeriesMap ts;
    std::vector<Word> seed;
  };
  std::vector<Case> cases{{TimeSeriesMap::modular_sum(3, 8), {3, 141, 59}},
                          {TimeSeriesMap::xor_last_two(8), {17, 200}},
                          {TimeSeriesMap::repeat_last(5), {9}},
                          {TimeSeriesMap(4, 8, [](std::span<const Word> h) {
                             return static_cast<Word>((h[0] * 3 + h[3] + 1) & 0xff);
                           }),
                           {1, 2, 3, 4}}};
  std::size_t differing = 0;
  for (const Case& c : cases) {
    const std::vector<Word> direct = run_timeseries(c.ts, c.seed, 100);
    const StateVector lifted_init(c.seed.rbegin(), c.seed.rend());
    const Trajectory traj = generate_trajectory(lift_timeseries(c.ts), lifted_init, 100);
    for (std::size_t t = 0; t < 100; ++t) differing += traj[t + 1][0] != direct[t];
  }
  return {7, "time-series lifting", differing == 0,
          fmt("4 series x 100 steps, %zu differing values", differing)};
}

// --- reversible circuits --------------------------------------------------------

CriterionResult c08(const Options& opt) {
  std::size_t non_bijective = 0, inverse_fail = 0, synth_fail = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    Rng rng = Rng::stream(opt.seed, label("c08/circuit", i));
    const unsigned n = 1 + static_cast<unsigned>(i % 10);
    const ReversibleCircuit c = random_circuit(n, 1 + rng.below(40), rng);
    const std::vector<std::uint64_t> t = c.table();
    if (!is_bijective(t, n)) ++non_bijective;
    const ReversibleCircuit inv = invert_circuit(c);
    for (std::uint64_t x = 0; x < t.size(); ++x) {
      if (inv.apply(t[x]) != x) {
        ++inverse_fail;
        break;
      }
    }
  }
  for (std::uint64_t i = 0; i < 50; ++i) {
    Rng rng = Rng::stream(opt.seed, label("c08/perm", i));
    const unsigned n = 1 + static_cast<unsigned>(i % 6);
    const std::vector<std::uint64_t> p = random_permutation(std::uint64_t{1} << n, rng);
    if (synthesize(p, n).table() != p) ++synth_fail;
  }
  return {8, "reversible circuit suite", non_bijective + inverse_fail + synth_fail == 0,
          fmt("1000 circuits: %zu non-bijective, %zu inverse failures; 50 syntheses: %zu inexact", non_bijective,
              inverse_fail, synth_fail)};
}

// --- residuals and learning -------------------------------------------------------

CriterionResult c09(const Options& opt) {
  // Noise-free: the agent with an exact model writes only zero residuals.
  Rng prng = Rng::stream(opt.seed, "c09/perm");
  harness::ScenarioConfig cfg = permutation_scenario(Rng::derive_seed(opt.seed, "c09"), 8, random_cycle(256, prng));
  cfg.max_cycles = 10000;
  cfg.endowment = 50.0;
  Caterpillar agent = harness::build_agent(cfg);
  const EpisodeResult ep = run_episode(agent, cfg.max_cycles);
  std::size_t nonzero = 0;
  for (const CycleReport& r : ep.rows) nonzero += r.zero_fraction != 1.0;
  const bool clean_ok = ep.rows.size() == 10000 && nonzero == 0;

  // Noisy observations of the same system: each residual bit is zero with
  // probability Q.
  const std::size_t n = 10000;
  const double q = 0.9;
  const DiscreteMap map = harness::build_map(cfg.environment);
  const PredictorModel exact(CircuitModel(synthesize(*map.table(), 8), 1, 8));
  Rng noise = Rng::stream(opt.seed, "c09/noise");
  StateVector state{0};
  std::vector<std::size_t> zeros(8, 0);
  for (std::size_t t = 0; t < n; ++t) {
    const StateVector next = map(state);
    const StateVector observed{apply_noise(NoiseChannel{q}, next[0], 8, noise)};
    const Residual z = residual(exact, observed, state);
    for (unsigned b = 0; b < 8; ++b) zeros[b] += ((z.z[0] >> b) & 1u) == 0;
    state = next;
  }
  const double se = std::sqrt(q * (1 - q) / n);
  double worst = 0.0;
  for (std::size_t c : zeros) worst = std::max(worst, std::abs(static_cast<double>(c) / n - q));
  const bool noisy_ok = worst <= 3.0 * se;
  return {9, "residual zero rates", clean_ok && noisy_ok,
          fmt("noise-free: %zu/%zu cycles with a nonzero residual; Q=0.9: max |rate-0.9| = %.4f (3 stderr = %.4f)",
              nonzero, ep.rows.size(), worst, 3.0 * se)};
}

CriterionResult c10(const Options& opt) {
  const unsigned n = 3;
  const std::size_t budget = 50000;
  int converged = 0;
  std::string counts;
  bool tables_ok = true;
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng prng = Rng::stream(opt.seed, label("c10/perm", s));
    const std::vector<std::uint64_t> perm = random_permutation(8, prng);

    // Full transition table of the hidden map; fitness is the fraction of
    // correctly predicted output bits.
    auto score = [&](const PredictorModel& m) {
      int correct = 0;
      for (std::uint64_t x = 0; x < 8; ++x) {
        const Word out = m.apply({static_cast<Word>(x)})[0];
        correct += static_cast<int>(n) - std::popcount(static_cast<unsigned>(out ^ perm[x]));
      }
      return correct / 24.0;
    };
    PredictorModel model(CircuitModel(ReversibleCircuit(n), 1, n));
    LearningState state;
    state.channel_a = 1e300;
    Rng rng = Rng::stream(opt.seed, label("c10/search", s));
    std::size_t used = 0;
    bool done = score(model) == 1.0;
    while (!done && used < budget) {
      mutation_step(state, model, rng, 1.0, score);
      ++used;
      done = score(model) == 1.0;
    }
    converged += done;
    counts += (counts.empty() ? "" : ",") + (done ? std::to_string(used) : std::string("-"));

    TableModel table(1, 1, n);
    for (std::uint64_t x = 0; x < 8; ++x) update_table(table, {static_cast<Word>(x)}, {static_cast<Word>(perm[x])});
    for (std::uint64_t x = 0; x < 8; ++x) {
      const auto out = table.lookup({static_cast<Word>(x)});
      if (!out || (*out)[0] != perm[x]) tables_ok = false;
    }
  }
  return {10, "learning convergence", converged >= 9 && tables_ok,
          fmt("circuit search converged %d/10 (mutations: %s); table exact after one pass: %s", converged,
              counts.c_str(), tables_ok ? "yes" : "no")};
}

// --- agent --------------------------------------------------------------------

harness::ScenarioConfig constant_scenario(std::uint64_t seed, std::uint64_t cycles) {
  harness::ScenarioConfig cfg;
  cfg.seed = seed;
  cfg.max_cycles = cycles;
  cfg.environment.kind = "constant";
  cfg.environment.width = 8;
  cfg.environment.init = {0x5a};
  cfg.c_move = 1.0;
  cfg.epsilon = 1e-9;
  return cfg;
}

CriterionResult c11(const Options& opt) {
  const harness::ScenarioConfig cfg = constant_scenario(Rng::derive_seed(opt.seed, "c11"), 5000);
  Caterpillar agent = harness::build_agent(cfg);
  const EpisodeResult ep = run_episode(agent, cfg.max_cycles);
  double sum = 0.0;
  std::size_t count = 0;
  for (const CycleReport& r : ep.rows) {
    if (r.cycle < 1000) continue;
    sum += r.ea_delta;
    ++count;
  }
  const double net = count ? sum / count : 0.0;
  const double target = 8 * std::log(2.0) - 1.0;
  const double rel = std::abs(net - target) / target;
  return {11, "caterpillar steady-state net gain", ep.status == Status::Completed && count > 0 && rel <= 0.01,
          fmt("net %.6f kT/cycle vs %.6f (rel. dev %.2e), status %s", net, target, rel,
              std::string(to_string(ep.status)).c_str())};
}

struct ShiftOutcome {
  bool dropped = false;
  bool resumed = false;
  bool recovered = false;
  double pre_rate = 0.0;
  std::uint64_t recovery_cycles = 0;
  Status status = Status::Running;
};

ShiftOutcome run_shift(std::uint64_t seed, std::uint64_t base_seed) {
  Rng prng = Rng::stream(base_seed, label("c12/perm", seed));
  std::vector<std::uint64_t> before = random_cycle(8, prng);
  std::vector<std::uint64_t> after = random_cycle(8, prng);
  while (after == before) after = random_cycle(8, prng);

  harness::ScenarioConfig cfg = permutation_scenario(Rng::derive_seed(base_seed, label("c12", seed)), 3, before);
  const std::uint64_t shift_at = 500;
  cfg.shift = harness::ShiftSpec{shift_at, cfg.environment};
  cfg.shift->next.table = after;
  cfg.predictor = {"circuit", "exact", 0};
  cfg.c_move = 0.2;
  cfg.endowment = 50.0;
  cfg.eval_window = 32;
  cfg.confidence_window = 32;
  cfg.rate_window = 32;
  cfg.reference_q = 1.0;
  harness::validate(cfg);

  const SplitterConfig sp = cfg.agent_params().splitter;
  Caterpillar agent = harness::build_agent(cfg);
  ShiftOutcome out;
  const std::uint64_t limit = shift_at + 100000;
  for (std::uint64_t t = 0; t < limit; ++t) {
    const CycleReport r = agent.step();
    if (agent.status() != Status::Running) break;
    if (t == shift_at - 1) out.pre_rate = r.b_rate;
    if (t < shift_at) continue;
    if (r.b_rate < sp.theta_resume) out.dropped = true;
    if (out.dropped && r.mode == Mode::Searching) out.resumed = true;
    if (out.resumed && r.b_rate >= 0.8 * out.pre_rate) {
      out.recovered = true;
      out.recovery_cycles = t - shift_at;
      break;
    }
  }
  out.status = agent.status();
  return out;
}

CriterionResult c12(const Options& opt) {
  int ok = 0;
  std::string detail;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const ShiftOutcome o = run_shift(s, opt.seed);
    const bool pass = o.dropped && o.resumed && o.recovered;
    ok += pass;
    detail += (detail.empty() ? "" : ",") +
              (pass ? std::to_string(o.recovery_cycles) : std::string(to_string(o.status)));
  }
  return {12, "regime shift recovery", ok >= 7, fmt("%d/10 seeds recovered (cycles after shift: %s)", ok, detail.c_str())};
}

// --- resonance, trail, determinism ------------------------------------------------

CriterionResult c13(const Options&) {
  using namespace resonance;
  const ForceSignal f = ForceSignal::sine(10000, 0.01, 1.3, 2.0);
  const double gamma = 0.7;
  const EnergyTrace matched = simulate(f, VelocityPolicy::matched(gamma), gamma, 0.0);
  double max_inc = 0.0;
  for (std::size_t i = 1; i < matched.size(); ++i) {
    max_inc = std::max(max_inc, std::abs(matched[i].energy - matched[i - 1].energy));
  }
  const EnergyTrace anti = simulate(f, VelocityPolicy::antiphase(), gamma, 10.0);
  std::size_t rises = 0;
  for (std::size_t i = 1; i < anti.size(); ++i) rises += anti[i].energy > anti[i - 1].energy;
  return {13, "resonance reference", max_inc <= 1e-12 && rises == 0 && anti.size() >= 10001,
          fmt("matched max |dE| = %.2e; antiphase rises = %zu over %zu samples", max_inc, rises, anti.size())};
}

CriterionResult c14(const Options& opt) {
  const harness::ScenarioConfig cfg = constant_scenario(Rng::derive_seed(opt.seed, "c14"), 12000);
  Caterpillar agent = harness::build_agent(cfg);
  run_episode(agent, cfg.max_cycles);
  const std::vector<Word> trail = agent.track().trail_values();
  const double h = mean_bit_entropy(trail, 8);
  return {14, "trail entropy", trail.size() >= 10000 && h >= 0.99,
          fmt("%zu trail cells, mean per-bit entropy %.5f bits", trail.size(), h)};
}

CriterionResult c15(const Options& opt) {
  std::vector<harness::ScenarioConfig> scenarios;
  scenarios.push_back(constant_scenario(Rng::derive_seed(opt.seed, "c15/a"), 2000));
  {
    Rng prng = Rng::stream(opt.seed, "c15/perm");
    harness::ScenarioConfig cfg = permutation_scenario(Rng::derive_seed(opt.seed, "c15/b"), 3, random_cycle(8, prng));
    cfg.shift = harness::ShiftSpec{300, cfg.environment};
    cfg.shift->next.table = random_cycle(8, prng);
    cfg.predictor = {"circuit", "exact", 0};
    cfg.c_move = 0.2;
    cfg.reference_q = 1.0;
    cfg.environment.noise_q = 0.95;
    cfg.max_cycles = 3000;
    scenarios.push_back(cfg);
  }
  {
    harness::ScenarioConfig cfg;
    cfg.seed = Rng::derive_seed(opt.seed, "c15/c");
    cfg.environment.kind = "affine";
    cfg.environment.width = 4;
    cfg.environment.multipliers = {5};
    cfg.environment.offsets = {3};
    cfg.environment.noise_q = 0.9;
    cfg.environment.geometry = "lattice";
    cfg.k = 2;
    cfg.predictor.init = "empty";
    cfg.policy.kind = "random";
    cfg.c_move = 0.5;
    cfg.max_cycles = 2000;
    scenarios.push_back(cfg);
  }
  std::size_t identical = 0;
  std::size_t bytes = 0;
  for (const auto& cfg : scenarios) {
    const harness::RunOutput a = harness::run_scenario(cfg);
    const harness::RunOutput b = harness::run_scenario(cfg);
    identical += a.metrics_csv == b.metrics_csv && a.events_csv == b.events_csv && a.summary_json == b.summary_json;
    bytes += a.metrics_csv.size();
  }
  return {15, "determinism", identical == scenarios.size(),
          fmt("%zu/%zu scenarios byte-identical on re-run (%zu metric bytes)", identical, scenarios.size(), bytes)};
}

using Check = std::function<CriterionResult(const Options&)>;

const std::vector<Check>& checks() {
  static const std::vector<Check> all{c01, c02, c03, c04, c05, c06, c07, c08, c09, c10, c11, c12, c13, c14, c15};
  return all;
}

}  // namespace

std::vector<CriterionResult> run(const Options& opt, std::ostream* progress) {
  std::vector<CriterionResult> results;
  for (int id = 1; id <= kCriterionCount; ++id) {
    if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end()) continue;
    CriterionResult r;
    try {
      r = checks()[id - 1](opt);
    } catch (const std::exception& e) {
      r = {id, "criterion " + std::to_string(id), false, std::string("exception: ") + e.what()};
    }
    if (progress) *progress << format_line(r) << '\n' << std::flush;
    results.push_back(std::move(r));
  }
  return results;
}

std::string format_line(const CriterionResult& r) {
  return fmt("[%s] %02d %s: %s", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.measured.c_str());
}

std::string format_report(const std::vector<CriterionResult>& results) {
  std::string s;
  std::size_t passed = 0;
  for (const auto& r : results) {
    s += format_line(r) + '\n';
    passed += r.passed;
  }
  s += fmt("%zu/%zu criteria passed\n", passed, results.size());
  return s;
}

bool all_passed(const std::vector<CriterionResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.passed; });
}

}  // namespace selfprop::acceptance
