#include "selfprop/harness.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "selfprop/error.hpp"

namespace selfprop::harness {

using json = nlohmann::json;

namespace {

// Reads typed fields out of one JSON object and rejects keys it was never
// asked about.
class Reader {
 public:
  Reader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError(prefix_.empty() ? "<root>" : prefix_, "expected an object");
  }

  std::string key(const std::string& name) const { return prefix_.empty() ? name : prefix_ + "." + name; }

  bool has(const std::string& name) {
    seen_.insert(name);
    return j_.contains(name);
  }

  const json& at(const std::string& name) {
    seen_.insert(name);
    return j_.at(name);
  }

  template <class T>
  void get(const std::string& name, T& out) {
    if (!has(name)) return;
    out = convert<T>(name, j_.at(name));
  }

  template <class T>
  T require(const std::string& name) {
    if (!has(name)) throw ConfigError(key(name), "required key is missing");
    return convert<T>(name, j_.at(name));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(key(it.key()), "unknown key");
    }
  }

 private:
  template <class T>
  T convert(const std::string& name, const json& v) const {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(key(name), "expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_unsigned()) throw ConfigError(key(name), "expected a non-negative integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(key(name), "expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(key(name), "expected a string");
    } else {
      if (!v.is_array()) throw ConfigError(key(name), "expected an array");
      for (const json& e : v) {
        using E = typename T::value_type;
        if constexpr (std::is_same_v<E, std::string>) {
          if (!e.is_string()) throw ConfigError(key(name), "expected an array of strings");
        } else {
          if (!e.is_number_unsigned()) throw ConfigError(key(name), "expected an array of non-negative integers");
        }
      }
    }
    try {
      return v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(key(name), e.what());
    }
  }

  const json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

void read_map_fields(Reader& r, EnvironmentSpec& env) {
  r.get("kind", env.kind);
  r.get("table", env.table);
  r.get("multipliers", env.multipliers);
  r.get("offsets", env.offsets);
}

json map_fields(const EnvironmentSpec& env) {
  json j;
  j["kind"] = env.kind;
  if (!env.table.empty()) j["table"] = env.table;
  if (!env.multipliers.empty()) j["multipliers"] = env.multipliers;
  if (!env.offsets.empty()) j["offsets"] = env.offsets;
  return j;
}

AGPolicy::Kind policy_kind(const std::string& s) {
  if (s == "forward") return AGPolicy::Kind::Forward;
  if (s == "fixed") return AGPolicy::Kind::Fixed;
  if (s == "round_robin") return AGPolicy::Kind::RoundRobin;
  if (s == "random") return AGPolicy::Kind::Random;
  if (s == "scripted") return AGPolicy::Kind::Scripted;
  throw ConfigError("policy.kind", "unknown policy '" + s + "'");
}

Turn parse_turn(const std::string& s, const std::string& key) {
  if (s == "straight" || s == "S") return Turn::Straight;
  if (s == "left" || s == "L") return Turn::Left;
  if (s == "right" || s == "R") return Turn::Right;
  throw ConfigError(key, "unknown turn '" + s + "'");
}

void validate_map(const EnvironmentSpec& env, const std::string& prefix) {
  const std::size_t dim = env.dim;
  if (env.kind == "constant") return;
  if (env.kind == "affine") {
    if (env.multipliers.size() != dim) throw ConfigError(prefix + "multipliers", "needs one entry per dimension");
    if (env.offsets.size() != dim) throw ConfigError(prefix + "offsets", "needs one entry per dimension");
    return;
  }
  if (env.kind == "permutation") {
    if (dim * env.width > 24) throw ConfigError(prefix + "table", "permutation state space exceeds 24 bits");
    if (env.table.size() != (std::uint64_t{1} << (dim * env.width))) {
      throw ConfigError(prefix + "table", "needs 2^(dim*width) entries");
    }
    if (!is_bijective(env.table, static_cast<unsigned>(dim * env.width))) {
      throw ConfigError(prefix + "table", "is not a permutation");
    }
    return;
  }
  throw ConfigError(prefix + "kind", "unknown environment kind '" + env.kind + "'");
}

}  // namespace

AgentParams ScenarioConfig::agent_params() const {
  AgentParams p;
  p.k = k;
  p.width = environment.width;
  p.thermo = ThermoParams{kT, epsilon};
  p.c_move = c_move;
  p.c_mut = c_mut;
  p.endowment = endowment;
  if (reference_q) {
    p.splitter = SplitterConfig::from_optimum(environment.width, *reference_q, p.thermo, beta_a, lambda, rate_window);
  } else {
    p.splitter = SplitterConfig{beta_a, lambda, theta_halt, theta_resume, rate_window};
  }
  p.eval_window = eval_window;
  p.confidence_window = confidence_window;
  return p;
}

ScenarioConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("not valid JSON: ") + e.what());
  }
  ScenarioConfig cfg;
  Reader r(root, "");
  cfg.seed = r.require<std::uint64_t>("seed");
  r.get("max_cycles", cfg.max_cycles);

  if (r.has("environment")) {
    Reader e(r.at("environment"), "environment");
    read_map_fields(e, cfg.environment);
    e.get("width", cfg.environment.width);
    e.get("dim", cfg.environment.dim);
    e.get("init", cfg.environment.init);
    e.get("noise_q", cfg.environment.noise_q);
    e.get("geometry", cfg.environment.geometry);
    e.finish();
  }
  if (r.has("shift")) {
    Reader s(r.at("shift"), "shift");
    ShiftSpec shift;
    shift.at_cycle = s.require<std::uint64_t>("at_cycle");
    shift.next = cfg.environment;
    shift.next.table.clear();
    shift.next.multipliers.clear();
    shift.next.offsets.clear();
    read_map_fields(s, shift.next);
    s.finish();
    cfg.shift = shift;
  }
  if (r.has("agent")) {
    Reader a(r.at("agent"), "agent");
    a.get("k", cfg.k);
    a.get("c_move", cfg.c_move);
    a.get("c_mut", cfg.c_mut);
    a.get("endowment", cfg.endowment);
    a.get("eval_window", cfg.eval_window);
    a.get("confidence_window", cfg.confidence_window);
    a.finish();
  }
  if (r.has("thermo")) {
    Reader t(r.at("thermo"), "thermo");
    t.get("kT", cfg.kT);
    t.get("epsilon", cfg.epsilon);
    t.finish();
  }
  if (r.has("splitter")) {
    Reader s(r.at("splitter"), "splitter");
    s.get("beta_a", cfg.beta_a);
    s.get("lambda", cfg.lambda);
    s.get("theta_halt", cfg.theta_halt);
    s.get("theta_resume", cfg.theta_resume);
    s.get("rate_window", cfg.rate_window);
    if (s.has("reference_q")) {
      double q = 0.0;
      s.get("reference_q", q);
      cfg.reference_q = q;
    }
    s.finish();
  }
  if (r.has("predictor")) {
    Reader p(r.at("predictor"), "predictor");
    p.get("kind", cfg.predictor.kind);
    p.get("init", cfg.predictor.init);
    p.get("random_gates", cfg.predictor.random_gates);
    p.finish();
  }
  if (r.has("policy")) {
    Reader p(r.at("policy"), "policy");
    p.get("kind", cfg.policy.kind);
    p.get("turn", cfg.policy.turn);
    p.get("script", cfg.policy.script);
    p.finish();
  }
  if (r.has("output")) {
    Reader o(r.at("output"), "output");
    o.get("dir", cfg.output.dir);
    o.get("metrics", cfg.output.metrics);
    o.get("events", cfg.output.events);
    o.get("summary", cfg.output.summary);
    o.get("snapshot", cfg.output.snapshot);
    o.finish();
  }
  r.finish();
  validate(cfg);
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const ScenarioConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["max_cycles"] = cfg.max_cycles;
  json env = map_fields(cfg.environment);
  env["width"] = cfg.environment.width;
  env["dim"] = cfg.environment.dim;
  if (!cfg.environment.init.empty()) env["init"] = cfg.environment.init;
  env["noise_q"] = cfg.environment.noise_q;
  env["geometry"] = cfg.environment.geometry;
  j["environment"] = env;
  if (cfg.shift) {
    json s = map_fields(cfg.shift->next);
    s["at_cycle"] = cfg.shift->at_cycle;
    j["shift"] = s;
  }
  j["agent"] = {{"k", cfg.k},
                {"c_move", cfg.c_move},
                {"c_mut", cfg.c_mut},
                {"endowment", cfg.endowment},
                {"eval_window", cfg.eval_window},
                {"confidence_window", cfg.confidence_window}};
  j["thermo"] = {{"kT", cfg.kT}, {"epsilon", cfg.epsilon}};
  json sp = {{"beta_a", cfg.beta_a},
             {"lambda", cfg.lambda},
             {"theta_halt", cfg.theta_halt},
             {"theta_resume", cfg.theta_resume},
             {"rate_window", cfg.rate_window}};
  if (cfg.reference_q) sp["reference_q"] = *cfg.reference_q;
  j["splitter"] = sp;
  j["predictor"] = {{"kind", cfg.predictor.kind}, {"init", cfg.predictor.init},
                    {"random_gates", cfg.predictor.random_gates}};
  json pol = {{"kind", cfg.policy.kind}, {"turn", cfg.policy.turn}};
  if (!cfg.policy.script.empty()) pol["script"] = cfg.policy.script;
  j["policy"] = pol;
  j["output"] = {{"dir", cfg.output.dir},
                 {"metrics", cfg.output.metrics},
                 {"events", cfg.output.events},
                 {"summary", cfg.output.summary},
                 {"snapshot", cfg.output.snapshot}};
  return j.dump(2) + "\n";
}

void validate(const ScenarioConfig& cfg) {
  const EnvironmentSpec& env = cfg.environment;
  if (env.width < 1 || env.width > kMaxWordWidth) throw ConfigError("environment.width", "must be in 1..32");
  if (env.dim < 1) throw ConfigError("environment.dim", "must be at least 1");
  if (!env.init.empty()) {
    if (env.init.size() != env.dim) throw ConfigError("environment.init", "needs one entry per dimension");
    for (Word w : env.init) {
      if (w > word_mask(env.width)) throw ConfigError("environment.init", "value does not fit the word width");
    }
  }
  if (!(env.noise_q >= 0.5 && env.noise_q <= 1.0)) throw ConfigError("environment.noise_q", "must be in [0.5, 1]");
  if (env.geometry != "tape" && env.geometry != "lattice") {
    throw ConfigError("environment.geometry", "must be 'tape' or 'lattice'");
  }
  validate_map(env, "environment.");
  if (cfg.shift) validate_map(cfg.shift->next, "shift.");

  if (cfg.k < 1) throw ConfigError("agent.k", "must be at least 1");
  if (cfg.k * env.width > 64) throw ConfigError("agent.k", "k * width must not exceed 64");
  if (!(cfg.c_move >= 0.0)) throw ConfigError("agent.c_move", "must be non-negative");
  if (!(cfg.c_mut >= 0.0)) throw ConfigError("agent.c_mut", "must be non-negative");
  if (!(cfg.endowment >= 0.0)) throw ConfigError("agent.endowment", "must be non-negative");
  if (cfg.eval_window < 1) throw ConfigError("agent.eval_window", "must be at least 1");
  if (cfg.confidence_window < 1) throw ConfigError("agent.confidence_window", "must be at least 1");
  if (!(cfg.kT > 0.0)) throw ConfigError("thermo.kT", "must be positive");
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 0.5)) throw ConfigError("thermo.epsilon", "must be in (0, 0.5)");

  if (!(cfg.beta_a >= 0.0)) throw ConfigError("splitter.beta_a", "must be non-negative");
  if (!(cfg.lambda >= 0.0)) throw ConfigError("splitter.lambda", "must be non-negative");
  if (cfg.rate_window < 1) throw ConfigError("splitter.rate_window", "must be at least 1");
  if (cfg.reference_q) {
    if (!(*cfg.reference_q > 0.5 && *cfg.reference_q <= 1.0)) {
      throw ConfigError("splitter.reference_q", "must be in (0.5, 1]");
    }
  } else {
    if (!(cfg.theta_resume >= 0.0)) throw ConfigError("splitter.theta_resume", "must be non-negative");
    if (!(cfg.theta_resume < cfg.theta_halt)) throw ConfigError("splitter.theta_halt", "must exceed theta_resume");
  }

  const PredictorSpec& p = cfg.predictor;
  if (p.kind != "table" && p.kind != "circuit") throw ConfigError("predictor.kind", "must be 'table' or 'circuit'");
  if (p.init != "exact" && p.init != "empty" && p.init != "random") {
    throw ConfigError("predictor.init", "must be 'exact', 'empty' or 'random'");
  }
  if (p.kind == "table" && p.init == "random") throw ConfigError("predictor.init", "'random' applies to circuits");
  if (p.kind == "circuit") {
    if (p.init == "exact") {
      if (env.dim != 1) throw ConfigError("predictor.init", "exact circuits need a one-dimensional environment");
      if (env.kind != "constant" && env.width > 8) {
        throw ConfigError("predictor.init", "exact circuits are synthesized for width <= 8");
      }
      if (env.kind == "affine" && env.multipliers[0] % 2 == 0) {
        throw ConfigError("environment.multipliers", "exact circuits need an invertible (odd) multiplier");
      }
    }
  }

  policy_kind(cfg.policy.kind);
  parse_turn(cfg.policy.turn, "policy.turn");
  for (const std::string& t : cfg.policy.script) parse_turn(t, "policy.script");
  if (cfg.output.dir.empty()) throw ConfigError("output.dir", "must not be empty");
  if (cfg.output.metrics.empty()) throw ConfigError("output.metrics", "must not be empty");
}

DiscreteMap build_map(const EnvironmentSpec& env) {
  if (env.kind == "constant") return DiscreteMap::identity(env.dim, env.width);
  if (env.kind == "affine") return DiscreteMap::affine(env.width, env.multipliers, env.offsets);
  return DiscreteMap::permutation(env.dim, env.width, env.table);
}

ReversibleCircuit blockwise_inverse(const std::vector<std::uint64_t>& perm, unsigned width, std::size_t k) {
  std::vector<std::uint64_t> inv(perm.size());
  for (std::uint64_t x = 0; x < perm.size(); ++x) inv[perm[x]] = x;
  // synthesize() emits MCX gates only, so each gate is rebuilt as MCX.
  const ReversibleCircuit block = synthesize(inv, width);
  ReversibleCircuit c(static_cast<unsigned>(k * width));
  for (std::size_t b = 0; b < k; ++b) {
    const unsigned shift = static_cast<unsigned>(b * width);
    for (const Gate& g : block.gates()) {
      std::vector<unsigned> lines = g.lines();
      for (unsigned& l : lines) l += shift;
      const std::size_t nc = g.control_count();
      std::vector<unsigned> controls(lines.begin(), lines.begin() + static_cast<std::ptrdiff_t>(nc));
      c.append(Gate::mcx(controls, g.polarities(), lines.back()));
    }
  }
  return c;
}

TableModel trained_table(const EnvironmentSpec& env, std::size_t k) {
  const DiscreteMap map = build_map(env);
  TableModel table(k, k, env.width);
  StateVector state = env.init.empty() ? StateVector(env.dim, 0) : env.init;
  const std::uint64_t steps = std::min<std::uint64_t>(map.state_count(), std::uint64_t{1} << 16) + k + 1;
  std::deque<Word> recent;  // newest first
  for (std::uint64_t t = 0; t < steps; ++t) {
    if (t > 0) state = map(state);
    recent.push_front(state[0]);
    if (recent.size() < k + 1) continue;
    if (recent.size() > k + 1) recent.pop_back();
    StateVector ctx(recent.begin(), recent.begin() + static_cast<std::ptrdiff_t>(k));
    StateVector prev(recent.begin() + 1, recent.end());
    update_table(table, ctx, prev);
  }
  return table;
}

PredictorModel build_model(const ScenarioConfig& cfg) {
  const EnvironmentSpec& env = cfg.environment;
  const unsigned w = env.width;
  if (cfg.predictor.kind == "table") {
    if (cfg.predictor.init == "empty") return PredictorModel(TableModel(cfg.k, cfg.k, w));
    return PredictorModel(trained_table(env, cfg.k));
  }
  const unsigned lines = static_cast<unsigned>(cfg.k * w);
  ReversibleCircuit c(lines);
  if (cfg.predictor.init == "exact" && env.kind != "constant") {
    c = blockwise_inverse(build_map(env).tabulate(), w, cfg.k);
  } else if (cfg.predictor.init == "random") {
    Rng rng = Rng::stream(cfg.seed, "predictor-init");
    c = random_circuit(lines, cfg.predictor.random_gates, rng);
  }
  return PredictorModel(CircuitModel(std::move(c), cfg.k, w));
}

Caterpillar build_agent(const ScenarioConfig& cfg) {
  const EnvironmentSpec& env = cfg.environment;
  StateVector init = env.init.empty() ? StateVector(env.dim, 0) : env.init;
  Environment environment(build_map(env), std::move(init), NoiseChannel{env.noise_q},
                          Rng::stream(cfg.seed, "noise"));
  if (cfg.shift) environment.schedule_shift(cfg.shift->at_cycle + cfg.k, build_map(cfg.shift->next));

  AGPolicy policy;
  policy.kind = policy_kind(cfg.policy.kind);
  policy.fixed = parse_turn(cfg.policy.turn, "policy.turn");
  for (const std::string& t : cfg.policy.script) policy.script.push_back(parse_turn(t, "policy.script"));

  std::unique_ptr<Track> track;
  if (env.geometry == "lattice") {
    track = std::make_unique<LatticeTrack>(Lattice2D(std::move(environment)), cfg.k);
  } else {
    track = std::make_unique<TapeTrack>(Tape1D(std::move(environment)), cfg.k);
  }
  return Caterpillar(cfg.agent_params(), build_model(cfg), std::move(track), std::move(policy), cfg.seed);
}

std::string format_double(double x) {
  if (x == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string metrics_header() { return "cycle,ea_balance,extracted,moved,mutations,zero_fraction,mode,x,y\n"; }

void append_metrics_row(std::string& csv, const CycleReport& r, std::uint64_t mutations) {
  csv += std::to_string(r.cycle);
  csv += ',' + format_double(r.ea_balance);
  csv += ',' + format_double(r.extracted);
  csv += ',' + format_double(r.moved);
  csv += ',' + std::to_string(mutations);
  csv += ',' + format_double(r.zero_fraction);
  csv += ',';
  csv += to_string(r.mode);
  csv += ',' + std::to_string(r.head.x);
  csv += ',' + std::to_string(r.head.y);
  csv += '\n';
}

RunOutput run_scenario(const ScenarioConfig& cfg) {
  validate(cfg);
  Caterpillar agent = build_agent(cfg);
  RunOutput out;
  out.episode = run_episode(agent, cfg.max_cycles);

  out.metrics_csv = metrics_header();
  std::uint64_t mutations = 0;
  for (const CycleReport& r : out.episode.rows) {
    mutations += r.mutation_attempted ? 1 : 0;
    append_metrics_row(out.metrics_csv, r, mutations);
  }
  out.events_csv = "cycle,event,rate\n";
  for (const EpisodeEvent& e : out.episode.events) {
    out.events_csv += std::to_string(e.cycle) + ',' + e.event + ',' + format_double(e.rate) + '\n';
  }

  const std::vector<Word> trail = agent.track().trail_values();
  json s;
  s["status"] = std::string(to_string(out.episode.status));
  s["cycles_survived"] = out.episode.cycles_survived;
  s["net_energy"] = out.episode.net_energy;
  s["final_balance"] = out.episode.final_balance;
  s["mutations"] = agent.learning().mutations;
  s["adoptions"] = agent.learning().adoptions;
  s["final_mode"] = std::string(to_string(agent.learning().mode));
  s["trail_cells"] = trail.size();
  s["trail_bit_entropy"] = mean_bit_entropy(trail, cfg.environment.width);
  s["seed"] = cfg.seed;
  out.summary_json = s.dump(2) + "\n";
  out.snapshot = agent.track().snapshot();
  return out;
}

void write_outputs(const ScenarioConfig& cfg, const RunOutput& out) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output.dir);
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    f << content;
  };
  write(cfg.output.metrics, out.metrics_csv);
  if (!cfg.output.events.empty()) write(cfg.output.events, out.events_csv);
  if (!cfg.output.summary.empty()) write(cfg.output.summary, out.summary_json);
  if (cfg.output.snapshot && !out.snapshot.empty()) write("snapshot.txt", out.snapshot);
}

// --- sweeps ------------------------------------------------------------------

namespace {

struct RunningMean {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double std_error() const {
    if (n < 2) return 0.0;
    return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  }
};

std::string label(const std::string& prefix, double x) { return prefix + "/" + format_double(x); }

}  // namespace

std::vector<QCurvePoint> sweep_q_curve(const std::vector<double>& qs, const SweepOptions& opt) {
  opt.thermo.validate();
  std::vector<QCurvePoint> out;
  for (double q : qs) {
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidInput("Q must be in [0, 1]");
    const double r = opt.thermo.clamp_stop(q);
    Rng bits = Rng::stream(opt.seed, label("q-curve/bits", q));
    Rng cells = Rng::stream(opt.seed, label("q-curve/extraction", q));
    RunningMean acc;
    const EngineConfig engine{r, 0};
    for (std::size_t i = 0; i < opt.bits; ++i) {
      const int actual = bits.bernoulli(q) ? 0 : 1;
      acc.add(extract_bit(actual, engine, opt.thermo, cells).energy);
    }
    double analytic = expected_gain(q, r, opt.thermo);
    if (opt.flip_gain_sign) analytic = -analytic;
    out.push_back({q, r, analytic, acc.mean, acc.std_error()});
  }
  return out;
}

std::vector<RGridPoint> sweep_r_grid(double q, const std::vector<double>& rs, const SweepOptions& opt) {
  opt.thermo.validate();
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidInput("Q must be in [0, 1]");
  std::vector<RGridPoint> out;
  for (double r : rs) {
    if (!(r >= opt.thermo.epsilon && r <= 1.0 - opt.thermo.epsilon)) throw InvalidInput("R outside [eps, 1-eps]");
    Rng bits = Rng::stream(opt.seed, "r-grid/bits");
    Rng cells = Rng::stream(opt.seed, label("r-grid/extraction", r));
    RunningMean acc;
    const EngineConfig engine{r, 0};
    for (std::size_t i = 0; i < opt.bits; ++i) {
      const int actual = bits.bernoulli(q) ? 0 : 1;
      acc.add(extract_bit(actual, engine, opt.thermo, cells).energy);
    }
    out.push_back({r, acc.mean, acc.std_error()});
  }
  return out;
}

std::string q_curve_csv(const std::vector<QCurvePoint>& pts) {
  std::string s = "Q,R,analytic,empirical,stderr\n";
  for (const QCurvePoint& p : pts) {
    s += format_double(p.q) + ',' + format_double(p.r) + ',' + format_double(p.analytic) + ',' +
         format_double(p.empirical) + ',' + format_double(p.std_error) + '\n';
  }
  return s;
}

std::string r_grid_csv(const std::vector<RGridPoint>& pts) {
  std::string s = "R,empirical,stderr\n";
  for (const RGridPoint& p : pts) {
    s += format_double(p.r) + ',' + format_double(p.empirical) + ',' + format_double(p.std_error) + '\n';
  }
  return s;
}

std::vector<double> grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw InvalidInput("grid needs lo <= hi and step > 0");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> out;
  for (std::size_t i = 0; i <= n; ++i) out.push_back(std::round((lo + i * step) * 1e12) / 1e12);
  return out;
}

}  // namespace selfprop::harness
