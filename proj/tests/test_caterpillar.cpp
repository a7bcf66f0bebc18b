#include <doctest.h>

#include <cmath>
#include <set>

#include "selfprop/caterpillar.hpp"
#include "selfprop/error.hpp"

using namespace selfprop;

namespace {

Environment constant_env(Word value, unsigned width, double q = 1.0, std::uint64_t seed = 1) {
  return Environment(DiscreteMap::identity(1, width), {value}, NoiseChannel{q}, Rng::stream(seed, "noise"));
}

TableModel exact_constant_table(Word value, std::size_t k, unsigned width) {
  TableModel t(k, k, width);
  t.observe(StateVector(k, value), StateVector(k, value));
  return t;
}

Caterpillar tape_agent(AgentParams p, Environment env, PredictorModel model, std::uint64_t seed = 3,
                       std::uint64_t start = 0) {
  auto track = std::make_unique<TapeTrack>(Tape1D(std::move(env)), p.k, start);
  return Caterpillar(p, std::move(model), std::move(track), AGPolicy{}, seed);
}

bool adjacent(Position a, Position b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y) == 1; }

}  // namespace

TEST_CASE("environment emits component 0 and applies a scheduled shift") {
  Environment env(DiscreteMap::affine(8, {1}, {1}), {10}, NoiseChannel{1.0}, Rng(1));
  env.schedule_shift(3, DiscreteMap::affine(8, {1}, {5}));
  std::vector<Word> got;
  for (int i = 0; i < 5; ++i) got.push_back(env.next());
  CHECK(got == std::vector<Word>{10, 11, 12, 17, 22});
  CHECK_THROWS_AS(env.schedule_shift(9, DiscreteMap::identity(2, 8)), InvalidInput);
}

TEST_CASE("tape cells are consumed once and keep their randomized value") {
  Tape1D tape(constant_env(7, 8));
  CHECK(tape.read(4) == 7);
  CHECK(tape.materialized() == 5);
  tape.consume(2, 0x3c);
  CHECK(tape.consumed(2));
  CHECK(tape.read(2) == 0x3c);
  CHECK_THROWS_AS(tape.consume(2, 1), ContractViolation);
  CHECK(tape.consumed_values() == std::vector<Word>{0x3c});
}

TEST_CASE("constant tape with an exact model: net gain per cycle") {
  AgentParams p;
  p.width = 8;
  p.c_move = 1.0;
  Caterpillar agent = tape_agent(p, constant_env(0x5a, 8), PredictorModel(exact_constant_table(0x5a, 1, 8)));
  const EpisodeResult ep = run_episode(agent, 600);
  CHECK(ep.status == Status::Completed);
  CHECK(ep.rows.size() == 600);
  const double target = 8 * std::log(2.0) - 1.0;
  for (std::size_t i = 100; i < ep.rows.size(); ++i) CHECK(ep.rows[i].ea_delta == doctest::Approx(target).epsilon(1e-6));
  // Warm-up: no bets until the confidence window is full.
  for (std::size_t i = 0; i < p.confidence_window; ++i) CHECK(ep.rows[i].extracted == 0.0);
  // Growth is monotone after warm-up.
  for (std::size_t i = p.confidence_window + 1; i < ep.rows.size(); ++i) {
    CHECK(ep.rows[i].ea_balance > ep.rows[i - 1].ea_balance);
  }
}

TEST_CASE("ledger conservation per cycle while learning") {
  AgentParams p;
  p.k = 1;
  p.width = 3;
  p.c_move = 0.2;
  p.c_mut = 0.05;
  p.endowment = 200.0;
  Environment env(DiscreteMap::permutation(1, 3, {3, 6, 0, 5, 1, 7, 2, 4}), {0}, NoiseChannel{0.95}, Rng(9));
  Caterpillar agent = tape_agent(p, std::move(env), PredictorModel(CircuitModel(ReversibleCircuit(3), 1, 3)));
  const EpisodeResult ep = run_episode(agent, 3000);
  std::size_t mutations = 0;
  for (const CycleReport& r : ep.rows) {
    CHECK(r.extracted - r.moved - r.mutated == doctest::Approx(r.ea_delta).epsilon(1e-9));
    mutations += r.mutation_attempted;
    if (r.status == Status::Running) CHECK(r.ea_balance >= 0.0);
  }
  CHECK(mutations > 0);
  CHECK(agent.ledger().audit() == doctest::Approx(agent.ledger().balance()).epsilon(1e-9));
  CHECK(agent.learning().channel_a <= agent.ledger().balance() + 1e-9);
}

TEST_CASE("zero endowment: death at cycle 0 with no cells consumed") {
  AgentParams p;
  p.endowment = 0.0;
  Caterpillar agent = tape_agent(p, constant_env(1, 8), PredictorModel(exact_constant_table(1, 1, 8)));
  const EpisodeResult ep = run_episode(agent, 100);
  CHECK(ep.status == Status::Exhausted);
  CHECK(ep.rows.empty());
  CHECK(agent.track().trail_values().empty());
  CHECK(ep.cycles_survived == 0);
}

TEST_CASE("pure noise tape drains the accumulator") {
  AgentParams p;
  p.endowment = 20.0;
  Environment env(DiscreteMap::identity(1, 8), {0}, NoiseChannel{0.5}, Rng(5));
  Caterpillar agent = tape_agent(p, std::move(env), PredictorModel(TableModel(1, 1, 8)));
  const EpisodeResult ep = run_episode(agent, 1000);
  CHECK(ep.status == Status::Exhausted);
  double extracted = 0.0;
  for (const CycleReport& r : ep.rows) extracted += r.extracted;
  CHECK(std::abs(extracted) < 2.0);
  CHECK(ep.cycles_survived >= 18);
  CHECK(ep.cycles_survived <= 22);
}

TEST_CASE("max_cycles = 0 gives an empty completed run") {
  AgentParams p;
  Caterpillar agent = tape_agent(p, constant_env(1, 8), PredictorModel(exact_constant_table(1, 1, 8)));
  const EpisodeResult ep = run_episode(agent, 0);
  CHECK(ep.status == Status::Completed);
  CHECK(ep.rows.empty());
}

TEST_CASE("1D body spans K+1 cells and every released cell is burned once") {
  AgentParams p;
  p.k = 4;
  p.width = 6;
  Caterpillar agent = tape_agent(p, constant_env(9, 6), PredictorModel(exact_constant_table(9, 4, 6)));
  for (int i = 0; i < 200; ++i) {
    agent.step();
    const auto& track = dynamic_cast<const TapeTrack&>(agent.track());
    CHECK(track.head().x - static_cast<std::int64_t>(track.tail()) == 4);
  }
  const auto& track = dynamic_cast<const TapeTrack&>(agent.track());
  for (std::uint64_t i = 0; i < 200; ++i) CHECK(track.tape().consumed(i));
  CHECK_FALSE(track.tape().consumed(200));
  CHECK(track.trail_values().size() == 200);
}

TEST_CASE("time locality: the start offset changes no decision") {
  AgentParams p;
  p.k = 2;
  auto run = [&](std::uint64_t start) {
    Caterpillar a = tape_agent(p, constant_env(0x81, 8), PredictorModel(exact_constant_table(0x81, 2, 8)), 3, start);
    return run_episode(a, 300);
  };
  const EpisodeResult a = run(0);
  const EpisodeResult b = run(1000);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].extracted == b.rows[i].extracted);
    CHECK(a.rows[i].mode == b.rows[i].mode);
    CHECK(a.rows[i].zero_fraction == b.rows[i].zero_fraction);
    CHECK(b.rows[i].head.x - a.rows[i].head.x == 1000);
  }
}

TEST_CASE("trail entropy on a constant tape") {
  AgentParams p;
  Caterpillar agent = tape_agent(p, constant_env(0, 8), PredictorModel(exact_constant_table(0, 1, 8)));
  run_episode(agent, 10000);
  const auto trail = agent.track().trail_values();
  CHECK(trail.size() == 10000);
  CHECK(mean_bit_entropy(trail, 8) >= 0.99);
  CHECK(mean_bit_entropy(std::vector<Word>(50, 0), 8) == 0.0);
}

TEST_CASE("lattice moves and headings") {
  LatticeTrack t(Lattice2D(constant_env(1, 4)), 2);
  CHECK(t.head() == Position{0, 0});
  CHECK(t.body().back() == Position{-2, 0});
  move_2d(t, Turn::Straight);
  CHECK(t.head() == Position{1, 0});
  CHECK(t.heading() == Heading::East);
  move_2d(t, Turn::Left);
  CHECK(t.heading() == Heading::North);
  CHECK(t.head() == Position{1, 1});
  move_2d(t, Turn::Right);
  CHECK(t.heading() == Heading::East);
  CHECK(t.head() == Position{2, 1});
  CHECK(turned(Heading::South, Turn::Left) == Heading::East);
  CHECK(turned(Heading::East, Turn::Right) == Heading::South);
}

TEST_CASE("moving into the body is a contract violation") {
  LatticeTrack t(Lattice2D(constant_env(1, 4)), 3);
  move_2d(t, Turn::Left);
  move_2d(t, Turn::Left);
  CHECK(t.blocked(Turn::Left));
  CHECK_THROWS_AS(move_2d(t, Turn::Left), ContractViolation);
}

TEST_CASE("inward spiral traps the agent") {
  AgentParams p;
  p.k = 8;
  p.width = 4;
  AGPolicy pol;
  pol.kind = AGPolicy::Kind::Scripted;
  using enum Turn;
  pol.script = {Straight, Straight, Left, Straight, Left, Straight, Left, Left};
  auto track = std::make_unique<LatticeTrack>(Lattice2D(constant_env(2, 4)), 8);
  Caterpillar agent(p, PredictorModel(exact_constant_table(2, 8, 4)), std::move(track), pol, 1);
  const EpisodeResult ep = run_episode(agent, 100);
  CHECK(ep.status == Status::Trapped);
  CHECK(ep.cycles_survived == 8);
  const auto& lt = dynamic_cast<const LatticeTrack&>(agent.track());
  CHECK(lt.head() == Position{1, 1});
  const std::string snap = lt.snapshot();
  CHECK(std::count(snap.begin(), snap.end(), '#') == 9);
  CHECK(std::count(snap.begin(), snap.end(), '.') == 8);
}

TEST_CASE("random walk keeps the body self-avoiding, connected and off the trail") {
  AgentParams p;
  p.k = 5;
  p.width = 4;
  p.endowment = 1e6;
  AGPolicy pol;
  pol.kind = AGPolicy::Kind::Random;
  auto track = std::make_unique<LatticeTrack>(Lattice2D(constant_env(3, 4)), 5);
  Caterpillar agent(p, PredictorModel(exact_constant_table(3, 5, 4)), std::move(track), pol, 17);
  for (int i = 0; i < 2000 && agent.status() == Status::Running; ++i) {
    agent.step();
    const auto& lt = dynamic_cast<const LatticeTrack&>(agent.track());
    const auto& body = lt.body();
    REQUIRE(body.size() == 6);
    std::set<std::pair<std::int64_t, std::int64_t>> cells;
    for (std::size_t j = 0; j < body.size(); ++j) {
      cells.insert({body[j].x, body[j].y});
      if (j > 0) CHECK(adjacent(body[j - 1], body[j]));
      CHECK_FALSE(lt.lattice().consumed(body[j]));
    }
    CHECK(cells.size() == body.size());
  }
}

TEST_CASE("agent construction checks shapes") {
  AgentParams p;
  p.k = 2;
  auto track = std::make_unique<TapeTrack>(Tape1D(constant_env(1, 8)), 2);
  CHECK_THROWS_AS(Caterpillar(p, PredictorModel(TableModel(1, 1, 8)), std::move(track), AGPolicy{}, 1), InvalidInput);
  AgentParams bad;
  bad.c_move = -1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}
