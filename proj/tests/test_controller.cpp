#include <doctest.h>

#include "selfprop/controller.hpp"
#include "selfprop/error.hpp"

using namespace selfprop;

TEST_CASE("splitter earmarks channel A and posts the full extraction") {
  EnergySplitter sp(SplitterConfig{0.1, 2.0, 1.0, 0.5, 4});
  LearningState st;
  EnergyLedger ea(5.0);
  SplitResult r = sp.split(3.0, st, ea);
  CHECK(r.a == doctest::Approx(0.1));
  CHECK(r.to_ea == doctest::Approx(2.9));
  CHECK(r.a + r.to_ea == doctest::Approx(3.0));
  CHECK(ea.balance() == doctest::Approx(8.0));
  CHECK(st.channel_a == doctest::Approx(0.1));
  CHECK(r.b_rate == doctest::Approx(6.0));

  // Small or negative extractions earn at most what came in.
  r = sp.split(0.04, st, ea);
  CHECK(r.a == doctest::Approx(0.04));
  r = sp.split(-1.0, st, ea);
  CHECK(r.a == 0.0);
  CHECK(r.to_ea == -1.0);
  CHECK(st.income_a == doctest::Approx(0.14));
  CHECK(ea.audit() == doctest::Approx(ea.balance()));
}

TEST_CASE("channel B is the windowed mean") {
  EnergySplitter sp(SplitterConfig{0.0, 1.0, 1.0, 0.5, 3});
  LearningState st;
  EnergyLedger ea;
  sp.split(3.0, st, ea);
  sp.split(0.0, st, ea);
  sp.split(0.0, st, ea);
  CHECK(sp.mean_rate() == doctest::Approx(1.0));
  const SplitResult r = sp.split(0.0, st, ea);  // the 3.0 leaves the window
  CHECK(r.b_rate == 0.0);
}

TEST_CASE("hysteresis") {
  const SplitterConfig cfg{0.1, 1.0, 1.0, 0.5, 8};
  LearningState s;
  s = control_step(s, 0.9, cfg);
  CHECK(s.mode == Mode::Searching);
  s = control_step(s, 1.0, cfg);
  CHECK(s.mode == Mode::Frozen);
  s = control_step(s, 0.5, cfg);  // between the thresholds: stays frozen
  CHECK(s.mode == Mode::Frozen);
  s = control_step(s, 0.49, cfg);
  CHECK(s.mode == Mode::Searching);
}

TEST_CASE("thresholds from the analytic optimum") {
  const ThermoParams p;
  const SplitterConfig cfg = SplitterConfig::from_optimum(8, 0.9, p);
  const double opt = 8 * (kLn2 - binary_entropy(0.9));
  CHECK(cfg.theta_halt == doctest::Approx(0.8 * opt));
  CHECK(cfg.theta_resume == doctest::Approx(0.4 * opt));
  CHECK_THROWS_AS(SplitterConfig::from_optimum(8, 0.5, p), InvalidInput);
  CHECK_THROWS_AS((SplitterConfig{0.1, 1.0, 0.5, 0.5, 8}.validate()), InvalidInput);
  CHECK_THROWS_AS((SplitterConfig{0.1, 1.0, 1.0, 0.5, 0}.validate()), InvalidInput);
}

TEST_CASE("mutation step contracts") {
  Rng rng(41);
  const auto zero = [](const PredictorModel&) { return 0.0; };
  PredictorModel circuit(CircuitModel(ReversibleCircuit(3), 1, 3));
  LearningState st;

  // No budget: nothing happens.
  MutationOutcome m = mutation_step(st, circuit, rng, 0.5, zero);
  CHECK_FALSE(m.attempted);

  // Equal scores: the challenger wins.
  st.channel_a = 1.0;
  EnergyLedger ea(10.0);
  m = mutation_step(st, circuit, rng, 0.5, zero, &ea);
  CHECK(m.attempted);
  CHECK(m.adopted);
  CHECK(circuit.circuit().circuit.size() == 1);
  CHECK(st.channel_a == doctest::Approx(0.5));
  CHECK(ea.balance() == doctest::Approx(9.5));
  CHECK(st.spent_a == doctest::Approx(0.5));

  // Worse challenger is rejected.
  const auto prefer_empty = [](const PredictorModel& pm) { return -static_cast<double>(pm.circuit().circuit.size()); };
  PredictorModel empty(CircuitModel(ReversibleCircuit(3), 1, 3));
  st.channel_a = 1.0;
  m = mutation_step(st, empty, rng, 0.5, prefer_empty);
  CHECK(m.attempted);
  CHECK_FALSE(m.adopted);
  CHECK(empty.circuit().circuit.empty());

  // Table models learn passively.
  PredictorModel table(TableModel(1, 1, 3));
  st.channel_a = 1.0;
  CHECK_FALSE(mutation_step(st, table, rng, 0.5, zero).attempted);

  st.mode = Mode::Frozen;
  CHECK_THROWS_AS(mutation_step(st, circuit, rng, 0.5, zero), ContractViolation);
}
