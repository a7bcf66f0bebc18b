#include <doctest.h>

#include <cmath>

#include "selfprop/error.hpp"
#include "selfprop/resonance.hpp"

using namespace selfprop;
using namespace selfprop::resonance;

TEST_CASE("undamped rate is F v") {
  CHECK(energy_rate(2.0, 3.0) == 6.0);
  CHECK(damped_energy_rate(2.0, 3.0, 0.5) == doctest::Approx(6.0 - 4.5));
  CHECK_THROWS_AS(damped_energy_rate(1.0, 1.0, -0.1), InvalidInput);
}

TEST_CASE("matched policy has zero increments") {
  const ForceSignal f = ForceSignal::sine(10000, 0.01, 2.0, 3.0);
  const EnergyTrace tr = simulate(f, VelocityPolicy::matched(0.4), 0.4, 1.0);
  REQUIRE(tr.size() == 10001);
  for (std::size_t i = 1; i < tr.size(); ++i) CHECK(std::abs(tr[i].energy - tr[i - 1].energy) <= 1e-12);
}

TEST_CASE("in-phase velocity accumulates, antiphase drains") {
  const ForceSignal f = ForceSignal::sine(2000, 0.01);
  const EnergyTrace up = simulate(f, VelocityPolicy::scaled(1.0), 0.0, 0.0);
  const EnergyTrace down = simulate(f, VelocityPolicy::antiphase(), 0.2, 0.0);
  for (std::size_t i = 1; i < up.size(); ++i) {
    CHECK(up[i].energy >= up[i - 1].energy);
    CHECK(down[i].energy <= down[i - 1].energy);
  }
  // Undamped scaled: sum of dt F^2.
  double expect = 0.0;
  for (double x : f.values) expect += 0.01 * x * x;
  CHECK(up.back().energy == doctest::Approx(expect));
}

TEST_CASE("resonance input validation") {
  CHECK_THROWS_AS(VelocityPolicy::matched(0.0), InvalidInput);
  CHECK_THROWS_AS(simulate(ForceSignal{0.01, {}}, VelocityPolicy::antiphase(), 0.0, 0.0), InvalidInput);
  CHECK_THROWS_AS(simulate(ForceSignal{0.0, {1.0}}, VelocityPolicy::antiphase(), 0.0, 0.0), InvalidInput);
}
