#include "selfprop/resonance.hpp"

#include <cmath>

#include "selfprop/error.hpp"

namespace selfprop::resonance {

ForceSignal ForceSignal::sine(std::size_t samples, double dt, double amplitude, double angular_frequency) {
  if (!(dt > 0.0)) throw InvalidInput("force signal needs dt > 0");
  ForceSignal f;
  f.dt = dt;
  f.values.resize(samples);
  for (std::size_t n = 0; n < samples; ++n) {
    f.values[n] = amplitude * std::sin(angular_frequency * dt * static_cast<double>(n));
  }
  return f;
}

VelocityPolicy VelocityPolicy::matched(double gamma) {
  if (!(gamma > 0.0)) throw InvalidInput("matched policy needs gamma > 0");
  return {Kind::Matched, gamma};
}

double VelocityPolicy::velocity(double force) const {
  switch (kind) {
    case Kind::Matched:
      return force / param;
    case Kind::Scaled:
      return param * force;
    case Kind::Antiphase:
      return -force;
  }
  return 0.0;
}

double energy_rate(double force, double velocity) { return force * velocity; }

double damped_energy_rate(double force, double velocity, double gamma) {
  if (gamma < 0.0) throw InvalidInput("friction coefficient must be non-negative");
  // Factored so the matched velocity F/gamma cancels to rounding level.
  return velocity * (force - gamma * velocity);
}

EnergyTrace simulate(const ForceSignal& force, const VelocityPolicy& policy, double gamma, double e0) {
  if (force.values.empty()) throw InvalidInput("force signal is empty");
  if (!(force.dt > 0.0)) throw InvalidInput("force signal needs dt > 0");
  for (double f : force.values) {
    if (!std::isfinite(f)) throw InvalidInput("force signal has non-finite samples");
  }
  EnergyTrace trace;
  trace.reserve(force.values.size() + 1);
  double e = e0;
  trace.push_back({0.0, e});
  for (std::size_t n = 0; n < force.values.size(); ++n) {
    const double f = force.values[n];
    e += force.dt * damped_energy_rate(f, policy.velocity(f), gamma);
    trace.push_back({force.dt * static_cast<double>(n + 1), e});
  }
  return trace;
}

}  // namespace selfprop::resonance
