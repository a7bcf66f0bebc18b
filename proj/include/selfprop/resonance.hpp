#pragma once

// Analog reference: energy growth of a driven variable and its damped form.

#include <cstddef>
#include <vector>

namespace selfprop::resonance {

struct ForceSignal {
  double dt = 0.01;
  std::vector<double> values;

  static ForceSignal sine(std::size_t samples, double dt, double amplitude = 1.0, double angular_frequency = 1.0);
};

struct VelocityPolicy {
  enum class Kind { Matched, Scaled, Antiphase };

  Kind kind = Kind::Matched;
  double param = 1.0;  // gamma for Matched, alpha for Scaled, unused for Antiphase

  static VelocityPolicy matched(double gamma);
  static VelocityPolicy scaled(double alpha) { return {Kind::Scaled, alpha}; }
  static VelocityPolicy antiphase() { return {Kind::Antiphase, 0.0}; }

  double velocity(double force) const;
};

struct EnergySample {
  double t;
  double energy;
};

using EnergyTrace = std::vector<EnergySample>;

// dE/dt = F v
double energy_rate(double force, double velocity);
// dE/dt = F v - gamma v^2
double damped_energy_rate(double force, double velocity, double gamma);

// Explicit Euler: E[n+1] = E[n] + dt * (F[n] v[n] - gamma v[n]^2).
// Returns values.size() + 1 samples starting at (0, e0).
EnergyTrace simulate(const ForceSignal& force, const VelocityPolicy& policy, double gamma, double e0);

}  // namespace selfprop::resonance
