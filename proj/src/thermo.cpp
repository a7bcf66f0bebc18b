#include "selfprop/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "selfprop/error.hpp"

namespace selfprop {

void ThermoParams::validate() const {
  if (!(kT > 0.0) || !std::isfinite(kT)) throw InvalidInput("kT must be positive and finite");
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw InvalidInput("epsilon must lie in (0, 1/2)");
}

double ThermoParams::clamp_stop(double r) const { return std::clamp(r, epsilon, 1.0 - epsilon); }

Energy landauer_bit(const ThermoParams& p) { return p.kT * kLn2; }

double to_bits(Energy e, const ThermoParams& p) { return e / (p.kT * kLn2); }

double binary_entropy(double q) {
  auto term = [](double x) { return x > 0.0 ? -x * std::log(x) : 0.0; };
  return term(q) + term(1.0 - q);
}

BitExtraction extract_bit(int actual_bit, const EngineConfig& engine, const ThermoParams& p, Rng& rng) {
  if (engine.r < p.epsilon || engine.r > 1.0 - p.epsilon) {
    throw InvalidInput("diaphragm stop R=" + std::to_string(engine.r) + " outside [epsilon, 1-epsilon]");
  }
  const bool hit = (actual_bit & 1) == (engine.predicted_bit & 1);
  const Energy e = p.kT * std::log(2.0 * (hit ? engine.r : 1.0 - engine.r));
  return {e, static_cast<int>(rng.next() >> 63)};
}

Energy expected_gain(double q, double r, const ThermoParams& p) {
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidInput("Q must lie in [0, 1]");
  if (!(r > 0.0 && r < 1.0)) throw InvalidInput("R must lie in (0, 1)");
  // q ln 2R is taken as 0 when q == 0 so the endpoints stay finite.
  const double hit = q > 0.0 ? q * std::log(2.0 * r) : 0.0;
  const double miss = q < 1.0 ? (1.0 - q) * std::log(2.0 * (1.0 - r)) : 0.0;
  return p.kT * (hit + miss);
}

OptimalEngine optimal_engine(double q, const ThermoParams& p) {
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidInput("Q must lie in [0, 1]");
  const double r = p.clamp_stop(q);
  return {r, expected_gain(q, r, p)};
}

WordExtraction extract_word(Word actual, Word predicted, std::span<const double> per_bit_r, const ThermoParams& p,
                            Rng& rng) {
  if (per_bit_r.empty() || per_bit_r.size() > kMaxWordWidth) {
    throw InvalidInput("extract_word needs between 1 and 32 diaphragm stops");
  }
  Energy total = 0.0;
  Word cell = 0;
  for (std::size_t b = 0; b < per_bit_r.size(); ++b) {
    const EngineConfig engine{per_bit_r[b], static_cast<int>((predicted >> b) & 1u)};
    const BitExtraction x = extract_bit(static_cast<int>((actual >> b) & 1u), engine, p, rng);
    total += x.energy;
    cell |= static_cast<Word>(x.cell_bit) << b;
  }
  return {total, cell};
}

Energy EnergyLedger::audit() const {
  Energy sum = endowment_;
  for (const Entry& e : entries_) sum += e.amount;
  return sum;
}

Energy EnergyLedger::total(Source source) const {
  Energy sum = 0.0;
  for (const Entry& e : entries_) {
    if (e.source == source) sum += e.amount;
  }
  return sum;
}

std::string_view to_string(EnergyLedger::Source s) {
  switch (s) {
    case EnergyLedger::Source::Extraction:
      return "extraction";
    case EnergyLedger::Source::Movement:
      return "movement";
    case EnergyLedger::Source::Mutation:
      return "mutation";
    case EnergyLedger::Source::Transfer:
      return "transfer";
  }
  return "unknown";
}

}  // namespace selfprop
