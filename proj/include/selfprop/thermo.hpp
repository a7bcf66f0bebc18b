#pragma once

// Energy accounting for the one-bit cylinder engine with a tunable diaphragm
// stop R, in units where kT is configurable (default 1).

#include <cstddef>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

#include "selfprop/dynsys.hpp"
#include "selfprop/rng.hpp"

namespace selfprop {

using Energy = double;

inline constexpr double kLn2 = std::numbers::ln2;

struct ThermoParams {
  double kT = 1.0;
  double epsilon = 1e-9;  // R is confined to [epsilon, 1 - epsilon]

  void validate() const;
  double clamp_stop(double r) const;
};

// kT ln 2: energy per correctly predicted bit.
Energy landauer_bit(const ThermoParams& p = {});

// Energy expressed in bits, i.e. in multiples of kT ln 2.
double to_bits(Energy e, const ThermoParams& p = {});

// Binary entropy in nats.
double binary_entropy(double q);

struct EngineConfig {
  double r = 0.5;
  int predicted_bit = 0;
};

struct BitExtraction {
  Energy energy;
  int cell_bit;  // the cell after extraction; uniformly random
};

// kT ln 2R if the atom sits on the predicted side, kT ln 2(1-R) otherwise.
// The spent cell is re-randomized.
BitExtraction extract_bit(int actual_bit, const EngineConfig& engine, const ThermoParams& p, Rng& rng);

// kT (Q ln 2R + (1-Q) ln 2(1-R)).
Energy expected_gain(double q, double r, const ThermoParams& p = {});

struct OptimalEngine {
  double r;
  Energy gain;
};

// R = clamp(Q); gain = expected_gain(Q, R) = kT (ln 2 - H(Q)) up to the clamp.
OptimalEngine optimal_engine(double q, const ThermoParams& p = {});

struct WordExtraction {
  Energy energy;
  Word cell;  // fully randomized
};

// One engine per bit; bit b uses stop per_bit_r[b] and predicts bit b of
// `predicted`.
WordExtraction extract_word(Word actual, Word predicted, std::span<const double> per_bit_r, const ThermoParams& p,
                            Rng& rng);

// Energy Accumulation ledger. Balance is maintained incrementally and can
// be audited against the entry list.
class EnergyLedger {
 public:
  enum class Source { Extraction, Movement, Mutation, Transfer };

  struct Entry {
    Source source;
    Energy amount;
  };

  explicit EnergyLedger(Energy endowment = 0.0) : endowment_(endowment), balance_(endowment) {}

  void post(Source source, Energy amount) {
    entries_.push_back({source, amount});
    balance_ += amount;
  }

  Energy balance() const { return balance_; }
  Energy endowment() const { return endowment_; }
  const std::vector<Entry>& entries() const { return entries_; }

  // Endowment plus the signed entry sum, recomputed from scratch.
  Energy audit() const;
  Energy total(Source source) const;

 private:
  Energy endowment_;
  Energy balance_;
  std::vector<Entry> entries_;
};

std::string_view to_string(EnergyLedger::Source s);

}  // namespace selfprop
