#pragma once

// Two-channel energy splitter and the energy-gated search controller.
//
// Channel A takes a constant bandwidth of the extracted energy and funds
// model mutations. Channel B is not a store: it is the windowed extraction
// rate scaled by lambda, used to freeze the search when extraction is good
// and to resume it when extraction collapses.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>

#include "selfprop/predictor.hpp"
#include "selfprop/revcomp.hpp"
#include "selfprop/rng.hpp"
#include "selfprop/thermo.hpp"

namespace selfprop {

struct SplitterConfig {
  Energy beta_a = 0.1;          // channel A bandwidth per cycle
  double lambda = 1.0;          // channel B gain
  double theta_halt = 1.0;      // freeze when b_rate >= theta_halt
  double theta_resume = 0.5;    // resume when b_rate < theta_resume
  std::size_t rate_window = 64;  // cycles in the extraction-rate mean

  void validate() const;

  // Thresholds as fractions (0.8, 0.4) of the analytic per-cycle optimum
  // bits * (ln 2 - H(Q)) kT.
  static SplitterConfig from_optimum(unsigned bits, double q, const ThermoParams& p, Energy beta_a = 0.1,
                                     double lambda = 1.0, std::size_t rate_window = 64);
};

enum class Mode { Searching, Frozen };

std::string_view to_string(Mode m);

struct LearningState {
  Mode mode = Mode::Searching;
  Energy channel_a = 0.0;   // budget available for mutations
  double best_rate = 0.0;   // incumbent's last measured rate
  std::uint64_t mutations = 0;  // attempted
  std::uint64_t adoptions = 0;
  Energy income_a = 0.0;    // total credited to channel A
  Energy spent_a = 0.0;     // total mutation spend
};

struct SplitResult {
  Energy a = 0.0;       // credited to channel A
  Energy to_ea = 0.0;   // remainder left free in the accumulator
  double b_rate = 0.0;  // control signal
};

// Keeps the extraction-rate window for channel B.
class EnergySplitter {
 public:
  explicit EnergySplitter(SplitterConfig cfg);

  // Posts the extraction to `ea` and earmarks a = min(beta_a, max(extracted, 0))
  // of it as channel A budget; the free part of the accumulator grows by
  // extracted - a.
  SplitResult split(Energy extracted, LearningState& state, EnergyLedger& ea);

  double mean_rate() const;
  const SplitterConfig& config() const { return cfg_; }

 private:
  SplitterConfig cfg_;
  std::deque<Energy> window_;
  Energy window_sum_ = 0.0;
};

SplitResult split_energy(Energy extracted, EnergySplitter& splitter, LearningState& state, EnergyLedger& ea);

// Hysteresis: searching -> frozen iff b_rate >= theta_halt; frozen ->
// searching iff b_rate < theta_resume.
LearningState control_step(LearningState state, double b_rate, const SplitterConfig& cfg);

struct MutationOutcome {
  bool attempted = false;
  bool adopted = false;
  double challenger_rate = 0.0;
  double incumbent_rate = 0.0;
};

using ModelEvaluator = std::function<double(const PredictorModel&)>;

// One greedy hill-climbing step on a circuit model. Pays c_mut from
// channel A if the budget allows, otherwise does nothing. The challenger
// replaces the incumbent when its rate is >= the incumbent's rate on the
// same evaluation data. Table models learn passively; for them this is a
// no-op. The spend is posted to `ea` when given. Throws ContractViolation
// when called in frozen mode.
MutationOutcome mutation_step(LearningState& state, PredictorModel& model, Rng& rng, Energy c_mut,
                              const ModelEvaluator& eval, EnergyLedger* ea = nullptr,
                              const MutationWeights& weights = {});

}  // namespace selfprop
