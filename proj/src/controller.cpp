#include "selfprop/controller.hpp"

#include <algorithm>
#include <cmath>

#include "selfprop/error.hpp"

namespace selfprop {

void SplitterConfig::validate() const {
  if (!(beta_a >= 0.0)) throw InvalidInput("beta_a must be non-negative");
  if (!(lambda >= 0.0)) throw InvalidInput("lambda must be non-negative");
  if (!(theta_resume >= 0.0 && theta_resume < theta_halt)) {
    throw InvalidInput("thresholds must satisfy 0 <= theta_resume < theta_halt");
  }
  if (rate_window == 0) throw InvalidInput("rate window must be at least 1");
}

SplitterConfig SplitterConfig::from_optimum(unsigned bits, double q, const ThermoParams& p, Energy beta_a,
                                            double lambda, std::size_t rate_window) {
  const Energy optimum = bits * optimal_engine(q, p).gain;
  SplitterConfig cfg{beta_a, lambda, 0.8 * optimum, 0.4 * optimum, rate_window};
  cfg.validate();
  return cfg;
}

std::string_view to_string(Mode m) { return m == Mode::Searching ? "searching" : "frozen"; }

EnergySplitter::EnergySplitter(SplitterConfig cfg) : cfg_(cfg) { cfg_.validate(); }

SplitResult EnergySplitter::split(Energy extracted, LearningState& state, EnergyLedger& ea) {
  SplitResult r;
  r.a = std::min(cfg_.beta_a, std::max(extracted, 0.0));
  r.to_ea = extracted - r.a;
  state.channel_a += r.a;
  state.income_a += r.a;
  // The ledger holds the whole accumulator; channel A is an earmark on it.
  if (extracted != 0.0) ea.post(EnergyLedger::Source::Extraction, extracted);

  window_.push_back(extracted);
  if (window_.size() > cfg_.rate_window) window_.pop_front();
  window_sum_ = 0.0;
  for (Energy e : window_) window_sum_ += e;
  r.b_rate = cfg_.lambda * mean_rate();
  return r;
}

double EnergySplitter::mean_rate() const {
  if (window_.empty()) return 0.0;
  return window_sum_ / static_cast<double>(window_.size());
}

SplitResult split_energy(Energy extracted, EnergySplitter& splitter, LearningState& state, EnergyLedger& ea) {
  return splitter.split(extracted, state, ea);
}

LearningState control_step(LearningState state, double b_rate, const SplitterConfig& cfg) {
  if (state.mode == Mode::Searching && b_rate >= cfg.theta_halt) {
    state.mode = Mode::Frozen;
  } else if (state.mode == Mode::Frozen && b_rate < cfg.theta_resume) {
    state.mode = Mode::Searching;
  }
  return state;
}

MutationOutcome mutation_step(LearningState& state, PredictorModel& model, Rng& rng, Energy c_mut,
                              const ModelEvaluator& eval, EnergyLedger* ea, const MutationWeights& weights) {
  if (state.mode != Mode::Searching) throw ContractViolation("mutation_step called while frozen");
  MutationOutcome out;
  if (!model.is_circuit() || state.channel_a < c_mut) return out;

  state.channel_a -= c_mut;
  state.spent_a += c_mut;
  if (ea) ea->post(EnergyLedger::Source::Mutation, -c_mut);
  ++state.mutations;
  out.attempted = true;

  const CircuitModel& incumbent = model.circuit();
  PredictorModel challenger(
      CircuitModel(mutate(incumbent.circuit, rng, weights), incumbent.dim, incumbent.width));
  out.incumbent_rate = eval(model);
  out.challenger_rate = eval(challenger);
  if (out.challenger_rate >= out.incumbent_rate) {
    model = std::move(challenger);
    out.adopted = true;
    ++state.adoptions;
    state.best_rate = out.challenger_rate;
  } else {
    state.best_rate = out.incumbent_rate;
  }
  return out;
}

}  // namespace selfprop
