#pragma once

// The reversible-transform block: delay latches, XOR residuals, detrending,
// flow splitting, online confidence, and the two learner representations.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "selfprop/dynsys.hpp"
#include "selfprop/revcomp.hpp"

namespace selfprop {

// Emits the value pushed `depth` pushes earlier; nullopt while warming up.
class DelayLatch {
 public:
  explicit DelayLatch(std::size_t depth);

  std::optional<Word> push(Word w);
  bool warm() const { return stored_.size() == depth_; }
  std::size_t depth() const { return depth_; }
  std::size_t stored() const { return stored_.size(); }

 private:
  std::size_t depth_;
  std::deque<Word> stored_;
};

enum class DetrendMode { Subtract, Xor };

// Pushes t_now and returns t_now - t_delayed (mod 2^w), or the XOR for
// DetrendMode::Xor. nullopt until the latch is warm.
std::optional<Word> detrend_time(Word t_now, DelayLatch& latch, unsigned width,
                                 DetrendMode mode = DetrendMode::Subtract);

// Context -> next-state counts. Prediction per component is the most
// frequent observed word, ties to the smaller word.
class TableModel {
 public:
  TableModel(std::size_t context_dim, std::size_t output_dim, unsigned width);

  void observe(const StateVector& context, const StateVector& observed, std::uint64_t count = 1);
  std::optional<StateVector> lookup(const StateVector& context) const;
  std::uint64_t count(const StateVector& context, std::size_t component, Word value) const;

  std::size_t context_dim() const { return context_dim_; }
  std::size_t output_dim() const { return output_dim_; }
  unsigned width() const { return width_; }
  std::size_t contexts() const { return counts_.size(); }

  // Header "table K_ctx K_out w", then one "context word count" triple per
  // line with context and word as packed integers.
  std::string to_text() const;
  static TableModel from_text(const std::string& text);

 private:
  std::size_t context_dim_;
  std::size_t output_dim_;
  unsigned width_;
  StateVector argmax(const std::map<std::uint64_t, std::uint64_t>& joint) const;

  // packed context -> (packed observation -> count)
  std::map<std::uint64_t, std::map<std::uint64_t, std::uint64_t>> counts_;
  std::unordered_map<std::uint64_t, StateVector> argmax_;
};

// A width K*w circuit read as F-hat: pack the context, apply, unpack.
struct CircuitModel {
  ReversibleCircuit circuit;
  std::size_t dim = 1;
  unsigned width = 1;

  CircuitModel(ReversibleCircuit c, std::size_t dim, unsigned width);
  StateVector operator()(const StateVector& context) const;
};

class PredictorModel {
 public:
  PredictorModel(TableModel m) : model_(std::move(m)) {}
  PredictorModel(CircuitModel m) : model_(std::move(m)) {}

  bool is_table() const { return std::holds_alternative<TableModel>(model_); }
  bool is_circuit() const { return std::holds_alternative<CircuitModel>(model_); }
  TableModel& table() { return std::get<TableModel>(model_); }
  const TableModel& table() const { return std::get<TableModel>(model_); }
  CircuitModel& circuit() { return std::get<CircuitModel>(model_); }
  const CircuitModel& circuit() const { return std::get<CircuitModel>(model_); }

  std::size_t context_dim() const;
  std::size_t output_dim() const;
  unsigned width() const;

  // F-hat(context). Unseen table contexts give the all-zero word and
  // `seen` is cleared.
  StateVector apply(const StateVector& context, bool* seen = nullptr) const;

 private:
  std::variant<TableModel, CircuitModel> model_;
};

struct Residual {
  StateVector z;
  std::uint64_t timestamp = 0;
};

// z = x_now XOR F-hat(x_prev), component-wise.
Residual residual(const PredictorModel& model, const StateVector& x_now, const StateVector& x_prev,
                  std::uint64_t timestamp = 0);
// Inverse of residual(): x_now = z XOR F-hat(x_prev).
StateVector reconstruct(const PredictorModel& model, const Residual& z, const StateVector& x_prev);

struct FlowSplit {
  std::vector<std::size_t> green;   // near-zero components
  std::vector<std::size_t> purple;  // noisy components
};

// Component i is green iff zero_rates[i] >= tau.
FlowSplit split_flows(std::span<const double> zero_rates, double tau = 0.9);

struct BitConfidence {
  double q = 0.5;
  bool flipped = false;  // engine should predict 1 instead of 0
};

struct ConfidenceEstimate {
  std::vector<BitConfidence> bits;
  std::size_t window = 0;

  // Per-bit diaphragm stops (R = Q-hat).
  std::vector<double> stops() const;
  // The word the extraction engines bet on.
  Word predicted_word() const;
};

// From a record of "residual bit was zero" flags.
BitConfidence estimate_confidence(std::span<const std::uint8_t> zero_history, double epsilon = 1e-9);
ConfidenceEstimate estimate_confidence(const std::vector<std::vector<std::uint8_t>>& per_bit_history,
                                       double epsilon = 1e-9);

// Sliding-window version of estimate_confidence for a stream of residual
// words. O(1) per update.
class ConfidenceTracker {
 public:
  ConfidenceTracker(unsigned bits, std::size_t window, double epsilon = 1e-9);

  void record(Word z);
  ConfidenceEstimate estimate() const;
  std::size_t filled() const { return history_.size(); }
  bool warm() const { return history_.size() == window_; }
  std::size_t window() const { return window_; }
  void reset();

 private:
  unsigned bits_;
  std::size_t window_;
  double epsilon_;
  std::deque<Word> history_;
  std::vector<std::size_t> zeros_;
};

// Per-component fraction of all-zero residual words over a window.
class ResidualStats {
 public:
  ResidualStats(std::size_t dim, std::size_t window = 256);

  void record(const StateVector& z);
  std::vector<double> zero_rates() const;

 private:
  std::size_t dim_;
  std::size_t window_;
  std::deque<StateVector> history_;
  std::vector<std::size_t> zeros_;
};

// Passive learning step: count (context -> observed).
void update_table(TableModel& model, const StateVector& context, const StateVector& observed);

struct Prediction {
  StateVector state;
  ConfidenceEstimate confidence;
  bool seen = true;
};

// Unseen table contexts predict zero with Q-hat = 1/2 on every bit so the
// engines expect zero energy. The same holds until the tracker's window has
// filled; after that its estimate applies.
Prediction predict(const PredictorModel& model, const StateVector& context, const ConfidenceTracker& tracker);

}  // namespace selfprop
