#include "selfprop/predictor.hpp"

#include <algorithm>
#include <sstream>

#include "selfprop/error.hpp"

namespace selfprop {

DelayLatch::DelayLatch(std::size_t depth) : depth_(depth) {
  if (depth == 0) throw InvalidInput("delay latch depth must be at least 1");
}

std::optional<Word> DelayLatch::push(Word w) {
  std::optional<Word> out;
  if (stored_.size() == depth_) {
    out = stored_.front();
    stored_.pop_front();
  }
  stored_.push_back(w);
  return out;
}

std::optional<Word> detrend_time(Word t_now, DelayLatch& latch, unsigned width, DetrendMode mode) {
  const std::optional<Word> delayed = latch.push(t_now);
  if (!delayed) return std::nullopt;
  if (mode == DetrendMode::Xor) return (t_now ^ *delayed) & word_mask(width);
  return (t_now - *delayed) & word_mask(width);
}

// --- table model -----------------------------------------------------------

TableModel::TableModel(std::size_t context_dim, std::size_t output_dim, unsigned width)
    : context_dim_(context_dim), output_dim_(output_dim), width_(width) {
  check_width(width);
  if (context_dim == 0 || output_dim == 0) throw InvalidInput("table model dimensions must be positive");
  if (context_dim * width > 64 || output_dim * width > 64) throw InvalidInput("table model state exceeds 64 bits");
}

void TableModel::observe(const StateVector& context, const StateVector& observed, std::uint64_t count) {
  if (context.size() != context_dim_ || observed.size() != output_dim_) {
    throw InvalidInput("table model: context or observation has the wrong dimension");
  }
  const std::uint64_t key = pack(context, width_);
  auto& joint = counts_[key];
  joint[pack(observed, width_)] += count;
  argmax_[key] = argmax(joint);
}

StateVector TableModel::argmax(const std::map<std::uint64_t, std::uint64_t>& joint) const {
  StateVector best(output_dim_);
  for (std::size_t i = 0; i < output_dim_; ++i) {
    std::map<Word, std::uint64_t> marginal;
    for (const auto& [packed, n] : joint) marginal[static_cast<Word>((packed >> (i * width_)) & word_mask(width_))] += n;
    std::uint64_t top = 0;
    for (const auto& [word, n] : marginal) {
      if (n > top) {  // strict: ascending iteration keeps the smaller word on ties
        top = n;
        best[i] = word;
      }
    }
  }
  return best;
}

std::optional<StateVector> TableModel::lookup(const StateVector& context) const {
  if (context.size() != context_dim_) throw InvalidInput("table model: context has the wrong dimension");
  const auto it = argmax_.find(pack(context, width_));
  if (it == argmax_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t TableModel::count(const StateVector& context, std::size_t component, Word value) const {
  const auto it = counts_.find(pack(context, width_));
  if (it == counts_.end() || component >= output_dim_) return 0;
  std::uint64_t n = 0;
  for (const auto& [packed, c] : it->second) {
    if (static_cast<Word>((packed >> (component * width_)) & word_mask(width_)) == value) n += c;
  }
  return n;
}

std::string TableModel::to_text() const {
  std::ostringstream os;
  os << "table " << context_dim_ << ' ' << output_dim_ << ' ' << width_ << '\n';
  for (const auto& [key, joint] : counts_) {
    for (const auto& [word, n] : joint) os << key << ' ' << word << ' ' << n << '\n';
  }
  return os.str();
}

TableModel TableModel::from_text(const std::string& text) {
  std::istringstream in(text);
  std::string tag;
  std::size_t cdim = 0, odim = 0;
  unsigned width = 0;
  if (!(in >> tag >> cdim >> odim >> width) || tag != "table") throw InvalidInput("table text: bad header");
  TableModel m(cdim, odim, width);
  std::uint64_t key = 0, word = 0, n = 0;
  while (in >> key >> word >> n) {
    if (n == 0) continue;
    m.observe(unpack(key, cdim, width), unpack(word, odim, width), n);
  }
  if (!in.eof()) throw InvalidInput("table text: malformed entry");
  return m;
}

// --- circuit model ---------------------------------------------------------

CircuitModel::CircuitModel(ReversibleCircuit c, std::size_t dim_, unsigned width_)
    : circuit(std::move(c)), dim(dim_), width(width_) {
  check_width(width);
  if (circuit.width() != dim * width) {
    throw InvalidInput("circuit model width " + std::to_string(circuit.width()) + " != K*w = " +
                       std::to_string(dim * width));
  }
}

StateVector CircuitModel::operator()(const StateVector& context) const {
  if (context.size() != dim) throw InvalidInput("circuit model: context has the wrong dimension");
  return unpack(circuit.apply(pack(context, width)), dim, width);
}

std::size_t PredictorModel::context_dim() const {
  return is_table() ? table().context_dim() : circuit().dim;
}

std::size_t PredictorModel::output_dim() const { return is_table() ? table().output_dim() : circuit().dim; }

unsigned PredictorModel::width() const { return is_table() ? table().width() : circuit().width; }

StateVector PredictorModel::apply(const StateVector& context, bool* seen) const {
  if (is_circuit()) {
    if (seen) *seen = true;
    return circuit()(context);
  }
  auto hit = table().lookup(context);
  if (seen) *seen = hit.has_value();
  return hit ? *hit : StateVector(table().output_dim(), 0);
}

// --- residual --------------------------------------------------------------

Residual residual(const PredictorModel& model, const StateVector& x_now, const StateVector& x_prev,
                  std::uint64_t timestamp) {
  if (x_prev.size() != model.context_dim() || x_now.size() != model.output_dim()) {
    throw InvalidInput("residual: state dimensions do not match the model");
  }
  const StateVector predicted = model.apply(x_prev);
  Residual r{StateVector(x_now.size()), timestamp};
  const Word mask = word_mask(model.width());
  for (std::size_t i = 0; i < x_now.size(); ++i) r.z[i] = (x_now[i] ^ predicted[i]) & mask;
  return r;
}

StateVector reconstruct(const PredictorModel& model, const Residual& z, const StateVector& x_prev) {
  if (x_prev.size() != model.context_dim() || z.z.size() != model.output_dim()) {
    throw InvalidInput("reconstruct: state dimensions do not match the model");
  }
  const StateVector predicted = model.apply(x_prev);
  StateVector x(z.z.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = z.z[i] ^ predicted[i];
  return x;
}

FlowSplit split_flows(std::span<const double> zero_rates, double tau) {
  FlowSplit split;
  for (std::size_t i = 0; i < zero_rates.size(); ++i) {
    (zero_rates[i] >= tau ? split.green : split.purple).push_back(i);
  }
  return split;
}

// --- confidence ------------------------------------------------------------

namespace {

BitConfidence confidence_from_counts(std::size_t zeros, std::size_t total, double epsilon) {
  if (total == 0) return {0.5, false};
  const double rate = static_cast<double>(zeros) / static_cast<double>(total);
  if (rate >= 0.5) return {std::clamp(rate, 0.5, 1.0 - epsilon), false};
  return {std::clamp(1.0 - rate, 0.5, 1.0 - epsilon), true};
}

}  // namespace

std::vector<double> ConfidenceEstimate::stops() const {
  std::vector<double> r(bits.size());
  for (std::size_t b = 0; b < bits.size(); ++b) r[b] = bits[b].q;
  return r;
}

Word ConfidenceEstimate::predicted_word() const {
  Word w = 0;
  for (std::size_t b = 0; b < bits.size(); ++b) {
    if (bits[b].flipped) w |= Word{1} << b;
  }
  return w;
}

BitConfidence estimate_confidence(std::span<const std::uint8_t> zero_history, double epsilon) {
  if (zero_history.empty()) throw InvalidInput("estimate_confidence needs a window of at least one sample");
  const auto zeros = static_cast<std::size_t>(std::count_if(zero_history.begin(), zero_history.end(),
                                                            [](std::uint8_t v) { return v != 0; }));
  return confidence_from_counts(zeros, zero_history.size(), epsilon);
}

ConfidenceEstimate estimate_confidence(const std::vector<std::vector<std::uint8_t>>& per_bit_history,
                                       double epsilon) {
  ConfidenceEstimate est;
  for (const auto& h : per_bit_history) {
    est.bits.push_back(estimate_confidence(std::span<const std::uint8_t>(h), epsilon));
    est.window = std::max(est.window, h.size());
  }
  return est;
}

ConfidenceTracker::ConfidenceTracker(unsigned bits, std::size_t window, double epsilon)
    : bits_(bits), window_(window), epsilon_(epsilon), zeros_(bits, 0) {
  if (bits == 0 || bits > kMaxWordWidth) throw InvalidInput("confidence tracker needs 1..32 bits");
  if (window == 0) throw InvalidInput("confidence window must be at least 1");
}

void ConfidenceTracker::record(Word z) {
  if (history_.size() == window_) {
    const Word old = history_.front();
    history_.pop_front();
    for (unsigned b = 0; b < bits_; ++b) {
      if (!((old >> b) & 1u)) --zeros_[b];
    }
  }
  history_.push_back(z);
  for (unsigned b = 0; b < bits_; ++b) {
    if (!((z >> b) & 1u)) ++zeros_[b];
  }
}

ConfidenceEstimate ConfidenceTracker::estimate() const {
  ConfidenceEstimate est;
  est.window = history_.size();
  est.bits.reserve(bits_);
  for (unsigned b = 0; b < bits_; ++b) est.bits.push_back(confidence_from_counts(zeros_[b], history_.size(), epsilon_));
  return est;
}

void ConfidenceTracker::reset() {
  history_.clear();
  std::fill(zeros_.begin(), zeros_.end(), 0);
}

ResidualStats::ResidualStats(std::size_t dim, std::size_t window) : dim_(dim), window_(window), zeros_(dim, 0) {
  if (window == 0) throw InvalidInput("residual window must be at least 1");
}

void ResidualStats::record(const StateVector& z) {
  if (z.size() != dim_) throw InvalidInput("residual has the wrong dimension");
  if (history_.size() == window_) {
    for (std::size_t i = 0; i < dim_; ++i) {
      if (history_.front()[i] == 0) --zeros_[i];
    }
    history_.pop_front();
  }
  history_.push_back(z);
  for (std::size_t i = 0; i < dim_; ++i) {
    if (z[i] == 0) ++zeros_[i];
  }
}

std::vector<double> ResidualStats::zero_rates() const {
  std::vector<double> r(dim_, 0.0);
  if (history_.empty()) return r;
  for (std::size_t i = 0; i < dim_; ++i) r[i] = static_cast<double>(zeros_[i]) / static_cast<double>(history_.size());
  return r;
}

void update_table(TableModel& model, const StateVector& context, const StateVector& observed) {
  model.observe(context, observed);
}

Prediction predict(const PredictorModel& model, const StateVector& context, const ConfidenceTracker& tracker) {
  Prediction p;
  p.state = model.apply(context, &p.seen);
  if (p.seen && tracker.warm()) {
    p.confidence = tracker.estimate();
  } else {
    p.confidence.bits.assign(model.width(), BitConfidence{0.5, false});
  }
  return p;
}

}  // namespace selfprop
