#include "selfprop/caterpillar.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "selfprop/error.hpp"

namespace selfprop {

// --- environment -----------------------------------------------------------

Environment::Environment(DiscreteMap map, StateVector init, NoiseChannel noise, Rng noise_rng)
    : map_(std::move(map)), state_(std::move(init)), noise_(noise), rng_(noise_rng) {
  noise_.validate();
  if (state_.size() != map_.dimension()) throw InvalidInput("environment: initial state has the wrong dimension");
}

void Environment::schedule_shift(std::uint64_t at_cell, DiscreteMap next) {
  if (next.dimension() != map_.dimension() || next.width() != map_.width()) {
    throw InvalidInput("regime shift must keep dimension and width");
  }
  shift_.emplace(at_cell, std::move(next));
}

Word Environment::next() {
  if (produced_ > 0) {
    if (shift_ && produced_ >= shift_->first) {
      map_ = std::move(shift_->second);
      shift_.reset();
    }
    state_ = map_(state_);
  }
  ++produced_;
  return apply_noise(noise_, state_[0], map_.width(), rng_);
}

// --- tape ------------------------------------------------------------------

Tape1D::Tape1D(Environment env) : env_(std::move(env)) {}

void Tape1D::materialize(std::uint64_t i) {
  while (cells_.size() <= i) {
    cells_.push_back(env_.next());
    consumed_.push_back(false);
  }
}

Word Tape1D::read(std::uint64_t i) {
  materialize(i);
  return cells_[i];
}

void Tape1D::write(std::uint64_t i, Word w) {
  materialize(i);
  cells_[i] = w;
}

void Tape1D::consume(std::uint64_t i, Word randomized) {
  materialize(i);
  if (consumed_[i]) throw ContractViolation("tape cell " + std::to_string(i) + " consumed twice");
  cells_[i] = randomized;
  consumed_[i] = true;
}

std::vector<Word> Tape1D::consumed_values() const {
  std::vector<Word> out;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (consumed_[i]) out.push_back(cells_[i]);
  }
  return out;
}

// --- lattice geometry --------------------------------------------------------

std::string_view to_string(Turn t) {
  switch (t) {
    case Turn::Straight:
      return "straight";
    case Turn::Left:
      return "left";
    case Turn::Right:
      return "right";
  }
  return "?";
}

Heading turned(Heading h, Turn t) {
  const int v = static_cast<int>(h);
  switch (t) {
    case Turn::Straight:
      return h;
    case Turn::Left:
      return static_cast<Heading>((v + 1) % 4);
    case Turn::Right:
      return static_cast<Heading>((v + 3) % 4);
  }
  return h;
}

Position step(Position p, Heading h) {
  switch (h) {
    case Heading::East:
      return {p.x + 1, p.y};
    case Heading::North:
      return {p.x, p.y + 1};
    case Heading::West:
      return {p.x - 1, p.y};
    case Heading::South:
      return {p.x, p.y - 1};
  }
  return p;
}

Lattice2D::Lattice2D(Environment env) : env_(std::move(env)), width_(env_.width()) {}

std::uint64_t Lattice2D::key(Position p) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.x)) << 32) |
         static_cast<std::uint32_t>(p.y);
}

Word Lattice2D::read(Position p) {
  auto [it, fresh] = cells_.try_emplace(key(p));
  if (fresh) {
    it->second.value = env_.next();
    order_.push_back(p);
  }
  return it->second.value;
}

void Lattice2D::write(Position p, Word w) {
  read(p);
  cells_[key(p)].value = w;
}

void Lattice2D::consume(Position p, Word randomized) {
  read(p);
  Cell& c = cells_[key(p)];
  if (c.consumed) throw ContractViolation("lattice cell consumed twice without re-entry");
  ++trail_count_;
  c.consumed = true;
  c.value = randomized;
}

void Lattice2D::enter(Position p) {
  read(p);
  Cell& c = cells_[key(p)];
  if (c.consumed) {
    c.consumed = false;
    --trail_count_;
  }
}

bool Lattice2D::consumed(Position p) const {
  const auto it = cells_.find(key(p));
  return it != cells_.end() && it->second.consumed;
}

bool Lattice2D::materialized(Position p) const { return cells_.count(key(p)) != 0; }

std::vector<Word> Lattice2D::consumed_values() const {
  std::vector<Word> out;
  for (const Position& p : order_) {
    const Cell& c = cells_.at(key(p));
    if (c.consumed) out.push_back(c.value);
  }
  return out;
}

std::string Lattice2D::snapshot(const std::deque<Position>& body) const {
  if (order_.empty()) return {};
  std::int64_t x0 = order_[0].x, x1 = x0, y0 = order_[0].y, y1 = y0;
  for (const Position& p : order_) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const int digits = static_cast<int>((width_ + 3) / 4);
  std::ostringstream os;
  for (std::int64_t y = y1; y >= y0; --y) {
    for (std::int64_t x = x0; x <= x1; ++x) {
      if (x > x0) os << ' ';
      const Position p{x, y};
      if (std::find(body.begin(), body.end(), p) != body.end()) {
        os << std::string(digits, '#');
        continue;
      }
      const auto it = cells_.find(key(p));
      if (it == cells_.end()) {
        os << std::string(digits, ' ');
      } else if (it->second.consumed) {
        os << std::string(digits, '.');
      } else {
        static const char* hex = "0123456789abcdef";
        for (int d = digits - 1; d >= 0; --d) os << hex[(it->second.value >> (4 * d)) & 0xf];
      }
    }
    os << '\n';
  }
  return os.str();
}

// --- action generation -------------------------------------------------------

Turn AGPolicy::propose(Rng& rng) {
  static constexpr Turn kCycle[3] = {Turn::Straight, Turn::Left, Turn::Right};
  switch (kind) {
    case Kind::Forward:
      return Turn::Straight;
    case Kind::Fixed:
      return fixed;
    case Kind::RoundRobin:
      return kCycle[counter++ % 3];
    case Kind::Random:
      return kCycle[rng.below(3)];
    case Kind::Scripted:
      return counter < script.size() ? script[counter++] : Turn::Straight;
  }
  return Turn::Straight;
}

// --- tracks ------------------------------------------------------------------

TapeTrack::TapeTrack(Tape1D tape, std::size_t k, std::uint64_t start) : tape_(std::move(tape)), k_(k), tail_(start) {
  if (k == 0) throw InvalidInput("body needs K >= 1");
  tape_.read(tail_ + k_);
}

Position TapeTrack::advance(Turn) {
  const Position released{static_cast<std::int64_t>(tail_), 0};
  ++tail_;
  tape_.read(tail_ + k_);
  return released;
}

void TapeTrack::consume(Position released, Word randomized) {
  tape_.consume(static_cast<std::uint64_t>(released.x), randomized);
}

LatticeTrack::LatticeTrack(Lattice2D lattice, std::size_t k) : lattice_(std::move(lattice)) {
  if (k == 0) throw InvalidInput("body needs K >= 1");
  // Materialize tail first so stream time increases toward the head.
  for (std::size_t i = 0; i <= k; ++i) {
    const Position p{-static_cast<std::int64_t>(k - i), 0};
    lattice_.read(p);
    body_.push_front(p);
  }
}

bool LatticeTrack::blocked(Turn t) const {
  const Position target = step(body_.front(), turned(heading_, t));
  return std::find(body_.begin(), body_.end(), target) != body_.end();
}

std::optional<Turn> LatticeTrack::plan(AGPolicy& policy, Rng& rng) {
  const Turn preferred = policy.propose(rng);
  if (!blocked(preferred)) return preferred;
  for (Turn t : {Turn::Straight, Turn::Left, Turn::Right}) {
    if (t != preferred && !blocked(t)) return t;
  }
  return std::nullopt;
}

Position LatticeTrack::advance(Turn t) {
  if (blocked(t)) throw ContractViolation("move target is occupied by the body");
  heading_ = turned(heading_, t);
  const Position target = step(body_.front(), heading_);
  lattice_.enter(target);
  body_.push_front(target);
  const Position released = body_.back();
  body_.pop_back();
  return released;
}

void move_2d(LatticeTrack& track, Turn t) { track.advance(t); }

// --- agent -------------------------------------------------------------------

void AgentParams::validate() const {
  thermo.validate();
  splitter.validate();
  check_width(width);
  if (k == 0) throw InvalidInput("body needs K >= 1");
  if (!(c_move >= 0.0)) throw InvalidInput("c_move must be non-negative");
  if (!(c_mut >= 0.0)) throw InvalidInput("c_mut must be non-negative");
  if (!(endowment >= 0.0)) throw InvalidInput("endowment must be non-negative");
  if (eval_window == 0 || confidence_window == 0) throw InvalidInput("windows must be at least 1");
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Running:
      return "running";
    case Status::Completed:
      return "completed";
    case Status::Exhausted:
      return "exhausted";
    case Status::Trapped:
      return "trapped";
  }
  return "?";
}

Caterpillar::Caterpillar(AgentParams params, PredictorModel model, std::unique_ptr<Track> track, AGPolicy policy,
                         std::uint64_t seed)
    : params_(std::move(params)),
      model_(std::move(model)),
      track_(std::move(track)),
      policy_(std::move(policy)),
      ag_rng_(Rng::stream(seed, "ag")),
      extraction_rng_(Rng::stream(seed, "extraction")),
      mutation_rng_(Rng::stream(seed, "mutation")),
      ea_(params_.endowment),
      splitter_(params_.splitter),
      tracker_(params_.width, params_.confidence_window, params_.thermo.epsilon) {
  params_.validate();
  if (!track_ || track_->body_length() != params_.k + 1) throw InvalidInput("track body must span K+1 cells");
  if (model_.context_dim() != params_.k || model_.output_dim() != params_.k || model_.width() != params_.width) {
    throw InvalidInput("predictor must map K words of width w to K words");
  }
}

double Caterpillar::evaluate(const PredictorModel& m) const {
  if (memory_.empty()) return 0.0;
  const std::size_t last = params_.k - 1;
  const Word mask = word_mask(params_.width);
  std::uint64_t correct = 0;
  for (const Sample& s : memory_) {
    const Word miss = (m.apply(s.context)[last] ^ s.previous[last]) & mask;
    correct += params_.width - static_cast<unsigned>(std::popcount(miss));
  }
  return static_cast<double>(correct) / static_cast<double>(memory_.size() * params_.width);
}

CycleReport Caterpillar::cycle() {
  if (status_ != Status::Running) throw ContractViolation("cycle() on a finished agent");
  CycleReport r;
  r.cycle = cycles_;
  r.mode = learning_.mode;
  r.head = track_->head();
  r.ea_balance = ea_.balance();
  r.b_rate = last_b_rate_;
  if (ea_.balance() < params_.c_move) {
    status_ = r.status = Status::Exhausted;
    return r;
  }
  const std::optional<Turn> turn = track_->plan(policy_, ag_rng_);
  if (!turn) {
    status_ = r.status = Status::Trapped;
    return r;
  }
  const Energy before = ea_.balance();
  const std::size_t k = params_.k;

  // (1)-(2) Read the K+1 body cells.
  Sample sample{StateVector(k), StateVector(k)};
  for (std::size_t i = 0; i < k; ++i) sample.context[i] = track_->read_body(i);
  for (std::size_t i = 0; i < k; ++i) sample.previous[i] = track_->read_body(i + 1);

  // (3) Reversible transform: the first K cells pass through, the tail
  // becomes the residual of predicting it.
  const Prediction pred = predict(model_, sample.context, tracker_);
  const Word z = (sample.previous[k - 1] ^ pred.state[k - 1]) & word_mask(params_.width);
  track_->write_body(k, z);

  // (4) Move on stored energy; the tail leaves the body.
  ea_.post(EnergyLedger::Source::Movement, -params_.c_move);
  r.moved = params_.c_move;
  const Position released = track_->advance(*turn);

  // (5)-(6) Burn the residual cell and leave it randomized.
  const std::vector<double> stops = pred.confidence.stops();
  const WordExtraction ex =
      extract_word(z, pred.confidence.predicted_word(), stops, params_.thermo, extraction_rng_);
  track_->consume(released, ex.cell);
  const SplitResult split = splitter_.split(ex.energy, learning_, ea_);
  learning_.channel_a = std::clamp(learning_.channel_a, 0.0, std::max(ea_.balance(), 0.0));
  r.extracted = ex.energy;
  r.b_rate = last_b_rate_ = split.b_rate;
  r.zero_fraction =
      static_cast<double>(params_.width - static_cast<unsigned>(std::popcount(z))) / static_cast<double>(params_.width);

  // Bookkeeping for learning. Confidence only tracks predictions the model
  // actually made.
  if (pred.seen) tracker_.record(z);
  if (model_.is_table()) update_table(model_.table(), sample.context, sample.previous);
  memory_.push_back(std::move(sample));
  if (memory_.size() > params_.eval_window) memory_.pop_front();

  // (7) Shifted by one cell.
  ++cycles_;
  r.head = track_->head();
  r.ea_balance = ea_.balance();
  r.ea_delta = r.ea_balance - before;
  if (ea_.balance() < 0.0) status_ = r.status = Status::Exhausted;
  return r;
}

void Caterpillar::learn(CycleReport& r) {
  if (status_ != Status::Running) return;
  const Energy before = ea_.balance();
  const Mode previous = learning_.mode;
  learning_ = control_step(learning_, last_b_rate_, params_.splitter);
  r.mode = learning_.mode;
  r.mode_changed = learning_.mode != previous;
  if (learning_.mode == Mode::Searching) {
    const MutationOutcome m = mutation_step(
        learning_, model_, mutation_rng_, params_.c_mut, [this](const PredictorModel& pm) { return evaluate(pm); },
        &ea_, params_.weights);
    r.mutation_attempted = m.attempted;
    r.mutation_adopted = m.adopted;
    if (m.attempted) r.mutated = params_.c_mut;
  }
  r.ea_balance = ea_.balance();
  r.ea_delta += r.ea_balance - before;
}

CycleReport Caterpillar::step() {
  CycleReport r = cycle();
  if (r.status == Status::Running) learn(r);
  return r;
}

EpisodeResult run_episode(Caterpillar& agent, std::size_t max_cycles) {
  EpisodeResult result;
  result.rows.reserve(max_cycles);
  for (std::size_t i = 0; i < max_cycles; ++i) {
    CycleReport r = agent.step();
    if (r.status == Status::Exhausted && r.moved == 0.0) {
      result.events.push_back({r.cycle, "exhausted", r.b_rate});
      break;
    }
    if (r.status == Status::Trapped) {
      result.events.push_back({r.cycle, "trapped", r.b_rate});
      break;
    }
    if (r.mutation_attempted) result.events.push_back({r.cycle, r.mutation_adopted ? "adopt" : "reject", r.b_rate});
    if (r.mode_changed) result.events.push_back({r.cycle, r.mode == Mode::Frozen ? "freeze" : "resume", r.b_rate});
    const Status st = r.status;
    result.rows.push_back(r);
    if (st == Status::Exhausted) {
      result.events.push_back({r.cycle, "exhausted", r.b_rate});
      break;
    }
  }
  result.status = agent.status() == Status::Running ? Status::Completed : agent.status();
  result.cycles_survived = agent.cycles();
  result.final_balance = agent.ledger().balance();
  result.net_energy = result.final_balance - agent.ledger().endowment();
  return result;
}

double mean_bit_entropy(const std::vector<Word>& values, unsigned width) {
  if (values.empty() || width == 0) return 0.0;
  double total = 0.0;
  for (unsigned b = 0; b < width; ++b) {
    std::size_t ones = 0;
    for (Word v : values) ones += (v >> b) & 1u;
    const double p = static_cast<double>(ones) / static_cast<double>(values.size());
    double h = 0.0;
    if (p > 0.0) h -= p * std::log2(p);
    if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
    total += h;
  }
  return total / width;
}

}  // namespace selfprop
