#pragma once

// The tape-walking agent. Its body covers K+1 cells: the head holds the
// newest value x(t), the tail the oldest x(t-K). Each cycle the reversible
// block replaces the tail with the residual of predicting it from the K
// newer cells, the body moves one cell forward on accumulated energy, and
// the released tail is burned for energy and left behind randomized.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "selfprop/controller.hpp"
#include "selfprop/dynsys.hpp"
#include "selfprop/predictor.hpp"
#include "selfprop/rng.hpp"
#include "selfprop/thermo.hpp"

namespace selfprop {

// Scalar cell stream: component 0 of a map's trajectory, passed through an
// observation noise channel. A regime shift swaps the map from a given cell
// index onward, continuing from the current state.
class Environment {
 public:
  Environment(DiscreteMap map, StateVector init, NoiseChannel noise, Rng noise_rng);

  void schedule_shift(std::uint64_t at_cell, DiscreteMap next);
  Word next();

  std::uint64_t produced() const { return produced_; }
  unsigned width() const { return map_.width(); }

 private:
  DiscreteMap map_;
  StateVector state_;
  NoiseChannel noise_;
  Rng rng_;
  std::uint64_t produced_ = 0;
  std::optional<std::pair<std::uint64_t, DiscreteMap>> shift_;
};

class Tape1D {
 public:
  explicit Tape1D(Environment env);

  Word read(std::uint64_t i);
  void write(std::uint64_t i, Word w);
  // Stores the randomized value and marks the cell consumed; a cell can be
  // consumed only once.
  void consume(std::uint64_t i, Word randomized);
  bool consumed(std::uint64_t i) const { return i < consumed_.size() && consumed_[i]; }
  std::uint64_t materialized() const { return cells_.size(); }
  std::vector<Word> consumed_values() const;

 private:
  void materialize(std::uint64_t i);

  Environment env_;
  std::vector<Word> cells_;
  std::vector<bool> consumed_;
};

struct Position {
  std::int64_t x = 0;
  std::int64_t y = 0;
  bool operator==(const Position&) const = default;
};

enum class Heading { East, North, West, South };
enum class Turn { Straight, Left, Right };

std::string_view to_string(Turn t);
Heading turned(Heading h, Turn t);
Position step(Position p, Heading h);

// Square lattice; cells are materialized from the environment stream in
// first-touch order.
class Lattice2D {
 public:
  explicit Lattice2D(Environment env);

  Word read(Position p);
  void write(Position p, Word w);
  void consume(Position p, Word randomized);
  // The body steps onto p: a trail cell there rejoins the body and keeps its
  // randomized value.
  void enter(Position p);
  bool consumed(Position p) const;
  bool materialized(Position p) const;
  std::size_t consumed_count() const { return trail_count_; }
  std::vector<Word> consumed_values() const;
  unsigned width() const { return width_; }

  // Text grid over the bounding box of touched cells, top row = largest y.
  // Body '#', trail '.', fresh cells as hex values, untouched cells blank.
  std::string snapshot(const std::deque<Position>& body) const;

 private:
  struct Cell {
    Word value = 0;
    bool consumed = false;
  };
  static std::uint64_t key(Position p);

  Environment env_;
  unsigned width_;
  std::unordered_map<std::uint64_t, Cell> cells_;
  std::vector<Position> order_;
  std::size_t trail_count_ = 0;
};

// Action generation. On a tape it always moves forward; on the lattice it
// proposes a turn and falls back to the remaining options in the order
// straight, left, right when the proposal is blocked by the body.
struct AGPolicy {
  enum class Kind { Forward, Fixed, RoundRobin, Random, Scripted };

  Kind kind = Kind::Forward;
  Turn fixed = Turn::Straight;
  std::vector<Turn> script;  // Scripted: consumed in order, then Straight
  std::size_t counter = 0;

  Turn propose(Rng& rng);
};

// Where the body lives. Body index 0 is the head, K the tail.
class Track {
 public:
  virtual ~Track() = default;

  virtual std::size_t body_length() const = 0;
  virtual Word read_body(std::size_t k) = 0;
  virtual void write_body(std::size_t k, Word w) = 0;
  // A turn whose target cell is free, or nullopt if the body is boxed in.
  virtual std::optional<Turn> plan(AGPolicy& policy, Rng& rng) = 0;
  // Advances the head; the tail leaves the body. Returns the released cell.
  virtual Position advance(Turn t) = 0;
  virtual void consume(Position released, Word randomized) = 0;
  virtual Position head() const = 0;
  virtual std::vector<Word> trail_values() const = 0;
  virtual std::string snapshot() const { return {}; }
};

class TapeTrack : public Track {
 public:
  // Body covers cells [start, start + K].
  TapeTrack(Tape1D tape, std::size_t k, std::uint64_t start = 0);

  std::size_t body_length() const override { return k_ + 1; }
  Word read_body(std::size_t k) override { return tape_.read(tail_ + k_ - k); }
  void write_body(std::size_t k, Word w) override { tape_.write(tail_ + k_ - k, w); }
  std::optional<Turn> plan(AGPolicy&, Rng&) override { return Turn::Straight; }
  Position advance(Turn) override;
  void consume(Position released, Word randomized) override;
  Position head() const override { return {static_cast<std::int64_t>(tail_ + k_), 0}; }
  std::vector<Word> trail_values() const override { return tape_.consumed_values(); }

  const Tape1D& tape() const { return tape_; }
  Tape1D& tape() { return tape_; }
  std::uint64_t tail() const { return tail_; }

 private:
  Tape1D tape_;
  std::size_t k_;
  std::uint64_t tail_;
};

class LatticeTrack : public Track {
 public:
  // Initial body is a straight line ending at the origin, heading east.
  LatticeTrack(Lattice2D lattice, std::size_t k);

  std::size_t body_length() const override { return body_.size(); }
  Word read_body(std::size_t k) override { return lattice_.read(body_[k]); }
  void write_body(std::size_t k, Word w) override { lattice_.write(body_[k], w); }
  std::optional<Turn> plan(AGPolicy& policy, Rng& rng) override;
  Position advance(Turn t) override;
  void consume(Position released, Word randomized) override { lattice_.consume(released, randomized); }
  Position head() const override { return body_.front(); }
  std::vector<Word> trail_values() const override { return lattice_.consumed_values(); }
  std::string snapshot() const override { return lattice_.snapshot(body_); }

  bool blocked(Turn t) const;
  Heading heading() const { return heading_; }
  const std::deque<Position>& body() const { return body_; }
  const Lattice2D& lattice() const { return lattice_; }

 private:
  Lattice2D lattice_;
  std::deque<Position> body_;
  Heading heading_ = Heading::East;
};

// Lattice move without the AG fallback: throws ContractViolation if the
// target cell is part of the body.
void move_2d(LatticeTrack& track, Turn t);

struct AgentParams {
  std::size_t k = 1;
  unsigned width = 8;
  ThermoParams thermo;
  Energy c_move = 1.0;
  Energy c_mut = 0.1 * kLn2;
  Energy endowment = 50.0;
  SplitterConfig splitter;
  std::size_t eval_window = 128;
  std::size_t confidence_window = 32;
  MutationWeights weights;

  void validate() const;
};

enum class Status { Running, Completed, Exhausted, Trapped };

std::string_view to_string(Status s);

struct CycleReport {
  std::uint64_t cycle = 0;
  Status status = Status::Running;
  Energy extracted = 0.0;
  Energy moved = 0.0;
  Energy mutated = 0.0;
  Energy ea_balance = 0.0;  // after the cycle
  Energy ea_delta = 0.0;
  double zero_fraction = 0.0;  // zero bits in the written residual
  double b_rate = 0.0;
  Mode mode = Mode::Searching;
  bool mode_changed = false;
  bool mutation_attempted = false;
  bool mutation_adopted = false;
  Position head;
};

class Caterpillar {
 public:
  // Streams "ag", "extraction" and "mutation" are split off `seed`.
  Caterpillar(AgentParams params, PredictorModel model, std::unique_ptr<Track> track, AGPolicy policy,
              std::uint64_t seed);

  // Steps 1-7 of one cycle. Returns a report with status Exhausted or
  // Trapped (and changes nothing) when the cycle cannot start.
  CycleReport cycle();
  // Controller pass: mode update from the last channel-B rate, then one
  // mutation attempt while searching. Folds its effects into `report`.
  void learn(CycleReport& report);
  // cycle() followed by learn().
  CycleReport step();

  Status status() const { return status_; }
  const EnergyLedger& ledger() const { return ea_; }
  const LearningState& learning() const { return learning_; }
  const PredictorModel& model() const { return model_; }
  const Track& track() const { return *track_; }
  Track& track() { return *track_; }
  const AgentParams& params() const { return params_; }
  std::uint64_t cycles() const { return cycles_; }
  // Fraction of correctly predicted tail bits over the evaluation memory.
  double evaluate(const PredictorModel& m) const;

 private:
  struct Sample {
    StateVector context;   // head .. K-1, newest first
    StateVector previous;  // cells 1 .. K before the residual overwrote the tail
  };

  AgentParams params_;
  PredictorModel model_;
  std::unique_ptr<Track> track_;
  AGPolicy policy_;
  Rng ag_rng_;
  Rng extraction_rng_;
  Rng mutation_rng_;
  EnergyLedger ea_;
  EnergySplitter splitter_;
  LearningState learning_;
  ConfidenceTracker tracker_;
  std::deque<Sample> memory_;
  double last_b_rate_ = 0.0;
  std::uint64_t cycles_ = 0;
  Status status_ = Status::Running;
};

struct EpisodeEvent {
  std::uint64_t cycle;
  std::string event;
  double rate;
};

struct EpisodeResult {
  Status status = Status::Completed;
  std::vector<CycleReport> rows;
  std::vector<EpisodeEvent> events;
  std::uint64_t cycles_survived = 0;
  Energy net_energy = 0.0;  // final balance minus endowment
  Energy final_balance = 0.0;
};

// Runs step() until max_cycles complete or the agent dies or is trapped.
EpisodeResult run_episode(Caterpillar& agent, std::size_t max_cycles);

// Per-bit Shannon entropy (bits) of the low `width` bits over the values,
// averaged across bit positions.
double mean_bit_entropy(const std::vector<Word>& values, unsigned width);

}  // namespace selfprop
