#pragma once

// Hidden discrete dynamical systems: maps, time-series rules, coordinate
// transforms, canonical-form checks and observation noise.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "selfprop/rng.hpp"

namespace selfprop {

// A cell value of configurable width w (1..32 bits).
using Word = std::uint32_t;
using StateVector = std::vector<Word>;

inline constexpr unsigned kMaxWordWidth = 32;

constexpr Word word_mask(unsigned width) {
  return static_cast<Word>((width >= 32 ? 0x1'0000'0000ULL : (1ULL << width)) - 1);
}

void check_width(unsigned width);

// Packs K words of width w into one integer, component 0 in the low bits.
// K*w must not exceed 64.
std::uint64_t pack(const StateVector& state, unsigned width);
StateVector unpack(std::uint64_t packed, std::size_t dim, unsigned width);

struct Trajectory {
  std::size_t start = 0;
  std::vector<StateVector> states;

  std::size_t size() const { return states.size(); }
  const StateVector& operator[](std::size_t i) const { return states[i]; }
};

// Signed two's-complement fixed point inside a w-bit word.
struct FixedPoint {
  unsigned width = 16;
  unsigned frac_bits = 8;

  double decode(Word w) const;
  // Rounds half to even, wraps modulo 2^width.
  Word encode(double x) const;
};

class DiscreteMap {
 public:
  enum class Kind { Permutation, Affine, Quantized, Rule };
  using Rule = std::function<StateVector(const StateVector&)>;
  using RealRule = std::function<std::vector<double>(const std::vector<double>&)>;

  static DiscreteMap identity(std::size_t dim, unsigned width);
  // x_i -> (a_i * x_i + b_i) mod 2^w, component-wise.
  static DiscreteMap affine(unsigned width, std::vector<Word> multipliers, std::vector<Word> offsets);
  // table[pack(x)] = pack(F(x)); must be a bijection on the 2^(K*w) states.
  static DiscreteMap permutation(std::size_t dim, unsigned width, std::vector<std::uint64_t> table);
  // Real-valued rule applied to decoded fixed-point components, re-encoded
  // with round-half-to-even.
  static DiscreteMap quantized(std::size_t dim, FixedPoint fp, RealRule rule);
  static DiscreteMap from_rule(std::size_t dim, unsigned width, Rule rule);

  StateVector operator()(const StateVector& state) const;

  std::size_t dimension() const { return dim_; }
  unsigned width() const { return width_; }
  Kind kind() const { return kind_; }
  const std::optional<FixedPoint>& fixed_point() const { return fixed_point_; }
  // Only set for Permutation maps.
  const std::vector<std::uint64_t>* table() const { return table_ ? &*table_ : nullptr; }
  const char* rounding_rule() const { return kind_ == Kind::Quantized ? "round-half-to-even" : "exact"; }

  std::uint64_t state_count() const;
  // Full function table over all states; requires K*w <= 24.
  std::vector<std::uint64_t> tabulate() const;

 private:
  DiscreteMap(Kind kind, std::size_t dim, unsigned width, Rule rule)
      : kind_(kind), dim_(dim), width_(width), rule_(std::move(rule)) {}

  Kind kind_;
  std::size_t dim_;
  unsigned width_;
  Rule rule_;
  std::optional<std::vector<std::uint64_t>> table_;
  std::optional<FixedPoint> fixed_point_;
};

StateVector step_map(const DiscreteMap& map, const StateVector& state);
Trajectory generate_trajectory(const DiscreteMap& map, const StateVector& init, std::size_t steps);

// x(t) = G(x(t-1), ..., x(t-N)). History is passed oldest first, most recent last.
class TimeSeriesMap {
 public:
  using Rule = std::function<Word(std::span<const Word>)>;

  TimeSeriesMap(std::size_t order, unsigned width, Rule rule);

  static TimeSeriesMap repeat_last(unsigned width);
  static TimeSeriesMap xor_last_two(unsigned width);
  // Sum of the N history values mod 2^w.
  static TimeSeriesMap modular_sum(std::size_t order, unsigned width);

  std::size_t order() const { return order_; }
  unsigned width() const { return width_; }
  Word operator()(std::span<const Word> history) const;

 private:
  std::size_t order_;
  unsigned width_;
  Rule rule_;
};

Word step_timeseries(const TimeSeriesMap& ts, std::span<const Word> history);

// Lifted state is (x(t), x(t-1), ..., x(t-N+1)); component 0 carries the
// series.
DiscreteMap lift_timeseries(const TimeSeriesMap& ts);

// Runs the series forward from a seed history (oldest first) and returns
// the `steps` newly produced values.
std::vector<Word> run_timeseries(const TimeSeriesMap& ts, std::vector<Word> seed, std::size_t steps);

// Word-level invertible change of coordinates.
class CoordinateTransform {
 public:
  using Rule = std::function<StateVector(const StateVector&)>;

  static CoordinateTransform identity(std::size_t dim, unsigned width);
  // Exchanges components i and j.
  static CoordinateTransform swap(std::size_t dim, unsigned width, std::size_t i, std::size_t j);
  // Throws InvalidInput if the table is not a bijection.
  static CoordinateTransform table(std::size_t dim, unsigned width, std::vector<std::uint64_t> forward);
  // Invertibility is verified exhaustively when the state space is small
  // (K*w <= 20); larger domains are trusted.
  static CoordinateTransform from_rules(std::size_t dim, unsigned width, Rule forward, Rule inverse);

  StateVector forward(const StateVector& x) const { return forward_(x); }
  StateVector inverse(const StateVector& xi) const { return inverse_(xi); }
  std::size_t dimension() const { return dim_; }
  unsigned width() const { return width_; }
  bool is_table() const { return is_table_; }

 private:
  CoordinateTransform(std::size_t dim, unsigned width, Rule fwd, Rule inv, bool is_table)
      : dim_(dim), width_(width), forward_(std::move(fwd)), inverse_(std::move(inv)), is_table_(is_table) {}

  std::size_t dim_;
  unsigned width_;
  Rule forward_;
  Rule inverse_;
  bool is_table_;
};

// Phi = Xi o F o Xi^-1. Tabulated when F is a permutation table and the state
// space is small.
DiscreteMap conjugate_map(const DiscreteMap& map, const CoordinateTransform& xf);

// Real-valued transform used for canonical-form checks on decoded
// trajectories. A positive period marks a circular coordinate; its
// increments are wrapped into (-period/2, period/2].
struct RealTransform {
  using Rule = std::function<std::vector<double>(const std::vector<double>&)>;

  std::size_t dim = 0;
  Rule forward;
  Rule inverse;
  std::vector<double> periods;

  static RealTransform identity(std::size_t dim);
  // (x, y) -> (r, phi / omega), phi in (-pi, pi]. Period of the angle
  // coordinate is 2*pi/omega.
  static RealTransform polar(double omega);
};

struct CoordinateReport {
  bool constant = false;
  double drift = 0.0;  // max |xi_i(t+1) - xi_i(t)|
};

struct CanonicalReport {
  std::vector<CoordinateReport> coordinates;
  double time_increment = 0.0;  // first increment of the last coordinate
  double increment_spread = 0.0;  // max deviation of later increments from it
  bool time_like_uniform = false;

  std::size_t invariant_count() const;
};

CanonicalReport canonical_check(const RealTransform& xf, std::span<const std::vector<double>> trajectory,
                                double tolerance = 1e-9);
// Word trajectories: increments computed modulo 2^w, tolerance 0.
CanonicalReport canonical_check(const CoordinateTransform& xf, const Trajectory& trajectory);

// Decodes each component through the map's fixed-point format.
std::vector<std::vector<double>> decode_trajectory(const FixedPoint& fp, const Trajectory& trajectory);

struct NoiseChannel {
  double q = 1.0;  // probability a bit is left untouched, in [1/2, 1]

  void validate() const;
};

// Flips each of the low `width` bits independently with probability 1 - q.
Word apply_noise(const NoiseChannel& ch, Word word, unsigned width, Rng& rng);

}  // namespace selfprop
