#include "selfprop/dynsys.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "selfprop/error.hpp"

namespace selfprop {

namespace {

void check_dim(const StateVector& state, std::size_t dim, const char* what) {
  if (state.size() != dim) {
    throw InvalidInput(std::string(what) + ": expected dimension " + std::to_string(dim) + ", got " +
                       std::to_string(state.size()));
  }
}

void check_packable(std::size_t dim, unsigned width, unsigned limit) {
  if (dim == 0) throw InvalidInput("dimension must be at least 1");
  if (dim * width > limit) {
    throw InvalidInput("state space of " + std::to_string(dim * width) + " bits exceeds the " +
                       std::to_string(limit) + "-bit table limit");
  }
}

std::vector<std::uint64_t> invert_table(const std::vector<std::uint64_t>& table, const char* what) {
  std::vector<std::uint64_t> inverse(table.size(), UINT64_MAX);
  for (std::uint64_t x = 0; x < table.size(); ++x) {
    const std::uint64_t y = table[x];
    if (y >= table.size() || inverse[y] != UINT64_MAX) {
      throw InvalidInput(std::string(what) + " is not a bijection");
    }
    inverse[y] = x;
  }
  return inverse;
}

}  // namespace

void check_width(unsigned width) {
  if (width == 0 || width > kMaxWordWidth) {
    throw InvalidInput("word width must be in [1, 32], got " + std::to_string(width));
  }
}

std::uint64_t pack(const StateVector& state, unsigned width) {
  if (state.size() * width > 64) throw InvalidInput("state does not fit in 64 bits");
  std::uint64_t packed = 0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    packed |= static_cast<std::uint64_t>(state[i] & word_mask(width)) << (i * width);
  }
  return packed;
}

StateVector unpack(std::uint64_t packed, std::size_t dim, unsigned width) {
  StateVector state(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    state[i] = static_cast<Word>((packed >> (i * width)) & word_mask(width));
  }
  return state;
}

double FixedPoint::decode(Word w) const {
  const std::uint64_t mask = word_mask(width);
  std::int64_t v = static_cast<std::int64_t>(w & mask);
  if (v & (std::int64_t{1} << (width - 1))) v -= static_cast<std::int64_t>(mask) + 1;
  return std::ldexp(static_cast<double>(v), -static_cast<int>(frac_bits));
}

Word FixedPoint::encode(double x) const {
  // nearbyint honours the default FE_TONEAREST mode: ties go to even.
  const double scaled = std::nearbyint(std::ldexp(x, static_cast<int>(frac_bits)));
  const auto v = static_cast<std::int64_t>(scaled);
  return static_cast<Word>(static_cast<std::uint64_t>(v) & word_mask(width));
}

DiscreteMap DiscreteMap::identity(std::size_t dim, unsigned width) {
  check_width(width);
  if (dim == 0) throw InvalidInput("dimension must be at least 1");
  std::vector<Word> ones(dim, 1), zeros(dim, 0);
  return affine(width, std::move(ones), std::move(zeros));
}

DiscreteMap DiscreteMap::affine(unsigned width, std::vector<Word> multipliers, std::vector<Word> offsets) {
  check_width(width);
  if (multipliers.empty() || multipliers.size() != offsets.size()) {
    throw InvalidInput("affine map needs one multiplier and one offset per component");
  }
  const std::size_t dim = multipliers.size();
  const Word mask = word_mask(width);
  Rule rule = [multipliers = std::move(multipliers), offsets = std::move(offsets), mask](const StateVector& x) {
    StateVector y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const std::uint64_t v = static_cast<std::uint64_t>(multipliers[i]) * x[i] + offsets[i];
      y[i] = static_cast<Word>(v & mask);
    }
    return y;
  };
  return DiscreteMap(Kind::Affine, dim, width, std::move(rule));
}

DiscreteMap DiscreteMap::permutation(std::size_t dim, unsigned width, std::vector<std::uint64_t> table) {
  check_width(width);
  check_packable(dim, width, 24);
  const std::uint64_t n = std::uint64_t{1} << (dim * width);
  if (table.size() != n) {
    throw InvalidInput("permutation table needs " + std::to_string(n) + " entries, got " +
                       std::to_string(table.size()));
  }
  invert_table(table, "permutation table");
  auto shared = std::make_shared<const std::vector<std::uint64_t>>(table);
  Rule rule = [shared, dim, width](const StateVector& x) { return unpack((*shared)[pack(x, width)], dim, width); };
  DiscreteMap m(Kind::Permutation, dim, width, std::move(rule));
  m.table_ = std::move(table);
  return m;
}

DiscreteMap DiscreteMap::quantized(std::size_t dim, FixedPoint fp, RealRule real_rule) {
  check_width(fp.width);
  if (dim == 0) throw InvalidInput("dimension must be at least 1");
  if (fp.frac_bits >= fp.width) throw InvalidInput("fixed point needs at least one integer bit");
  Rule rule = [fp, real_rule = std::move(real_rule)](const StateVector& x) {
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = fp.decode(x[i]);
    const std::vector<double> out = real_rule(r);
    if (out.size() != x.size()) throw InvalidInput("real rule changed the dimension");
    StateVector y(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) y[i] = fp.encode(out[i]);
    return y;
  };
  DiscreteMap m(Kind::Quantized, dim, fp.width, std::move(rule));
  m.fixed_point_ = fp;
  return m;
}

DiscreteMap DiscreteMap::from_rule(std::size_t dim, unsigned width, Rule rule) {
  check_width(width);
  if (dim == 0) throw InvalidInput("dimension must be at least 1");
  return DiscreteMap(Kind::Rule, dim, width, std::move(rule));
}

StateVector DiscreteMap::operator()(const StateVector& state) const {
  check_dim(state, dim_, "step_map");
  StateVector masked = state;
  for (Word& w : masked) w &= word_mask(width_);
  return rule_(masked);
}

std::uint64_t DiscreteMap::state_count() const {
  if (dim_ * width_ >= 64) return UINT64_MAX;
  return std::uint64_t{1} << (dim_ * width_);
}

std::vector<std::uint64_t> DiscreteMap::tabulate() const {
  if (table_) return *table_;
  check_packable(dim_, width_, 24);
  const std::uint64_t n = state_count();
  std::vector<std::uint64_t> out(n);
  for (std::uint64_t x = 0; x < n; ++x) out[x] = pack(rule_(unpack(x, dim_, width_)), width_);
  return out;
}

StateVector step_map(const DiscreteMap& map, const StateVector& state) { return map(state); }

Trajectory generate_trajectory(const DiscreteMap& map, const StateVector& init, std::size_t steps) {
  check_dim(init, map.dimension(), "generate_trajectory");
  Trajectory traj;
  traj.states.reserve(steps + 1);
  traj.states.push_back(init);
  for (std::size_t i = 0; i < steps; ++i) traj.states.push_back(map(traj.states.back()));
  return traj;
}

// --- time series ---------------------------------------------------------

TimeSeriesMap::TimeSeriesMap(std::size_t order, unsigned width, Rule rule)
    : order_(order), width_(width), rule_(std::move(rule)) {
  check_width(width);
  if (order == 0) throw InvalidInput("time-series order must be at least 1");
}

TimeSeriesMap TimeSeriesMap::repeat_last(unsigned width) {
  return TimeSeriesMap(1, width, [](std::span<const Word> h) { return h.back(); });
}

TimeSeriesMap TimeSeriesMap::xor_last_two(unsigned width) {
  return TimeSeriesMap(2, width, [](std::span<const Word> h) { return h[0] ^ h[1]; });
}

TimeSeriesMap TimeSeriesMap::modular_sum(std::size_t order, unsigned width) {
  const Word mask = word_mask(width);
  return TimeSeriesMap(order, width, [mask](std::span<const Word> h) {
    std::uint64_t s = 0;
    for (Word w : h) s += w;
    return static_cast<Word>(s & mask);
  });
}

Word TimeSeriesMap::operator()(std::span<const Word> history) const {
  if (history.size() != order_) {
    throw InvalidInput("time-series history needs " + std::to_string(order_) + " values, got " +
                       std::to_string(history.size()));
  }
  std::vector<Word> masked(history.begin(), history.end());
  for (Word& w : masked) w &= word_mask(width_);
  return rule_(masked) & word_mask(width_);
}

Word step_timeseries(const TimeSeriesMap& ts, std::span<const Word> history) { return ts(history); }

DiscreteMap lift_timeseries(const TimeSeriesMap& ts) {
  const std::size_t n = ts.order();
  return DiscreteMap::from_rule(n, ts.width(), [ts, n](const StateVector& s) {
    // s = (x(t), ..., x(t-N+1)); the rule wants oldest first.
    std::vector<Word> history(s.rbegin(), s.rend());
    StateVector next(n);
    next[0] = ts(history);
    for (std::size_t i = 1; i < n; ++i) next[i] = s[i - 1];
    return next;
  });
}

std::vector<Word> run_timeseries(const TimeSeriesMap& ts, std::vector<Word> seed, std::size_t steps) {
  if (seed.size() != ts.order()) throw InvalidInput("seed history length must equal the series order");
  std::vector<Word> out;
  out.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const Word x = ts(seed);
    out.push_back(x);
    seed.erase(seed.begin());
    seed.push_back(x);
  }
  return out;
}

// --- coordinate transforms -------------------------------------------------

CoordinateTransform CoordinateTransform::identity(std::size_t dim, unsigned width) {
  check_width(width);
  auto id = [](const StateVector& x) { return x; };
  return CoordinateTransform(dim, width, id, id, false);
}

CoordinateTransform CoordinateTransform::swap(std::size_t dim, unsigned width, std::size_t i, std::size_t j) {
  check_width(width);
  if (i >= dim || j >= dim) throw InvalidInput("swap index out of range");
  auto sw = [i, j](const StateVector& x) {
    StateVector y = x;
    std::swap(y[i], y[j]);
    return y;
  };
  return CoordinateTransform(dim, width, sw, sw, false);
}

CoordinateTransform CoordinateTransform::table(std::size_t dim, unsigned width, std::vector<std::uint64_t> forward) {
  check_width(width);
  check_packable(dim, width, 24);
  if (forward.size() != (std::uint64_t{1} << (dim * width))) throw InvalidInput("transform table has wrong size");
  auto fwd = std::make_shared<const std::vector<std::uint64_t>>(std::move(forward));
  auto inv = std::make_shared<const std::vector<std::uint64_t>>(invert_table(*fwd, "coordinate transform"));
  return CoordinateTransform(
      dim, width, [fwd, dim, width](const StateVector& x) { return unpack((*fwd)[pack(x, width)], dim, width); },
      [inv, dim, width](const StateVector& x) { return unpack((*inv)[pack(x, width)], dim, width); }, true);
}

CoordinateTransform CoordinateTransform::from_rules(std::size_t dim, unsigned width, Rule forward, Rule inverse) {
  check_width(width);
  if (dim == 0) throw InvalidInput("dimension must be at least 1");
  if (dim * width <= 20) {
    const std::uint64_t n = std::uint64_t{1} << (dim * width);
    for (std::uint64_t x = 0; x < n; ++x) {
      const StateVector s = unpack(x, dim, width);
      if (inverse(forward(s)) != s) throw InvalidInput("coordinate transform is not invertible");
    }
  }
  return CoordinateTransform(dim, width, std::move(forward), std::move(inverse), false);
}

DiscreteMap conjugate_map(const DiscreteMap& map, const CoordinateTransform& xf) {
  if (map.dimension() != xf.dimension() || map.width() != xf.width()) {
    throw InvalidInput("conjugate_map: transform and map disagree on dimension or width");
  }
  const std::size_t dim = map.dimension();
  const unsigned width = map.width();
  if (map.kind() == DiscreteMap::Kind::Permutation) {
    const auto& f = *map.table();
    std::vector<std::uint64_t> phi(f.size());
    for (std::uint64_t x = 0; x < f.size(); ++x) {
      const StateVector s = unpack(x, dim, width);
      const StateVector xi = xf.forward(s);
      const StateVector fx = unpack(f[x], dim, width);
      phi[pack(xi, width)] = pack(xf.forward(fx), width);
    }
    return DiscreteMap::permutation(dim, width, std::move(phi));
  }
  return DiscreteMap::from_rule(dim, width, [map, xf](const StateVector& xi) { return xf.forward(map(xf.inverse(xi))); });
}

// --- canonical form --------------------------------------------------------

RealTransform RealTransform::identity(std::size_t dim) {
  auto id = [](const std::vector<double>& x) { return x; };
  return RealTransform{dim, id, id, std::vector<double>(dim, 0.0)};
}

RealTransform RealTransform::polar(double omega) {
  if (!(omega > 0.0)) throw InvalidInput("polar transform needs a positive angular step");
  RealTransform t;
  t.dim = 2;
  t.forward = [omega](const std::vector<double>& x) {
    return std::vector<double>{std::hypot(x[0], x[1]), std::atan2(x[1], x[0]) / omega};
  };
  t.inverse = [omega](const std::vector<double>& xi) {
    const double phi = xi[1] * omega;
    return std::vector<double>{xi[0] * std::cos(phi), xi[0] * std::sin(phi)};
  };
  t.periods = {0.0, 2.0 * std::numbers::pi / omega};
  return t;
}

std::size_t CanonicalReport::invariant_count() const {
  return static_cast<std::size_t>(
      std::count_if(coordinates.begin(), coordinates.end(), [](const CoordinateReport& c) { return c.constant; }));
}

namespace {

double wrap(double d, double period) {
  if (period <= 0.0) return d;
  d = std::fmod(d, period);
  if (d > period / 2) d -= period;
  if (d <= -period / 2) d += period;
  return d;
}

}  // namespace

CanonicalReport canonical_check(const RealTransform& xf, std::span<const std::vector<double>> trajectory,
                                double tolerance) {
  if (trajectory.size() < 3) throw InvalidInput("canonical_check needs a trajectory of at least 3 states");
  std::vector<std::vector<double>> xi;
  xi.reserve(trajectory.size());
  for (const auto& x : trajectory) {
    if (x.size() != xf.dim) throw InvalidInput("canonical_check: state dimension mismatch");
    xi.push_back(xf.forward(x));
  }
  CanonicalReport report;
  report.coordinates.resize(xf.dim);
  for (std::size_t i = 0; i < xf.dim; ++i) {
    const double period = i < xf.periods.size() ? xf.periods[i] : 0.0;
    double drift = 0.0;
    for (std::size_t t = 1; t < xi.size(); ++t) drift = std::max(drift, std::abs(wrap(xi[t][i] - xi[t - 1][i], period)));
    report.coordinates[i] = {drift <= tolerance, drift};
  }
  const std::size_t last = xf.dim - 1;
  const double period = last < xf.periods.size() ? xf.periods[last] : 0.0;
  report.time_increment = wrap(xi[1][last] - xi[0][last], period);
  for (std::size_t t = 2; t < xi.size(); ++t) {
    const double inc = wrap(xi[t][last] - xi[t - 1][last], period);
    report.increment_spread = std::max(report.increment_spread, std::abs(inc - report.time_increment));
  }
  report.time_like_uniform = report.increment_spread <= tolerance;
  return report;
}

CanonicalReport canonical_check(const CoordinateTransform& xf, const Trajectory& trajectory) {
  if (trajectory.size() < 3) throw InvalidInput("canonical_check needs a trajectory of at least 3 states");
  const Word mask = word_mask(xf.width());
  const std::size_t dim = xf.dimension();
  std::vector<StateVector> xi;
  xi.reserve(trajectory.size());
  for (const auto& x : trajectory.states) {
    check_dim(x, dim, "canonical_check");
    xi.push_back(xf.forward(x));
  }
  CanonicalReport report;
  report.coordinates.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    Word drift = 0;
    for (std::size_t t = 1; t < xi.size(); ++t) {
      const Word d = (xi[t][i] - xi[t - 1][i]) & mask;
      drift = std::max(drift, std::min<Word>(d, (0u - d) & mask));
    }
    report.coordinates[i] = {drift == 0, static_cast<double>(drift)};
  }
  const std::size_t last = dim - 1;
  const Word first = (xi[1][last] - xi[0][last]) & mask;
  report.time_increment = first;
  bool uniform = true;
  for (std::size_t t = 2; t < xi.size(); ++t) {
    if (((xi[t][last] - xi[t - 1][last]) & mask) != first) uniform = false;
  }
  report.increment_spread = uniform ? 0.0 : 1.0;
  report.time_like_uniform = uniform;
  return report;
}

std::vector<std::vector<double>> decode_trajectory(const FixedPoint& fp, const Trajectory& trajectory) {
  std::vector<std::vector<double>> out;
  out.reserve(trajectory.size());
  for (const auto& s : trajectory.states) {
    std::vector<double> r(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) r[i] = fp.decode(s[i]);
    out.push_back(std::move(r));
  }
  return out;
}

// --- noise -----------------------------------------------------------------

void NoiseChannel::validate() const {
  if (!(q >= 0.5 && q <= 1.0)) throw InvalidInput("noise Q must lie in [1/2, 1], got " + std::to_string(q));
}

Word apply_noise(const NoiseChannel& ch, Word word, unsigned width, Rng& rng) {
  ch.validate();
  if (ch.q == 1.0) return word;
  const double flip = 1.0 - ch.q;
  for (unsigned b = 0; b < width; ++b) {
    if (rng.bernoulli(flip)) word ^= Word{1} << b;
  }
  return word;
}

}  // namespace selfprop
