#include <doctest.h>

#include <cmath>
#include <numeric>

#include "selfprop/dynsys.hpp"
#include "selfprop/error.hpp"

using namespace selfprop;

namespace {

std::vector<std::uint64_t> shuffled(std::uint64_t n, Rng& rng) {
  std::vector<std::uint64_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  for (std::uint64_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
  return p;
}

}  // namespace

TEST_CASE("pack and unpack are inverse") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const unsigned w = 1 + static_cast<unsigned>(rng.below(16));
    const std::size_t k = 1 + rng.below(64 / w);
    StateVector s(k);
    for (Word& x : s) x = static_cast<Word>(rng.next()) & word_mask(w);
    CHECK(unpack(pack(s, w), k, w) == s);
  }
  CHECK(pack({1, 2}, 4) == 0x21);
  CHECK_THROWS_AS(pack(StateVector(3), 32), InvalidInput);
}

TEST_CASE("word width bounds") {
  CHECK_THROWS_AS(check_width(0), InvalidInput);
  CHECK_THROWS_AS(check_width(33), InvalidInput);
  CHECK_NOTHROW(check_width(32));
  CHECK(word_mask(32) == 0xffffffffu);
  CHECK(word_mask(3) == 7u);
}

TEST_CASE("fixed point rounds half to even and wraps") {
  const FixedPoint fp{8, 2};  // quarter steps
  CHECK(fp.encode(0.125) == 0);    // 0.5 ulp -> even 0
  CHECK(fp.encode(0.375) == 2);    // 1.5 ulp -> even 2
  CHECK(fp.encode(0.625) == 2);    // 2.5 ulp -> even 2
  CHECK(fp.encode(-0.25) == 0xff);
  CHECK(fp.decode(0xff) == -0.25);
  CHECK(fp.decode(fp.encode(1.75)) == 1.75);
  CHECK(fp.encode(64.0) == 0);  // 256 ulp wraps to zero
}

TEST_CASE("permutation maps validate bijectivity") {
  CHECK_THROWS_AS(DiscreteMap::permutation(1, 2, {0, 1, 1, 3}), InvalidInput);
  CHECK_THROWS_AS(DiscreteMap::permutation(1, 2, {0, 1, 2}), InvalidInput);
  CHECK_THROWS_AS(DiscreteMap::permutation(1, 25, {}), InvalidInput);
  const DiscreteMap m = DiscreteMap::permutation(1, 2, {1, 2, 3, 0});
  CHECK(m({3}) == StateVector{0});
  CHECK(m.kind() == DiscreteMap::Kind::Permutation);
  CHECK(std::string(m.rounding_rule()) == "exact");
  CHECK_THROWS_AS(m({1, 1}), InvalidInput);
}

TEST_CASE("affine map and trajectory") {
  const DiscreteMap m = DiscreteMap::affine(8, {3}, {7});
  const Trajectory t = generate_trajectory(m, {1}, 3);
  REQUIRE(t.size() == 4);
  CHECK(t[1][0] == 10);
  CHECK(t[2][0] == 37);
  CHECK(t[3][0] == (3 * 37 + 7) % 256);
  CHECK(step_map(m, {255}) == StateVector{(3 * 255 + 7) % 256});
  CHECK(m.tabulate().size() == 256);
}

TEST_CASE("quantized map is a deterministic function of the state") {
  const FixedPoint fp{16, 8};
  const DiscreteMap m = DiscreteMap::quantized(2, fp, [](const std::vector<double>& x) {
    return std::vector<double>{0.5 * x[0] + x[1], x[1] * 0.999};
  });
  const StateVector s{fp.encode(3.0), fp.encode(-1.5)};
  CHECK(m(s) == m(s));
  CHECK(fp.decode(m(s)[0]) == doctest::Approx(0.0));
  CHECK(std::string(m.rounding_rule()) == "round-half-to-even");
}

TEST_CASE("time-series lifting reproduces the scalar series") {
  const TimeSeriesMap ts = TimeSeriesMap::modular_sum(3, 8);
  const std::vector<Word> seed{250, 9, 77};
  const std::vector<Word> direct = run_timeseries(ts, seed, 100);
  const Trajectory lifted = generate_trajectory(lift_timeseries(ts), {77, 9, 250}, 100);
  for (std::size_t t = 0; t < 100; ++t) CHECK(lifted[t + 1][0] == direct[t]);
  CHECK(direct[0] == (250 + 9 + 77) % 256);
  CHECK_THROWS_AS(run_timeseries(ts, {1, 2}, 5), InvalidInput);
}

TEST_CASE("xor and repeat series") {
  CHECK(run_timeseries(TimeSeriesMap::xor_last_two(8), {0x0f, 0xf0}, 3) == std::vector<Word>{0xff, 0x0f, 0xf0});
  CHECK(run_timeseries(TimeSeriesMap::repeat_last(4), {9}, 2) == std::vector<Word>{9, 9});
}

TEST_CASE("conjugation property on random permutation tables") {
  Rng rng(12);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t dim = 1 + rng.below(3);
    const unsigned w = 1 + static_cast<unsigned>(rng.below(3));
    const std::uint64_t n = std::uint64_t{1} << (dim * w);
    const DiscreteMap f = DiscreteMap::permutation(dim, w, shuffled(n, rng));
    const CoordinateTransform xi = CoordinateTransform::table(dim, w, shuffled(n, rng));
    const DiscreteMap phi = conjugate_map(f, xi);
    for (std::uint64_t s = 0; s < n; ++s) {
      const StateVector x = unpack(s, dim, w);
      CHECK(xi.forward(f(x)) == phi(xi.forward(x)));
      CHECK(xi.inverse(xi.forward(x)) == x);
    }
  }
}

TEST_CASE("identity transform leaves the map unchanged") {
  const DiscreteMap f = DiscreteMap::affine(4, {5, 3}, {1, 2});
  const DiscreteMap phi = conjugate_map(f, CoordinateTransform::identity(2, 4));
  for (std::uint64_t s = 0; s < 256; ++s) CHECK(phi(unpack(s, 2, 4)) == f(unpack(s, 2, 4)));
}

TEST_CASE("transforms reject non-bijections") {
  CHECK_THROWS_AS(CoordinateTransform::table(1, 2, {0, 0, 1, 2}), InvalidInput);
  CHECK_THROWS_AS(CoordinateTransform::from_rules(
                      1, 3, [](const StateVector&) { return StateVector{0}; },
                      [](const StateVector& x) { return x; }),
                  InvalidInput);
  CHECK_THROWS_AS(conjugate_map(DiscreteMap::identity(2, 4), CoordinateTransform::identity(1, 4)), InvalidInput);
}

TEST_CASE("canonical check on a rotation") {
  const double omega = 0.3;
  std::vector<std::vector<double>> traj;
  for (int t = 0; t <= 1000; ++t) traj.push_back({2.0 * std::cos(0.1 + omega * t), 2.0 * std::sin(0.1 + omega * t)});
  const CanonicalReport r = canonical_check(RealTransform::polar(omega), traj);
  CHECK(r.coordinates[0].constant);
  CHECK(r.time_like_uniform);
  CHECK(r.time_increment == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.invariant_count() == 1);

  // The identity frame shows no invariant at all.
  const CanonicalReport raw = canonical_check(RealTransform::identity(2), traj);
  CHECK(raw.invariant_count() == 0);
  CHECK_FALSE(raw.time_like_uniform);
  CHECK_THROWS_AS(canonical_check(RealTransform::polar(omega), std::span(traj).first(2)), InvalidInput);
}

TEST_CASE("canonical check on words: counter with a constant register") {
  // (c, t) -> (c, t + 1) mod 16
  const DiscreteMap f = DiscreteMap::affine(4, {1, 1}, {0, 1});
  const Trajectory traj = generate_trajectory(f, {5, 14}, 40);
  const CanonicalReport r = canonical_check(CoordinateTransform::identity(2, 4), traj);
  CHECK(r.coordinates[0].constant);
  CHECK_FALSE(r.coordinates[1].constant);
  CHECK(r.time_like_uniform);
  CHECK(r.time_increment == 1.0);

  // Swapped coordinates put the counter first, so the last one is constant
  // rather than time-like with a nonzero increment.
  const CanonicalReport s = canonical_check(CoordinateTransform::swap(2, 4, 0, 1), traj);
  CHECK(s.coordinates[1].constant);
  CHECK(s.time_increment == 0.0);
}

TEST_CASE("noise channel flips bits at rate 1-q") {
  Rng rng(13);
  const NoiseChannel ch{0.9};
  const int n = 20000;
  std::size_t flips = 0;
  for (int i = 0; i < n; ++i) flips += static_cast<std::size_t>(__builtin_popcount(apply_noise(ch, 0, 8, rng)));
  const double rate = static_cast<double>(flips) / (8.0 * n);
  CHECK(std::abs(rate - 0.1) < 4 * std::sqrt(0.09 / (8.0 * n)));
  CHECK(apply_noise(NoiseChannel{1.0}, 0xab, 8, rng) == 0xab);
  CHECK_THROWS_AS(apply_noise(NoiseChannel{0.4}, 0, 8, rng), InvalidInput);
  CHECK_THROWS_AS(NoiseChannel{1.1}.validate(), InvalidInput);
}
