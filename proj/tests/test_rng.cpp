#include <doctest.h>

#include <cmath>
#include <set>

#include "selfprop/rng.hpp"

using selfprop::Rng;

TEST_CASE("same seed, same stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("mt19937_64 reference output") {
  // The 10000th output of a default-seeded mt19937_64 is fixed by the standard.
  Rng r(5489);
  std::uint64_t x = 0;
  for (int i = 0; i < 10000; ++i) x = r.next();
  CHECK(x == 9981545732273789042ULL);
}

TEST_CASE("labelled streams differ and are reproducible") {
  Rng a = Rng::stream(7, "noise");
  Rng b = Rng::stream(7, "extraction");
  Rng c = Rng::stream(7, "noise");
  CHECK(a.next() != b.next());
  CHECK(Rng::stream(7, "noise").next() == c.next());
  CHECK(Rng::derive_seed(7, "x") != Rng::derive_seed(8, "x"));
  Rng parent(9);
  const std::uint64_t before = Rng(9).next();
  Rng child = parent.split("child");
  CHECK(parent.next() == before);
  CHECK(child.origin() == Rng::derive_seed(9, "child"));
}

TEST_CASE("bounded draws stay in range and cover it") {
  Rng r(1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = r.below(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("bernoulli frequency") {
  Rng r(3);
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += r.bernoulli(0.3);
  CHECK(std::abs(hits / double(n) - 0.3) < 4 * std::sqrt(0.21 / n));
  CHECK_FALSE(r.bernoulli(0.0));
  CHECK(r.bernoulli(1.0));
}
