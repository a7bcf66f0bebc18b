#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace selfprop {

// Seeded random stream. The engine is std::mt19937_64, whose output sequence
// is fixed by the standard; all derived draws (doubles, bounded integers,
// Bernoulli trials) are computed here from raw 64-bit words instead of the
// implementation-defined <random> distributions, so results are identical
// across standard libraries.
//
// Independent streams are obtained by label: Rng::stream(seed, "noise") and
// Rng::stream(seed, "extraction") never share state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), origin_(seed) {}

  static Rng stream(std::uint64_t seed, std::string_view label) {
    return Rng(derive_seed(seed, label));
  }

  // Child stream keyed on this stream's seed; does not advance this one.
  Rng split(std::string_view label) const { return Rng(derive_seed(origin_, label)); }

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t origin() const { return origin_; }

  static std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
    // FNV-1a over the label, folded into the seed through splitmix64.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    std::uint64_t z = seed ^ h;
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t origin_;
};

}  // namespace selfprop
