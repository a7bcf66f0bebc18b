#pragma once

// The built-in verification suite: one check per acceptance criterion,
// each reporting its measured values.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace selfprop::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string measured;
};

struct Options {
  std::uint64_t seed = 20251015;
  // Negates the analytic expected gain used by the energy-curve check.
  bool flip_gain_sign = false;
  // Criterion ids to run; empty runs all.
  std::vector<int> only;
};

inline constexpr int kCriterionCount = 15;

// Runs the selected criteria in id order. When `progress` is given, each
// result line is written as soon as it is known.
std::vector<CriterionResult> run(const Options& opt, std::ostream* progress = nullptr);

// "[PASS] 01 name: measured"
std::string format_line(const CriterionResult& r);
std::string format_report(const std::vector<CriterionResult>& results);
bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace selfprop::acceptance
