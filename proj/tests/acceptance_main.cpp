// Runs every acceptance criterion and prints one line per criterion.
// Exit status is nonzero if any criterion fails.

#include <cstdlib>
#include <iostream>
#include <string>

#include "selfprop/acceptance.hpp"

int main(int argc, char** argv) {
  selfprop::acceptance::Options opt;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) opt.only.push_back(std::atoi(argv[++i]));
  }
  const auto results = selfprop::acceptance::run(opt, &std::cout);
  std::size_t passed = 0;
  for (const auto& r : results) passed += r.passed;
  std::cout << passed << "/" << results.size() << " criteria passed\n";
  return selfprop::acceptance::all_passed(results) ? 0 : 1;
}
