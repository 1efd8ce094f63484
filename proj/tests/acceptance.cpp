// Acceptance gate: runs the named criteria (all when none are given) and
// prints one PASS/FAIL line per criterion. Exit status 0 iff all passed.
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "thermoform/cli/verify.hpp"

int main(int argc, char** argv) {
  using namespace thermoform::cli;
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) {
    try {
      ids.push_back(std::stoi(argv[i]));
    } catch (const std::exception&) {
      std::cerr << "usage: thermoform_acceptance [criterion id...]\n";
      return 2;
    }
  }
  try {
    const VerifyReport report = run_verify({}, ids);
    for (const auto& c : report.checks) std::cout << format_check(c) << '\n';
    std::cout << (report.passed() ? "acceptance: PASS" : "acceptance: FAIL") << " (" << report.checks.size()
              << " criteria)\n";
    return report.passed() ? EXIT_SUCCESS : EXIT_FAILURE;
  } catch (const std::exception& e) {
    std::cerr << "acceptance: error: " << e.what() << '\n';
    return 2;
  }
}
