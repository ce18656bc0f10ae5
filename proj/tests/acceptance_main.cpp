#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>

#include "wavecollapse/acceptance.hpp"

// Runs every acceptance criterion and prints one [PASS]/[FAIL] line each.
// Optional argv: master seed, then thread count.
int main(int argc, char** argv) {
  wavecollapse::AcceptanceOptions opts;
  try {
    if (argc > 1) opts.seed = std::stoull(argv[1]);
    if (argc > 2) opts.threads = static_cast<unsigned>(std::stoul(argv[2]));
  } catch (const std::exception&) {
    std::cerr << "usage: acceptance [seed [threads]]\n";
    return 2;
  }
  int failed = 0;
  opts.on_result = [&failed](const wavecollapse::CriterionResult& r) {
    std::cout << wavecollapse::summary_line(r) << std::endl;
    if (!r.passed()) ++failed;
  };
  try {
    wavecollapse::run_acceptance(opts);
  } catch (const std::exception& e) {
    std::cout << "[FAIL] aborted: " << e.what() << std::endl;
    return 1;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
