// Acceptance gate: run every numbered verification criterion and print one
// pass/fail line each. Exits nonzero if any criterion fails.

#include "verify.hpp"

#include <cstdio>
#include <cstdlib>

int main() {
  std::uint64_t seed = 12345;
  if (const char* env = std::getenv("QSIM_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') seed = v;
  }
  const auto report = qsim::app::run_verification(seed);
  std::fputs(qsim::app::format_verification(report).c_str(), stdout);
  return report.all_passed() ? 0 : 1;
}
