// Acceptance harness: runs every verification area at its pinned tolerance
// and prints one pass/fail line per criterion. Exit code 0 only when every
// criterion passes.

#include <cstdio>

#include "gqmech/verify.hpp"

int main() {
  gqm::VerifyOptions options;  // fixed default seed
  gqm::VerificationReport report = gqm::run_full_verification(options);

  std::size_t passed = 0;
  for (std::size_t i = 0; i < report.checks.size(); ++i) {
    const gqm::CheckResult& c = report.checks[i];
    std::printf("[%s] criterion %zu: %s (worst ratio %.3e) -- %s\n",
                c.pass ? "PASS" : "FAIL", i + 1, c.name.c_str(), c.measured,
                c.anchor.c_str());
    std::printf("        %s\n", c.detail.c_str());
    if (c.pass) ++passed;
  }
  std::printf("ACCEPTANCE: %zu/%zu criteria passed (seed %llu)\n", passed,
              report.checks.size(),
              static_cast<unsigned long long>(report.seed));
  return report.all_pass() ? 0 : 1;
}
