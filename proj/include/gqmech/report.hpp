#ifndef GQMECH_REPORT_HPP
#define GQMECH_REPORT_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace gqm {

// One named verification check. `measured` is the worst sub-check ratio
// (value / tolerance, or distance-from-center / half-width for ranged
// sub-checks), so pass means measured <= 1.
struct CheckResult {
  std::string name;
  std::string anchor;  // which piece of theory the check exercises
  double measured = 0.0;
  double tolerance = 1.0;
  bool pass = true;
  std::string detail;
};

// Accumulates sub-checks into one CheckResult.
class CheckBuilder {
 public:
  CheckBuilder(std::string name, std::string anchor);

  // value must stay at or below tol.
  void bound(const std::string& label, double value, double tol);
  // value must land inside [lo, hi].
  void range(const std::string& label, double value, double lo, double hi);
  void require(const std::string& label, bool ok);

  CheckResult finish() const;

 private:
  void note(const std::string& label, double value, double tol, bool ok);
  CheckResult r_;
};

struct VerificationReport {
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;

  bool all_pass() const;
  std::string to_text() const;
  std::string to_json_string(int indent = -1) const;
};

}  // namespace gqm

#endif  // GQMECH_REPORT_HPP
