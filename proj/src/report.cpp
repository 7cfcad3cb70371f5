#include "gqmech/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

namespace gqm {

namespace {
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6e", v);
  return buf;
}
}  // namespace

CheckBuilder::CheckBuilder(std::string name, std::string anchor) {
  r_.name = std::move(name);
  r_.anchor = std::move(anchor);
  r_.measured = 0.0;
  r_.tolerance = 1.0;
  r_.pass = true;
}

void CheckBuilder::note(const std::string& label, double value, double tol, bool ok) {
  if (!r_.detail.empty()) r_.detail += "; ";
  r_.detail += label + "=" + fmt(value) + " (tol " + fmt(tol) + ")";
  if (!ok) r_.detail += " FAIL";
}

void CheckBuilder::bound(const std::string& label, double value, double tol) {
  const bool ok = std::isfinite(value) && value <= tol;
  const double ratio = tol > 0.0 ? value / tol : (value == 0.0 ? 0.0 : INFINITY);
  r_.measured = std::max(r_.measured, std::isfinite(ratio) ? ratio : 1e300);
  r_.pass = r_.pass && ok;
  note(label, value, tol, ok);
}

void CheckBuilder::range(const std::string& label, double value, double lo, double hi) {
  const bool ok = std::isfinite(value) && value >= lo && value <= hi;
  // Log-scale edge distance for positive ranges: <= 1 means inside.
  double ratio = 2.0;
  if (std::isfinite(value) && value > 0.0 && lo > 0.0 && hi > 0.0)
    ratio = std::max(lo / value, value / hi);
  r_.measured = std::max(r_.measured, std::isfinite(ratio) ? ratio : 1e300);
  r_.pass = r_.pass && ok;
  if (!r_.detail.empty()) r_.detail += "; ";
  r_.detail += label + "=" + fmt(value) + " (range [" + fmt(lo) + ", " + fmt(hi) + "])";
  if (!ok) r_.detail += " FAIL";
}

void CheckBuilder::require(const std::string& label, bool ok) {
  r_.measured = std::max(r_.measured, ok ? 0.0 : 2.0);
  r_.pass = r_.pass && ok;
  if (!r_.detail.empty()) r_.detail += "; ";
  r_.detail += label + "=" + (ok ? "ok" : "FAIL");
}

CheckResult CheckBuilder::finish() const { return r_; }

bool VerificationReport::all_pass() const {
  for (const CheckResult& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string VerificationReport::to_text() const {
  std::string out;
  char buf[64];
  for (const CheckResult& c : checks) {
    out += c.pass ? "[PASS] " : "[FAIL] ";
    out += c.name;
    std::snprintf(buf, sizeof(buf), " (worst ratio %.3e)", c.measured);
    out += buf;
    out += " -- ";
    out += c.anchor;
    out += "\n";
  }
  std::snprintf(buf, sizeof(buf), "%zu/%zu checks passed\n",
                static_cast<std::size_t>(
                    std::count_if(checks.begin(), checks.end(),
                                  [](const CheckResult& c) { return c.pass; })),
                checks.size());
  out += buf;
  return out;
}

std::string VerificationReport::to_json_string(int indent) const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["all_pass"] = all_pass();
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const CheckResult& c : checks) {
    nlohmann::ordered_json cj;
    cj["name"] = c.name;
    cj["anchor"] = c.anchor;
    cj["measured"] = c.measured;
    cj["tolerance"] = c.tolerance;
    cj["pass"] = c.pass;
    cj["detail"] = c.detail;
    arr.push_back(std::move(cj));
  }
  j["checks"] = std::move(arr);
  return indent >= 0 ? j.dump(indent) : j.dump();
}

}  // namespace gqm
