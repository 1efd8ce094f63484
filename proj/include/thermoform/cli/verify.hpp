#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "thermoform/cli/config.hpp"

namespace thermoform::cli {

/// Tolerances of the built-in acceptance checks, addressable by name so a
/// run can override them.
struct VerifyTolerances {
  double ex11_exact = 1e-9;          // relative, closed-form finite pressure
  double ex11_limit = 0.05;          // Fekete bound vs the limit pressure
  double ex11_spectrum = 0.05;       // Legendre value at alpha = log 3
  double binary_spectrum = 1e-3;     // vs binary entropy
  double binary_pressure = 1e-12;    // vs log(1 + 2^q)
  double biconjugate_factor = 1.0;   // multiplies C h
  double ex63_hausdorff = 1e-6;
  double ex62_interval = 2e-3;
  double gibbs = 1e-9;
  double fekete_slack = 1e-12;       // relative rounding slack on subadditivity
  double irreducibility = 1e-10;     // invariance defect of the witness
  double membership = 1e-3;
  double shift_covariance = 1e-9;
  double scale_covariance = 1e-6;

  std::map<std::string, double*> fields();
  /// Applies {"name": value} overrides; ConfigError on unknown names.
  void apply(const Json& overrides);
  Json to_json() const;
};

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double measured = 0.0;   // worst error or decisive value
  double tolerance = 0.0;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool passed() const;
  Json to_json() const;
};

/// (id, name) of the 13 acceptance checks in order.
std::vector<std::pair<int, std::string>> acceptance_checks();

/// Runs the selected checks (all when empty). Expensive intermediate
/// results are shared between checks of one run.
VerifyReport run_verify(const VerifyTolerances& tolerances = {}, std::span<const int> ids = {});

/// "PASS [id] name: measured=... tol=... detail".
std::string format_check(const CheckResult& r);

}  // namespace thermoform::cli
