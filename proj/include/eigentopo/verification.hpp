// SPDX-License-Identifier: Apache-2.0
// Numerical verification suite shared by the `verify` subcommand and the
// acceptance test. Each check builds its own small problem.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eigentopo/material.hpp"

namespace eigentopo {

struct CheckResult
{
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyOptions
{
  MaterialSet materials = default_verify_materials();
  std::uint64_t seed = 20240611;

  static MaterialSet default_verify_materials();
};

/// Least-squares slope of log(err) against log(t).
double loglog_slope(const std::vector<double>& t, const std::vector<double>& err);

CheckResult check_eigensolver(const VerifyOptions& opts);        // 1
CheckResult check_laplace(const VerifyOptions& opts);            // 2
CheckResult check_eigenvalue_derivative(const VerifyOptions& opts);   // 3
CheckResult check_eigenfunction_derivative(const VerifyOptions& opts);  // 4
CheckResult check_semi_derivative(const VerifyOptions& opts);    // 5
CheckResult check_projection(const VerifyOptions& opts);         // 6
CheckResult check_optimization(const VerifyOptions& opts);       // 7
CheckResult check_combined(const VerifyOptions& opts);           // 8
CheckResult check_continuity(const VerifyOptions& opts);         // 9

/// Runs the listed checks in order.
std::vector<CheckResult> run_checks(const std::vector<int>& ids, const VerifyOptions& opts);

/// Laplace validation table for the `laplace-validate` subcommand.
struct LaplaceRow
{
  int m = 0;
  int n = 0;
  double exact = 0.0;
  double observed = 0.0;
  double rel_error = 0.0;
};
std::vector<LaplaceRow> laplace_table(int nx, int count);

}  // namespace eigentopo
