#pragma once

#include <map>
#include <string>
#include <vector>

#include "mkdv/solution.hpp"

namespace mkdv {

// One row of the identity suite. Informational rows carry an infinite
// tolerance and never fail; they exist to surface numbers worth seeing.
struct InvariantRecord {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string location;  // where the worst residual occurred
};

struct InvariantReport {
  std::vector<InvariantRecord> records;

  bool all_pass() const {
    for (const auto& r : records)
      if (!r.pass) return false;
    return true;
  }
};

// Residual of u_t + u_xxx + 6u^2 u_x with every term taken from central
// differences of eval_u at step h (second order). Converges to zero at
// O(h^2) because the exact solution satisfies the equation.
double pde_fd_residual(const SolutionEvaluator& ev, double x, double t,
                       double h);

// Runs the whole identity suite against one evaluator: structure-equation
// residuals, NQ = P^2, positive definiteness, E = F^T, the Gamma
// factorization of F, u = v, analytic and finite-difference PDE residuals,
// kernel recovery and Marchenko residuals, the log-det identity, and the
// kernel PDE. Sampling is seeded and deterministic. tol_overrides replaces
// the default tolerance of any record matched by name.
InvariantReport run_invariant_checks(
    const SolutionEvaluator& ev,
    const std::map<std::string, double>& tol_overrides = {});

// Fixed-width text table, one line per record plus a verdict line.
std::string format_report_table(const InvariantReport& report);

}  // namespace mkdv
