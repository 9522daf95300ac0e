#pragma once

#include <string>
#include <vector>

#include "pwlqp/model.hpp"

namespace pwlqp {

enum class SolveStatus {
  kConverged,
  kIterationLimit,
  kStalled,
  kNumericalBreakdown,
};

std::string to_string(SolveStatus status);

/// One accepted semismooth Newton step.
struct SsnStepLog {
  Index outer = 0;
  Index inner = 0;
  double grad_norm = 0.0;
  double forcing_tol = 0.0;
  double newton_residual = 0.0;  // ||J d + grad|| of the Newton direction
  bool steepest_descent = false;
  bool line_search = false;
  double alpha = 1.0;
  double slope = 0.0;            // grad^T d
  double phi_change = 0.0;       // phi(x + alpha d) - phi(x), evaluated stably
  double phi_before = 0.0;
  double phi_after = 0.0;
  double mu = 0.0;
  Index krylov_iters = 0;
  bool factorized = false;

  bool forcing_satisfied() const { return newton_residual <= forcing_tol; }
  /// The Armijo inequality exactly as the line search evaluated it.
  bool armijo_satisfied() const { return phi_change <= mu * alpha * slope; }
};

struct OuterLog {
  Index k = 0;
  double beta = 0.0;
  double rho = 0.0;
  double inner_tol = 0.0;
  double grad_norm = 0.0;
  Index ssn_iters = 0;
  KktResiduals residuals;
};

/// Status, final residuals and the PMM(SSN)[Fact.]{Krylov} counters.
struct SolveReport {
  SolveStatus status = SolveStatus::kIterationLimit;
  Index pmm_iters = 0;
  Index ssn_iters = 0;
  Index factorizations = 0;
  Index krylov_iters = 0;
  KktResiduals residuals;
  double objective = 0.0;
  double wall_time = 0.0;
  double tol = 0.0;
  double final_beta = 0.0;
  double final_rho = 0.0;

  Index forcing_violations = 0;
  Index steepest_descent_steps = 0;
  Index inner_failures = 0;
  std::string message;

  std::vector<OuterLog> outer_log;
  std::vector<SsnStepLog> trace;

  /// "PMM(SSN)[Fact.]{Krylov}" cell.
  std::string ledger() const;
};

}  // namespace pwlqp
