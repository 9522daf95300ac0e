#pragma once

#include <functional>
#include <vector>

#include "pwlqp/krylov.hpp"

namespace pwlqp {

/// min(eta_bar, ||grad||^(1 + gamma)).
double forcing_tolerance(double grad_norm, const SsnConfig& cfg);

/// Everything the Krylov stage needs besides the system itself.
struct KrylovPolicy {
  const InternalProblem& p;
  const PmmState& state;
  const ActiveSets& sets;
  PreconditionerCache& cache;
  MinresConfig cfg;
};

struct NewtonDirection {
  Vector dx;
  double residual = 0.0;  // ||J dx + grad||
  bool forcing_met = false;
  bool converged = false;  // MINRES reached its own tolerance
  bool resolved = false;   // the direct residual check forced extra iterations
  Index krylov_iters = 0;
  Index factorizations = 0;
  bool preconditioned = false;
};

/// Inexact Newton step from the reduced system. The forcing inequality is
/// checked on ||J dx + grad|| each time MINRES thinks it is done; a miss
/// tightens the MINRES tolerance and the iteration carries on.
NewtonDirection newton_direction(const ReducedSystem& sys, const Vector& grad,
                                 double forcing_tol, KrylovPolicy& policy);

struct LineSearchResult {
  double alpha = 1.0;
  double change = 0.0;  // phi(x + alpha d) - phi(x)
  Index backtracks = 0;
  bool ok = false;
};

/// Armijo backtracking: the first alpha = delta^j with
/// change(alpha) <= mu * alpha * slope.
LineSearchResult line_search(const std::function<double(double)>& change, double slope,
                             const SsnConfig& cfg);

/// Same rule for a callable phi over vectors; change is phi(x + a d) - phi(x).
LineSearchResult line_search(const std::function<double(const Vector&)>& phi,
                             const Vector& grad, const Vector& x, const Vector& dx,
                             const SsnConfig& cfg);

enum class InnerStatus { kConverged, kMaxIterations, kLineSearchFailure, kBreakdown };

struct InnerResult {
  Vector x;
  InnerStatus status = InnerStatus::kMaxIterations;
  double grad_norm = 0.0;
  Index iters = 0;
  Index factorizations = 0;
  Index krylov_iters = 0;
  Index forcing_violations = 0;  // accepted directions that missed the bound
  Index steepest_descent_steps = 0;
};

/// Semismooth Newton on phi from state.x until ||grad phi|| <= eps.
InnerResult run_inner(const InternalProblem& p, const PmmState& state, double eps,
                      const SsnConfig& cfg, const MinresConfig& mcfg,
                      PreconditionerCache& cache, std::vector<SsnStepLog>* trace = nullptr,
                      Index outer = 0);

}  // namespace pwlqp
