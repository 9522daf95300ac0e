#pragma once

#include "pwlqp/config.hpp"
#include "pwlqp/model.hpp"
#include "pwlqp/report.hpp"

namespace pwlqp {

/// Primal-dual iterate of the proximal method of multipliers together with
/// its penalties. rho == beta / tau is maintained by every update.
struct PmmState {
  Vector x;
  Vector y1;
  Vector y2;
  Vector z;
  Vector anchor;  // x_k of the proximal term
  double beta = 0.0;
  double rho = 0.0;
  double tau = 0.0;
  Index k = 0;
};

/// x0 = Pi_K(0), y = 0, z = 0, anchor = x0.
PmmState initial_state(const InternalProblem& p, const PmmConfig& cfg);

/// phi(x) = L_beta(x; y_k, z_k) + 1/(2 rho) ||x - anchor||^2 with the
/// augmented Lagrangian written as the sum of its smooth part, the
/// equality penalty, the hinge envelope and the box envelope.
double aug_lagrangian_value(const InternalProblem& p, const Vector& x,
                            const PmmState& state);

Vector aug_lagrangian_gradient(const InternalProblem& p, const Vector& x,
                               const PmmState& state);

/// phi(x + alpha d) - phi(x) accumulated term by term, so that the result
/// keeps relative accuracy when both values are large and close.
double aug_lagrangian_change(const InternalProblem& p, const Vector& x,
                             const Vector& d, double alpha, const PmmState& state);

/// prox of t * sigma_K (support function of the box) at w, in closed form.
Vector prox_box_support(const Vector& w, double t, const Vector& lower,
                        const Vector& upper);

/// Multiplier step: y1 -= beta (A x - b), y2 = Pi_[0,1](y2 + beta (C x + d)),
/// z = beta (z/beta + x - Pi_K(z/beta + x)); the anchor moves to x_next.
PmmState update_multipliers(const InternalProblem& p, const PmmState& state,
                            const Vector& x_next);

/// Residual-driven growth of beta (capped at beta_max); tau held at
/// max(tau_min, tau); rho = beta / tau.
PmmState update_penalties(const PmmState& state, double res_prev, double res_now,
                          const PmmConfig& cfg);

/// eps_k = max(floor * tol, min(res_ratio * outer_res, c0 / (k + 1)^2)).
double inner_tolerance(Index k, double outer_res, double tol,
                       const PmmConfig& cfg = {});

struct SolveResult {
  Vector x;
  Vector y1;
  Vector y2;
  Vector z;
  SolveReport report;
};

SolveResult solve(const ProblemSpec& spec, const PmmConfig& cfg = {});
SolveResult solve(const InternalProblem& p, const PmmConfig& cfg = {});

}  // namespace pwlqp
