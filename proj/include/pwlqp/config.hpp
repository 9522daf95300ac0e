#pragma once

#include "pwlqp/linalg.hpp"

namespace pwlqp {

/// Semismooth Newton parameters. Ranges: mu in (0, 1/2), delta in (0, 1),
/// gamma in (0, 1], eta_bar in (0, 1).
struct SsnConfig {
  double mu = 1e-4;
  double delta = 0.5;
  double gamma = 0.5;
  double eta_bar = 0.1;
  Index max_inner = 40;
  Index max_backtracks = 50;
  /// First Newton step of every inner solve is taken without line search,
  /// unless phi would rise by more than first_step_rise * |grad^T d|.
  bool accept_first_step = true;
  double first_step_rise = 1.0;

  void check() const;
};

struct MinresConfig {
  Index max_iters = 150;
  Index unpreconditioned_trigger = 100;
  /// Once a preconditioned solve has been needed, keep preconditioning for
  /// the rest of the outer solve.
  bool sticky_preconditioner = true;
  /// Skip the unpreconditioned attempt entirely.
  bool always_precondition = false;

  void check() const;
};

struct PmmConfig {
  double beta0 = 50.0;
  double rho0 = 100.0;
  double beta_max = 1e8;
  double tau_min = 1e-6;
  Index max_outer = 200;
  double tol = 1e-5;

  // penalty growth: factor g_slow if res_now > slow_ratio * res_prev,
  // g_mid if res_now > mid_ratio * res_prev, g_fast otherwise
  double slow_ratio = 0.9;
  double mid_ratio = 0.5;
  double growth_slow = 5.0;
  double growth_mid = 2.0;
  double growth_fast = 1.2;

  // inner tolerance eps_k = max(floor * tol, min(res_ratio * res, c0 / (k+1)^2))
  double inner_c0 = 1.0;
  double inner_floor = 0.1;
  double inner_res_ratio = 0.1;

  Index stall_window = 20;
  double stall_rel_improvement = 1e-3;
  Index max_inner_retries = 3;

  /// Keep a per-step SSN log in the report.
  bool record_trace = false;

  SsnConfig ssn;
  MinresConfig minres;

  double tau0() const { return beta0 / rho0; }
  void check() const;
};

}  // namespace pwlqp
