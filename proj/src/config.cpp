#include "pwlqp/config.hpp"

namespace pwlqp {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
}

}  // namespace

void SsnConfig::check() const {
  require(mu > 0.0 && mu < 0.5, "ssn: mu must lie in (0, 1/2)");
  require(delta > 0.0 && delta < 1.0, "ssn: delta must lie in (0, 1)");
  require(gamma > 0.0 && gamma <= 1.0, "ssn: gamma must lie in (0, 1]");
  require(eta_bar > 0.0 && eta_bar < 1.0, "ssn: eta_bar must lie in (0, 1)");
  require(max_inner >= 1, "ssn: max_inner must be positive");
  require(max_backtracks >= 0, "ssn: max_backtracks must be nonnegative");
  require(first_step_rise >= 0.0, "ssn: first_step_rise must be nonnegative");
}

void MinresConfig::check() const {
  require(max_iters >= 1, "minres: max_iters must be positive");
  require(unpreconditioned_trigger >= 1 && unpreconditioned_trigger <= max_iters,
          "minres: trigger must lie in [1, max_iters]");
}

void PmmConfig::check() const {
  require(beta0 > 0.0 && rho0 > 0.0, "pmm: beta0 and rho0 must be positive");
  require(beta0 <= beta_max, "pmm: beta0 exceeds beta_max");
  require(tau_min > 0.0 && tau_min <= tau0(), "pmm: need 0 < tau_min <= beta0/rho0");
  require(max_outer >= 1, "pmm: max_outer must be positive");
  require(tol > 0.0, "pmm: tol must be positive");
  require(growth_slow >= 1.0 && growth_mid >= 1.0 && growth_fast >= 1.0,
          "pmm: growth factors must be >= 1");
  require(inner_c0 > 0.0 && inner_floor > 0.0 && inner_res_ratio > 0.0,
          "pmm: inner tolerance parameters must be positive");
  require(stall_window >= 1, "pmm: stall_window must be positive");
  require(max_inner_retries >= 0, "pmm: max_inner_retries must be nonnegative");
  ssn.check();
  minres.check();
}

}  // namespace pwlqp
