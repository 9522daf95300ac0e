#include "pwlqp/ssn.hpp"

#include <algorithm>
#include <cmath>

namespace pwlqp {

double forcing_tolerance(double grad_norm, const SsnConfig& cfg) {
  return std::min(cfg.eta_bar, std::pow(grad_norm, 1.0 + cfg.gamma));
}

NewtonDirection newton_direction(const ReducedSystem& sys, const Vector& grad,
                                 double forcing_tol, KrylovPolicy& policy) {
  const Index n = sys.op.n();
  require_dims(grad.size() == n, "newton_direction: gradient length must be n");
  NewtonDirection out;
  const double gnorm = grad.norm();
  if (gnorm == 0.0) {
    out.dx = Vector::Zero(n);
    out.forcing_met = out.converged = true;
    return out;
  }

  auto jres = [&](const Vector& u) {
    return (newton_matvec(policy.p, policy.state, policy.sets, u.head(n)) + grad).norm();
  };
  // MINRES measures the reduced residual; J dx + grad sees its u2/u3 blocks
  // scaled by about beta ||A||, so every candidate is also checked directly
  const ResidualCheck check = [&](const Vector& u) { return jres(u) / forcing_tol; };

  // initial residual of the warm start is (grad, 0, 0)
  const PolicyResult r =
      solve_with_policy(sys.op, sys.rhs, sys.warm_start, policy.p, policy.state, policy.sets,
                        policy.cache, policy.cfg, std::min(0.5, 0.5 * forcing_tol / gnorm), check);
  out.krylov_iters = r.iters;
  out.factorizations = r.factorizations;
  out.preconditioned = r.preconditioned;
  out.converged = r.converged;
  out.resolved = r.tightenings > 0;
  out.dx = r.solution.head(n);
  out.residual = jres(r.solution);
  out.forcing_met = out.residual <= forcing_tol;
  return out;
}

LineSearchResult line_search(const std::function<double(double)>& change, double slope,
                             const SsnConfig& cfg) {
  LineSearchResult res;
  double alpha = 1.0;
  for (Index j = 0; j <= cfg.max_backtracks; ++j) {
    const double dphi = change(alpha);
    if (dphi <= cfg.mu * alpha * slope) {
      res.alpha = alpha;
      res.change = dphi;
      res.backtracks = j;
      res.ok = true;
      return res;
    }
    alpha *= cfg.delta;
  }
  res.alpha = alpha;
  res.backtracks = cfg.max_backtracks;
  return res;
}

LineSearchResult line_search(const std::function<double(const Vector&)>& phi,
                             const Vector& grad, const Vector& x, const Vector& dx,
                             const SsnConfig& cfg) {
  const double phi0 = phi(x);
  return line_search([&](double a) { return phi(x + a * dx) - phi0; }, grad.dot(dx), cfg);
}

InnerResult run_inner(const InternalProblem& p, const PmmState& state, double eps,
                      const SsnConfig& cfg, const MinresConfig& mcfg,
                      PreconditionerCache& cache, std::vector<SsnStepLog>* trace,
                      Index outer) {
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "run_inner: eps must be positive");
  InnerResult out;
  Vector x = state.x;
  Vector g = aug_lagrangian_gradient(p, x, state);
  double gn = g.norm();

  auto done = [&](InnerStatus st) {
    out.x = x;
    out.grad_norm = gn;
    out.status = st;
    return out;
  };
  if (!std::isfinite(gn)) return done(InnerStatus::kBreakdown);
  if (gn <= eps) return done(InnerStatus::kConverged);

  for (Index j = 0; j < cfg.max_inner; ++j) {
    const ActiveSets sets = select_bouligand(p, x, state);
    const ReducedSystem sys = assemble_reduced_system(p, x, state, sets);
    const double forcing = forcing_tolerance(gn, cfg);
    KrylovPolicy policy{p, state, sets, cache, mcfg};
    NewtonDirection nd = newton_direction(sys, g, forcing, policy);
    out.krylov_iters += nd.krylov_iters;
    out.factorizations += nd.factorizations;

    SsnStepLog log;
    log.outer = outer;
    log.inner = j;
    log.grad_norm = gn;
    log.forcing_tol = forcing;
    log.newton_residual = nd.residual;
    log.mu = cfg.mu;
    log.krylov_iters = nd.krylov_iters;
    log.factorized = nd.factorizations > 0;

    Vector dx = std::move(nd.dx);
    double slope = g.dot(dx);
    if (!dx.allFinite() || !(slope < 0.0)) {
      dx = -g;
      slope = -gn * gn;
      log.steepest_descent = true;
    } else if (!nd.forcing_met) {
      // inexact beyond forcing; the line search still has to accept it
      ++out.forcing_violations;
    }

    auto change = [&](double a) { return aug_lagrangian_change(p, x, dx, a, state); };
    double alpha = 1.0;
    double dphi = 0.0;
    bool predictor = false;
    if (j == 0 && cfg.accept_first_step && !log.steepest_descent) {
      dphi = change(1.0);
      predictor = std::isfinite(dphi) && dphi <= cfg.first_step_rise * -slope;
    }
    if (!predictor) {
      LineSearchResult ls = line_search(change, slope, cfg);
      if (!ls.ok && !log.steepest_descent) {
        dx = -g;
        slope = -gn * gn;
        log.steepest_descent = true;
        ls = line_search(change, slope, cfg);
      }
      if (!ls.ok) {
        out.iters = j;
        return done(InnerStatus::kLineSearchFailure);
      }
      log.line_search = true;
      alpha = ls.alpha;
      dphi = ls.change;
    }
    if (log.steepest_descent) ++out.steepest_descent_steps;

    log.alpha = alpha;
    log.slope = slope;
    log.phi_change = dphi;
    if (trace) {
      log.phi_before = aug_lagrangian_value(p, x, state);
      log.phi_after = aug_lagrangian_value(p, x + alpha * dx, state);
    }
    x += alpha * dx;
    g = aug_lagrangian_gradient(p, x, state);
    gn = g.norm();
    out.iters = j + 1;
    if (trace) trace->push_back(log);

    if (!std::isfinite(gn)) return done(InnerStatus::kBreakdown);
    if (gn <= eps) return done(InnerStatus::kConverged);
  }
  return done(InnerStatus::kMaxIterations);
}

}  // namespace pwlqp
