#include "pwlqp/pmm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "pwlqp/krylov.hpp"
#include "pwlqp/ssn.hpp"

namespace pwlqp {

namespace {

void check_state(const InternalProblem& p, const Vector& x, const PmmState& s) {
  require_dims(x.size() == p.n && s.z.size() == p.n && s.anchor.size() == p.n,
               "pmm: x/z/anchor length must be n");
  require_dims(s.y1.size() == p.m, "pmm: y1 length must be m");
  require_dims(s.y2.size() == p.l, "pmm: y2 length must be l");
}

// t - clamp(t, lo, hi)
inline double excess(double t, double lo, double hi) {
  if (t > hi) return t - hi;
  if (t < lo) return t - lo;
  return 0.0;
}

// antiderivative of clamp(t, 0, 1) vanishing at 0
inline double clamp_integral(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return t - 0.5;
  return 0.5 * t * t;
}

// int_a^{a+h} clamp(t, 0, 1) dt
double clamp_integral_change(double a, double h) {
  const double b = a + h;
  if (a >= 1.0 && b >= 1.0) return h;
  if (a <= 0.0 && b <= 0.0) return 0.0;
  if (a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0) return 0.5 * h * (a + b);
  return clamp_integral(b) - clamp_integral(a);
}

// int_a^{a+h} (t - clamp(t, lo, hi)) dt = (e(b)^2 - e(a)^2) / 2
double excess_integral_change(double a, double h, double lo, double hi) {
  const double b = a + h;
  const double ea = excess(a, lo, hi);
  const double eb = excess(b, lo, hi);
  const bool same_side = (a > hi && b > hi) || (a < lo && b < lo);
  const double diff = same_side ? h : eb - ea;
  return 0.5 * diff * (ea + eb);
}

}  // namespace

PmmState initial_state(const InternalProblem& p, const PmmConfig& cfg) {
  PmmState s;
  s.x = project_box(Vector::Zero(p.n), p.lower, p.upper);
  s.y1 = Vector::Zero(p.m);
  s.y2 = Vector::Zero(p.l);
  s.z = Vector::Zero(p.n);
  s.anchor = s.x;
  s.beta = cfg.beta0;
  s.tau = cfg.tau0();
  s.rho = s.beta / s.tau;
  return s;
}

double aug_lagrangian_value(const InternalProblem& p, const Vector& x,
                            const PmmState& s) {
  check_state(p, x, s);
  const double beta = s.beta;
  const Vector r = spmv(p.A, x) - p.b;
  const Vector w = p.C_times(x) + p.d;
  const Vector pi = project_unit_box(s.y2 + beta * w);
  const Vector u = s.z / beta + x;
  const Vector e = u - project_box(u, p.lower, p.upper);

  const double smooth = p.c.dot(x) + 0.5 * x.dot(spmv(p.Q, x)) + p.constant;
  const double equality = -s.y1.dot(r) + 0.5 * beta * r.squaredNorm();
  const double hinge = w.dot(pi) - (s.y2 - pi).squaredNorm() / (2.0 * beta);
  const double box = 0.5 * beta * e.squaredNorm() - s.z.squaredNorm() / (2.0 * beta);
  const double prox = (x - s.anchor).squaredNorm() / (2.0 * s.rho);
  return smooth + equality + hinge + box + prox;
}

Vector aug_lagrangian_gradient(const InternalProblem& p, const Vector& x,
                               const PmmState& s) {
  check_state(p, x, s);
  const double beta = s.beta;
  const Vector r = spmv(p.A, x) - p.b;
  const Vector pi = project_unit_box(s.y2 + beta * (p.C_times(x) + p.d));
  const Vector u = s.z / beta + x;
  Vector g = p.c + spmv(p.Q, x);
  g += spmv(p.At, Vector(beta * r - s.y1));
  g += p.Ct_times(pi);
  g += beta * (u - project_box(u, p.lower, p.upper));
  g += (x - s.anchor) / s.rho;
  return g;
}

double aug_lagrangian_change(const InternalProblem& p, const Vector& x,
                             const Vector& d, double alpha, const PmmState& s) {
  check_state(p, x, s);
  require_dims(d.size() == p.n, "aug_lagrangian_change: d length must be n");
  const double beta = s.beta;

  const Vector Qx = spmv(p.Q, x);
  const Vector Qd = spmv(p.Q, d);
  double change = alpha * (p.c + Qx).dot(d) + 0.5 * alpha * alpha * d.dot(Qd);

  const Vector r = spmv(p.A, x) - p.b;
  const Vector q = spmv(p.A, d);
  change += alpha * (beta * r - s.y1).dot(q) + 0.5 * beta * alpha * alpha * q.squaredNorm();

  const Vector v = s.y2 + beta * (p.C_times(x) + p.d);
  const Vector Cd = p.C_times(d);
  double hinge = 0.0;
  for (Index i = 0; i < p.l; ++i)
    hinge += clamp_integral_change(v[i], alpha * beta * Cd[i]);
  change += hinge / beta;

  double box = 0.0;
  for (Index j = 0; j < p.n; ++j) {
    const double u = s.z[j] / beta + x[j];
    box += excess_integral_change(u, alpha * d[j], p.lower[j], p.upper[j]);
  }
  change += beta * box;

  change += (alpha * (x - s.anchor).dot(d) + 0.5 * alpha * alpha * d.squaredNorm()) / s.rho;
  return change;
}

Vector prox_box_support(const Vector& w, double t, const Vector& lower,
                        const Vector& upper) {
  require_dims(w.size() == lower.size() && w.size() == upper.size(),
               "prox_box_support: length mismatch");
  if (!(t > 0.0)) throw Error(ErrorCode::kInvalidArgument, "prox_box_support: t must be positive");
  Vector out(w.size());
  for (Index j = 0; j < w.size(); ++j) {
    // sigma_K is piecewise linear in each coordinate with slopes lower/upper
    if (w[j] > t * upper[j])
      out[j] = w[j] - t * upper[j];
    else if (w[j] < t * lower[j])
      out[j] = w[j] - t * lower[j];
    else
      out[j] = 0.0;
  }
  return out;
}

PmmState update_multipliers(const InternalProblem& p, const PmmState& state,
                            const Vector& x_next) {
  check_state(p, x_next, state);
  PmmState s = state;
  const double beta = state.beta;
  s.y1 = state.y1 - beta * (spmv(p.A, x_next) - p.b);
  s.y2 = project_unit_box(state.y2 + beta * (p.C_times(x_next) + p.d));
  const Vector u = state.z / beta + x_next;
  s.z = beta * (u - project_box(u, p.lower, p.upper));
  s.x = x_next;
  s.anchor = x_next;
  return s;
}

PmmState update_penalties(const PmmState& state, double res_prev, double res_now,
                          const PmmConfig& cfg) {
  if (res_prev < 0.0 || res_now < 0.0)
    throw Error(ErrorCode::kInvalidArgument, "update_penalties: negative residual");
  double g = cfg.growth_fast;
  if (res_now > cfg.slow_ratio * res_prev)
    g = cfg.growth_slow;
  else if (res_now > cfg.mid_ratio * res_prev)
    g = cfg.growth_mid;
  PmmState s = state;
  s.beta = std::min(cfg.beta_max, std::max(state.beta, g * state.beta));
  s.tau = std::max(cfg.tau_min, state.tau);
  s.rho = s.beta / s.tau;
  return s;
}

double inner_tolerance(Index k, double outer_res, double tol, const PmmConfig& cfg) {
  if (k < 0) throw Error(ErrorCode::kInvalidArgument, "inner_tolerance: negative k");
  const double kk = static_cast<double>(k + 1);
  const double decay = cfg.inner_c0 / (kk * kk);
  return std::max(cfg.inner_floor * tol, std::min(cfg.inner_res_ratio * outer_res, decay));
}

SolveResult solve(const ProblemSpec& spec, const PmmConfig& cfg) {
  return solve(internalize(spec), cfg);
}

SolveResult solve(const InternalProblem& p, const PmmConfig& cfg) {
  cfg.check();
  const auto t0 = std::chrono::steady_clock::now();

  SolveResult out;
  SolveReport& rep = out.report;
  rep.tol = cfg.tol;

  PmmState state = initial_state(p, cfg);
  PreconditionerCache cache;
  std::vector<SsnStepLog>* trace = cfg.record_trace ? &rep.trace : nullptr;

  KktResiduals res = kkt_residuals(p, state.x, state.y1, state.y2, state.z);
  PmmState best = state;
  KktResiduals best_res = res;
  std::vector<double> history{res.max_res};

  auto finish = [&](SolveStatus status, const PmmState& s, const KktResiduals& r) {
    rep.status = status;
    rep.residuals = r;
    rep.final_beta = s.beta;
    rep.final_rho = s.rho;
    rep.objective = objective_value(p, s.x).value;
    out.x = s.x;
    out.y1 = s.y1;
    out.y2 = s.y2;
    out.z = s.z;
    rep.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  if (res.max_res <= cfg.tol) {
    finish(SolveStatus::kConverged, state, res);
    return out;
  }

  for (Index k = 0; k < cfg.max_outer; ++k) {
    state.k = k;
    const double eps = inner_tolerance(k, res.max_res, cfg.tol, cfg);

    InnerResult inner;
    for (Index attempt = 0;; ++attempt) {
      inner = run_inner(p, state, eps, cfg.ssn, cfg.minres, cache, trace, k);
      rep.ssn_iters += inner.iters;
      rep.factorizations += inner.factorizations;
      rep.krylov_iters += inner.krylov_iters;
      rep.forcing_violations += inner.forcing_violations;
      rep.steepest_descent_steps += inner.steepest_descent_steps;
      if (inner.status != InnerStatus::kLineSearchFailure &&
          inner.status != InnerStatus::kBreakdown)
        break;
      ++rep.inner_failures;
      if (attempt >= cfg.max_inner_retries || state.beta >= cfg.beta_max) break;
      state.beta = std::min(cfg.beta_max, cfg.growth_slow * state.beta);
      state.rho = state.beta / state.tau;
    }

    if (!inner.x.allFinite()) {
      rep.pmm_iters = k + 1;
      rep.message = "non-finite primal iterate in inner solve";
      finish(SolveStatus::kNumericalBreakdown, best, best_res);
      return out;
    }

    PmmState next = update_multipliers(p, state, inner.x);
    const KktResiduals res_next = kkt_residuals(p, next.x, next.y1, next.y2, next.z);
    rep.pmm_iters = k + 1;
    rep.outer_log.push_back({k, state.beta, state.rho, eps, inner.grad_norm, inner.iters,
                             res_next});

    if (!std::isfinite(res_next.max_res)) {
      rep.message = "non-finite residual after multiplier update";
      finish(SolveStatus::kNumericalBreakdown, best, best_res);
      return out;
    }
    if (res_next.max_res < best_res.max_res) {
      best = next;
      best_res = res_next;
    }
    if (res_next.max_res <= cfg.tol) {
      finish(SolveStatus::kConverged, next, res_next);
      return out;
    }

    history.push_back(res_next.max_res);
    const auto w = static_cast<std::size_t>(cfg.stall_window);
    if (history.size() > w) {
      const double past = history[history.size() - 1 - w];
      const double recent = *std::min_element(history.end() - static_cast<long>(w), history.end());
      if (recent > (1.0 - cfg.stall_rel_improvement) * past) {
        rep.message = "max residual improved by less than the stall threshold";
        finish(SolveStatus::kStalled, best, best_res);
        return out;
      }
    }

    state = update_penalties(next, res.max_res, res_next.max_res, cfg);
    res = res_next;
  }

  rep.message = "outer iteration limit reached";
  finish(SolveStatus::kIterationLimit, best, best_res);
  return out;
}

}  // namespace pwlqp
