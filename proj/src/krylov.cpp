#include "pwlqp/krylov.hpp"

#include <algorithm>
#include <functional>

#include <json.hpp>

namespace pwlqp {

std::size_t PreconditionerSignature::hash() const {
  std::size_t h = 1469598103934665603ull;
  auto mix = [&h](std::size_t v) { h = (h ^ v) * 1099511628211ull; };
  for (auto b : b_delta) mix(b);
  mix(0xff);
  for (auto b : b1_h) mix(b);
  mix(0xfe);
  for (auto b : b2_h) mix(b);
  mix(std::hash<double>{}(beta));
  mix(std::hash<double>{}(rho));
  return h;
}

Vector Preconditioner::apply(const Vector& r) const {
  require_dims(r.size() == size(), "apply_preconditioner: length mismatch");
  const Index n = h_tilde.size();
  Vector out(r.size());
  out.head(n) = r.head(n).cwiseQuotient(h_tilde);
  if (schur.rows() > 0) out.tail(schur.rows()) = schur_factor->solve(r.tail(schur.rows()));
  return out;
}

Vector apply_preconditioner(const Preconditioner& P, const Vector& r) { return P.apply(r); }

SparseMatrix compound_matrix(const InternalProblem& p, const ActiveSets& sets) {
  SparseMatrix cb_t = hinge_columns(p, sets);
  SparseMatrix gt = hstack(p.At, SparseMatrix(-cb_t));
  return SparseMatrix(gt.transpose());
}

Vector dropping_weights(const Vector& h_tilde, const ActiveSets& sets) {
  Vector e = Vector::Zero(h_tilde.size());
  for (Index j : sets.B) e[j] = 1.0 / h_tilde[j];
  return e;
}

PreconditionerSignature make_signature(const PmmState& state, const ActiveSets& sets) {
  return {sets.b_delta, sets.b1_h, sets.b2_h, state.beta, state.rho};
}

BuiltPreconditioner build_preconditioner(const InternalProblem& p, const PmmState& state,
                                         const ActiveSets& sets, PreconditionerCache& cache) {
  PreconditionerSignature sig = make_signature(state, sets);
  if (cache.current && cache.current->signature == sig) {
    ++cache.hits;
    return {cache.current, false};
  }
  auto P = std::make_shared<Preconditioner>();
  P->h_tilde = hessian_diag_approx(p, state, sets);
  if ((P->h_tilde.array() <= 0.0).any())
    throw Error(ErrorCode::kNumericalBreakdown, "build_preconditioner: non-positive diagonal");
  const SparseMatrix G = compound_matrix(p, sets);
  P->schur = gram_plus_shift(G, dropping_weights(P->h_tilde, sets), 1.0 / state.beta);
  P->schur_factor = std::make_shared<const CholeskyFactor>(P->schur);
  P->signature = std::move(sig);
  cache.current = P;
  ++cache.factorizations;
  return {cache.current, true};
}

PolicyResult solve_with_policy(const ReducedOperator& op, const Vector& rhs,
                               const Vector& x0, const InternalProblem& p,
                               const PmmState& state, const ActiveSets& sets,
                               PreconditionerCache& cache, const MinresConfig& cfg,
                               double rtol, const ResidualCheck& check) {
  const ResidualCheck accept = check ? check : ResidualCheck([](const Vector&) { return 0.0; });
  require_dims(rhs.size() == op.size() && x0.size() == op.size(),
               "solve_with_policy: vector length mismatch");
  PolicyResult out;
  const bool skip_plain = cfg.always_precondition || (cfg.sticky_preconditioner && cache.activated);
  if (!skip_plain) {
    auto r = minres_solve<double>(op, rhs, x0, rtol, cfg.unpreconditioned_trigger,
                                  NoPreconditioner{}, accept);
    out.tightenings += r.tightenings;
    out.unpreconditioned_iters = r.iters;
    out.iters = r.iters;
    out.solution = std::move(r.x);
    out.initial_norm = r.initial_norm;
    out.residual_norm = r.residual_norm;
    if (r.converged) {
      out.converged = true;
      return out;
    }
  }
  cache.activated = true;
  BuiltPreconditioner built = build_preconditioner(p, state, sets, cache);
  if (built.did_factorize) ++out.factorizations;
  auto r = minres_solve<double>(op, rhs, x0, rtol, cfg.max_iters, *built.P, accept);
  out.tightenings += r.tightenings;
  out.preconditioned = true;
  out.preconditioned_iters = r.iters;
  out.iters += r.iters;
  out.solution = std::move(r.x);
  out.initial_norm = r.initial_norm;
  out.residual_norm = r.residual_norm;
  out.converged = r.converged;
  return out;
}

namespace {

double max_eig_gram(const Matrix& F) {
  if (F.rows() == 0 || F.cols() == 0) return 0.0;
  const Matrix g = F.cols() <= F.rows() ? Matrix(F.transpose() * F) : Matrix(F * F.transpose());
  return std::max(0.0, dense_eigs(g).back());
}

}  // namespace

SpectralReport spectral_check(const InternalProblem& p, const PmmState& state,
                              const ActiveSets& sets) {
  SpectralReport rep;
  rep.n = p.n;
  rep.m = p.m;
  rep.k = static_cast<Index>(sets.b1_rows.size());
  rep.beta = state.beta;
  rep.rho = state.rho;
  rep.tau = state.tau;
  if (rep.n + rep.m + rep.k > kDenseEigsCap)
    throw Error(ErrorCode::kCapacityExceeded, "spectral_check: dimension above cap");

  const Vector shift = hessian_shift(p, state, sets);
  const Vector h_tilde = p.q_diag + shift;
  const Matrix H = Matrix(p.Q) + Matrix(shift.asDiagonal());
  const Matrix G = Matrix(compound_matrix(p, sets));
  const Index r = G.rows();
  const Matrix Ir = Matrix::Identity(r, r);
  const Vector e = dropping_weights(h_tilde, sets);
  const Matrix S_P = G * h_tilde.cwiseInverse().asDiagonal() * G.transpose() + Ir / state.beta;
  const Matrix S = G * e.asDiagonal() * G.transpose() + Ir / state.beta;

  if (r > 0) rep.schur_eigs = dense_eigs(S_P, S);
  rep.alpha_ne = rep.schur_eigs.empty() ? 1.0 : rep.schur_eigs.front();
  rep.beta_ne = rep.schur_eigs.empty() ? 1.0 : rep.schur_eigs.back();

  Matrix F(p.m + p.s, p.n);
  F.topRows(p.m) = Matrix(p.A);
  F.bottomRows(p.s) = -Matrix(p.Ct.transpose()).topRows(p.s);
  rep.sigma2_fhat = max_eig_gram(F);
  rep.printed_upper = 1.0 + rep.sigma2_fhat / (2.0 + state.tau / (state.beta * state.beta));

  Matrix GN(r, static_cast<Index>(sets.N.size()));
  double hmin = kInf;
  for (std::size_t i = 0; i < sets.N.size(); ++i) {
    GN.col(static_cast<Index>(i)) = G.col(sets.N[i]);
    hmin = std::min(hmin, h_tilde[sets.N[i]]);
  }
  rep.sigma2_gn = max_eig_gram(GN);
  rep.min_h_tilde_n = hmin;
  rep.derived_upper = sets.N.empty() ? 1.0 : 1.0 + state.beta * rep.sigma2_gn / hmin;

  const std::vector<double> h_eigs = dense_eigs(H, Matrix(h_tilde.asDiagonal()));
  rep.alpha_h = h_eigs.front();
  rep.beta_h = h_eigs.back();

  const ReducedOperator op(p, shift, hinge_columns(p, sets), state.beta);
  const Index N = op.size();
  Matrix P = Matrix::Zero(N, N);
  P.topLeftCorner(p.n, p.n) = h_tilde.asDiagonal();
  P.bottomRightCorner(r, r) = S;
  rep.pencil_eigs = dense_eigs(op.to_dense(), P);

  rep.minus_lo = -rep.beta_h - std::sqrt(rep.beta_ne);
  rep.minus_hi = -rep.alpha_h;
  rep.plus_lo = 1.0 / (1.0 + rep.beta_h);
  rep.plus_hi = 1.0 + std::sqrt(std::max(0.0, rep.beta_ne - 1.0));
  return rep;
}

bool SpectralReport::schur_lower_ok(double slack) const {
  return std::all_of(schur_eigs.begin(), schur_eigs.end(),
                     [&](double v) { return v >= 1.0 - slack; });
}

bool SpectralReport::schur_printed_upper_ok(double slack) const {
  return std::all_of(schur_eigs.begin(), schur_eigs.end(),
                     [&](double v) { return v <= printed_upper + slack; });
}

bool SpectralReport::schur_derived_upper_ok(double slack) const {
  return std::all_of(schur_eigs.begin(), schur_eigs.end(),
                     [&](double v) { return v <= derived_upper * (1.0 + slack) + slack; });
}

bool SpectralReport::intervals_ok(double slack) const {
  return std::all_of(pencil_eigs.begin(), pencil_eigs.end(), [&](double v) {
    const bool in_minus = v >= minus_lo - slack && v <= minus_hi + slack;
    const bool in_plus = v >= plus_lo - slack && v <= plus_hi + slack;
    return in_minus || in_plus;
  });
}

std::string SpectralReport::to_json() const {
  nlohmann::json j;
  j["dims"] = {{"n", n}, {"m", m}, {"k", k}};
  j["penalties"] = {{"beta", beta}, {"rho", rho}, {"tau", tau}};
  j["schur"] = {{"eigenvalues", schur_eigs},
                {"sigma2_fhat", sigma2_fhat},
                {"sigma2_gn", sigma2_gn},
                {"min_h_tilde_n", std::isfinite(min_h_tilde_n) ? nlohmann::json(min_h_tilde_n)
                                                               : nlohmann::json("inf")},
                {"printed_upper", printed_upper},
                {"derived_upper", derived_upper}};
  j["hessian"] = {{"alpha_h", alpha_h}, {"beta_h", beta_h}};
  j["ne"] = {{"alpha_ne", alpha_ne}, {"beta_ne", beta_ne}};
  j["pencil"] = {{"eigenvalues", pencil_eigs},
                 {"minus", {minus_lo, minus_hi}},
                 {"plus", {plus_lo, plus_hi}}};
  return j.dump();
}

}  // namespace pwlqp
