#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "pwlqp/active_set.hpp"

namespace pwlqp {

template <typename Scalar>
struct MinresResult {
  VectorX<Scalar> x;
  Index iters = 0;
  bool converged = false;
  bool breakdown = false;
  Scalar initial_norm = 0;   // ||r0|| in the preconditioner norm
  Scalar residual_norm = 0;  // final recurrence estimate, same norm
  Index tightenings = 0;     // times `check` rejected a converged iterate
};

/// Identity preconditioner for minres_solve.
struct NoPreconditioner {
  template <typename V>
  V apply(const V& r) const { return r; }
};

/// Dense symmetric matrix wrapped as an operator (tests, small fixtures).
template <typename Scalar>
struct DenseOperator {
  MatrixX<Scalar> M;
  VectorX<Scalar> apply(const VectorX<Scalar>& v) const { return M * v; }
};

/// Acceptance test that always passes.
struct AcceptAll {
  template <typename V>
  double operator()(const V&) const { return 0.0; }
};

/// Preconditioned MINRES for a symmetric operator `op` and a symmetric
/// positive definite preconditioner `prec` (prec.apply(r) = P^-1 r).
/// Stops when the preconditioned residual norm drops below
/// rtol * ||r0||_P^-1 and `check(x)` returns a ratio <= 1, or after
/// max_iters iterations. A ratio above 1 lowers the threshold to
/// phibar / (4 ratio) and the iteration continues.
template <typename Scalar, typename Op, typename Prec = NoPreconditioner,
          typename Check = AcceptAll>
MinresResult<Scalar> minres_solve(const Op& op, const VectorX<Scalar>& rhs,
                                  const VectorX<Scalar>& x0, Scalar rtol,
                                  Index max_iters, const Prec& prec = Prec{},
                                  const Check& check = Check{}) {
  require_dims(rhs.size() == x0.size(), "minres_solve: rhs and x0 lengths differ");
  using V = VectorX<Scalar>;
  const Index N = rhs.size();
  MinresResult<Scalar> res;
  res.x = x0;

  V r1 = rhs - op.apply(x0);
  V y = prec.apply(r1);
  Scalar ry = r1.dot(y);
  if (ry < Scalar(0))
    throw Error(ErrorCode::kNotPositiveDefinite, "minres_solve: preconditioner is indefinite");
  const Scalar beta1 = std::sqrt(ry);
  res.initial_norm = beta1;
  res.residual_norm = beta1;
  if (beta1 == Scalar(0) || N == 0) {
    res.converged = true;
    return res;
  }
  Scalar threshold = rtol * beta1;

  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  Scalar oldb = 0, beta = beta1, dbar = 0, epsln = 0, phibar = beta1;
  Scalar cs = -1, sn = 0;
  V w = V::Zero(N), w1 = V::Zero(N), w2 = V::Zero(N);
  V r2 = r1;

  for (Index itn = 1; itn <= max_iters; ++itn) {
    const V v = y / beta;
    y = op.apply(v);
    if (itn >= 2) y -= (beta / oldb) * r1;
    const Scalar alfa = v.dot(y);
    y -= (alfa / beta) * r2;
    r1 = r2;
    r2 = y;
    y = prec.apply(r2);
    oldb = beta;
    ry = r2.dot(y);
    if (ry < Scalar(0))
      throw Error(ErrorCode::kNotPositiveDefinite, "minres_solve: preconditioner is indefinite");
    beta = std::sqrt(ry);

    const Scalar oldeps = epsln;
    const Scalar delta = cs * dbar + sn * alfa;
    const Scalar gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const Scalar gamma = std::max(std::hypot(gbar, beta), eps);
    cs = gbar / gamma;
    sn = beta / gamma;
    const Scalar phi = cs * phibar;
    phibar = sn * phibar;

    w1 = w2;
    w2 = w;
    w = (v - oldeps * w1 - delta * w2) / gamma;
    res.x += phi * w;
    res.iters = itn;
    res.residual_norm = phibar;

    if (beta <= eps * beta1) {
      // invariant Krylov subspace: the current iterate is exact
      res.breakdown = true;
      res.converged = phibar <= threshold && check(res.x) <= Scalar(1);
      return res;
    }
    if (phibar <= threshold) {
      const Scalar ratio = check(res.x);
      if (ratio <= Scalar(1)) {
        res.converged = true;
        return res;
      }
      ++res.tightenings;
      threshold = phibar / (Scalar(4) * ratio);
    }
  }
  return res;
}

/// Key of everything the preconditioner depends on.
struct PreconditionerSignature {
  std::vector<std::uint8_t> b_delta, b1_h, b2_h;
  double beta = 0.0;
  double rho = 0.0;

  bool operator==(const PreconditionerSignature&) const = default;
  std::size_t hash() const;
};

/// Block-diagonal preconditioner blkdiag(H~, G E G^T + beta^-1 I) with
/// G = [A; -Cb] and E = H~^-1 on B, 0 on N.
struct Preconditioner {
  Vector h_tilde;
  SparseMatrix schur;
  std::shared_ptr<const CholeskyFactor> schur_factor;
  PreconditionerSignature signature;

  Index size() const { return h_tilde.size() + schur.rows(); }
  Vector apply(const Vector& r) const;
};

Vector apply_preconditioner(const Preconditioner& P, const Vector& r);

/// Compound matrix G = [A; -Cb] for the current active sets.
SparseMatrix compound_matrix(const InternalProblem& p, const ActiveSets& sets);

/// E of the Schur approximation: 1 / h_tilde on B, 0 on N.
Vector dropping_weights(const Vector& h_tilde, const ActiveSets& sets);

PreconditionerSignature make_signature(const PmmState& state, const ActiveSets& sets);

/// Holds the last factorized preconditioner of one outer solve.
class PreconditionerCache {
 public:
  std::shared_ptr<const Preconditioner> current;
  bool activated = false;  // a preconditioned solve has been needed
  Index factorizations = 0;
  Index hits = 0;
};

struct BuiltPreconditioner {
  std::shared_ptr<const Preconditioner> P;
  bool did_factorize = false;
};

BuiltPreconditioner build_preconditioner(const InternalProblem& p, const PmmState& state,
                                         const ActiveSets& sets, PreconditionerCache& cache);

struct PolicyResult {
  Vector solution;
  Index iters = 0;  // both phases
  Index unpreconditioned_iters = 0;
  Index preconditioned_iters = 0;
  Index factorizations = 0;
  bool converged = false;
  bool preconditioned = false;
  double initial_norm = 0.0;   // of the phase that produced `solution`
  double residual_norm = 0.0;  // MINRES estimate, same norm
  Index tightenings = 0;
};

/// Returns true_residual / target for an iterate; <= 1 accepts it.
using ResidualCheck = std::function<double(const Vector&)>;

/// Unpreconditioned MINRES up to the trigger; on failure fetch or build the
/// preconditioner and re-solve up to max_iters. `check`, when given, must
/// also accept the iterate.
PolicyResult solve_with_policy(const ReducedOperator& op, const Vector& rhs,
                               const Vector& x0, const InternalProblem& p,
                               const PmmState& state, const ActiveSets& sets,
                               PreconditionerCache& cache, const MinresConfig& cfg,
                               double rtol, const ResidualCheck& check = {});

/// Dense spectral diagnostics of the Schur approximation and of the
/// preconditioned reduced operator.
struct SpectralReport {
  Index n = 0, m = 0, k = 0;
  double beta = 0.0, rho = 0.0, tau = 0.0;

  std::vector<double> schur_eigs;  // of the pencil (S_P, S), i.e. S^-1 S_P
  double sigma2_fhat = 0.0;        // sigma_max^2([A; -Chat])
  double sigma2_gn = 0.0;          // sigma_max^2 of the N columns of G
  double min_h_tilde_n = 0.0;
  double printed_upper = 0.0;      // 1 + sigma2_fhat / (2 + tau / beta^2)
  double derived_upper = 0.0;      // 1 + beta sigma2_gn / min_N h_tilde

  double alpha_h = 0.0, beta_h = 0.0;
  double alpha_ne = 0.0, beta_ne = 0.0;
  std::vector<double> pencil_eigs;  // of (M, P)
  double minus_lo = 0.0, minus_hi = 0.0, plus_lo = 0.0, plus_hi = 0.0;

  bool schur_lower_ok(double slack) const;
  bool schur_printed_upper_ok(double slack) const;
  bool schur_derived_upper_ok(double slack) const;
  bool intervals_ok(double slack) const;
  std::string to_json() const;
};

SpectralReport spectral_check(const InternalProblem& p, const PmmState& state,
                              const ActiveSets& sets);

}  // namespace pwlqp
