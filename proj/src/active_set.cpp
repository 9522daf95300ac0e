#include "pwlqp/active_set.hpp"

namespace pwlqp {

ActiveSets select_bouligand(const InternalProblem& p, const Vector& x,
                            const PmmState& state) {
  require_dims(x.size() == p.n, "select_bouligand: x length must be n");
  ActiveSets s;
  s.b_delta.assign(static_cast<std::size_t>(p.n), 0);
  s.b1_h.assign(static_cast<std::size_t>(p.s), 0);
  s.b2_h.assign(static_cast<std::size_t>(p.num_l1()), 0);

  for (Index j = 0; j < p.n; ++j) {
    const double u = state.z[j] / state.beta + x[j];
    s.b_delta[j] = (u > p.lower[j] && u < p.upper[j]) ? 1 : 0;
  }
  const Vector w = state.y2 + state.beta * (p.C_times(x) + p.d);
  for (Index i = 0; i < p.s; ++i) {
    s.b1_h[i] = (w[i] > 0.0 && w[i] < 1.0) ? 1 : 0;
    (s.b1_h[i] ? s.b1_rows : s.n1_rows).push_back(i);
  }
  std::vector<std::uint8_t> l1_active(static_cast<std::size_t>(p.n), 0);
  for (Index r = 0; r < p.num_l1(); ++r) {
    const double v = w[p.s + r];
    s.b2_h[r] = (v >= 0.0 && v <= 1.0) ? 1 : 0;
    if (s.b2_h[r]) l1_active[p.l1_var[r]] = 1;
  }
  for (Index j = 0; j < p.n; ++j)
    (s.b_delta[j] && !l1_active[j] ? s.B : s.N).push_back(j);
  return s;
}

Vector hessian_shift(const InternalProblem& p, const PmmState& state,
                     const ActiveSets& sets) {
  Vector h = Vector::Constant(p.n, 1.0 / state.rho);
  for (Index j = 0; j < p.n; ++j)
    if (!sets.b_delta[j]) h[j] += state.beta;
  for (Index r = 0; r < p.num_l1(); ++r)
    if (sets.b2_h[r]) h[p.l1_var[r]] += state.beta * p.l1_scale[r] * p.l1_scale[r];
  return h;
}

Vector hessian_diag_approx(const InternalProblem& p, const PmmState& state,
                           const ActiveSets& sets) {
  return p.q_diag + hessian_shift(p, state, sets);
}

SparseMatrix hinge_columns(const InternalProblem& p, const ActiveSets& sets) {
  return select_columns(p.Ct, sets.b1_rows);
}

ReducedOperator::ReducedOperator(const InternalProblem& p, Vector h_shift,
                                 SparseMatrix cb_t, double beta)
    : p_(&p),
      n_(p.n),
      m_(p.m),
      k_(cb_t.cols()),
      h_shift_(std::move(h_shift)),
      cb_t_(std::move(cb_t)),
      beta_(beta) {
  require_dims(h_shift_.size() == n_ && cb_t_.rows() == n_,
               "ReducedOperator: block sizes disagree with the problem");
}

Vector ReducedOperator::apply(const Vector& in) const {
  require_dims(in.size() == size(), "ReducedOperator: input length mismatch");
  const Vector u1 = in.head(n_);
  const Vector u2 = in.segment(n_, m_);
  const Vector u3 = in.tail(k_);
  Vector out(size());
  out.head(n_) = -(spmv(p_->Q, u1) + h_shift_.cwiseProduct(u1)) + spmv(p_->At, u2) -
                 spmv(cb_t_, u3);
  out.segment(n_, m_) = spmv(p_->A, u1) + u2 / beta_;
  out.tail(k_) = -spmv(cb_t_, u1, true) + u3 / beta_;
  return out;
}

Matrix ReducedOperator::to_dense() const {
  const Index N = size();
  Matrix M(N, N);
  Vector e = Vector::Zero(N);
  for (Index j = 0; j < N; ++j) {
    e[j] = 1.0;
    M.col(j) = apply(e);
    e[j] = 0.0;
  }
  return M;
}

ReducedSystem assemble_reduced_system(const InternalProblem& p, const Vector& x,
                                      const PmmState& state, const ActiveSets& sets) {
  require_dims(x.size() == p.n, "assemble_reduced_system: x length must be n");
  require_dims(static_cast<Index>(sets.b_delta.size()) == p.n &&
                   static_cast<Index>(sets.b1_h.size()) == p.s &&
                   static_cast<Index>(sets.b2_h.size()) == p.num_l1(),
               "assemble_reduced_system: active sets do not match the problem");
  const double beta = state.beta;
  const Vector pi = project_unit_box(state.y2 + beta * (p.C_times(x) + p.d));
  const Vector u = state.z / beta + x;

  // xi1 carries the l1 multipliers and the box term; hinge rows enter below
  Vector pi_l1 = pi;
  pi_l1.head(p.s).setZero();
  Vector xi1 = p.c + spmv(p.Q, x) + p.Ct_times(pi_l1) +
               beta * (u - project_box(u, p.lower, p.upper)) + (x - state.anchor) / state.rho;
  const Vector xi2 = state.y1 / beta - (spmv(p.A, x) - p.b);

  const auto k = static_cast<Index>(sets.b1_rows.size());
  const auto nn = static_cast<Index>(sets.n1_rows.size());
  Vector xi3_B(k), w2_N(nn);
  for (Index i = 0; i < k; ++i) xi3_B[i] = pi[sets.b1_rows[i]] / beta;
  for (Index i = 0; i < nn; ++i) w2_N[i] = pi[sets.n1_rows[i]];

  const SparseMatrix cn_t = select_columns(p.Ct, sets.n1_rows);
  xi1 += spmv(cn_t, w2_N);

  ReducedSystem sys{ReducedOperator(p, hessian_shift(p, state, sets),
                                    hinge_columns(p, sets), beta),
                    Vector(p.n + p.m + k), w2_N, Vector::Zero(p.n + p.m + k)};
  sys.rhs << xi1, xi2, xi3_B;
  sys.warm_start.segment(p.n, p.m) = beta * xi2;
  sys.warm_start.tail(k) = beta * xi3_B;
  return sys;
}

Vector newton_matvec(const InternalProblem& p, const PmmState& state,
                     const ActiveSets& sets, const Vector& dx) {
  require_dims(dx.size() == p.n, "newton_matvec: dx length must be n");
  const double beta = state.beta;
  Vector out = spmv(p.Q, dx) + hessian_shift(p, state, sets).cwiseProduct(dx);
  out += beta * spmv(p.At, spmv(p.A, dx));
  const Vector Cdx = p.C_times(dx);
  Vector masked = Vector::Zero(p.l);
  for (Index i : sets.b1_rows) masked[i] = Cdx[i];
  // l1 rows are already inside hessian_shift
  out += beta * p.Ct_times(masked);
  return out;
}

}  // namespace pwlqp
