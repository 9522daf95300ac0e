#include "pwlqp/model.hpp"

#include <cmath>

namespace pwlqp {

ProblemSpec ProblemSpec::zeros(Index n) {
  ProblemSpec p;
  p.c = Vector::Zero(n);
  p.Q = SparseMatrix(n, n);
  p.A = SparseMatrix(0, n);
  p.b = Vector(0);
  p.Chat = SparseMatrix(0, n);
  p.dhat = Vector(0);
  p.l1_weights = Vector::Zero(n);
  p.lower = Vector::Constant(n, -kInf);
  p.upper = Vector::Constant(n, kInf);
  return p;
}

namespace {

bool all_finite(const SparseMatrix& M) {
  for (Index j = 0; j < M.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(M, j); it; ++it)
      if (!std::isfinite(it.value())) return false;
  return true;
}

SparseMatrix vstack(const SparseMatrix& top, const SparseMatrix& bottom) {
  SparseMatrix tt = top.transpose();
  SparseMatrix bt = bottom.transpose();
  return SparseMatrix(hstack(tt, bt).transpose());
}

}  // namespace

std::vector<std::string> validate(const ProblemSpec& spec) {
  std::vector<std::string> errs;
  const Index n = spec.n();
  auto check = [&](bool ok, const std::string& msg) {
    if (!ok) errs.push_back(msg);
  };
  check(spec.Q.rows() == n && spec.Q.cols() == n, "Q must be n x n");
  check(spec.A.cols() == n, "A must have n columns");
  check(spec.A.rows() == spec.m(), "A rows must match length of b");
  check(spec.Chat.cols() == n, "Chat must have n columns");
  check(spec.Chat.rows() == spec.s(), "Chat rows must match length of dhat");
  check(spec.l1_weights.size() == n, "l1_weights must have length n");
  check(spec.lower.size() == n && spec.upper.size() == n,
        "bounds must have length n");
  if (!errs.empty()) return errs;

  check(spec.c.allFinite(), "c has non-finite entries");
  check(spec.b.allFinite(), "b has non-finite entries");
  check(spec.dhat.allFinite(), "dhat has non-finite entries");
  check(std::isfinite(spec.objective_constant), "objective constant is not finite");
  check(all_finite(spec.Q), "Q has non-finite entries");
  check(all_finite(spec.A), "A has non-finite entries");
  check(all_finite(spec.Chat), "Chat has non-finite entries");

  for (Index j = 0; j < n; ++j) {
    const double lo = spec.lower[j], hi = spec.upper[j];
    if (std::isnan(lo) || std::isnan(hi) || lo == kInf || hi == -kInf)
      errs.push_back("invalid bound at index " + std::to_string(j));
    else if (lo > hi)
      errs.push_back("empty box at index " + std::to_string(j));
    const double w = spec.l1_weights[j];
    if (!std::isfinite(w))
      errs.push_back("non-finite l1 weight at index " + std::to_string(j));
    else if (w < 0.0)
      errs.push_back("negative l1 weight at index " + std::to_string(j));
  }

  SparseMatrix Qt = spec.Q.transpose();
  if (max_abs(SparseMatrix(spec.Q - Qt)) != 0.0) errs.push_back("Q is not symmetric");

  Vector row_nnz = Vector::Zero(spec.m());
  for (Index j = 0; j < spec.A.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(spec.A, j); it; ++it)
      if (it.value() != 0.0) row_nnz[it.index()] += 1.0;
  for (Index i = 0; i < spec.m(); ++i)
    if (row_nnz[i] == 0.0) errs.push_back("A has an all-zero row " + std::to_string(i));
  return errs;
}

void ensure_valid(const ProblemSpec& spec) {
  auto errs = validate(spec);
  if (errs.empty()) return;
  std::string msg = "invalid problem:";
  for (const auto& e : errs) msg += "\n  " + e;
  throw Error(ErrorCode::kInvalidArgument, msg);
}

InternalProblem internalize(const ProblemSpec& spec) {
  ensure_valid(spec);
  InternalProblem p;
  p.n = spec.n();
  p.m = spec.m();
  p.s = spec.s();
  p.c = spec.c;
  p.Q = spec.Q;
  p.Q.makeCompressed();
  p.q_diag = spec.Q.diagonal();
  p.A = spec.A;
  p.A.makeCompressed();
  p.At = spec.A.transpose();
  p.b = spec.b;
  p.lower = spec.lower;
  p.upper = spec.upper;
  p.constant = spec.objective_constant;

  std::vector<Triplet> l1_entries;
  for (Index j = 0; j < p.n; ++j) {
    const double w = spec.l1_weights[j];
    if (w <= 0.0) continue;
    const Index row = static_cast<Index>(p.l1_var.size());
    p.l1_var.push_back(j);
    l1_entries.emplace_back(static_cast<int>(j), static_cast<int>(row), 2.0 * w);
    p.c[j] -= w;
  }
  const Index nl1 = static_cast<Index>(p.l1_var.size());
  p.l = p.s + nl1;
  p.l1_scale.resize(nl1);
  for (Index r = 0; r < nl1; ++r) p.l1_scale[r] = 2.0 * spec.l1_weights[p.l1_var[r]];

  SparseMatrix l1_cols(p.n, nl1);
  l1_cols.setFromTriplets(l1_entries.begin(), l1_entries.end());
  SparseMatrix chat_t = spec.Chat.transpose();
  p.Ct = hstack(chat_t, l1_cols);
  p.Ct.makeCompressed();

  p.d = Vector::Zero(p.l);
  p.d.head(p.s) = spec.dhat;

  p.sources.reserve(static_cast<std::size_t>(p.l));
  for (Index i = 0; i < p.s; ++i)
    p.sources.push_back({HingeRowSource::Kind::kHinge, i});
  for (Index r = 0; r < nl1; ++r)
    p.sources.push_back({HingeRowSource::Kind::kL1, p.l1_var[r]});
  return p;
}

MaxTermHinge max2_to_hinge(const SparseMatrix& C1, const Vector& d1,
                           const SparseMatrix& C2, const Vector& d2) {
  require_dims(C1.rows() == C2.rows() && C1.cols() == C2.cols(),
               "max2_to_hinge: C1 and C2 shapes differ");
  require_dims(d1.size() == C1.rows() && d2.size() == C2.rows(),
               "max2_to_hinge: offset length mismatch");
  MaxTermHinge out;
  out.c_shift = spmv(C2, Vector(Vector::Ones(C2.rows())), true);
  out.C_block = C1 - C2;
  out.C_block.makeCompressed();
  out.d_block = d1 - d2;
  out.constant = d2.sum();
  return out;
}

void add_max_term(ProblemSpec& spec, const SparseMatrix& C1, const Vector& d1,
                  const SparseMatrix& C2, const Vector& d2) {
  require_dims(C1.cols() == spec.n(), "add_max_term: column count mismatch");
  MaxTermHinge piece = max2_to_hinge(C1, d1, C2, d2);
  spec.c += piece.c_shift;
  spec.objective_constant += piece.constant;
  spec.Chat = vstack(spec.Chat, piece.C_block);
  Vector d(spec.dhat.size() + piece.d_block.size());
  d << spec.dhat, piece.d_block;
  spec.dhat = d;
}

void add_abs_term(ProblemSpec& spec, const SparseMatrix& C, const Vector& d) {
  require_dims(C.cols() == spec.n() && C.rows() == d.size(),
               "add_abs_term: shape mismatch");
  spec.c -= spmv(C, Vector(Vector::Ones(C.rows())), true);
  spec.objective_constant -= d.sum();
  spec.Chat = vstack(spec.Chat, SparseMatrix(2.0 * C));
  Vector dd(spec.dhat.size() + d.size());
  dd << spec.dhat, 2.0 * d;
  spec.dhat = dd;
}

namespace {

bool outside_box(const Vector& x, const Vector& lower, const Vector& upper) {
  for (Index j = 0; j < x.size(); ++j)
    if (x[j] < lower[j] - kBoxViolationTol || x[j] > upper[j] + kBoxViolationTol)
      return true;
  return false;
}

}  // namespace

ObjectiveValue objective_value(const InternalProblem& p, const Vector& x) {
  require_dims(x.size() == p.n, "objective_value: x length mismatch");
  const Vector w = p.C_times(x) + p.d;
  ObjectiveValue out;
  out.value = p.c.dot(x) + 0.5 * x.dot(spmv(p.Q, x)) + w.cwiseMax(0.0).sum() +
              p.constant;
  out.box_violated = outside_box(x, p.lower, p.upper);
  return out;
}

ObjectiveValue objective_value(const ProblemSpec& spec, const Vector& x) {
  require_dims(x.size() == spec.n(), "objective_value: x length mismatch");
  const Vector w = spmv(spec.Chat, x) + spec.dhat;
  ObjectiveValue out;
  out.value = spec.c.dot(x) + 0.5 * x.dot(spmv(spec.Q, x)) +
              w.cwiseMax(0.0).sum() + spec.l1_weights.cwiseProduct(x).cwiseAbs().sum() +
              spec.objective_constant;
  out.box_violated = outside_box(x, spec.lower, spec.upper);
  return out;
}

KktResiduals kkt_residuals(const InternalProblem& p, const Vector& x,
                           const Vector& y1, const Vector& y2, const Vector& z) {
  require_dims(x.size() == p.n && z.size() == p.n, "kkt_residuals: n mismatch");
  require_dims(y1.size() == p.m, "kkt_residuals: y1 length mismatch");
  require_dims(y2.size() == p.l, "kkt_residuals: y2 length mismatch");

  const Vector stationarity =
      p.c + spmv(p.Q, x) - spmv(p.At, y1) + p.Ct_times(y2) + z;
  const Vector w = p.C_times(x) + p.d;
  const Vector primal_eq = spmv(p.A, x) - p.b;
  const Vector dual_box = y2 - project_unit_box(y2 + w);

  KktResiduals r;
  r.dual_res = stationarity.norm() / (1.0 + p.c.norm());
  r.primal_res = std::sqrt(primal_eq.squaredNorm() + dual_box.squaredNorm()) /
                 (1.0 + std::sqrt(p.b.squaredNorm() + p.d.squaredNorm()));
  r.complementarity_res = (x - project_box(x + z, p.lower, p.upper)).norm();
  r.max_res = std::max({r.dual_res, r.primal_res, r.complementarity_res});
  return r;
}

}  // namespace pwlqp
