#pragma once

#include <limits>
#include <string>
#include <vector>

#include "pwlqp/linalg.hpp"
#include "pwlqp/projection.hpp"

namespace pwlqp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// User-facing problem instance:
///
///   min  c^T x + 1/2 x^T Q x + sum_i ((Chat x + dhat)_i)_+ + ||diag(l1_weights) x||_1
///        + objective_constant
///   s.t. A x = b,  lower <= x <= upper.
///
/// Infinite bounds are IEEE infinities.
struct ProblemSpec {
  Vector c;
  SparseMatrix Q;
  SparseMatrix A;
  Vector b;
  SparseMatrix Chat;
  Vector dhat;
  Vector l1_weights;
  Vector lower;
  Vector upper;
  double objective_constant = 0.0;

  Index n() const { return c.size(); }
  Index m() const { return b.size(); }
  Index s() const { return dhat.size(); }

  /// Empty instance with n free variables and no terms.
  static ProblemSpec zeros(Index n);
};

/// Which source term an internal hinge row came from.
struct HingeRowSource {
  enum class Kind { kHinge, kL1 } kind;
  Index index;  // row of Chat, or variable of the l1 term
};

/// Canonical form in which every nonsmooth term is a hinge row:
///
///   min c^T x + 1/2 x^T Q x + sum_{i<l} ((C x + d)_i)_+ + constant
///
/// Rows [0, s) are Chat/dhat. Rows [s, l) encode the l1 term through
/// |w x_j| = -w x_j + (2 w x_j)_+, one row per variable with positive weight.
struct InternalProblem {
  Index n = 0, m = 0, s = 0, l = 0;
  Vector c;
  SparseMatrix Q;
  Vector q_diag;
  SparseMatrix A;
  SparseMatrix At;
  Vector b;
  SparseMatrix Ct;  // n x l; column i is row i of C
  Vector d;
  std::vector<Index> l1_var;  // variable index of rows s..l-1
  Vector l1_scale;            // 2 * weight of rows s..l-1
  Vector lower;
  Vector upper;
  double constant = 0.0;
  std::vector<HingeRowSource> sources;

  Index num_l1() const { return l - s; }

  /// C x
  Vector C_times(const Vector& x) const { return spmv(Ct, x, true); }
  /// C^T y
  Vector Ct_times(const Vector& y) const { return spmv(Ct, y); }
};

/// Returns every violated structural invariant; empty means valid.
std::vector<std::string> validate(const ProblemSpec& spec);

/// Throws kInvalidArgument listing the violations if `spec` is not valid.
void ensure_valid(const ProblemSpec& spec);

InternalProblem internalize(const ProblemSpec& spec);

/// max{C1 x + d1, C2 x + d2} (row-wise sum) as linear + hinge pieces:
/// sum_i max{...} = c_shift^T x + constant + sum_i ((C_block x + d_block)_i)_+.
struct MaxTermHinge {
  Vector c_shift;
  SparseMatrix C_block;
  Vector d_block;
  double constant = 0.0;
};

MaxTermHinge max2_to_hinge(const SparseMatrix& C1, const Vector& d1,
                           const SparseMatrix& C2, const Vector& d2);

/// Appends sum_i max{(C1 x + d1)_i, (C2 x + d2)_i} to the objective.
void add_max_term(ProblemSpec& spec, const SparseMatrix& C1, const Vector& d1,
                  const SparseMatrix& C2, const Vector& d2);

/// Appends ||C x + d||_1 to the objective using
/// ||w||_1 = -1^T w + sum_i (2 w_i)_+.
void add_abs_term(ProblemSpec& spec, const SparseMatrix& C, const Vector& d);

struct ObjectiveValue {
  double value = 0.0;
  bool box_violated = false;
};

inline constexpr double kBoxViolationTol = 1e-8;

ObjectiveValue objective_value(const InternalProblem& p, const Vector& x);

/// Objective of the user-facing form, evaluated term by term.
ObjectiveValue objective_value(const ProblemSpec& spec, const Vector& x);

struct KktResiduals {
  double dual_res = 0.0;
  double primal_res = 0.0;
  double complementarity_res = 0.0;
  double max_res = 0.0;
};

KktResiduals kkt_residuals(const InternalProblem& p, const Vector& x,
                           const Vector& y1, const Vector& y2, const Vector& z);

}  // namespace pwlqp
