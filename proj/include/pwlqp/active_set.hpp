#pragma once

#include <cstdint>
#include <vector>

#include "pwlqp/pmm.hpp"

namespace pwlqp {

/// Bouligand selections of the projection Jacobians at the current iterate.
struct ActiveSets {
  std::vector<std::uint8_t> b_delta;  // n: box argument strictly inside
  std::vector<std::uint8_t> b1_h;     // s: hinge argument in (0, 1)
  std::vector<std::uint8_t> b2_h;     // l - s: l1 argument in [0, 1]

  std::vector<Index> b1_rows;  // hinge rows with b1_h set
  std::vector<Index> n1_rows;  // the remaining hinge rows
  std::vector<Index> B;        // variables in b_delta and outside every active l1 row
  std::vector<Index> N;

  Index reduced_size(Index n, Index m) const {
    return n + m + static_cast<Index>(b1_rows.size());
  }
  bool operator==(const ActiveSets& o) const {
    return b_delta == o.b_delta && b1_h == o.b1_h && b2_h == o.b2_h;
  }
};

ActiveSets select_bouligand(const InternalProblem& p, const Vector& x,
                            const PmmState& state);

/// Diagonal of H - Q: rho^-1 + beta (1 - B_delta) + beta (2D)^2 B2_h.
Vector hessian_shift(const InternalProblem& p, const PmmState& state,
                     const ActiveSets& sets);

/// Diag(Q) + hessian_shift.
Vector hessian_diag_approx(const InternalProblem& p, const PmmState& state,
                           const ActiveSets& sets);

/// Hinge columns of C^T restricted to the B1_h rows (n x |B1_h|).
SparseMatrix hinge_columns(const InternalProblem& p, const ActiveSets& sets);

/// Matrix-free symmetric quasi-definite operator on (dx, u2, u3):
///
///   [ -H   A^T   -Cb^T      ]
///   [  A   1/beta I   0     ]
///   [ -Cb   0    1/beta I   ]
///
/// where Cb holds the hinge rows in B1_h.
class ReducedOperator {
 public:
  ReducedOperator(const InternalProblem& p, Vector h_shift, SparseMatrix cb_t,
                  double beta);

  Index n() const { return n_; }
  Index m() const { return m_; }
  Index k() const { return k_; }
  Index size() const { return n_ + m_ + k_; }
  double beta() const { return beta_; }
  const Vector& h_shift() const { return h_shift_; }
  const SparseMatrix& cb_t() const { return cb_t_; }

  Vector apply(const Vector& in) const;
  Matrix to_dense() const;

 private:
  const InternalProblem* p_;
  Index n_, m_, k_;
  Vector h_shift_;
  SparseMatrix cb_t_;
  double beta_;
};

struct ReducedSystem {
  ReducedOperator op;
  Vector rhs;
  Vector w2_N;        // eliminated hinge multipliers Pi_[0,1](.) on N1_h
  Vector warm_start;  // (0, beta xi2, beta xi3_B): initial residual (grad, 0, 0)
};

/// Assembles the reduced Newton system whose x-block solves J dx = -grad phi.
ReducedSystem assemble_reduced_system(const InternalProblem& p, const Vector& x,
                                      const PmmState& state, const ActiveSets& sets);

/// J dx with J = Q + rho^-1 I + beta A^T A + beta C^T B_h C + beta (I - B_delta).
Vector newton_matvec(const InternalProblem& p, const PmmState& state,
                     const ActiveSets& sets, const Vector& dx);

}  // namespace pwlqp
