#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <cmath>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pwlqp/error.hpp"

namespace pwlqp {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using SparseMatrixX = Eigen::SparseMatrix<Scalar, Eigen::ColMajor, int>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;
using SparseMatrix = SparseMatrixX<double>;
using Triplet = Eigen::Triplet<double, int>;

/// Sparse matrix-vector product, M*v or M^T*v.
template <typename Scalar>
VectorX<Scalar> spmv(const SparseMatrixX<Scalar>& M, const VectorX<Scalar>& v,
                     bool transpose = false) {
  if (transpose) {
    require_dims(M.rows() == v.size(), "spmv: rows(M) != size(v)");
    VectorX<Scalar> out(M.cols());
    // column-wise dot products, fixed order
    for (Index j = 0; j < M.outerSize(); ++j) {
      Scalar acc = 0;
      for (typename SparseMatrixX<Scalar>::InnerIterator it(M, j); it; ++it)
        acc += it.value() * v[it.index()];
      out[j] = acc;
    }
    return out;
  }
  require_dims(M.cols() == v.size(), "spmv: cols(M) != size(v)");
  VectorX<Scalar> out = VectorX<Scalar>::Zero(M.rows());
  for (Index j = 0; j < M.outerSize(); ++j) {
    const Scalar vj = v[j];
    if (vj == Scalar(0)) continue;
    for (typename SparseMatrixX<Scalar>::InnerIterator it(M, j); it; ++it)
      out[it.index()] += it.value() * vj;
  }
  return out;
}

/// Assembles G * diag(e) * G^T + shift * I. Columns with e_i == 0 are
/// dropped before the product.
template <typename Scalar>
SparseMatrixX<Scalar> gram_plus_shift(const SparseMatrixX<Scalar>& G,
                                      const VectorX<Scalar>& e, Scalar shift) {
  require_dims(G.cols() == e.size(), "gram_plus_shift: cols(G) != size(e)");
  if (shift < Scalar(0))
    throw Error(ErrorCode::kInvalidArgument, "gram_plus_shift: negative shift");
  std::vector<Eigen::Triplet<Scalar, int>> kept;
  kept.reserve(static_cast<std::size_t>(G.nonZeros()));
  for (Index j = 0; j < G.outerSize(); ++j) {
    if (e[j] < Scalar(0))
      throw Error(ErrorCode::kInvalidArgument,
                  "gram_plus_shift: negative weight at column " +
                      std::to_string(j));
    if (e[j] == Scalar(0)) continue;
    const Scalar w = std::sqrt(e[j]);
    for (typename SparseMatrixX<Scalar>::InnerIterator it(G, j); it; ++it)
      kept.emplace_back(static_cast<int>(it.index()), static_cast<int>(j),
                        it.value() * w);
  }
  SparseMatrixX<Scalar> scaled(G.rows(), G.cols());
  scaled.setFromTriplets(kept.begin(), kept.end());
  SparseMatrixX<Scalar> out = scaled * SparseMatrixX<Scalar>(scaled.transpose());
  if (shift > Scalar(0)) {
    SparseMatrixX<Scalar> eye(G.rows(), G.rows());
    eye.setIdentity();
    out += shift * eye;
  }
  out.makeCompressed();
  return out;
}

/// Cholesky factor of a symmetric positive definite sparse matrix.
///
/// Matrices of dimension <= kDenseCutoff are factorized densely; larger ones
/// use a simplicial factorization after an approximate minimum degree
/// ordering. Immutable after construction.
class CholeskyFactor {
 public:
  static constexpr Index kDenseCutoff = 64;

  explicit CholeskyFactor(const SparseMatrix& S);

  Index dim() const { return dim_; }
  Vector solve(const Vector& r) const;

  /// Dense L*L^T reconstruction in the original ordering (tests only).
  Matrix reconstruct() const;

 private:
  using SparseLLT =
      Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;
  Index dim_ = 0;
  std::shared_ptr<const Eigen::LLT<Matrix>> dense_;
  std::shared_ptr<const SparseLLT> sparse_;
};

inline CholeskyFactor cholesky(const SparseMatrix& S) { return CholeskyFactor(S); }
inline Vector solve(const CholeskyFactor& F, const Vector& r) { return F.solve(r); }

/// All eigenvalues (ascending) of a symmetric matrix, or of the pencil
/// (S, B) with B symmetric positive definite. Capped at dimension 500.
std::vector<double> dense_eigs(const Matrix& S,
                               const std::optional<Matrix>& B = std::nullopt);

inline constexpr Index kDenseEigsCap = 500;

SparseMatrix identity(Index n);
SparseMatrix from_dense(const Matrix& M);

/// Columns `cols` of M, in the given order.
SparseMatrix select_columns(const SparseMatrix& M, std::span<const Index> cols);

/// Horizontal concatenation [L R] of column-compressed matrices.
SparseMatrix hstack(const SparseMatrix& L, const SparseMatrix& R);

/// Max absolute entry of a sparse matrix (0 for an empty one).
double max_abs(const SparseMatrix& M);

/// Matrix Market coordinate format, real general/symmetric.
SparseMatrix read_matrix_market(std::istream& in);
void write_matrix_market(std::ostream& out, const SparseMatrix& M);
SparseMatrix read_matrix_market_file(const std::string& path);
void write_matrix_market_file(const std::string& path, const SparseMatrix& M);

}  // namespace pwlqp
