#include "pwlqp/linalg.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace pwlqp {

CholeskyFactor::CholeskyFactor(const SparseMatrix& S) : dim_(S.rows()) {
  require_dims(S.rows() == S.cols(), "cholesky: matrix is not square");
  if (dim_ == 0) return;
  if (dim_ <= kDenseCutoff) {
    auto llt = std::make_shared<Eigen::LLT<Matrix>>(Matrix(S));
    if (llt->info() != Eigen::Success)
      throw Error(ErrorCode::kNotPositiveDefinite,
                  "cholesky: matrix is not positive definite");
    dense_ = std::move(llt);
    return;
  }
  auto llt = std::make_shared<SparseLLT>();
  llt->compute(S);
  if (llt->info() != Eigen::Success)
    throw Error(ErrorCode::kNotPositiveDefinite,
                "cholesky: matrix is not positive definite");
  sparse_ = std::move(llt);
}

Vector CholeskyFactor::solve(const Vector& r) const {
  require_dims(r.size() == dim_, "cholesky solve: rhs length mismatch");
  if (dim_ == 0) return Vector(0);
  if (dense_) return dense_->solve(r);
  return sparse_->solve(r);
}

Matrix CholeskyFactor::reconstruct() const {
  if (dim_ == 0) return Matrix(0, 0);
  if (dense_) {
    Matrix L = dense_->matrixL();
    return L * L.transpose();
  }
  // P^T L L^T P in the original ordering
  Matrix L = Matrix(sparse_->matrixL());
  Matrix LLt = L * L.transpose();
  const auto& perm = sparse_->permutationP();
  return perm.transpose() * LLt * perm;
}

std::vector<double> dense_eigs(const Matrix& S, const std::optional<Matrix>& B) {
  require_dims(S.rows() == S.cols(), "dense_eigs: matrix is not square");
  if (S.rows() > kDenseEigsCap)
    throw Error(ErrorCode::kCapacityExceeded,
                "dense_eigs: dimension " + std::to_string(S.rows()) +
                    " exceeds cap " + std::to_string(kDenseEigsCap));
  if (S.rows() == 0) return {};
  Vector values;
  if (B) {
    require_dims(B->rows() == S.rows() && B->cols() == S.cols(),
                 "dense_eigs: pencil dimension mismatch");
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(S, *B,
                                                       Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw Error(ErrorCode::kNotPositiveDefinite,
                  "dense_eigs: pencil matrix is not positive definite");
    values = es.eigenvalues();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
    values = es.eigenvalues();
  }
  return {values.data(), values.data() + values.size()};
}

SparseMatrix identity(Index n) {
  SparseMatrix I(n, n);
  I.setIdentity();
  return I;
}

SparseMatrix from_dense(const Matrix& M) {
  std::vector<Triplet> t;
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = 0; i < M.rows(); ++i)
      if (M(i, j) != 0.0)
        t.emplace_back(static_cast<int>(i), static_cast<int>(j), M(i, j));
  SparseMatrix out(M.rows(), M.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

SparseMatrix select_columns(const SparseMatrix& M, std::span<const Index> cols) {
  SparseMatrix out(M.rows(), static_cast<Index>(cols.size()));
  Index nnz = 0;
  for (Index j : cols) nnz += M.col(j).nonZeros();
  out.reserve(nnz);
  for (std::size_t k = 0; k < cols.size(); ++k) {
    out.startVec(static_cast<Index>(k));
    for (SparseMatrix::InnerIterator it(M, cols[k]); it; ++it)
      out.insertBack(it.index(), static_cast<Index>(k)) = it.value();
  }
  out.finalize();
  return out;
}

SparseMatrix hstack(const SparseMatrix& L, const SparseMatrix& R) {
  require_dims(L.rows() == R.rows(), "hstack: row count mismatch");
  SparseMatrix out(L.rows(), L.cols() + R.cols());
  out.reserve(L.nonZeros() + R.nonZeros());
  for (Index j = 0; j < L.cols(); ++j) {
    out.startVec(j);
    for (SparseMatrix::InnerIterator it(L, j); it; ++it)
      out.insertBack(it.index(), j) = it.value();
  }
  for (Index j = 0; j < R.cols(); ++j) {
    out.startVec(L.cols() + j);
    for (SparseMatrix::InnerIterator it(R, j); it; ++it)
      out.insertBack(it.index(), L.cols() + j) = it.value();
  }
  out.finalize();
  return out;
}

double max_abs(const SparseMatrix& M) {
  double m = 0.0;
  for (Index j = 0; j < M.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(M, j); it; ++it)
      m = std::max(m, std::abs(it.value()));
  return m;
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

double parse_double(const std::string& tok, std::size_t line) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw Error(ErrorCode::kParse, "matrix market: bad value '" + tok +
                                       "' on line " + std::to_string(line));
  return v;
}

}  // namespace

SparseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line))
    throw Error(ErrorCode::kParse, "matrix market: empty input");
  ++lineno;
  std::istringstream banner(lower(line));
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%matrixmarket" || object != "matrix" || format != "coordinate")
    throw Error(ErrorCode::kParse,
                "matrix market: expected '%%MatrixMarket matrix coordinate'");
  if (field != "real" && field != "integer")
    throw Error(ErrorCode::kParse, "matrix market: unsupported field '" + field + "'");
  const bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general")
    throw Error(ErrorCode::kParse,
                "matrix market: unsupported symmetry '" + symmetry + "'");

  Index rows = -1, cols = -1, nnz = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream hdr(line);
    if (!(hdr >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0)
      throw Error(ErrorCode::kParse,
                  "matrix market: bad size line " + std::to_string(lineno));
    break;
  }
  if (rows < 0) throw Error(ErrorCode::kParse, "matrix market: missing size line");

  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));
  Index seen = 0;
  while (seen < nnz && std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream entry(line);
    Index i = 0, j = 0;
    std::string val;
    if (!(entry >> i >> j >> val))
      throw Error(ErrorCode::kParse,
                  "matrix market: bad entry on line " + std::to_string(lineno));
    if (i < 1 || i > rows || j < 1 || j > cols)
      throw Error(ErrorCode::kParse,
                  "matrix market: index out of range on line " + std::to_string(lineno));
    const double v = parse_double(val, lineno);
    t.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
    if (symmetric && i != j)
      t.emplace_back(static_cast<int>(j - 1), static_cast<int>(i - 1), v);
    ++seen;
  }
  if (seen != nnz)
    throw Error(ErrorCode::kParse, "matrix market: expected " + std::to_string(nnz) +
                                       " entries, found " + std::to_string(seen));
  SparseMatrix M(rows, cols);
  M.setFromTriplets(t.begin(), t.end());
  M.makeCompressed();
  return M;
}

void write_matrix_market(std::ostream& out, const SparseMatrix& M) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << M.rows() << ' ' << M.cols() << ' ' << M.nonZeros() << '\n';
  char buf[64];
  for (Index j = 0; j < M.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(M, j); it; ++it) {
      std::snprintf(buf, sizeof buf, "%.17g", it.value());
      out << it.index() + 1 << ' ' << j + 1 << ' ' << buf << '\n';
    }
}

SparseMatrix read_matrix_market_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  return read_matrix_market(in);
}

void write_matrix_market_file(const std::string& path, const SparseMatrix& M) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  write_matrix_market(out, M);
}

}  // namespace pwlqp
