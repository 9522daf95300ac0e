#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "pwlqp/model.hpp"

namespace pwlqp {

/// l scenarios (rows) by n assets (columns) of fractional returns.
struct ScenarioMatrix {
  Matrix returns;
  std::optional<double> benchmark;

  Index scenarios() const { return returns.rows(); }
  Index assets() const { return returns.cols(); }
  Vector mean() const { return returns.colwise().mean().transpose(); }
};

using SparseRow = std::vector<std::pair<Index, double>>;

struct LibsvmDataset {
  Vector labels;
  std::vector<SparseRow> rows;  // 0-based indices, sorted
  Index dim = 0;

  Index samples() const { return labels.size(); }
  /// l x dim feature matrix.
  SparseMatrix features() const;
};

enum class LabelMode { kRegression, kClassification };

/// LIBSVM text: "label idx:val idx:val ...", 1-based indices, '#' comments.
/// In classification mode labels {0, 1} and {-1, 1} map to -1/+1.
LibsvmDataset parse_libsvm(std::istream& in, LabelMode mode = LabelMode::kRegression);
LibsvmDataset parse_libsvm_file(const std::string& path,
                                LabelMode mode = LabelMode::kRegression);
void serialize_libsvm(std::ostream& out, const LibsvmDataset& ds);

/// Rectangular numeric CSV; a first row with any non-numeric cell is a header.
ScenarioMatrix parse_returns_csv(std::istream& in);
ScenarioMatrix parse_returns_csv_file(const std::string& path);

/// min t + 1/(l alpha) sum_i (-xi_i^T x - t)_+
/// s.t. 1^T x = 1, mu^T x - slack = r, 0 <= x <= a_u, slack >= 0.
/// Variables are (x, t, slack). Without r the mean constraint uses
/// r = min_j mu_j, which every feasible x satisfies.
ProblemSpec gen_cvar(const ScenarioMatrix& sc, double alpha, std::optional<double> r,
                     double a_u);

/// min 1/l sum_i ((mu - xi_i)^T x)_+ + w ||x||_1 with the constraint block of
/// gen_cvar. Variables are (x, slack).
ProblemSpec gen_masd(const ScenarioMatrix& sc, std::optional<double> r, double a_u,
                     double l1_weight = 0.0);

/// Penalized quantile regression over x = (beta0, beta).
ProblemSpec gen_quantile(const LibsvmDataset& ds, double alpha, double lambda, double tau);

/// Elastic-net linear SVM over x = (beta0, beta); labels must be +-1.
ProblemSpec gen_svm(const LibsvmDataset& ds, double lambda, double tau1, double tau2);

/// Factor-model daily returns: r_ij = m_j + b_j f_i + e_ij.
ScenarioMatrix synthetic_returns(Index scenarios, Index assets, std::uint64_t seed);

/// Gaussian features with the given density; labels from a planted linear
/// model (signs in classification mode).
LibsvmDataset synthetic_dataset(Index samples, Index dim, double density, LabelMode mode,
                                std::uint64_t seed);

}  // namespace pwlqp
