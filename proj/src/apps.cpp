#include "pwlqp/apps.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace pwlqp {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_index(std::string_view s, long long& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

[[noreturn]] void parse_error(const std::string& what, std::size_t line) {
  throw Error(ErrorCode::kParse, what + " at line " + std::to_string(line));
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return in;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_portfolio(const ScenarioMatrix& sc, double a_u) {
  if (sc.scenarios() < 1 || sc.assets() < 1)
    throw Error(ErrorCode::kInvalidArgument, "scenario matrix is empty");
  if (!sc.returns.allFinite())
    throw Error(ErrorCode::kInvalidArgument, "scenario matrix has non-finite returns");
  if (!(a_u > 0.0 && a_u <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "upper bound a_u must lie in (0, 1]");
}

// budget row and mean row over n assets followed by `extra` columns; the
// slack is the last column
void portfolio_constraints(ProblemSpec& spec, const Vector& mu, double r, Index extra) {
  const Index n = mu.size();
  const Index cols = n + extra;
  std::vector<Triplet> t;
  for (Index j = 0; j < n; ++j) {
    t.emplace_back(0, static_cast<int>(j), 1.0);
    if (mu[j] != 0.0) t.emplace_back(1, static_cast<int>(j), mu[j]);
  }
  t.emplace_back(1, static_cast<int>(cols - 1), -1.0);
  spec.A = SparseMatrix(2, cols);
  spec.A.setFromTriplets(t.begin(), t.end());
  spec.b = Vector(2);
  spec.b << 1.0, r;
}

void check_dataset(const LibsvmDataset& ds) {
  if (ds.samples() < 1) throw Error(ErrorCode::kInvalidArgument, "dataset has no samples");
  if (static_cast<Index>(ds.rows.size()) != ds.samples())
    throw Error(ErrorCode::kInvalidArgument, "dataset rows and labels disagree");
}

}  // namespace

SparseMatrix LibsvmDataset::features() const {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (const auto& [j, v] : rows[i])
      t.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
  SparseMatrix X(static_cast<Index>(rows.size()), dim);
  X.setFromTriplets(t.begin(), t.end());
  return X;
}

LibsvmDataset parse_libsvm(std::istream& in, LabelMode mode) {
  LibsvmDataset ds;
  std::vector<double> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view body(line);
    if (auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    std::istringstream tokens{std::string(body)};
    std::string tok;
    if (!(tokens >> tok)) continue;

    double label = 0.0;
    if (!parse_double(tok, label) || !std::isfinite(label))
      parse_error("non-numeric label '" + tok + "'", lineno);
    if (mode == LabelMode::kClassification) {
      if (label == 0.0 || label == -1.0)
        label = -1.0;
      else if (label != 1.0)
        parse_error("classification label must be 0, -1 or 1", lineno);
    }

    SparseRow row;
    while (tokens >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        parse_error("malformed pair '" + tok + "'", lineno);
      const std::string_view key(tok.data(), colon);
      if (key == "qid") continue;
      long long idx = 0;
      double val = 0.0;
      if (!parse_index(key, idx) || idx < 1)
        parse_error("bad feature index '" + std::string(key) + "'", lineno);
      if (!parse_double(std::string_view(tok).substr(colon + 1), val) || !std::isfinite(val))
        parse_error("bad feature value in '" + tok + "'", lineno);
      row.emplace_back(static_cast<Index>(idx - 1), val);
    }
    std::sort(row.begin(), row.end());
    for (std::size_t k = 1; k < row.size(); ++k)
      if (row[k].first == row[k - 1].first)
        parse_error("duplicate feature index " + std::to_string(row[k].first + 1), lineno);
    if (!row.empty()) ds.dim = std::max(ds.dim, row.back().first + 1);
    labels.push_back(label);
    ds.rows.push_back(std::move(row));
  }
  ds.labels = Eigen::Map<Vector>(labels.data(), static_cast<Index>(labels.size()));
  return ds;
}

LibsvmDataset parse_libsvm_file(const std::string& path, LabelMode mode) {
  auto in = open_or_throw(path);
  return parse_libsvm(in, mode);
}

void serialize_libsvm(std::ostream& out, const LibsvmDataset& ds) {
  for (Index i = 0; i < ds.samples(); ++i) {
    out << fmt(ds.labels[i]);
    for (const auto& [j, v] : ds.rows[static_cast<std::size_t>(i)])
      out << ' ' << (j + 1) << ':' << fmt(v);
    out << '\n';
  }
}

ScenarioMatrix parse_returns_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<double> vals;
    bool numeric = true;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      double v = 0.0;
      if (!parse_double(rest.substr(0, comma), v)) numeric = false;
      vals.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (first) {
      first = false;
      width = vals.size();
      if (!numeric) continue;  // header
    }
    if (!numeric) parse_error("non-numeric cell in row " + std::to_string(rows.size()), lineno);
    if (vals.size() != width)
      parse_error("ragged row " + std::to_string(rows.size()) + " has " +
                      std::to_string(vals.size()) + " cells, expected " + std::to_string(width),
                  lineno);
    rows.push_back(std::move(vals));
  }
  ScenarioMatrix sc;
  sc.returns.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j)
      sc.returns(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return sc;
}

ScenarioMatrix parse_returns_csv_file(const std::string& path) {
  auto in = open_or_throw(path);
  return parse_returns_csv(in);
}

ProblemSpec gen_cvar(const ScenarioMatrix& sc, double alpha, std::optional<double> r,
                     double a_u) {
  check_portfolio(sc, a_u);
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in (0, 1]");
  const Index l = sc.scenarios(), n = sc.assets();
  const Vector mu = sc.mean();
  const double target = r ? *r : (sc.benchmark ? *sc.benchmark : mu.minCoeff());

  ProblemSpec spec = ProblemSpec::zeros(n + 2);
  spec.c[n] = 1.0;
  const double scale = 1.0 / (static_cast<double>(l) * alpha);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(l * (n + 1)));
  for (Index i = 0; i < l; ++i) {
    for (Index j = 0; j < n; ++j)
      if (sc.returns(i, j) != 0.0) t.emplace_back(static_cast<int>(i), static_cast<int>(j),
                                                  -scale * sc.returns(i, j));
    t.emplace_back(static_cast<int>(i), static_cast<int>(n), -scale);
  }
  spec.Chat = SparseMatrix(l, n + 2);
  spec.Chat.setFromTriplets(t.begin(), t.end());
  spec.dhat = Vector::Zero(l);
  portfolio_constraints(spec, mu, target, 2);
  spec.lower.head(n).setZero();
  spec.upper.head(n).setConstant(a_u);
  spec.lower[n + 1] = 0.0;
  return spec;
}

ProblemSpec gen_masd(const ScenarioMatrix& sc, std::optional<double> r, double a_u,
                     double l1_weight) {
  check_portfolio(sc, a_u);
  if (!(l1_weight >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "l1 weight must be >= 0");
  const Index l = sc.scenarios(), n = sc.assets();
  const Vector mu = sc.mean();
  const double target = r ? *r : (sc.benchmark ? *sc.benchmark : mu.minCoeff());

  ProblemSpec spec = ProblemSpec::zeros(n + 1);
  const double scale = 1.0 / static_cast<double>(l);
  std::vector<Triplet> t;
  for (Index i = 0; i < l; ++i)
    for (Index j = 0; j < n; ++j) {
      const double v = scale * (mu[j] - sc.returns(i, j));
      if (v != 0.0) t.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
    }
  spec.Chat = SparseMatrix(l, n + 1);
  spec.Chat.setFromTriplets(t.begin(), t.end());
  spec.dhat = Vector::Zero(l);
  portfolio_constraints(spec, mu, target, 1);
  spec.l1_weights.head(n).setConstant(l1_weight);
  spec.lower.head(n).setZero();
  spec.upper.head(n).setConstant(a_u);
  spec.lower[n] = 0.0;
  return spec;
}

ProblemSpec gen_quantile(const LibsvmDataset& ds, double alpha, double lambda, double tau) {
  check_dataset(ds);
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in (0, 1)");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "lambda must be >= 0");
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "tau must lie in [0, 1]");
  const Index l = ds.samples(), d = ds.dim;
  const double scale = 1.0 / static_cast<double>(l);

  ProblemSpec spec = ProblemSpec::zeros(1 + d);
  std::vector<Triplet> t;
  for (Index i = 0; i < l; ++i) {
    t.emplace_back(static_cast<int>(i), 0, -scale);
    for (const auto& [j, v] : ds.rows[static_cast<std::size_t>(i)])
      if (v != 0.0) t.emplace_back(static_cast<int>(i), static_cast<int>(j + 1), -scale * v);
  }
  spec.Chat = SparseMatrix(l, 1 + d);
  spec.Chat.setFromTriplets(t.begin(), t.end());
  spec.dhat = scale * ds.labels;
  spec.c = (alpha - 1.0) * spmv(spec.Chat, Vector(Vector::Ones(l)), true);
  spec.objective_constant = (alpha - 1.0) * spec.dhat.sum();

  const double ridge = lambda * (1.0 - tau);
  if (ridge > 0.0) {
    std::vector<Triplet> q;
    for (Index j = 1; j <= d; ++j) q.emplace_back(static_cast<int>(j), static_cast<int>(j), ridge);
    spec.Q.setFromTriplets(q.begin(), q.end());
  }
  spec.l1_weights.tail(d).setConstant(lambda * tau);
  return spec;
}

ProblemSpec gen_svm(const LibsvmDataset& ds, double lambda, double tau1, double tau2) {
  check_dataset(ds);
  if (!(lambda > 0.0 && tau1 > 0.0 && tau2 > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "lambda, tau1 and tau2 must be positive");
  for (Index i = 0; i < ds.samples(); ++i)
    if (ds.labels[i] != 1.0 && ds.labels[i] != -1.0)
      throw Error(ErrorCode::kInvalidArgument,
                  "label not +-1 at sample " + std::to_string(i));
  const Index l = ds.samples(), d = ds.dim;
  const double scale = 1.0 / static_cast<double>(l);

  ProblemSpec spec = ProblemSpec::zeros(1 + d);
  std::vector<Triplet> t;
  for (Index i = 0; i < l; ++i) {
    const double y = ds.labels[i];
    t.emplace_back(static_cast<int>(i), 0, scale * y);
    for (const auto& [j, v] : ds.rows[static_cast<std::size_t>(i)])
      if (v != 0.0) t.emplace_back(static_cast<int>(i), static_cast<int>(j + 1), -scale * y * v);
  }
  spec.Chat = SparseMatrix(l, 1 + d);
  spec.Chat.setFromTriplets(t.begin(), t.end());
  spec.dhat = Vector::Constant(l, scale);

  std::vector<Triplet> q;
  for (Index j = 1; j <= d; ++j)
    q.emplace_back(static_cast<int>(j), static_cast<int>(j), lambda * tau2);
  spec.Q.setFromTriplets(q.begin(), q.end());
  spec.l1_weights.tail(d).setConstant(lambda * tau1);
  return spec;
}

ScenarioMatrix synthetic_returns(Index scenarios, Index assets, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector drift(assets), load(assets), vol(assets);
  for (Index j = 0; j < assets; ++j) {
    drift[j] = 2e-4 + 6e-4 * unif(gen);
    load[j] = 0.5 + unif(gen);
    vol[j] = 0.008 + 0.012 * unif(gen);
  }
  ScenarioMatrix sc;
  sc.returns.resize(scenarios, assets);
  for (Index i = 0; i < scenarios; ++i) {
    const double market = 0.01 * normal(gen);
    for (Index j = 0; j < assets; ++j)
      sc.returns(i, j) = drift[j] + load[j] * market + vol[j] * normal(gen);
  }
  return sc;
}

LibsvmDataset synthetic_dataset(Index samples, Index dim, double density, LabelMode mode,
                                std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector w(dim);
  for (Index j = 0; j < dim; ++j) w[j] = normal(gen);
  const double bias = normal(gen);

  LibsvmDataset ds;
  ds.dim = dim;
  ds.labels.resize(samples);
  ds.rows.resize(static_cast<std::size_t>(samples));
  for (Index i = 0; i < samples; ++i) {
    double score = bias;
    for (Index j = 0; j < dim; ++j) {
      if (unif(gen) >= density) continue;
      const double v = normal(gen);
      ds.rows[static_cast<std::size_t>(i)].emplace_back(j, v);
      score += w[j] * v;
    }
    score += 0.3 * normal(gen);
    ds.labels[i] = mode == LabelMode::kClassification ? (score >= 0.0 ? 1.0 : -1.0) : score;
  }
  return ds;
}

}  // namespace pwlqp
