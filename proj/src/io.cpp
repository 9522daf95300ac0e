#include "pwlqp/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pwlqp {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json encode(const Vector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) {
    if (v[i] == kInf)
      arr.push_back("inf");
    else if (v[i] == -kInf)
      arr.push_back("-inf");
    else
      arr.push_back(v[i]);
  }
  return arr;
}

Vector decode(const json& j, const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_array())
    throw Error(ErrorCode::kParse, "missing array '" + key + "'");
  const json& arr = j.at(key);
  Vector v(static_cast<Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& e = arr[i];
    if (e.is_number()) {
      v[static_cast<Index>(i)] = e.get<double>();
    } else if (e.is_string() && e.get<std::string>() == "inf") {
      v[static_cast<Index>(i)] = kInf;
    } else if (e.is_string() && e.get<std::string>() == "-inf") {
      v[static_cast<Index>(i)] = -kInf;
    } else {
      throw Error(ErrorCode::kParse,
                  "bad entry " + std::to_string(i) + " in '" + key + "'");
    }
  }
  return v;
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, what + ": " + e.what());
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double number(const json& j, const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw Error(ErrorCode::kParse, "missing number '" + key + "'");
  return j.at(key).get<double>();
}

}  // namespace

void write_problem(const std::string& manifest_path, const ProblemSpec& spec) {
  ensure_valid(spec);
  const fs::path manifest(manifest_path);
  const fs::path dir = manifest.parent_path();
  const std::string stem = manifest.stem().string();

  json j;
  j["format"] = "pwlqp-problem";
  j["version"] = 1;
  j["n"] = spec.n();
  j["m"] = spec.m();
  j["s"] = spec.s();
  j["c"] = encode(spec.c);
  j["b"] = encode(spec.b);
  j["dhat"] = encode(spec.dhat);
  j["l1_weights"] = encode(spec.l1_weights);
  j["lower"] = encode(spec.lower);
  j["upper"] = encode(spec.upper);
  j["objective_constant"] = spec.objective_constant;
  const std::pair<const char*, const SparseMatrix*> mats[] = {
      {"Q", &spec.Q}, {"A", &spec.A}, {"Chat", &spec.Chat}};
  for (const auto& [key, M] : mats) {
    const std::string name = stem + "." + key + ".mtx";
    write_matrix_market_file((dir / name).string(), *M);
    j[key] = name;
  }
  std::ofstream out(manifest_path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + manifest_path);
  out << j.dump(2) << '\n';
}

ProblemSpec read_problem(const std::string& manifest_path) {
  const json j = parse_json(slurp(manifest_path), manifest_path);
  if (j.value("format", std::string()) != "pwlqp-problem")
    throw Error(ErrorCode::kParse, manifest_path + ": not a pwlqp-problem manifest");
  const fs::path dir = fs::path(manifest_path).parent_path();

  ProblemSpec spec;
  spec.c = decode(j, "c");
  spec.b = decode(j, "b");
  spec.dhat = decode(j, "dhat");
  spec.l1_weights = decode(j, "l1_weights");
  spec.lower = decode(j, "lower");
  spec.upper = decode(j, "upper");
  spec.objective_constant = number(j, "objective_constant");
  auto matrix = [&](const char* key) {
    if (!j.contains(key) || !j.at(key).is_string())
      throw Error(ErrorCode::kParse, std::string("missing matrix file '") + key + "'");
    return read_matrix_market_file((dir / j.at(key).get<std::string>()).string());
  };
  spec.Q = matrix("Q");
  spec.A = matrix("A");
  spec.Chat = matrix("Chat");

  const auto n = static_cast<Index>(number(j, "n"));
  const auto m = static_cast<Index>(number(j, "m"));
  const auto s = static_cast<Index>(number(j, "s"));
  if (spec.n() != n || spec.m() != m || spec.s() != s)
    throw Error(ErrorCode::kDimensionMismatch,
                manifest_path + ": declared dimensions disagree with the data");
  ensure_valid(spec);
  return spec;
}

std::string result_to_json(const SolveResult& result, bool with_wall_time) {
  const SolveReport& r = result.report;
  auto residuals = [](const KktResiduals& k) {
    return json{{"dual", k.dual_res},
                {"primal", k.primal_res},
                {"complementarity", k.complementarity_res},
                {"max", k.max_res}};
  };
  json j;
  j["status"] = to_string(r.status);
  j["ledger"] = r.ledger();
  j["counters"] = {{"pmm", r.pmm_iters},
                   {"ssn", r.ssn_iters},
                   {"factorizations", r.factorizations},
                   {"krylov", r.krylov_iters}};
  j["residuals"] = residuals(r.residuals);
  j["objective"] = r.objective;
  j["tol"] = r.tol;
  if (with_wall_time) j["wall_time"] = r.wall_time;
  j["final_beta"] = r.final_beta;
  j["final_rho"] = r.final_rho;
  j["forcing_violations"] = r.forcing_violations;
  j["steepest_descent_steps"] = r.steepest_descent_steps;
  j["inner_failures"] = r.inner_failures;
  j["message"] = r.message;
  json outer = json::array();
  for (const OuterLog& o : r.outer_log)
    outer.push_back({{"k", o.k},
                     {"beta", o.beta},
                     {"rho", o.rho},
                     {"inner_tol", o.inner_tol},
                     {"grad_norm", o.grad_norm},
                     {"ssn_iters", o.ssn_iters},
                     {"residuals", residuals(o.residuals)}});
  j["outer_log"] = outer;
  j["solution"] = {{"x", encode(result.x)},
                   {"y1", encode(result.y1)},
                   {"y2", encode(result.y2)},
                   {"z", encode(result.z)}};
  return j.dump(2);
}

SolveResult result_from_json(const std::string& text) {
  const json j = parse_json(text, "result");
  SolveResult out;
  SolveReport& r = out.report;
  const std::string status = j.value("status", std::string());
  bool known = false;
  for (auto s : {SolveStatus::kConverged, SolveStatus::kIterationLimit, SolveStatus::kStalled,
                 SolveStatus::kNumericalBreakdown})
    if (to_string(s) == status) {
      r.status = s;
      known = true;
    }
  if (!known) throw Error(ErrorCode::kParse, "unknown status '" + status + "'");

  auto residuals = [](const json& k) {
    KktResiduals res;
    res.dual_res = number(k, "dual");
    res.primal_res = number(k, "primal");
    res.complementarity_res = number(k, "complementarity");
    res.max_res = number(k, "max");
    return res;
  };
  const json& c = j.at("counters");
  r.pmm_iters = c.at("pmm").get<Index>();
  r.ssn_iters = c.at("ssn").get<Index>();
  r.factorizations = c.at("factorizations").get<Index>();
  r.krylov_iters = c.at("krylov").get<Index>();
  r.residuals = residuals(j.at("residuals"));
  r.objective = number(j, "objective");
  r.tol = number(j, "tol");
  r.wall_time = j.value("wall_time", 0.0);
  r.final_beta = number(j, "final_beta");
  r.final_rho = number(j, "final_rho");
  r.forcing_violations = j.at("forcing_violations").get<Index>();
  r.steepest_descent_steps = j.at("steepest_descent_steps").get<Index>();
  r.inner_failures = j.at("inner_failures").get<Index>();
  r.message = j.value("message", std::string());
  for (const json& o : j.at("outer_log"))
    r.outer_log.push_back({o.at("k").get<Index>(), number(o, "beta"), number(o, "rho"),
                           number(o, "inner_tol"), number(o, "grad_norm"),
                           o.at("ssn_iters").get<Index>(), residuals(o.at("residuals"))});
  const json& sol = j.at("solution");
  out.x = decode(sol, "x");
  out.y1 = decode(sol, "y1");
  out.y2 = decode(sol, "y2");
  out.z = decode(sol, "z");
  return out;
}

Solution read_solution(const std::string& path) {
  const json j = parse_json(slurp(path), path);
  if (!j.contains("solution")) throw Error(ErrorCode::kParse, path + ": no 'solution' object");
  const json& sol = j.at("solution");
  return {decode(sol, "x"), decode(sol, "y1"), decode(sol, "y2"), decode(sol, "z")};
}

}  // namespace pwlqp
