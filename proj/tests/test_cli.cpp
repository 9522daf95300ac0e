#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "oracles.hpp"
#include "pwlqp/cli.hpp"
#include "pwlqp/io.hpp"

using namespace pwlqp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("pwlqp_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("problem files round trip") {
  TempDir dir;
  std::mt19937_64 rng(149);
  oracle::DenseQp q = oracle::random_box_qp(rng, 5, 2, 3);
  ProblemSpec spec = q.spec();
  spec.lower[1] = -kInf;
  spec.upper[2] = kInf;
  spec.l1_weights[3] = 0.25;
  spec.objective_constant = 1.0 / 3;
  write_problem(dir / "p.json", spec);
  CHECK(fs::exists(dir / "p.Q.mtx"));
  const ProblemSpec back = read_problem(dir / "p.json");
  CHECK(back.c == spec.c);
  CHECK(back.lower == spec.lower);
  CHECK(back.upper == spec.upper);
  CHECK(Matrix(back.Q) == Matrix(spec.Q));
  CHECK(Matrix(back.Chat) == Matrix(spec.Chat));
  CHECK(back.objective_constant == spec.objective_constant);
}

TEST_CASE("malformed problem files are rejected") {
  TempDir dir;
  write_problem(dir / "p.json", oracle::fix_a());
  auto j = nlohmann::json::parse(slurp(dir / "p.json"));
  j["n"] = 2;
  write_text(dir / "bad.json", j.dump());
  CHECK_THROWS_AS(read_problem(dir / "bad.json"), Error);
  write_text(dir / "junk.json", "{not json");
  CHECK_THROWS_AS(read_problem(dir / "junk.json"), Error);
  write_text(dir / "other.json", "{\"format\": \"x\"}");
  CHECK_THROWS_AS(read_problem(dir / "other.json"), Error);
}

TEST_CASE("result json round trips") {
  PmmConfig cfg;
  cfg.tol = 1e-7;
  const SolveResult r = solve(oracle::fix_b(), cfg);
  const SolveResult back = result_from_json(result_to_json(r));
  CHECK(back.x == r.x);
  CHECK(back.y2 == r.y2);
  CHECK(back.report.ledger() == r.report.ledger());
  CHECK(back.report.residuals.max_res == r.report.residuals.max_res);
  CHECK(back.report.outer_log.size() == r.report.outer_log.size());
  CHECK(result_to_json(back) == result_to_json(r));
  CHECK_THROWS_AS(result_from_json("{\"status\": \"bogus\"}"), Error);
}

TEST_CASE("generate cvar from a csv") {
  TempDir dir;
  write_text(dir / "r.csv", "a\n1\n2\n3\n");
  const Run r = run({"generate", "cvar", "--data", dir / "r.csv", "--out", dir / "c.json",
                     "--alpha", "0.3333333333333333"});
  CHECK(r.code == 0);
  CHECK(r.out.find("n = 3") != std::string::npos);
  CHECK(r.out.find("l = 3") != std::string::npos);
  const Run s = run({"solve", dir / "c.json", "--tol", "1e-7", "--json-out", dir / "res.json"});
  CHECK(s.code == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "res.json"));
  CHECK(j["objective"].get<double>() == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("generate svm from libsvm data") {
  TempDir dir;
  write_text(dir / "d.svm", "1 1:0.5 2:1\n-1 2:-1\n");
  const Run r = run({"generate", "svm", "--data", dir / "d.svm", "--out", dir / "s.json"});
  CHECK(r.code == 0);
  CHECK(r.out.find("n = 3") != std::string::npos);
}

TEST_CASE("generate quantile and masd") {
  TempDir dir;
  CHECK(run({"synth", "libsvm", "--samples", "40", "--dim", "3", "--out", dir / "d.svm"}).code == 0);
  CHECK(run({"generate", "quantile", "--data", dir / "d.svm", "--alpha", "0.5", "--out",
             dir / "q.json"}).code == 0);
  CHECK(run({"solve", dir / "q.json"}).code == 0);
  CHECK(run({"synth", "returns", "--scenarios", "50", "--assets", "4", "--out", dir / "r.csv"}).code == 0);
  CHECK(run({"generate", "masd", "--data", dir / "r.csv", "--out", dir / "m.json"}).code == 0);
  CHECK(run({"solve", dir / "m.json"}).code == 0);
}

TEST_CASE("missing input file names the path") {
  TempDir dir;
  const Run r = run({"generate", "cvar", "--data", dir / "nope.csv", "--out", dir / "c.json"});
  CHECK(r.code == 2);
  CHECK(r.err.find("nope.csv") != std::string::npos);
  CHECK(run({"solve", dir / "nope.json"}).code == 2);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"solve"}).code == 2);
  CHECK(run({"solve", "x.json", "--tol", "abc"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("hinge fixture through the command line") {
  TempDir dir;
  write_problem(dir / "b.json", oracle::fix_b());
  const Run r = run({"solve", dir / "b.json", "--json-out", dir / "res.json", "--seed", "9"});
  CHECK(r.code == 0);
  CHECK(r.out.find("converged") != std::string::npos);
  CHECK(r.out.find("PMM(SSN)[Fact.]{Krylov}") != std::string::npos);
  const auto j = nlohmann::json::parse(slurp(dir / "res.json"));
  CHECK(j["objective"].get<double>() == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(j["status"] == "converged");
}

TEST_CASE("iteration limit exits with 1") {
  TempDir dir;
  CHECK(run({"synth", "returns", "--scenarios", "200", "--assets", "8", "--out", dir / "r.csv"}).code == 0);
  CHECK(run({"generate", "cvar", "--data", dir / "r.csv", "--out", dir / "c.json"}).code == 0);
  const Run r = run({"solve", dir / "c.json", "--max-outer", "1", "--json-out", dir / "res.json"});
  CHECK(r.code == 1);
  CHECK(nlohmann::json::parse(slurp(dir / "res.json"))["status"] == "iteration-limit");
}

TEST_CASE("check recomputes residuals") {
  TempDir dir;
  write_problem(dir / "a.json", oracle::fix_a());
  CHECK(run({"solve", dir / "a.json", "--tol", "1e-8", "--json-out", dir / "res.json"}).code == 0);
  const Run ok = run({"check", dir / "a.json", dir / "res.json"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("complementarity") != std::string::npos);

  auto j = nlohmann::json::parse(slurp(dir / "res.json"));
  j["solution"]["x"][0] = j["solution"]["x"][0].get<double>() - 0.1;
  write_text(dir / "bad.json", j.dump());
  CHECK(run({"check", dir / "a.json", dir / "bad.json"}).code == 1);

  j["solution"]["x"] = {1.0, 2.0};
  write_text(dir / "wrong.json", j.dump());
  CHECK(run({"check", dir / "a.json", dir / "wrong.json"}).code == 2);
}

TEST_CASE("check on the zero problem") {
  TempDir dir;
  write_problem(dir / "z.json", ProblemSpec::zeros(2));
  write_text(dir / "sol.json",
             "{\"solution\": {\"x\": [0, 0], \"y1\": [], \"y2\": [], \"z\": [0, 0]}}");
  CHECK(run({"check", dir / "z.json", dir / "sol.json"}).code == 0);
}

TEST_CASE("identical runs give identical reports apart from wall time") {
  TempDir dir;
  CHECK(run({"synth", "returns", "--scenarios", "100", "--assets", "5", "--seed", "4", "--out",
             dir / "r.csv"}).code == 0);
  CHECK(run({"generate", "cvar", "--data", dir / "r.csv", "--out", dir / "c.json"}).code == 0);
  CHECK(run({"solve", dir / "c.json", "--json-out", dir / "a.json"}).code == 0);
  CHECK(run({"solve", dir / "c.json", "--json-out", dir / "b.json"}).code == 0);
  auto a = nlohmann::json::parse(slurp(dir / "a.json"));
  auto b = nlohmann::json::parse(slurp(dir / "b.json"));
  a.erase("wall_time");
  b.erase("wall_time");
  CHECK(a.dump() == b.dump());
}
