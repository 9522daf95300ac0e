#include "pwlqp/cli.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "pwlqp/apps.hpp"
#include "pwlqp/io.hpp"

namespace pwlqp::cli {

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

void print_dims(std::ostream& out, const ProblemSpec& spec) {
  const InternalProblem p = internalize(spec);
  out << "n = " << p.n << ", m = " << p.m << ", l = " << p.l << "\n";
}

void print_residuals(std::ostream& out, const KktResiduals& r) {
  out << "  dual            " << sci(r.dual_res) << "\n"
      << "  primal          " << sci(r.primal_res) << "\n"
      << "  complementarity " << sci(r.complementarity_res) << "\n"
      << "  max             " << sci(r.max_res) << "\n";
}

struct GenerateArgs {
  std::string data, out;
  double alpha = 0.05;
  std::optional<double> r;
  double upper = 1.0;
  double l1 = 0.0;
  double lambda = 1e-2;
  double tau = 0.5;
  double tau1 = 0.5;
  double tau2 = 0.5;
};

struct SynthArgs {
  std::string out;
  Index scenarios = 1363;
  Index assets = 28;
  Index samples = 200;
  Index dim = 10;
  double density = 1.0;
  bool classification = false;
  std::uint64_t seed = 1;
};

struct SolveArgs {
  std::string problem, json_out;
  double tol = 1e-5;
  Index max_outer = 200;
  double beta0 = 50.0;
  double rho0 = 100.0;
  std::uint64_t seed = 0;
};

struct CheckArgs {
  std::string problem, solution;
  double tol = 1e-5;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Solver for convex QPs with piecewise-linear terms", "pwlqp"};
  app.require_subcommand(1);

  GenerateArgs g;
  auto* gen = app.add_subcommand("generate", "Build a problem file from data");
  gen->require_subcommand(1);
  auto* cvar = gen->add_subcommand("cvar", "CVaR portfolio selection from a returns CSV");
  auto* masd = gen->add_subcommand("masd", "Mean absolute semi-deviation portfolio from a returns CSV");
  auto* quant = gen->add_subcommand("quantile", "Penalized quantile regression from LIBSVM data");
  auto* svm = gen->add_subcommand("svm", "Elastic-net linear SVM from LIBSVM data");
  for (auto* sub : {cvar, masd, quant, svm}) {
    sub->add_option("--data", g.data, "Input data file")->required();
    sub->add_option("--out", g.out, "Output manifest (.json)")->required();
  }
  cvar->add_option("--alpha", g.alpha, "Tail probability")->capture_default_str();
  for (auto* sub : {cvar, masd}) {
    sub->add_option("--r", g.r, "Minimum mean return (default: smallest asset mean)");
    sub->add_option("--upper", g.upper, "Per-asset upper bound")->capture_default_str();
  }
  masd->add_option("--l1", g.l1, "Uniform l1 weight")->capture_default_str();
  quant->add_option("--alpha", g.alpha, "Quantile level")->required();
  quant->add_option("--lambda", g.lambda, "Penalty scale")->capture_default_str();
  quant->add_option("--tau", g.tau, "l1 share of the penalty")->capture_default_str();
  svm->add_option("--lambda", g.lambda, "Penalty scale")->capture_default_str();
  svm->add_option("--tau1", g.tau1, "l1 weight factor")->capture_default_str();
  svm->add_option("--tau2", g.tau2, "l2 weight factor")->capture_default_str();

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Write synthetic data");
  synth->require_subcommand(1);
  auto* sret = synth->add_subcommand("returns", "Factor-model returns CSV");
  sret->add_option("--scenarios", sy.scenarios)->capture_default_str();
  sret->add_option("--assets", sy.assets)->capture_default_str();
  auto* slib = synth->add_subcommand("libsvm", "Planted linear model in LIBSVM format");
  slib->add_option("--samples", sy.samples)->capture_default_str();
  slib->add_option("--dim", sy.dim)->capture_default_str();
  slib->add_option("--density", sy.density)->capture_default_str();
  slib->add_flag("--classification", sy.classification, "Emit +-1 labels");
  for (auto* sub : {sret, slib}) {
    sub->add_option("--seed", sy.seed)->capture_default_str();
    sub->add_option("--out", sy.out)->required();
  }

  SolveArgs so;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a problem file");
  solve_cmd->add_option("problem", so.problem, "Problem manifest")->required();
  solve_cmd->add_option("--tol", so.tol)->capture_default_str();
  solve_cmd->add_option("--max-outer", so.max_outer)->capture_default_str();
  solve_cmd->add_option("--beta0", so.beta0)->capture_default_str();
  solve_cmd->add_option("--rho0", so.rho0)->capture_default_str();
  solve_cmd->add_option("--seed", so.seed, "Accepted for symmetry; the solver is deterministic");
  solve_cmd->add_option("--json-out", so.json_out, "Write the JSON report here");

  CheckArgs ch;
  auto* check_cmd = app.add_subcommand("check", "Recompute KKT residuals of a solution");
  check_cmd->add_option("problem", ch.problem)->required();
  check_cmd->add_option("solution", ch.solution)->required();
  check_cmd->add_option("--tol", ch.tol)->capture_default_str();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      ProblemSpec spec;
      if (cvar->parsed()) {
        spec = gen_cvar(parse_returns_csv_file(g.data), g.alpha, g.r, g.upper);
      } else if (masd->parsed()) {
        spec = gen_masd(parse_returns_csv_file(g.data), g.r, g.upper, g.l1);
      } else if (quant->parsed()) {
        spec = gen_quantile(parse_libsvm_file(g.data), g.alpha, g.lambda, g.tau);
      } else {
        spec = gen_svm(parse_libsvm_file(g.data, LabelMode::kClassification), g.lambda, g.tau1,
                       g.tau2);
      }
      write_problem(g.out, spec);
      print_dims(out, spec);
      return kExitOk;
    }

    if (synth->parsed()) {
      std::ofstream f(sy.out);
      if (!f) throw Error(ErrorCode::kIo, "cannot write " + sy.out);
      if (sret->parsed()) {
        const ScenarioMatrix sc = synthetic_returns(sy.scenarios, sy.assets, sy.seed);
        char buf[32];
        for (Index i = 0; i < sc.scenarios(); ++i) {
          for (Index j = 0; j < sc.assets(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", sc.returns(i, j));
            f << (j ? "," : "") << buf;
          }
          f << "\n";
        }
      } else {
        serialize_libsvm(f, synthetic_dataset(sy.samples, sy.dim, sy.density,
                                              sy.classification ? LabelMode::kClassification
                                                                : LabelMode::kRegression,
                                              sy.seed));
      }
      return kExitOk;
    }

    if (solve_cmd->parsed()) {
      const ProblemSpec spec = read_problem(so.problem);
      PmmConfig cfg;
      cfg.tol = so.tol;
      cfg.max_outer = so.max_outer;
      cfg.beta0 = so.beta0;
      cfg.rho0 = so.rho0;
      cfg.beta_max = std::max(cfg.beta_max, cfg.beta0);
      cfg.tau_min = std::min(cfg.tau_min, cfg.tau0());
      const SolveResult res = solve(spec, cfg);
      const SolveReport& r = res.report;
      out << "status      " << to_string(r.status) << "\n"
          << "PMM(SSN)[Fact.]{Krylov}  " << r.ledger() << "\n"
          << "time        " << sci(r.wall_time) << " s\n"
          << "objective   " << sci(objective_value(spec, res.x).value) << "\n"
          << "residuals\n";
      print_residuals(out, r.residuals);
      if (!r.message.empty()) out << "note        " << r.message << "\n";
      if (!so.json_out.empty()) {
        std::ofstream f(so.json_out);
        if (!f) throw Error(ErrorCode::kIo, "cannot write " + so.json_out);
        f << result_to_json(res) << "\n";
      }
      return r.status == SolveStatus::kConverged ? kExitOk : kExitNotConverged;
    }

    const ProblemSpec spec = read_problem(ch.problem);
    const InternalProblem p = internalize(spec);
    const Solution sol = read_solution(ch.solution);
    if (sol.x.size() != p.n || sol.z.size() != p.n || sol.y1.size() != p.m ||
        sol.y2.size() != p.l)
      throw Error(ErrorCode::kDimensionMismatch,
                  "solution dimensions do not match the problem (n = " + std::to_string(p.n) +
                      ", m = " + std::to_string(p.m) + ", l = " + std::to_string(p.l) + ")");
    const KktResiduals r = kkt_residuals(p, sol.x, sol.y1, sol.y2, sol.z);
    print_residuals(out, r);
    const ObjectiveValue obj = objective_value(spec, sol.x);
    out << "objective         " << sci(obj.value) << (obj.box_violated ? " (outside box)" : "")
        << "\n";
    return r.max_res <= ch.tol ? kExitOk : kExitNotConverged;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace pwlqp::cli
