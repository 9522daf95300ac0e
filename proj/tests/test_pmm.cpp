#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "pwlqp/io.hpp"
#include "pwlqp/pmm.hpp"

using namespace pwlqp;

namespace {

PmmConfig tight(double tol) {
  PmmConfig cfg;
  cfg.tol = tol;
  cfg.record_trace = true;
  return cfg;
}

}  // namespace

TEST_CASE("box fixture") {
  const SolveResult r = solve(oracle::fix_a(), tight(1e-8));
  CHECK(r.report.status == SolveStatus::kConverged);
  CHECK(r.x[0] == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(r.z[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(r.report.residuals.max_res <= 1e-8);
}

TEST_CASE("hinge fixture") {
  const SolveResult r = solve(oracle::fix_b(), tight(1e-8));
  CHECK(r.report.status == SolveStatus::kConverged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(r.y2[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.report.objective == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("already optimal start returns immediately") {
  const SolveResult r = solve(ProblemSpec::zeros(3));
  CHECK(r.report.status == SolveStatus::kConverged);
  CHECK(r.report.pmm_iters == 0);
  CHECK(r.report.ledger() == "0(0)[0]{0}");
}

TEST_CASE("initial state projects zero onto the box") {
  ProblemSpec s = ProblemSpec::zeros(2);
  s.lower << 1, -kInf;
  s.upper << 2, -3;
  const PmmState st = initial_state(internalize(s), PmmConfig{});
  CHECK(st.x[0] == 1);
  CHECK(st.x[1] == -3);
  CHECK(st.rho == doctest::Approx(100));
  CHECK(st.tau == doctest::Approx(0.5));
}

TEST_CASE("moreau identity for the box") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 1000; ++t) {
    const Index n = oracle::pick(rng, 1, 6);
    const Vector lo = oracle::uniform(rng, n, -2, 0), hi = oracle::uniform(rng, n, 0, 2);
    const Vector u = oracle::uniform(rng, n, -4, 4);
    const double beta = std::exp(oracle::uniform(rng, 1, -3, 8)[0]);
    const Vector proj = project_box(u, lo, hi);
    // u = Pi_K(u) + prox_{sigma_K}(u)
    CHECK((u - proj - prox_box_support(u, 1.0, lo, hi)).cwiseAbs().maxCoeff() <= 1e-12);
    // scaled: w = beta Pi_K(w / beta) + prox_{beta sigma_K}(w)
    const Vector w = beta * u;
    const Vector lhs = beta * project_box(Vector(w / beta), lo, hi) + prox_box_support(w, beta, lo, hi);
    CHECK((lhs - w).cwiseAbs().maxCoeff() <= 1e-12 * (1 + w.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("prox of the support function satisfies its optimality condition") {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 200; ++t) {
    const Index n = 4;
    const Vector lo = oracle::uniform(rng, n, -2, 0), hi = oracle::uniform(rng, n, 0, 2);
    const Vector w = oracle::uniform(rng, n, -5, 5);
    const double tt = oracle::uniform(rng, 1, 0.1, 3)[0];
    const Vector p = prox_box_support(w, tt, lo, hi);
    // (w - p) / t is a subgradient of sigma_K at p: in K and maximizing p^T k
    const Vector g = (w - p) / tt;
    for (Index j = 0; j < n; ++j) {
      CHECK(g[j] >= lo[j] - 1e-12);
      CHECK(g[j] <= hi[j] + 1e-12);
      if (p[j] > 0) CHECK(g[j] == doctest::Approx(hi[j]));
      if (p[j] < 0) CHECK(g[j] == doctest::Approx(lo[j]));
    }
  }
  CHECK_THROWS_AS(prox_box_support(Vector::Zero(1), 0.0, Vector::Zero(1), Vector::Ones(1)), Error);
}

TEST_CASE("gradient matches central differences away from kinks") {
  std::mt19937_64 rng(31);
  int checked = 0;
  for (int inst = 0; inst < 20; ++inst) {
    const Index n = oracle::pick(rng, 2, 7);
    oracle::DenseQp q = oracle::random_box_qp(rng, n, oracle::pick(rng, 0, 2), oracle::pick(rng, 0, 4));
    ProblemSpec spec = q.spec();
    spec.l1_weights = oracle::uniform(rng, n, 0, 1);
    const InternalProblem p = internalize(spec);
    const PmmState st = oracle::random_state(rng, p, std::exp(oracle::uniform(rng, 1, 0, 5)[0]), 50);
    for (int k = 0; k < 10; ++k) {
      const Vector x = oracle::uniform(rng, n, -2, 2);
      if (oracle::kink_distance(p, x, st) < 1e-3) continue;
      const Vector g = aug_lagrangian_gradient(p, x, st);
      const Vector fd = oracle::central_difference(
          [&](const Vector& v) { return aug_lagrangian_value(p, v, st); }, x, 1e-7 / st.beta);
      CHECK((fd - g).norm() <= 1e-5 * std::max(1.0, g.norm()));
      ++checked;
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("stable change agrees with the difference of values") {
  std::mt19937_64 rng(37);
  for (int inst = 0; inst < 100; ++inst) {
    const Index n = oracle::pick(rng, 1, 6);
    oracle::DenseQp q = oracle::random_box_qp(rng, n, oracle::pick(rng, 0, 2), oracle::pick(rng, 0, 4));
    ProblemSpec spec = q.spec();
    spec.l1_weights = oracle::uniform(rng, n, 0, 1);
    const InternalProblem p = internalize(spec);
    const PmmState st = oracle::random_state(rng, p, std::exp(oracle::uniform(rng, 1, 0, 4)[0]), 20);
    const Vector x = oracle::uniform(rng, n, -2, 2), d = oracle::uniform(rng, n, -1, 1);
    for (double a : {1.0, 0.5, 1e-3}) {
      const double direct = aug_lagrangian_value(p, Vector(x + a * d), st) - aug_lagrangian_value(p, x, st);
      const double scale = std::abs(aug_lagrangian_value(p, x, st)) + 1;
      CHECK(std::abs(aug_lagrangian_change(p, x, d, a, st) - direct) <= 1e-11 * scale);
    }
  }
}

TEST_CASE("multiplier update matches its closed forms") {
  std::mt19937_64 rng(41);
  oracle::DenseQp q = oracle::random_box_qp(rng, 4, 2, 3);
  const InternalProblem p = internalize(q.spec());
  const PmmState st = oracle::random_state(rng, p, 7.0, 70.0);
  const Vector x = oracle::uniform(rng, 4, -2, 2);
  const PmmState nx = update_multipliers(p, st, x);
  CHECK((nx.y1 - (st.y1 - 7.0 * (q.A * x - q.b))).norm() <= 1e-12);
  CHECK((nx.z - prox_box_support(Vector(st.z + 7.0 * x), 7.0, p.lower, p.upper)).norm() <= 1e-12);
  CHECK(nx.y2.minCoeff() >= 0.0);
  CHECK(nx.y2.maxCoeff() <= 1.0);
  CHECK(nx.anchor == x);
}

TEST_CASE("penalty updates grow with stagnation and keep rho = beta / tau") {
  PmmConfig cfg;
  PmmState st;
  st.beta = 10;
  st.tau = 0.5;
  st.rho = 20;
  CHECK(update_penalties(st, 1.0, 0.95, cfg).beta == doctest::Approx(50));
  CHECK(update_penalties(st, 1.0, 0.7, cfg).beta == doctest::Approx(20));
  CHECK(update_penalties(st, 1.0, 0.1, cfg).beta == doctest::Approx(12));
  const PmmState s2 = update_penalties(st, 1.0, 0.1, cfg);
  CHECK(s2.rho == doctest::Approx(s2.beta / s2.tau));
  cfg.beta_max = 11;
  CHECK(update_penalties(st, 1.0, 1.0, cfg).beta == 11);
  CHECK_THROWS_AS(update_penalties(st, -1.0, 1.0, cfg), Error);
}

TEST_CASE("inner tolerance is floored and decays") {
  PmmConfig cfg;
  CHECK(inner_tolerance(0, 10.0, 1e-5, cfg) == doctest::Approx(1.0));
  CHECK(inner_tolerance(3, 10.0, 1e-5, cfg) == doctest::Approx(1.0 / 16));
  CHECK(inner_tolerance(3, 1e-3, 1e-5, cfg) == doctest::Approx(1e-4));
  CHECK(inner_tolerance(100, 1e-9, 1e-5, cfg) == doctest::Approx(1e-6));
  CHECK_THROWS_AS(inner_tolerance(-1, 1.0, 1e-5, cfg), Error);
}

TEST_CASE("config checks reject bad ranges") {
  PmmConfig cfg;
  cfg.ssn.mu = 0.6;
  CHECK_THROWS_AS(solve(oracle::fix_a(), cfg), Error);
  cfg = PmmConfig{};
  cfg.tol = 0;
  CHECK_THROWS_AS(solve(oracle::fix_a(), cfg), Error);
  cfg = PmmConfig{};
  cfg.minres.max_iters = 0;
  CHECK_THROWS_AS(cfg.check(), Error);
}

TEST_CASE("random instances agree with active-set enumeration") {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 25; ++t) {
    const Index n = oracle::pick(rng, 1, 5);
    oracle::DenseQp q = oracle::random_box_qp(rng, n, oracle::pick(rng, 0, std::min<Index>(2, n - 1)),
                                              oracle::pick(rng, 0, 3));
    const oracle::EnumResult ref = oracle::enumerate_kkt(q);
    REQUIRE(ref.found);
    const SolveResult r = solve(q.spec(), tight(1e-8));
    CHECK(r.report.status == SolveStatus::kConverged);
    CHECK(std::abs(r.report.objective - ref.objective) <= 1e-6);
  }
}

TEST_CASE("report counters are sums of the logged steps") {
  std::mt19937_64 rng(47);
  for (int t = 0; t < 10; ++t) {
    oracle::DenseQp q = oracle::random_box_qp(rng, 6, 2, 4);
    const SolveResult r = solve(q.spec(), tight(1e-7));
    const SolveReport& rep = r.report;
    Index ssn = 0, kry = 0, fac = 0;
    for (const auto& s : rep.trace) {
      kry += s.krylov_iters;
      fac += s.factorized ? 1 : 0;
    }
    for (const auto& o : rep.outer_log) ssn += o.ssn_iters;
    CHECK(static_cast<Index>(rep.trace.size()) == rep.ssn_iters);
    CHECK(ssn <= rep.ssn_iters);
    CHECK(kry <= rep.krylov_iters);
    CHECK(fac <= rep.factorizations);
    CHECK(static_cast<Index>(rep.outer_log.size()) == rep.pmm_iters);
    for (const auto& o : rep.outer_log) CHECK(o.grad_norm <= o.inner_tol);
  }
}

TEST_CASE("solves are deterministic") {
  std::mt19937_64 rng(53);
  oracle::DenseQp q = oracle::random_box_qp(rng, 6, 2, 4);
  const SolveResult a = solve(q.spec(), tight(1e-7));
  const SolveResult b = solve(q.spec(), tight(1e-7));
  CHECK(result_to_json(a, false) == result_to_json(b, false));
}

TEST_CASE("iteration limit keeps the best iterate") {
  std::mt19937_64 rng(59);
  oracle::DenseQp q = oracle::random_box_qp(rng, 6, 2, 4);
  PmmConfig cfg;
  cfg.max_outer = 1;
  cfg.tol = 1e-12;
  const SolveResult r = solve(q.spec(), cfg);
  CHECK(r.report.status == SolveStatus::kIterationLimit);
  CHECK(r.report.pmm_iters == 1);
  CHECK(r.x.allFinite());
  CHECK(to_string(r.report.status) == "iteration-limit");
}
