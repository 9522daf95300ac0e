#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include "oracles.hpp"
#include "pwlqp/krylov.hpp"

using namespace pwlqp;

namespace {

struct Setup {
  InternalProblem p;
  PmmState st;
  Vector x;
  ActiveSets sets;
};

Setup random_setup(std::mt19937_64& rng, double beta) {
  const Index n = oracle::pick(rng, 2, 8);
  oracle::DenseQp q = oracle::random_box_qp(rng, n, oracle::pick(rng, 0, 3), oracle::pick(rng, 0, 5));
  ProblemSpec spec = q.spec();
  spec.l1_weights = oracle::uniform(rng, n, 0, 0.5);
  Setup s{internalize(spec), {}, {}, {}};
  s.st = oracle::random_state(rng, s.p, beta, beta / std::exp(oracle::uniform(rng, 1, -6, 0)[0]));
  s.x = oracle::uniform(rng, n, -2.5, 2.5);
  s.sets = select_bouligand(s.p, s.x, s.st);
  return s;
}

}  // namespace

TEST_CASE("minres solves symmetric indefinite systems") {
  std::mt19937_64 rng(89);
  for (int t = 0; t < 50; ++t) {
    const Index n = oracle::pick(rng, 1, 30);
    const Matrix R = oracle::uniform(rng, n, n, -1, 1);
    Matrix M = R + R.transpose();
    M.diagonal().array() += (t % 2 ? 5.0 : 0.0);
    const Vector b = oracle::uniform(rng, n, -1, 1);
    const auto r = minres_solve<double>(DenseOperator<double>{M}, b, Vector(Vector::Zero(n)), 1e-12, 10 * n);
    CHECK(r.converged);
    CHECK((M * r.x - b).norm() <= 1e-9 * b.norm() * (1 + M.norm()));
    CHECK(r.residual_norm <= 1e-12 * r.initial_norm * (1 + 1e-6));
  }
}

TEST_CASE("minres recurrence estimate tracks the true residual") {
  std::mt19937_64 rng(97);
  const Index n = 40;
  const Matrix R = oracle::uniform(rng, n, n, -1, 1);
  const Matrix M = R + R.transpose();
  const Vector b = oracle::uniform(rng, n, -1, 1);
  for (Index k : {1, 5, 10, 20}) {
    const auto r = minres_solve<double>(DenseOperator<double>{M}, b, Vector(Vector::Zero(n)), 0.0, k);
    CHECK(r.iters == k);
    CHECK((b - M * r.x).norm() == doctest::Approx(r.residual_norm).epsilon(1e-6));
  }
}

TEST_CASE("minres in single precision") {
  MatrixX<float> M(2, 2);
  M << 2, 1, 1, -3;
  VectorX<float> b(2);
  b << 1, 2;
  const auto r = minres_solve<float>(DenseOperator<float>{M}, b, VectorX<float>::Zero(2), 1e-5f, 10);
  CHECK(r.converged);
  CHECK((M * r.x - b).norm() <= 1e-4f);
}

TEST_CASE("minres keeps iterating until the acceptance check passes") {
  std::mt19937_64 rng(101);
  const Index n = 30;
  const Matrix R = oracle::uniform(rng, n, n, -1, 1);
  const Matrix M = R + R.transpose() + 3 * Matrix::Identity(n, n);
  const Vector b = oracle::uniform(rng, n, -1, 1);
  const Vector exact = M.lu().solve(b);
  auto check = [&](const Vector& x) { return (x - exact).norm() / 1e-10; };
  const auto r = minres_solve<double>(DenseOperator<double>{M}, b, Vector(Vector::Zero(n)), 0.1, 200,
                                      NoPreconditioner{}, check);
  CHECK(r.converged);
  CHECK(r.tightenings >= 1);
  CHECK((r.x - exact).norm() <= 1e-10);
}

TEST_CASE("minres rejects an indefinite preconditioner and mismatched sizes") {
  struct Neg {
    Vector apply(const Vector& v) const { return -v; }
  };
  const Matrix M = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(minres_solve<double>(DenseOperator<double>{M}, Vector(Vector::Ones(2)),
                                       Vector(Vector::Zero(2)), 1e-8, 5, Neg{}),
                  Error);
  CHECK_THROWS_AS(minres_solve<double>(DenseOperator<double>{M}, Vector(Vector::Ones(2)),
                                       Vector(Vector::Zero(3)), 1e-8, 5),
                  Error);
}

TEST_CASE("preconditioner applies blkdiag(H~, S)^-1") {
  std::mt19937_64 rng(103);
  for (int t = 0; t < 30; ++t) {
    Setup s = random_setup(rng, 20.0);
    PreconditionerCache cache;
    const BuiltPreconditioner b = build_preconditioner(s.p, s.st, s.sets, cache);
    CHECK(b.did_factorize);
    const Index n = s.p.n, r = b.P->schur.rows();
    const Matrix G = Matrix(compound_matrix(s.p, s.sets));
    const Vector h = hessian_diag_approx(s.p, s.st, s.sets);
    const Matrix S = G * dropping_weights(h, s.sets).asDiagonal() * G.transpose() +
                     Matrix::Identity(r, r) / s.st.beta;
    const Vector v = oracle::uniform(rng, n + r, -1, 1);
    const Vector out = apply_preconditioner(*b.P, v);
    CHECK((out.head(n) - v.head(n).cwiseQuotient(h)).norm() <= 1e-12 * (1 + out.norm()));
    if (r > 0) CHECK((S * out.tail(r) - v.tail(r)).norm() <= 1e-9 * (1 + v.norm()));
  }
}

TEST_CASE("factorizations are reused while the signature is unchanged") {
  std::mt19937_64 rng(107);
  Setup s = random_setup(rng, 20.0);
  PreconditionerCache cache;
  CHECK(build_preconditioner(s.p, s.st, s.sets, cache).did_factorize);
  CHECK_FALSE(build_preconditioner(s.p, s.st, s.sets, cache).did_factorize);
  CHECK(cache.hits == 1);
  PmmState st2 = s.st;
  st2.beta *= 2;
  CHECK(build_preconditioner(s.p, st2, s.sets, cache).did_factorize);
  CHECK(cache.factorizations == 2);
  CHECK(make_signature(s.st, s.sets).hash() != make_signature(st2, s.sets).hash());
  CHECK(make_signature(s.st, s.sets) == make_signature(s.st, s.sets));
}

TEST_CASE("policy switches to the preconditioner and stays there") {
  std::mt19937_64 rng(109);
  Setup s = random_setup(rng, 1e4);
  const ReducedSystem sys = assemble_reduced_system(s.p, s.x, s.st, s.sets);
  PreconditionerCache cache;
  MinresConfig cfg;
  cfg.unpreconditioned_trigger = 1;
  const PolicyResult a = solve_with_policy(sys.op, sys.rhs, sys.warm_start, s.p, s.st, s.sets, cache, cfg, 1e-10);
  CHECK(a.preconditioned);
  CHECK(a.unpreconditioned_iters == 1);
  CHECK(cache.activated);
  const PolicyResult b = solve_with_policy(sys.op, sys.rhs, sys.warm_start, s.p, s.st, s.sets, cache, cfg, 1e-10);
  CHECK(b.unpreconditioned_iters == 0);
  CHECK(b.factorizations == 0);
  CHECK(b.converged);
  const Vector exact = sys.op.to_dense().fullPivLu().solve(sys.rhs);
  CHECK((b.solution - exact).norm() <= 1e-6 * (1 + exact.norm()));
}

TEST_CASE("schur approximation: lower bound and the derived upper bound") {
  std::mt19937_64 rng(113);
  for (int t = 0; t < 200; ++t) {
    Setup s = random_setup(rng, std::exp(oracle::uniform(rng, 1, 0, 7)[0]));
    const SpectralReport rep = spectral_check(s.p, s.st, s.sets);
    CHECK(rep.schur_lower_ok(1e-8));
    CHECK(rep.schur_derived_upper_ok(1e-8));
  }
}

TEST_CASE("preconditioned spectrum lies in the two intervals") {
  std::mt19937_64 rng(127);
  for (int t = 0; t < 100; ++t) {
    Setup s = random_setup(rng, std::exp(oracle::uniform(rng, 1, 0, 5)[0]));
    const SpectralReport rep = spectral_check(s.p, s.st, s.sets);
    CHECK(rep.intervals_ok(1e-8));
    CHECK(rep.pencil_eigs.size() == static_cast<std::size_t>(s.sets.reduced_size(s.p.n, s.p.m)));
  }
}

TEST_CASE("spectral report serializes") {
  std::mt19937_64 rng(131);
  Setup s = random_setup(rng, 10.0);
  const auto j = nlohmann::json::parse(spectral_check(s.p, s.st, s.sets).to_json());
  CHECK(j["dims"]["n"] == s.p.n);
  CHECK(j["pencil"]["plus"].size() == 2);
}
