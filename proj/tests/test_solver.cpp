#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "proxsg/baselines.hpp"
#include "proxsg/cs.hpp"
#include "proxsg/error.hpp"
#include "proxsg/solver.hpp"

using namespace proxsg;

namespace {

Vec randn(Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

Mat randn(Index m, Index n, unsigned seed) {
  Mat A(m, n);
  A.reshaped() = randn(m * n, seed);
  return A;
}

// f = g = 0, h = ||.||^2 / 2, A = I, C = R^n.
ProblemSpec pure_quadratic(Index n) {
  ProblemSpec s;
  s.prox_fC = [](const Vec& w, double) { return w; };
  s.grad_h = [](const Vec& z) { return z; };
  s.subgrad_g = [](const Vec& x) { return Vec(Vec::Zero(x.size())); };
  s.value_f = [](const Vec&) { return 0.0; };
  s.value_h = [](const Vec& z) { return 0.5 * z.squaredNorm(); };
  s.value_g = [](const Vec&) { return 0.0; };
  s.map_A = LinearMap::identity(n);
  s.lipschitz_ell = 1.0;
  return s;
}

CSInstance small_l1l2(unsigned seed, LossTag loss = LossTag::kLeastSquares) {
  const Mat A = randn(30, 80, seed) / std::sqrt(30.0);
  Vec xg = Vec::Zero(80);
  for (int k = 0; k < 6; ++k) xg[(k * 13 + static_cast<int>(seed)) % 80] = randn(1, seed + 100 + k)[0];
  const Vec b = A * xg;
  return make_cs_instance(A, b, xg, 0.1, loss);
}

double soft(double w, double t) { return w > t ? w - t : (w < -t ? w + t : 0.0); }

}  // namespace

TEST_CASE("extrapolation coefficients follow the kappa recursion") {
  const auto kappa = oracle::kappa_sequence(4);
  ExtrapolationState st;

  auto c0 = extrapolation_coeffs(st, 0.1, 0.01, 0.8, std::nullopt);
  CHECK(c0.lambda == 0.0);
  CHECK(c0.mu == 0.0);
  CHECK(c0.next.kappa_curr == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-15));
  CHECK(c0.next.kappa_curr == doctest::Approx(1.618034).epsilon(1e-6));

  auto c1 = extrapolation_coeffs(c0.next, 0.1, 0.01, 0.8, std::nullopt);
  CHECK(c1.lambda == 0.0);

  auto c2 = extrapolation_coeffs(c1.next, 0.1, 0.01, 0.8, std::nullopt);
  CHECK(c1.next.kappa_curr == doctest::Approx(kappa[2]).epsilon(1e-15));
  CHECK(c1.next.kappa_curr == doctest::Approx(2.193527).epsilon(1e-6));
  CHECK(c2.lambda == doctest::Approx(0.1 * (kappa[1] - 1.0) / kappa[2]).epsilon(1e-14));
  CHECK(c2.lambda == doctest::Approx(0.0281747).epsilon(1e-5));
  CHECK(c2.mu == doctest::Approx(0.01 * 0.8 * (kappa[1] - 1.0) / kappa[2]).epsilon(1e-14));
}

TEST_CASE("coefficients stay admissible and restart resets kappa") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ud(0.01, 2.0);
  ExtrapolationState st;
  for (int n = 0; n < 500; ++n) {
    const double tau = ud(rng);
    const auto co = extrapolation_coeffs(st, 0.1, 0.01, tau, 50);
    CHECK(co.lambda >= 0.0);
    CHECK(co.lambda <= 0.1);
    CHECK(co.mu >= 0.0);
    CHECK(co.mu <= 0.01 * tau);
    if ((n + 1) % 50 == 0) {
      CHECK(co.next.kappa_prev == 1.0);
      CHECK(co.next.kappa_curr == 1.0);
    }
    st = co.next;
  }
}

TEST_CASE("psg_step on the pure quadratic is a gradient step") {
  const ProblemSpec s = pure_quadratic(4);
  const Vec x = randn(4, 1);
  const Vec out = psg_step(s, x, x, Vec::Zero(4), 0.0, 0.0, 0.3);
  CHECK((out - 0.7 * x).norm() <= 1e-15);
}

TEST_CASE("psg_step ignores momentum when x equals x_prev") {
  const CSInstance inst = small_l1l2(5);
  const ProblemSpec s = build_cs_problem(inst);
  const Vec x = randn(80, 9) * 0.1;
  const Vec g = s.subgrad_g(x);
  const Vec a = psg_step(s, x, x, g, 0.0, 0.0, 0.5);
  const Vec b = psg_step(s, x, x, g, 0.09, 0.004, 0.5);
  CHECK((a - b).norm() == 0.0);
}

TEST_CASE("one step from the origin is a soft-thresholded back-projection") {
  const CSInstance inst = small_l1l2(6);
  const ProblemSpec s = build_cs_problem(inst);
  const double tau = 0.5;
  const Vec zero = Vec::Zero(80);
  const Vec x1 = psg_step(s, zero, zero, s.subgrad_g(zero), 0.0, 0.0, tau);
  const Mat& A = *inst.A.matrix();
  const Vec w = tau * A.transpose() * inst.b;
  for (Index i = 0; i < 80; ++i) CHECK(x1[i] == doctest::Approx(soft(w[i], 0.1 * tau)).epsilon(1e-13));
}

TEST_CASE("an already stationary start converges after one iteration") {
  ProblemSpec s = pure_quadratic(5);
  const Vec c = Vec::LinSpaced(5, 1.0, 5.0);
  s.grad_h = [c](const Vec& z) { return Vec(z - c); };
  s.value_h = [c](const Vec& z) { return 0.5 * (z - c).squaredNorm(); };
  SolverParams p;
  const auto rep = solve(s, c, p);
  CHECK(rep.status == SolveStatus::kConverged);
  CHECK(rep.iterations == 1);
  CHECK((rep.x - c).norm() <= 1e-15);
}

TEST_CASE("Lyapunov decrease holds on L1-L2 runs with both losses") {
  for (LossTag loss : {LossTag::kLeastSquares, LossTag::kLorentzian}) {
    for (unsigned seed = 0; seed < 4; ++seed) {
      const CSInstance inst = small_l1l2(seed, loss);
      const ProblemSpec s = build_cs_problem(inst);
      SolverParams p;
      p.max_iter = 2000;
      const auto rep = solve(s, Vec::Zero(80), p);
      const double f0 = rep.trace.records.front().objective;
      CHECK(rep.max_lyapunov_violation <= 1e-10 * (1.0 + std::abs(f0)));
      const auto chk = check_decrease(rep.trace, lyapunov_constant(s, p), p.delta, 1e-10 * (1.0 + std::abs(f0)));
      CHECK(chk.passed);
      CHECK(rep.objective <= f0);
    }
  }
}

TEST_CASE("check_decrease on a single record and on a corrupted trace") {
  IterateTrace single;
  single.records.push_back({1.0, 1.0, 0.0, 0.0, 0.0, 0.0});
  const auto c1 = check_decrease(single, 0.5, 1e-3, 0.0);
  CHECK(c1.max_violation == 0.0);
  CHECK(c1.worst_index == -1);
  CHECK(c1.passed);

  const CSInstance inst = small_l1l2(11);
  const ProblemSpec s = build_cs_problem(inst);
  SolverParams p;
  p.max_iter = 40;
  p.stop_rel_tol = 0.0;
  auto rep = solve(s, Vec::Zero(80), p);
  const double c = lyapunov_constant(s, p);
  CHECK(check_decrease(rep.trace, c, p.delta, 0.0).passed);
  const int k = 17;
  rep.trace.records[k].objective += 1.0;
  const auto bad = check_decrease(rep.trace, c, p.delta, 1e-12);
  CHECK_FALSE(bad.passed);
  CHECK(bad.worst_index == k - 1);
  CHECK(bad.max_violation > 0.5);
  CHECK(bad.max_violation <= 1.0);
}

TEST_CASE("zero extrapolation reproduces GPPA step for step") {
  const Vec b = randn(50, 21);
  CSInstance inst = make_cs_instance(Mat::Identity(50, 50), b, randn(50, 22), 0.1, LossTag::kLeastSquares);
  ProblemSpec s = build_cs_problem(inst);
  s.map_A = LinearMap::identity(50);
  s.norm_A = 1.0;

  SolverParams p;
  p.lambda_bar = 0.0;
  p.mu_bar = 0.0;
  p.max_iter = 100;
  p.stop_rel_tol = 0.0;
  p.store_iterates = TracePolicy::kAlways;
  const auto a = solve(s, Vec::Zero(50), p);

  BaselineParams q;
  q.step_tau = tau_upper_bound(s, p);
  q.max_iter = 100;
  q.stop_rel_tol = 0.0;
  q.store_iterates = TracePolicy::kAlways;
  const auto g = gppa_solve(s, Vec::Zero(50), q);

  REQUIRE(a.trace.iterates.size() == 101);
  REQUIRE(g.trace.iterates.size() == 101);
  double worst = 0.0;
  for (size_t n = 0; n < a.trace.iterates.size(); ++n) {
    worst = std::max(worst, (a.trace.iterates[n] - g.trace.iterates[n]).lpNorm<Eigen::Infinity>());
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("solver errors are typed") {
  const ProblemSpec s = pure_quadratic(3);
  SolverParams p;
  CHECK_THROWS_AS(solve(s, Vec::Zero(4), p), Error);
  try {
    solve(s, Vec::Zero(4), p);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimensionMismatch);
  }

  ProblemSpec boxed = pure_quadratic(3);
  boxed.in_C = [](const Vec& x, double tol) { return x.minCoeff() >= -tol; };
  try {
    solve(boxed, Vec::Constant(3, -1.0), p);
    FAIL("expected an infeasible start error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInfeasibleStart);
  }

  SolverParams too_big = p;
  too_big.tau_sequence = [](int, double upper) { return 2.0 * upper; };
  try {
    solve(s, Vec::Ones(3), too_big);
    FAIL("expected a step-size error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidArgument);
  }

  ProblemSpec nan_grad = pure_quadratic(3);
  nan_grad.grad_h = [](const Vec& z) { return Vec(Vec::Constant(z.size(), std::nan(""))); };
  try {
    solve(nan_grad, Vec::Ones(3), p);
    FAIL("expected a numerical failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNumericalFailure);
    REQUIRE(e.iteration.has_value());
    CHECK(*e.iteration == 1);
  }

  ProblemSpec bad_prox = pure_quadratic(3);
  bad_prox.prox_fC = [](const Vec&, double) -> Vec { throw Error(ErrorCode::kInvalidArgument, "broken"); };
  try {
    solve(bad_prox, Vec::Ones(3), p);
    FAIL("expected a prox failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kProxFailure);
  }
}

TEST_CASE("a shorter step sequence is accepted") {
  const CSInstance inst = small_l1l2(2);
  const ProblemSpec s = build_cs_problem(inst);
  SolverParams p;
  p.tau_sequence = [](int n, double upper) { return upper * (0.5 + 0.5 / (1.0 + n)); };
  p.max_iter = 500;
  const auto rep = solve(s, Vec::Zero(80), p);
  CHECK(rep.max_lyapunov_violation <= 1e-10 * (1.0 + std::abs(rep.trace.records.front().objective)));
  CHECK(rep.trace.records[1].tau == doctest::Approx(tau_upper_bound(s, p)));
}
