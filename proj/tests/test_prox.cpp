#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "proxsg/error.hpp"
#include "proxsg/prox.hpp"

using namespace proxsg;

namespace {

Vec randn(Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

}  // namespace

TEST_CASE("soft threshold worked examples") {
  Vec w(3);
  w << 2.0, -0.5, 0.1;
  const Vec out = soft_threshold(w, 1.0);
  CHECK(out[0] == 1.0);
  CHECK(out[1] == 0.0);
  CHECK(out[2] == 0.0);
  CHECK((soft_threshold(w, 0.0) - w).norm() == 0.0);
  CHECK_THROWS_AS(soft_threshold(w, -1.0), Error);
}

TEST_CASE("soft threshold agrees with a grid-search oracle") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> uw(-4.0, 4.0);
  for (int k = 0; k < 60; ++k) {
    const double t = k < 30 ? 0.3 : 0.05 * k;
    Vec w(1);
    w[0] = uw(rng);
    CHECK(std::abs(soft_threshold(w, t)[0] - oracle::grid_soft_threshold(w[0], t)) <= 1e-4);
  }
}

TEST_CASE("soft threshold is nonexpansive and shrinks toward zero") {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 100; ++k) {
    const Vec a = randn(20, rng, 2.0);
    const Vec b = randn(20, rng, 2.0);
    const Vec pa = soft_threshold(a, 0.7);
    const Vec pb = soft_threshold(b, 0.7);
    CHECK((pa - pb).norm() <= (a - b).norm() + 1e-15);
    for (Index i = 0; i < 20; ++i) {
      CHECK(std::abs(pa[i]) <= std::abs(a[i]));
      CHECK(pa[i] * a[i] >= 0.0);
    }
  }
}

TEST_CASE("norm subgradient") {
  CHECK(norm_subgradient(Vec::Zero(4)).norm() == 0.0);
  Vec x(2);
  x << 3.0, 4.0;
  const Vec g = norm_subgradient(x);
  CHECK(g[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(g[1] == doctest::Approx(0.8).epsilon(1e-15));
  std::mt19937_64 rng(14);
  for (int k = 0; k < 50; ++k) {
    const Vec v = randn(7, rng, 10.0);
    const Vec y = randn(7, rng, 10.0);
    CHECK(std::abs(norm_subgradient(v).norm() - 1.0) <= 1e-12);
    // Subgradient inequality of the convex function ||.||.
    CHECK(y.norm() >= v.norm() + norm_subgradient(v).dot(y - v) - 1e-12);
  }
}

TEST_CASE("least-squares loss") {
  std::mt19937_64 rng(15);
  const Vec b = randn(6, rng);
  CHECK(least_squares_grad(b, b).norm() == 0.0);
  Vec z = b;
  z[0] += 1.0;
  const Vec g = least_squares_grad(z, b);
  CHECK(g[0] == doctest::Approx(1.0));
  CHECK(g.tail(5).norm() == 0.0);
  CHECK(least_squares_value(Vec::Zero(6), b) == doctest::Approx(0.5 * b.squaredNorm()).epsilon(1e-15));
  for (int k = 0; k < 20; ++k) {
    const Vec zz = randn(6, rng);
    const Vec fd = oracle::fd_gradient([&](const Vec& v) { return least_squares_value(v, b); }, zz);
    CHECK((fd - least_squares_grad(zz, b)).norm() <= 1e-8 * std::max(1.0, fd.norm()));
  }
  CHECK_THROWS_AS(least_squares_grad(Vec::Zero(5), b), Error);
}

TEST_CASE("Lorentzian loss") {
  std::mt19937_64 rng(16);
  const Vec b = randn(6, rng);
  auto [v0, g0] = lorentzian_value_grad(b, b);
  CHECK(v0 == 0.0);
  CHECK(g0.norm() == 0.0);

  Vec z = b;
  z[0] += 1.0;
  auto [v1, g1] = lorentzian_value_grad(z, b);
  CHECK(v1 == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(g1[0] == doctest::Approx(1.0).epsilon(1e-15));

  double f0 = 0.0;
  for (Index i = 0; i < 6; ++i) f0 += std::log1p(b[i] * b[i]);
  CHECK(lorentzian_value_grad(Vec::Zero(6), b).first == doctest::Approx(f0).epsilon(1e-14));

  for (int k = 0; k < 20; ++k) {
    const Vec zz = randn(6, rng, 2.0);
    const Vec fd =
        oracle::fd_gradient([&](const Vec& v) { return lorentzian_value_grad(v, b).first; }, zz);
    CHECK((fd - lorentzian_value_grad(zz, b).second).norm() <= 1e-6 * std::max(1.0, fd.norm()));
  }

  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const Vec z1 = randn(6, rng, 1.5);
    const Vec z2 = k % 2 == 0 ? Vec(z1 + randn(6, rng, 1e-3)) : randn(6, rng, 1.5);
    const double d = (z1 - z2).norm();
    if (d == 0.0) continue;
    worst = std::max(worst,
                     (lorentzian_value_grad(z1, b).second - lorentzian_value_grad(z2, b).second).norm() / d);
  }
  CHECK(worst <= 2.0 + 1e-9);
}

TEST_CASE("loss dispatch and regularizer value") {
  LossKind ls{LossTag::kLeastSquares, Vec::Ones(3)};
  LossKind lo{LossTag::kLorentzian, Vec::Ones(3)};
  CHECK(ls.ell() == 1.0);
  CHECK(lo.ell() == 2.0);
  CHECK(ls.value(Vec::Zero(3)) == doctest::Approx(1.5));
  CHECK(lo.value(Vec::Zero(3)) == doctest::Approx(3.0 * std::log(2.0)));

  L1L2Regularizer r{0.5, 1.0};
  Vec x(2);
  x << 3.0, -4.0;
  CHECK(r.value(x) == doctest::Approx(0.5 * (7.0 - 5.0)));
  L1L2Regularizer bad{0.5, -0.5};
  CHECK_THROWS_AS(bad.validate(), Error);
  L1L2Regularizer zero_gamma{0.0, 1.0};
  CHECK_THROWS_AS(zero_gamma.validate(), Error);
}
