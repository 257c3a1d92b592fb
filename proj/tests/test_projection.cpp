#include <cmath>
#include <random>
#include <thread>

#include "doctest.h"
#include "oracles.hpp"
#include "proxsg/error.hpp"
#include "proxsg/polyhedral.hpp"

using namespace proxsg;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec randn(Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

struct RandomPolytope {
  PolyhedralSet set;
  Mat E, G;  // the same set written as equalities and inequalities only, for the oracle
  Vec e, g;
};

// Random nonempty polytope around a centre point: inequalities, sometimes an equality, sometimes a box.
RandomPolytope random_polytope(std::mt19937_64& rng, Index d) {
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_real_distribution<double> slack(0.1, 1.0);
  const Vec c = randn(d, rng);
  const bool with_box = d <= 4 && coin(rng) == 1;
  const bool with_eq = coin(rng) == 1;
  const Index mi = std::min<Index>(10, d + 2 + static_cast<Index>(rng() % 4));

  RandomPolytope p;
  p.set = PolyhedralSet::free_space(d);
  p.set.ineq_mat.resize(mi, d);
  p.set.ineq_rhs.resize(mi);
  for (Index i = 0; i < mi; ++i) {
    p.set.ineq_mat.row(i) = randn(d, rng).transpose();
    p.set.ineq_rhs[i] = p.set.ineq_mat.row(i).dot(c) + slack(rng);
  }
  if (with_eq) {
    p.set.eq_mat = randn(d, rng).transpose();
    p.set.eq_rhs = Vec::Constant(1, p.set.eq_mat.row(0).dot(c));
  }
  if (with_box) {
    for (Index i = 0; i < d; ++i) {
      p.set.lo[i] = c[i] - slack(rng);
      p.set.hi[i] = c[i] + slack(rng);
    }
  }

  p.E = p.set.eq_mat;
  p.e = p.set.eq_rhs;
  const Index nbox = with_box ? 2 * d : 0;
  p.G.resize(mi + nbox, d);
  p.g.resize(mi + nbox);
  p.G.topRows(mi) = p.set.ineq_mat;
  p.g.head(mi) = p.set.ineq_rhs;
  for (Index i = 0; i < nbox / 2; ++i) {
    p.G.row(mi + 2 * i) = Vec::Unit(d, i).transpose();
    p.g[mi + 2 * i] = p.set.hi[i];
    p.G.row(mi + 2 * i + 1) = -Vec::Unit(d, i).transpose();
    p.g[mi + 2 * i + 1] = -p.set.lo[i];
  }
  return p;
}

}  // namespace

TEST_CASE("pure box projection is a clamp") {
  PolyhedralSet s = PolyhedralSet::free_space(4);
  s.lo.setZero();
  s.hi.setOnes();
  Vec w(4);
  w << 2.0, -1.0, 0.5, 0.25;
  const auto r = project(s, w);
  Vec expect(4);
  expect << 1.0, 0.0, 0.5, 0.25;
  CHECK((r.x - expect).norm() <= 1e-12);
}

TEST_CASE("half-space projection matches the closed form") {
  PolyhedralSet s = PolyhedralSet::free_space(2);
  s.ineq_mat = Mat::Ones(1, 2);
  s.ineq_rhs = Vec::Zero(1);
  const auto r = project(s, Vec::Ones(2));
  CHECK(r.x.norm() <= 1e-12);

  std::mt19937_64 rng(1);
  for (int k = 0; k < 20; ++k) {
    PolyhedralSet h = PolyhedralSet::free_space(5);
    const Vec a = randn(5, rng);
    h.ineq_mat = a.transpose();
    h.ineq_rhs = Vec::Constant(1, 0.3);
    const Vec w = randn(5, rng, 3.0);
    const double viol = a.dot(w) - 0.3;
    const Vec expect = viol > 0.0 ? Vec(w - viol / a.squaredNorm() * a) : w;
    CHECK((project(h, w).x - expect).norm() <= 1e-10);
  }
}

TEST_CASE("projection onto random polytopes agrees with active-set enumeration") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(2, 8);
  double worst = 0.0;
  for (int k = 0; k < 60; ++k) {
    const Index d = dim(rng);
    const RandomPolytope p = random_polytope(rng, d);
    const PolytopeProjector proj(p.set);
    const Vec w = randn(d, rng, 3.0);
    const auto expect = oracle::active_set_projection(p.E, p.e, p.G, p.g, w);
    REQUIRE(expect.has_value());
    worst = std::max(worst, (proj.project(w).x - *expect).norm());
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("projection is idempotent, nonexpansive and satisfies KKT") {
  std::mt19937_64 rng(77);
  const double tol = 1e-8;
  for (int k = 0; k < 40; ++k) {
    const RandomPolytope p = random_polytope(rng, 6);
    const PolytopeProjector proj(p.set);
    const Vec a = randn(6, rng, 3.0);
    const Vec b = randn(6, rng, 3.0);
    const auto pa = proj.project(a, tol);
    const auto pb = proj.project(b, tol);
    CHECK(p.set.contains(pa.x, tol));
    CHECK(pa.kkt.max() <= tol);
    CHECK((proj.project(pa.x, tol).x - pa.x).norm() <= 10 * tol);
    CHECK((pa.x - pb.x).norm() <= (a - b).norm() + 10 * tol);
  }
}

TEST_CASE("a projector can be shared across threads") {
  std::mt19937_64 rng(5);
  const RandomPolytope p = random_polytope(rng, 8);
  const PolytopeProjector proj(p.set);
  std::vector<Vec> inputs;
  for (int k = 0; k < 16; ++k) inputs.push_back(randn(8, rng, 3.0));
  std::vector<Vec> serial;
  for (const auto& w : inputs) serial.push_back(proj.project(w).x);
  std::vector<Vec> parallel(inputs.size());
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t) {
    pool.emplace_back([&, t] {
      for (size_t i = static_cast<size_t>(t); i < inputs.size(); i += 4) parallel[i] = proj.project(inputs[i]).x;
    });
  }
  for (auto& th : pool) th.join();
  for (size_t i = 0; i < inputs.size(); ++i) CHECK((serial[i] - parallel[i]).norm() == 0.0);
}

TEST_CASE("feasible point") {
  PolyhedralSet box = PolyhedralSet::free_space(3);
  box.lo.setZero();
  box.hi.setOnes();
  const Vec x = feasible_point(box);
  CHECK(box.residuals(x).max() == 0.0);
  CHECK(x.minCoeff() > 0.0);
  CHECK(x.maxCoeff() < 1.0);

  PolyhedralSet contradiction = PolyhedralSet::free_space(2);
  contradiction.eq_mat = Mat::Zero(1, 2);
  contradiction.eq_mat(0, 0) = 1.0;
  contradiction.eq_rhs = Vec::Ones(1);
  contradiction.ineq_mat = contradiction.eq_mat;
  contradiction.ineq_rhs = Vec::Zero(1);
  try {
    feasible_point(contradiction);
    FAIL("expected infeasibility");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInfeasible);
  }

  PolyhedralSet box_clash = PolyhedralSet::free_space(2);
  box_clash.eq_mat = Mat::Zero(1, 2);
  box_clash.eq_mat(0, 0) = 1.0;
  box_clash.eq_rhs = Vec::Ones(1);
  box_clash.hi[0] = 0.0;
  CHECK_THROWS_AS(feasible_point(box_clash), Error);
}

TEST_CASE("malformed sets are rejected") {
  PolyhedralSet s = PolyhedralSet::free_space(3);
  s.lo[1] = 2.0;
  s.hi[1] = 1.0;
  CHECK_THROWS_AS(PolytopeProjector{s}, Error);

  PolyhedralSet dep = PolyhedralSet::free_space(3);
  dep.eq_mat = Mat::Ones(2, 3);
  dep.eq_rhs = Vec::Ones(2);
  CHECK_THROWS_AS(PolytopeProjector{dep}, Error);

  PolyhedralSet ok = PolyhedralSet::free_space(3);
  CHECK_THROWS_AS(project(ok, Vec::Zero(2)), Error);
  Vec bad = Vec::Zero(3);
  bad[0] = kInf;
  CHECK_THROWS_AS(project(ok, bad), Error);
}
