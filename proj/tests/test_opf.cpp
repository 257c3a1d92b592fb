#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "proxsg/error.hpp"
#include "proxsg/opf.hpp"
#include "proxsg/solver.hpp"

using namespace proxsg;

namespace {

const std::string kNetwork = "data/network";

const NetworkData& network() {
  static const NetworkData net = load_network(kNetwork);
  return net;
}

const DCOPFModel& model() {
  static const DCOPFModel m = build_dcopf(network(), 1.0);
  return m;
}

// Largest violation of the DC formulation, evaluated straight from the network tables.
double dc_violation(const Vec& x, const NetworkData& net) {
  const int n = net.n_bus;
  const int ng = static_cast<int>(net.generator_buses.size());
  auto pv = [&](int i) { return x[i]; };
  auto pg = [&](int k) { return x[n + k]; };
  auto X = [&](int i) { return x[n + ng + i]; };
  auto th = [&](int i) { return x[2 * n + ng + i]; };
  auto P = [&](int i, int j) { return x[3 * n + ng + i * n + j]; };
  auto over = [](double v, double lo, double hi) { return std::max({0.0, lo - v, v - hi}); };

  double worst = 0.0;
  double pv_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    worst = std::max(worst, over(pv(i), 0.0, net.pv_p_max));
    worst = std::max(worst, over(X(i), 0.0, 1.0));
    worst = std::max(worst, std::max(0.0, pv(i) - net.pv_p_max * X(i)));
    pv_sum += pv(i);
    double out = 0.0;
    for (int j = 0; j < n; ++j) {
      worst = std::max(worst, over(P(i, j), -net.line_p_max, net.line_p_max));
      worst = std::max(worst, std::abs(P(i, j) - net.susceptance(i, j) * (th(i) - th(j))));
      if (j != i) out += P(i, j);
    }
    double gen = 0.0;
    for (int k = 0; k < ng; ++k) {
      if (net.generator_buses[static_cast<size_t>(k)] == i + 1) gen += pg(k);
    }
    worst = std::max(worst, std::abs(out - pv(i) - gen + net.demand_p[i]));
  }
  for (int k = 0; k < ng; ++k) {
    const int bus0 = net.generator_buses[static_cast<size_t>(k)] - 1;
    worst = std::max(worst, over(pg(k), 0.0, net.gen_p_max));
    worst = std::max(worst, over(th(bus0), 0.0, 2.0 * std::numbers::pi));
  }
  worst = std::max(worst, std::abs(th(net.generator_buses.front() - 1)));
  worst = std::max(worst, std::max(0.0, net.penetration_min * net.total_demand() - pv_sum));
  return worst;
}

std::filesystem::path copy_network(const std::string& name) {
  auto dst = std::filesystem::temp_directory_path() / ("proxsg_net_" + name);
  std::filesystem::remove_all(dst);
  std::filesystem::copy(kNetwork, dst, std::filesystem::copy_options::recursive);
  return dst;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::filesystem::path& p, const std::string& s) { std::ofstream(p) << s; }

ErrorCode load_error_code(const std::filesystem::path& dir) {
  try {
    load_network(dir.string());
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("bundled network values") {
  const NetworkData& net = network();
  CHECK(net.n_bus == 14);
  CHECK(net.generator_buses == std::vector<int>{11});
  CHECK(net.demand_p[0] == doctest::Approx(7.91e-3).epsilon(1e-12));
  CHECK(net.susceptance(0, 1) == doctest::Approx(998.0).epsilon(1e-12));
  CHECK(net.susceptance(1, 0) == net.susceptance(0, 1));
  CHECK((net.susceptance - net.susceptance.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(net.susceptance.diagonal().cwiseAbs().maxCoeff() == 0.0);
  CHECK(net.pv_p_max == doctest::Approx(0.008).epsilon(1e-15));
  CHECK(net.gen_p_max == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(net.line_p_max == doctest::Approx(0.03).epsilon(1e-15));
  CHECK(net.cost_a == 0.246);
  CHECK(net.cost_b == 0.084);
  CHECK(net.cost_c == 0.433);
  REQUIRE(net.links.size() == 14);
  CHECK(net.links.front() == std::pair<int, int>{0, 11});
}

TEST_CASE("corrupted network directories are reported as load errors") {
  {
    const auto dir = copy_network("asym");
    std::string s = slurp(dir / "susceptance.csv");
    const auto pos = s.find("9.98E+02");
    REQUIRE(pos != std::string::npos);
    s.replace(pos, 8, "5.00E+02");
    spit(dir / "susceptance.csv", s);
    CHECK(load_error_code(dir) == ErrorCode::kLoad);
    std::filesystem::remove_all(dir);
  }
  {
    const auto dir = copy_network("missing");
    std::filesystem::remove(dir / "demand.csv");
    CHECK(load_error_code(dir) == ErrorCode::kLoad);
    std::filesystem::remove_all(dir);
  }
  {
    const auto dir = copy_network("unit");
    std::string s = slurp(dir / "parameters.csv");
    const auto pos = s.find("kW");
    REQUIRE(pos != std::string::npos);
    s.replace(pos, 2, "furlong");
    spit(dir / "parameters.csv", s);
    CHECK(load_error_code(dir) == ErrorCode::kLoad);
    std::filesystem::remove_all(dir);
  }
  {
    const auto dir = copy_network("garbage");
    spit(dir / "demand.csv", "bus,p_pu,q_pu\n1,abc,0\n");
    CHECK_THROWS_AS(load_network(dir.string()), Error);
    std::filesystem::remove_all(dir);
  }
}

TEST_CASE("layout and objective pieces") {
  const DCOPFModel& m = model();
  const DCOPFVariables& L = m.layout;
  CHECK(L.dim() == 239);
  CHECK(m.spec.dim() == 239);

  Vec v = Vec::LinSpaced(239, -1.0, 1.0);
  CHECK((L.pack(L.unpack(v)) - v).norm() == 0.0);
  const auto blocks = L.unpack(v);
  CHECK(blocks.flow(2, 5) == v[L.flow(2, 5)]);
  CHECK(blocks.theta[4] == v[L.theta(4)]);

  const Vec zero = Vec::Zero(239);
  CHECK(m.spec.value_h(m.spec.map_A.apply(zero)) == doctest::Approx(0.433).epsilon(1e-15));
  CHECK(m.spec.lipschitz_ell == doctest::Approx(0.492).epsilon(1e-15));

  Vec ones = zero;
  Vec half = zero;
  for (int i = 0; i < 14; ++i) {
    ones[L.x(i)] = 1.0;
    half[L.x(i)] = 0.5;
  }
  CHECK(m.spec.value_g(zero) == 0.0);
  CHECK(m.spec.value_g(ones) == 0.0);
  CHECK(m.spec.value_g(half) == doctest::Approx(-3.5).epsilon(1e-15));

  CHECK(binary_relaxation_gap(ones, L) == 0.0);
  Vec one_half = zero;
  one_half[L.x(3)] = 0.5;
  CHECK(binary_relaxation_gap(one_half, L) == doctest::Approx(0.25));
  Vec mixed = zero;
  mixed[L.x(0)] = 0.9;
  mixed[L.x(1)] = 0.1;
  CHECK(binary_relaxation_gap(mixed, L) == doctest::Approx(0.18).epsilon(1e-14));
}

TEST_CASE("feasible point and random starts satisfy the DC formulation") {
  const DCOPFModel& m = model();
  const Vec w = feasible_point(m.set);
  CHECK(dc_violation(w, network()) <= 1e-7);

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Vec x0 = random_feasible_start(m, seed);
    CHECK(dc_violation(x0, network()) <= 1e-7);
    CHECK(m.spec.contains(x0, 1e-7));
    const auto b = m.layout.unpack(x0);
    CHECK((b.flow + b.flow.transpose()).cwiseAbs().maxCoeff() <= 1e-7);
    CHECK(b.pv.sum() >= 0.5 * network().total_demand() - 1e-8);
    CHECK((random_feasible_start(m, seed) - x0).norm() == 0.0);
  }
}

TEST_CASE("proposed solver keeps iterates feasible and the Lyapunov function decreasing") {
  const DCOPFModel& m = model();
  SolverParams p;
  p.max_iter = 1000;
  p.mu_rule = MuRule::kConstant;
  p.store_iterates = TracePolicy::kAlways;
  const Vec x0 = random_feasible_start(m, 3);
  const auto rep = solve(m.spec, x0, p);
  const double f0 = rep.trace.records.front().objective;
  CHECK(rep.max_lyapunov_violation <= 1e-6 * (1.0 + std::abs(f0)));
  for (const auto& x : rep.trace.iterates) CHECK(dc_violation(x, network()) <= 1e-7);
  CHECK(rep.objective <= f0);
}

TEST_CASE("plan report") {
  const DCOPFModel& m = model();
  const Vec x0 = random_feasible_start(m, 1);
  PlanReport none = postprocess_solution(Vec::Zero(239), network(), m, 1e-6);
  CHECK(none.placement.empty());
  CHECK(none.binary);

  SolverParams p;
  p.mu_rule = MuRule::kConstant;
  const auto rep = solve(m.spec, x0, p);
  const PlanReport r = postprocess_solution(rep.x, network(), m, 1e-6, 10.0);
  CHECK(r.objective == doctest::Approx(m.spec.objective(rep.x)));
  CHECK(r.binary_gap == doctest::Approx(binary_relaxation_gap(rep.x, m.layout)));
  CHECK(r.penetration >= 0.5 - 1e-6);
  REQUIRE(r.cost_reduction.has_value());
  CHECK(*r.cost_reduction == doctest::Approx(1.0 - r.total_cost_units / 10.0));

  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j.contains("placement"));
  CHECK(j.contains("objective"));
  CHECK(j.contains("binary_gap"));
  CHECK(j["status"] == r.status);
  CHECK(r.to_table().find("PV placement") != std::string::npos);
}

TEST_CASE("AC branch-flow model") {
  const ACModel ac = load_ac_model(network());
  const int N = 14, E = 14, M = 1;
  CHECK(ac.edges.size() == static_cast<size_t>(E));
  CHECK(ac.edges.front() == std::pair<int, int>{0, 11});
  CHECK(ac.dim == 2 * M + 3 * N + 3 * E + N);
  for (Index k = 0; k < ac.dim; ++k) {
    const auto [name, off] = ac.locate(k);
    CHECK(ac.index(name, off) == k);
  }
  CHECK_THROWS_AS(ac.index("nope", 0), Error);
  // Two injections at the source, one active and one reactive balance per link head,
  // a voltage drop and a current definition per link.
  CHECK(ac.equality_count() == 2 + 2 * E + 2 * E);
  // Penetration, two-sided bounds on PV P/Q, voltage and X per bus, on current and P/Q flow per link,
  // and on generator P/Q.
  CHECK(ac.inequality_count() == 1 + 2 * N * 4 + 2 * E * 3 + 2 * 2 * M);
  CHECK(nlohmann::json::parse(ac.to_json()).contains("constraints"));

  NetworkData broken = network();
  broken.links[3].second = broken.links[4].second;
  CHECK_THROWS_AS(load_ac_model(broken), Error);
}
