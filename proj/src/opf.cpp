#include "proxsg/opf.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "csv.hpp"
#include "json.hpp"
#include "proxsg/error.hpp"

namespace proxsg {

namespace {

constexpr double kTwoPi = 6.283185307179586;
constexpr double kInf = std::numeric_limits<double>::infinity();

Error load_error(const std::string& msg) { return Error(ErrorCode::kLoad, "load_network: " + msg); }

std::vector<csv::Row> read_table(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw load_error("missing file " + path.string());
  auto rows = csv::read(path.string());
  if (rows.empty()) throw load_error(path.string() + " is empty");
  return rows;
}

Mat read_bus_matrix(const std::filesystem::path& path, int n_bus) {
  const auto rows = read_table(path);
  const std::string name = path.filename().string();
  if (static_cast<int>(rows.size()) != n_bus + 1) {
    throw load_error(name + ": expected a header and " + std::to_string(n_bus) + " bus rows");
  }
  Mat m(n_bus, n_bus);
  for (int r = 0; r < n_bus; ++r) {
    const auto& row = rows[static_cast<size_t>(r + 1)];
    if (static_cast<int>(row.size()) != n_bus + 1) {
      throw load_error(name + ": row " + std::to_string(r + 1) + " has the wrong number of columns");
    }
    const long long bus = csv::to_int(row[0], name);
    if (bus != r + 1) throw load_error(name + ": missing bus " + std::to_string(r + 1));
    for (int c = 0; c < n_bus; ++c) m(r, c) = csv::to_double(row[static_cast<size_t>(c + 1)], name);
  }
  return m;
}

void require_symmetric(const Mat& m, const std::string& name) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = i + 1; j < m.cols(); ++j) {
      if (std::abs(m(i, j) - m(j, i)) > 1e-12 * std::max(1.0, std::abs(m(i, j)))) {
        std::ostringstream msg;
        msg << name << " is not symmetric at (" << i + 1 << "," << j + 1 << ")";
        throw load_error(msg.str());
      }
    }
  }
}

double to_per_unit(double value, const std::string& unit, double base_mva, const std::string& key) {
  if (unit == "pu" || unit == "none" || unit == "units" || unit == "usd" || unit == "MVA" || unit == "kV") return value;
  if (unit == "kW" || unit == "kvar") return value / (base_mva * 1000.0);
  if (unit == "MW" || unit == "Mvar") return value / base_mva;
  throw load_error("parameters.csv: unknown unit '" + unit + "' for " + key);
}

double generation_cost(const NetworkData& net, double p) { return net.cost_a * p * p + net.cost_b * p + net.cost_c; }

}  // namespace

bool NetworkData::is_generator(int bus) const {
  return std::find(generator_buses.begin(), generator_buses.end(), bus) != generator_buses.end();
}

void NetworkData::validate() const {
  if (n_bus <= 0) throw load_error("no buses");
  const Index n = n_bus;
  if (demand_p.size() != n || demand_q.size() != n || susceptance.rows() != n || susceptance.cols() != n ||
      resistance.rows() != n || reactance.rows() != n || susceptance_diag.size() != n) {
    throw load_error("table sizes do not match the bus count");
  }
  if (generator_buses.empty()) throw load_error("no generator bus");
  for (int g : generator_buses) {
    if (g < 1 || g > n_bus) throw load_error("generator bus " + std::to_string(g) + " does not exist");
  }
  for (Index i = 0; i < n; ++i) {
    if (demand_p[i] < 0.0 || demand_q[i] < 0.0) throw load_error("negative demand at bus " + std::to_string(i + 1));
  }
  require_symmetric(susceptance, "susceptance");
  require_symmetric(resistance, "resistance");
  require_symmetric(reactance, "reactance");
  for (Index i = 0; i < n; ++i) {
    if (susceptance(i, i) != 0.0 || resistance(i, i) != 0.0 || reactance(i, i) != 0.0) {
      throw load_error("nonzero diagonal in a line table at bus " + std::to_string(i + 1));
    }
    // Tabulated diagonals are rounded to three significant figures.
    const double row_sum = susceptance.row(i).sum();
    if (std::abs(row_sum + susceptance_diag[i]) > 1e-2 * std::max(1.0, std::abs(row_sum))) {
      throw load_error("susceptance row " + std::to_string(i + 1) + " does not sum to minus its diagonal");
    }
  }
  const double caps[] = {pv_p_max, pv_q_max, gen_p_max, gen_q_max, line_p_max, line_q_max, base_power_mva};
  for (double c : caps) {
    if (!(c > 0.0)) throw load_error("capacities must be positive");
  }
  if (!(total_demand() > 0.0)) throw load_error("total demand must be positive");
  if (!(pv_unit_cost >= 0.0) || !(unit_dollars > 0.0)) throw load_error("invalid cost constants");
}

NetworkData load_network(const std::string& dir) {
  const std::filesystem::path root(dir);
  if (!std::filesystem::is_directory(root)) throw load_error("network directory not found: " + dir);
  NetworkData net;

  std::map<std::string, std::pair<double, std::string>> params;
  {
    const auto rows = read_table(root / "parameters.csv");
    for (size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].size() != 3) throw load_error("parameters.csv: expected name,value,unit");
      params[rows[r][0]] = {csv::to_double(rows[r][1], "parameters.csv " + rows[r][0]), rows[r][2]};
    }
  }
  auto param = [&](const std::string& key) {
    const auto it = params.find(key);
    if (it == params.end()) throw load_error("parameters.csv: missing " + key);
    return to_per_unit(it->second.first, it->second.second, net.base_power_mva, key);
  };
  net.base_power_mva = param("base_power");
  net.base_voltage_kv = param("base_voltage");
  net.cost_a = param("cost_a");
  net.cost_b = param("cost_b");
  net.cost_c = param("cost_c");
  net.pv_unit_cost = param("pv_unit_cost");
  net.unit_dollars = param("unit_dollars");
  net.pv_p_max = param("pv_p_max");
  net.pv_q_max = param("pv_q_max");
  net.gen_p_max = param("gen_p_max");
  net.gen_q_max = param("gen_q_max");
  net.line_p_max = param("line_p_max");
  net.line_q_max = param("line_q_max");
  net.v_max = param("v_max");
  net.v_min = param("v_min");
  net.i_max = param("i_max");
  net.i_min = param("i_min");
  net.gamma = param("gamma");
  net.penetration_min = param("penetration_min");

  {
    const auto rows = read_table(root / "demand.csv");
    const auto& header = rows[0];
    if (header.size() != 3 || header[0] != "bus") throw load_error("demand.csv: expected bus,<p>,<q> header");
    double scale = 1.0;
    if (header[1] == "p_kw" && header[2] == "q_kvar") {
      scale = 1.0 / (net.base_power_mva * 1000.0);
    } else if (header[1] != "p_pu" || header[2] != "q_pu") {
      throw load_error("demand.csv: columns must be p_pu,q_pu or p_kw,q_kvar");
    }
    net.n_bus = static_cast<int>(rows.size()) - 1;
    net.demand_p.resize(net.n_bus);
    net.demand_q.resize(net.n_bus);
    for (int i = 0; i < net.n_bus; ++i) {
      const auto& row = rows[static_cast<size_t>(i + 1)];
      if (row.size() != 3) throw load_error("demand.csv: row " + std::to_string(i + 1) + " needs 3 columns");
      if (csv::to_int(row[0], "demand.csv") != i + 1) throw load_error("demand.csv: missing bus " + std::to_string(i + 1));
      net.demand_p[i] = scale * csv::to_double(row[1], "demand.csv");
      net.demand_q[i] = scale * csv::to_double(row[2], "demand.csv");
    }
  }

  Mat sus = read_bus_matrix(root / "susceptance.csv", net.n_bus);
  net.susceptance_diag = sus.diagonal();
  sus.diagonal().setZero();
  net.susceptance = std::move(sus);
  net.resistance = read_bus_matrix(root / "resistance.csv", net.n_bus);
  net.reactance = read_bus_matrix(root / "reactance.csv", net.n_bus);

  for (const auto& row : std::vector<csv::Row>(read_table(root / "generators.csv"))) {
    if (row.size() != 1) throw load_error("generators.csv: expected one bus per line");
    if (row[0] == "bus") continue;
    net.generator_buses.push_back(static_cast<int>(csv::to_int(row[0], "generators.csv")));
  }
  {
    const auto rows = read_table(root / "links.csv");
    for (size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].size() != 2) throw load_error("links.csv: expected from,to");
      net.links.emplace_back(static_cast<int>(csv::to_int(rows[r][0], "links.csv")),
                             static_cast<int>(csv::to_int(rows[r][1], "links.csv")));
    }
  }
  net.validate();
  return net;
}

DCOPFVariables::Blocks DCOPFVariables::unpack(const Vec& v) const {
  if (v.size() != dim()) throw Error(ErrorCode::kDimensionMismatch, "DCOPFVariables::unpack: wrong dimension");
  Blocks b;
  b.pv = v.segment(pv(0), n_bus);
  b.gen = v.segment(gen(0), n_gen);
  b.x = v.segment(x(0), n_bus);
  b.theta = v.segment(theta(0), n_bus);
  b.flow.resize(n_bus, n_bus);
  for (Index i = 0; i < n_bus; ++i) {
    for (Index j = 0; j < n_bus; ++j) b.flow(i, j) = v[flow(i, j)];
  }
  return b;
}

Vec DCOPFVariables::pack(const Blocks& b) const {
  if (b.pv.size() != n_bus || b.gen.size() != n_gen || b.x.size() != n_bus || b.theta.size() != n_bus ||
      b.flow.rows() != n_bus || b.flow.cols() != n_bus) {
    throw Error(ErrorCode::kDimensionMismatch, "DCOPFVariables::pack: block sizes do not match the layout");
  }
  Vec v(dim());
  v.segment(pv(0), n_bus) = b.pv;
  v.segment(gen(0), n_gen) = b.gen;
  v.segment(x(0), n_bus) = b.x;
  v.segment(theta(0), n_bus) = b.theta;
  for (Index i = 0; i < n_bus; ++i) {
    for (Index j = 0; j < n_bus; ++j) v[flow(i, j)] = b.flow(i, j);
  }
  return v;
}

DCOPFModel build_dcopf(const NetworkData& net, double gamma, double projection_tol) {
  net.validate();
  if (!(gamma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "build_dcopf: gamma must be positive");
  if (!(projection_tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "build_dcopf: projection_tol must be positive");

  DCOPFModel model;
  model.projection_tol = projection_tol;
  DCOPFVariables& L = model.layout;
  L.n_bus = net.n_bus;
  L.n_gen = static_cast<Index>(net.generator_buses.size());
  const Index n = L.n_bus;
  const Index dim = L.dim();

  auto gen_slot = [&](Index bus0) -> Index {
    for (Index k = 0; k < L.n_gen; ++k) {
      if (net.generator_buses[static_cast<size_t>(k)] == bus0 + 1) return k;
    }
    return -1;
  };

  PolyhedralSet& S = model.set;
  const Index n_eq = n * n + 1 + n;
  S.eq_mat = Mat::Zero(n_eq, dim);
  S.eq_rhs = Vec::Zero(n_eq);
  Index r = 0;
  // P_ij = b_ij (theta_i - theta_j)
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j, ++r) {
      const double b = net.susceptance(i, j);
      S.eq_mat(r, L.flow(i, j)) = 1.0;
      if (b != 0.0) {
        S.eq_mat(r, L.theta(i)) = -b;
        S.eq_mat(r, L.theta(j)) = b;
      }
    }
  }
  S.eq_mat(r++, L.theta(net.generator_buses.front() - 1)) = 1.0;
  // sum_{j != i} P_ij - P^PV_i - P^G_i = -D_i
  for (Index i = 0; i < n; ++i, ++r) {
    for (Index j = 0; j < n; ++j) {
      if (j != i) S.eq_mat(r, L.flow(i, j)) = 1.0;
    }
    S.eq_mat(r, L.pv(i)) = -1.0;
    const Index k = gen_slot(i);
    if (k >= 0) S.eq_mat(r, L.gen(k)) = -1.0;
    S.eq_rhs[r] = -net.demand_p[i];
  }

  S.ineq_mat = Mat::Zero(1 + n, dim);
  S.ineq_rhs = Vec::Zero(1 + n);
  for (Index i = 0; i < n; ++i) S.ineq_mat(0, L.pv(i)) = -1.0;
  S.ineq_rhs[0] = -net.penetration_min * net.total_demand();
  for (Index i = 0; i < n; ++i) {
    S.ineq_mat(1 + i, L.pv(i)) = 1.0;
    S.ineq_mat(1 + i, L.x(i)) = -net.pv_p_max;
  }

  S.lo = Vec::Constant(dim, -kInf);
  S.hi = Vec::Constant(dim, kInf);
  for (Index i = 0; i < n; ++i) {
    S.lo[L.pv(i)] = 0.0;
    S.hi[L.pv(i)] = net.pv_p_max;
    S.lo[L.x(i)] = 0.0;
    S.hi[L.x(i)] = 1.0;
    for (Index j = 0; j < n; ++j) {
      S.lo[L.flow(i, j)] = -net.line_p_max;
      S.hi[L.flow(i, j)] = net.line_p_max;
    }
  }
  for (Index k = 0; k < L.n_gen; ++k) {
    S.lo[L.gen(k)] = 0.0;
    S.hi[L.gen(k)] = net.gen_p_max;
    const Index t = L.theta(net.generator_buses[static_cast<size_t>(k)] - 1);
    S.lo[t] = 0.0;
    S.hi[t] = kTwoPi;
  }

  model.sample_lo = S.lo;
  model.sample_hi = S.hi;
  for (Index i = 0; i < n; ++i) {
    model.sample_lo[L.theta(i)] = 0.0;
    model.sample_hi[L.theta(i)] = kTwoPi;
  }

  auto projector = std::make_shared<const PolytopeProjector>(S);
  model.projector = projector;
  feasible_point(S, projection_tol);

  const double inv_demand = 1.0 / net.total_demand();
  const double C = net.pv_unit_cost;
  const double a = net.cost_a;
  const double bb = net.cost_b;
  const double c = net.cost_c;

  ProblemSpec& spec = model.spec;
  spec.map_A = LinearMap::identity(dim);
  spec.prox_fC = [projector, projection_tol](const Vec& w, double) { return projector->project(w, projection_tol).x; };
  spec.grad_h = [L, C, a, bb, inv_demand](const Vec& z) {
    Vec g = Vec::Zero(z.size());
    for (Index i = 0; i < L.n_bus; ++i) {
      g[L.x(i)] = C;
      g[L.pv(i)] = -inv_demand;
    }
    for (Index k = 0; k < L.n_gen; ++k) g[L.gen(k)] = 2.0 * a * z[L.gen(k)] + bb;
    return g;
  };
  spec.value_h = [L, C, a, bb, c, inv_demand](const Vec& z) {
    double v = C * z.segment(L.x(0), L.n_bus).sum() - inv_demand * z.segment(L.pv(0), L.n_bus).sum();
    for (Index k = 0; k < L.n_gen; ++k) {
      const double p = z[L.gen(k)];
      v += a * p * p + bb * p + c;
    }
    return v;
  };
  spec.subgrad_g = [L, gamma](const Vec& x) {
    Vec g = Vec::Zero(x.size());
    for (Index i = 0; i < L.n_bus; ++i) g[L.x(i)] = gamma * (2.0 * x[L.x(i)] - 1.0);
    return g;
  };
  spec.value_g = [L, gamma](const Vec& x) {
    const auto X = x.segment(L.x(0), L.n_bus).array();
    return gamma * (X * X - X).sum();
  };
  spec.value_f = [](const Vec&) { return 0.0; };
  spec.in_C = [projector](const Vec& x, double tol) { return projector->set().contains(x, tol); };
  spec.lipschitz_ell = 2.0 * a;
  spec.weak_convexity_beta = 0.0;
  spec.norm_A = 1.0;
  return model;
}

Vec random_feasible_start(const DCOPFModel& model, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec w(model.sample_lo.size());
  for (Index i = 0; i < w.size(); ++i) {
    w[i] = model.sample_lo[i] + (model.sample_hi[i] - model.sample_lo[i]) * unit(rng);
  }
  return model.projector->project(w, model.projection_tol).x;
}

double binary_relaxation_gap(const Vec& x, const DCOPFVariables& layout) {
  if (x.size() != layout.dim()) throw Error(ErrorCode::kDimensionMismatch, "binary_relaxation_gap: wrong dimension");
  double gap = 0.0;
  for (Index i = 0; i < layout.n_bus; ++i) {
    const double v = x[layout.x(i)];
    gap += std::max(0.0, v - v * v);
  }
  return gap;
}

PlanReport postprocess_solution(const Vec& x, const NetworkData& net, const DCOPFModel& model, double round_tol,
                                std::optional<double> baseline_cost_units) {
  if (!(round_tol >= 0.0 && round_tol < 0.5)) {
    throw Error(ErrorCode::kInvalidArgument, "postprocess_solution: round_tol must be in [0, 0.5)");
  }
  const DCOPFVariables& L = model.layout;
  const auto blocks = L.unpack(x);
  PlanReport rep;
  rep.objective = model.spec.objective(x);
  rep.binary_gap = binary_relaxation_gap(x, L);
  rep.x_values = blocks.x;
  rep.pv_dispatch = blocks.pv;
  rep.generator_dispatch = blocks.gen;
  rep.generator_buses = net.generator_buses;
  rep.penetration = blocks.pv.sum() / net.total_demand();
  rep.unit_dollars = net.unit_dollars;

  int installed = 0;
  for (Index i = 0; i < L.n_bus; ++i) {
    const double v = blocks.x[i];
    if (std::abs(v - 1.0) <= round_tol) {
      rep.placement.push_back(static_cast<int>(i + 1));
      ++installed;
    } else if (std::abs(v) > round_tol) {
      rep.fractional_buses.push_back(static_cast<int>(i + 1));
    }
  }
  rep.binary = rep.fractional_buses.empty();
  rep.status = rep.binary ? "binary" : "unrounded relaxation";

  rep.installation_cost_units = net.pv_unit_cost * installed;
  for (Index k = 0; k < L.n_gen; ++k) rep.generation_cost_units += generation_cost(net, blocks.gen[k]);
  rep.total_cost_units = rep.installation_cost_units + rep.generation_cost_units;
  rep.baseline_cost_units = baseline_cost_units;
  if (baseline_cost_units && *baseline_cost_units > 0.0) {
    rep.cost_reduction = 1.0 - rep.total_cost_units / *baseline_cost_units;
  }
  return rep;
}

std::string PlanReport::to_json() const {
  using nlohmann::ordered_json;
  ordered_json j;
  j["status"] = status;
  j["placement"] = placement;
  j["fractional_buses"] = fractional_buses;
  j["objective"] = objective;
  j["binary_gap"] = binary_gap;
  j["pv_penetration"] = penetration;
  j["x"] = std::vector<double>(x_values.data(), x_values.data() + x_values.size());
  j["pv_dispatch_pu"] = std::vector<double>(pv_dispatch.data(), pv_dispatch.data() + pv_dispatch.size());
  ordered_json gens = ordered_json::array();
  for (size_t k = 0; k < generator_buses.size(); ++k) {
    gens.push_back({{"bus", generator_buses[k]}, {"p_pu", generator_dispatch[static_cast<Index>(k)]}});
  }
  j["generators"] = gens;
  j["cost"] = {
      {"installation_units", installation_cost_units},
      {"generation_units", generation_cost_units},
      {"total_units", total_cost_units},
      {"installation_usd", installation_cost_units * unit_dollars},
      {"generation_usd", generation_cost_units * unit_dollars},
      {"total_usd", total_cost_units * unit_dollars},
  };
  j["baseline_cost_units"] = baseline_cost_units ? ordered_json(*baseline_cost_units) : ordered_json(nullptr);
  j["cost_reduction"] = cost_reduction ? ordered_json(*cost_reduction) : ordered_json(nullptr);
  return j.dump(2);
}

std::string PlanReport::to_table() const {
  std::ostringstream out;
  auto join = [](const std::vector<int>& v) {
    std::string s = "{";
    for (size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
    return s + "}";
  };
  out << std::setprecision(6) << std::fixed;
  out << "status              " << status << '\n';
  out << "PV placement        " << join(placement) << '\n';
  if (!fractional_buses.empty()) out << "fractional X        " << join(fractional_buses) << '\n';
  out << "objective           " << objective << '\n';
  out << "binary gap          " << std::scientific << binary_gap << std::fixed << '\n';
  out << "PV penetration      " << penetration << '\n';
  for (size_t k = 0; k < generator_buses.size(); ++k) {
    out << "generator bus " << std::setw(2) << generator_buses[k] << "    " << generator_dispatch[static_cast<Index>(k)]
        << " pu\n";
  }
  out << std::setprecision(0);
  out << "installation cost   $" << installation_cost_units * unit_dollars << '\n';
  out << "generation cost     $" << generation_cost_units * unit_dollars << '\n';
  out << "total cost          $" << total_cost_units * unit_dollars << '\n';
  if (cost_reduction) out << std::setprecision(1) << "cost reduction      " << 100.0 * *cost_reduction << "%\n";
  return out.str();
}

Index ACModel::index(const std::string& block, Index k) const {
  for (const auto& b : blocks) {
    if (b.name == block) {
      if (k < 0 || k >= b.size) throw Error(ErrorCode::kInvalidArgument, "ACModel::index: entry out of range");
      return b.offset + k;
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "ACModel::index: unknown block '" + block + "'");
}

std::pair<std::string, Index> ACModel::locate(Index flat) const {
  for (const auto& b : blocks) {
    if (flat >= b.offset && flat < b.offset + b.size) return {b.name, flat - b.offset};
  }
  throw Error(ErrorCode::kInvalidArgument, "ACModel::locate: index out of range");
}

int ACModel::equality_count() const {
  int n = 0;
  for (const auto& c : constraints) n += c.kind == "eq" ? c.count : 0;
  return n;
}

int ACModel::inequality_count() const {
  int n = 0;
  for (const auto& c : constraints) n += c.kind == "ineq" ? c.count : 0;
  return n;
}

std::string ACModel::to_json() const {
  nlohmann::ordered_json j;
  j["dim"] = dim;
  nlohmann::ordered_json e = nlohmann::ordered_json::array();
  for (const auto& [from, to] : edges) e.push_back({from, to});
  j["edges"] = e;
  nlohmann::ordered_json bl = nlohmann::ordered_json::array();
  for (const auto& b : blocks) bl.push_back({{"name", b.name}, {"offset", b.offset}, {"size", b.size}});
  j["blocks"] = bl;
  nlohmann::ordered_json cs = nlohmann::ordered_json::array();
  for (const auto& c : constraints) {
    cs.push_back({{"name", c.name}, {"kind", c.kind}, {"count", c.count}, {"convex", c.convex}});
  }
  j["constraints"] = cs;
  j["equalities"] = equality_count();
  j["inequalities"] = inequality_count();
  return j.dump(2);
}

ACModel load_ac_model(const NetworkData& net) {
  net.validate();
  const int n = net.n_bus;
  const int m = static_cast<int>(net.links.size());
  if (m != n) throw load_error("AC model: expected one incoming link per bus");

  // Radial structure: every bus has exactly one parent and is reachable from the source.
  std::vector<int> parent(static_cast<size_t>(n + 1), -1);
  for (const auto& [from, to] : net.links) {
    if (from < 0 || from > n || to < 1 || to > n || from == to) throw load_error("AC model: invalid link");
    if (parent[static_cast<size_t>(to)] != -1) throw load_error("AC model: bus with two incoming links");
    parent[static_cast<size_t>(to)] = from;
  }
  bool rooted_at_generator = false;
  for (const auto& [from, to] : net.links) {
    if (from == 0) {
      if (rooted_at_generator || !net.is_generator(to)) throw load_error("AC model: source must feed one generator bus");
      rooted_at_generator = true;
    }
  }
  if (!rooted_at_generator) throw load_error("AC model: links are not rooted at the source");
  for (int bus = 1; bus <= n; ++bus) {
    std::set<int> seen;
    int cur = bus;
    while (cur != 0) {
      if (!seen.insert(cur).second) throw load_error("AC model: links contain a cycle");
      cur = parent[static_cast<size_t>(cur)];
    }
  }

  ACModel ac;
  ac.edges = net.links;
  const Index ng = static_cast<Index>(net.generator_buses.size());
  const Index E = m;
  const Index N = n;
  Index off = 0;
  for (const auto& [name, size] : std::vector<std::pair<std::string, Index>>{
           {"P_G", ng}, {"Q_G", ng}, {"v", N}, {"I_hat", E}, {"P", E}, {"Q", E}, {"P_PV", N}, {"Q_PV", N}, {"X", N}}) {
    ac.blocks.push_back({name, off, size});
    off += size;
  }
  ac.dim = off;

  int gen_heads = 0;
  for (const auto& link : net.links) gen_heads += net.is_generator(link.second) ? 1 : 0;
  const int ni = static_cast<int>(N);
  const int ei = static_cast<int>(E);
  const int gi = static_cast<int>(ng);
  ac.constraints = {
      {"source_injection_zero", "eq", 2, true},
      {"active_balance_generator", "eq", gen_heads, true},
      {"reactive_balance_generator", "eq", gen_heads, true},
      {"active_balance_load", "eq", ei - gen_heads, true},
      {"reactive_balance_load", "eq", ei - gen_heads, true},
      {"voltage_drop", "eq", ei, true},
      {"current_definition", "eq", ei, false},
      {"pv_penetration", "ineq", 1, true},
      {"pv_active_bounds", "ineq", 2 * ni, true},
      {"pv_reactive_bounds", "ineq", 2 * ni, true},
      {"voltage_bounds", "ineq", 2 * ni, true},
      {"current_bounds", "ineq", 2 * ei, true},
      {"active_flow_limits", "ineq", 2 * ei, true},
      {"reactive_flow_limits", "ineq", 2 * ei, true},
      {"generator_active_bounds", "ineq", 2 * gi, true},
      {"generator_reactive_bounds", "ineq", 2 * gi, true},
      {"placement_box", "ineq", 2 * ni, true},
  };
  return ac;
}

}  // namespace proxsg
