#ifndef PROXSG_OPF_HPP_
#define PROXSG_OPF_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "proxsg/polyhedral.hpp"
#include "proxsg/problem.hpp"

namespace proxsg {

/// Distribution network in per-unit values. Buses are numbered 1..n_bus; bus 0 is the upstream source.
struct NetworkData {
  int n_bus = 0;
  std::vector<int> generator_buses;  ///< the first one is the slack bus
  Vec demand_p;                      ///< D_i
  Vec demand_q;                      ///< D^Q_i
  Mat susceptance;                   ///< b_ij off the diagonal, zero diagonal
  Vec susceptance_diag;              ///< diagonal entries as tabulated (minus the row sum)
  Mat resistance;
  Mat reactance;
  std::vector<std::pair<int, int>> links;  ///< directed links of the radial network

  double base_power_mva = 100.0;
  double base_voltage_kv = 22.0;
  double cost_a = 0.0;
  double cost_b = 0.0;
  double cost_c = 0.0;
  double pv_unit_cost = 1.0;  ///< C, in cost units
  double unit_dollars = 1.0;  ///< dollars per cost unit
  double pv_p_max = 0.0;
  double pv_q_max = 0.0;
  double gen_p_max = 0.0;
  double gen_q_max = 0.0;
  double line_p_max = 0.0;
  double line_q_max = 0.0;
  double v_max = 0.0;
  double v_min = 0.0;
  double i_max = 0.0;
  double i_min = 0.0;
  double gamma = 1.0;
  double penetration_min = 0.5;

  double total_demand() const { return demand_p.sum(); }
  bool is_generator(int bus) const;

  /// Throws Error{kLoad} describing the first violated structural property.
  void validate() const;
};

/**
 * Reads demand.csv, susceptance.csv, resistance.csv, reactance.csv,
 * parameters.csv, generators.csv and links.csv from `dir`.
 *
 * Parameters carry a unit column; kW and kvar are converted to per-unit with
 * the base power. Matrices are dense bus-by-bus tables with a header row.
 */
NetworkData load_network(const std::string& dir);

/// Index maps for x = [P^PV (n), P^G (|M|), X (n), theta (n), P_ij (n*n, row-major)].
struct DCOPFVariables {
  Index n_bus = 0;
  Index n_gen = 0;

  Index pv(Index bus0) const { return bus0; }
  Index gen(Index k) const { return n_bus + k; }
  Index x(Index bus0) const { return n_bus + n_gen + bus0; }
  Index theta(Index bus0) const { return 2 * n_bus + n_gen + bus0; }
  Index flow(Index i0, Index j0) const { return 3 * n_bus + n_gen + i0 * n_bus + j0; }
  Index dim() const { return 3 * n_bus + n_gen + n_bus * n_bus; }

  struct Blocks {
    Vec pv;
    Vec gen;
    Vec x;
    Vec theta;
    Mat flow;
  };
  Blocks unpack(const Vec& v) const;
  Vec pack(const Blocks& b) const;
};

struct DCOPFModel {
  ProblemSpec spec;
  PolyhedralSet set;
  std::shared_ptr<const PolytopeProjector> projector;
  DCOPFVariables layout;
  /// Box used for random starts: the variable bounds, with theta in [0, 2 pi] on every bus.
  Vec sample_lo;
  Vec sample_hi;
  double projection_tol = 1e-8;
};

/**
 * h = C sum X + sum_M (a P_G^2 + b P_G + c) - sum P^PV / sum D,  g = gamma sum (X^2 - X),
 * f = indicator of the DC flow polyhedron, A = I, ell = 2a, beta = 0.
 */
DCOPFModel build_dcopf(const NetworkData& net, double gamma, double projection_tol = 1e-8);

/// Uniform point of the sampling box projected onto the feasible set.
Vec random_feasible_start(const DCOPFModel& model, std::uint64_t seed);

/// sum max(0, X_i - X_i^2).
double binary_relaxation_gap(const Vec& x, const DCOPFVariables& layout);

struct PlanReport {
  std::vector<int> placement;         ///< buses (1-based) with X rounded to 1
  std::vector<int> fractional_buses;  ///< X farther than round_tol from {0, 1}
  bool binary = true;
  std::string status;  ///< "binary" or "unrounded relaxation"
  double objective = 0.0;
  double binary_gap = 0.0;
  double penetration = 0.0;
  Vec x_values;
  Vec pv_dispatch;
  Vec generator_dispatch;
  std::vector<int> generator_buses;
  double installation_cost_units = 0.0;
  double generation_cost_units = 0.0;
  double total_cost_units = 0.0;
  double unit_dollars = 1.0;
  std::optional<double> baseline_cost_units;
  std::optional<double> cost_reduction;  ///< fraction of the baseline saved

  std::string to_json() const;
  std::string to_table() const;
};

PlanReport postprocess_solution(const Vec& x, const NetworkData& net, const DCOPFModel& model, double round_tol,
                                std::optional<double> baseline_cost_units = std::nullopt);

/// Branch-flow AC model: variable layout and constraint families only.
struct ACModel {
  struct Block {
    std::string name;
    Index offset = 0;
    Index size = 0;
  };
  struct ConstraintFamily {
    std::string name;
    std::string kind;  ///< "eq" or "ineq"
    int count = 0;
    bool convex = true;
  };

  std::vector<std::pair<int, int>> edges;
  std::vector<Block> blocks;  ///< P_G, Q_G, v, I_hat, P, Q, P_PV, Q_PV, X
  std::vector<ConstraintFamily> constraints;
  Index dim = 0;

  /// Position of entry k of the named block; throws for unknown names or out-of-range k.
  Index index(const std::string& block, Index k) const;
  /// Inverse of index().
  std::pair<std::string, Index> locate(Index flat) const;
  int equality_count() const;
  int inequality_count() const;
  std::string to_json() const;
};

/// Throws Error{kLoad} when the links do not form an arborescence rooted at the source.
ACModel load_ac_model(const NetworkData& net);

}  // namespace proxsg

#endif  // PROXSG_OPF_HPP_
