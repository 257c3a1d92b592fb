#ifndef PROXSG_BENCH_HPP_
#define PROXSG_BENCH_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "proxsg/config.hpp"
#include "proxsg/cs.hpp"
#include "proxsg/opf.hpp"
#include "proxsg/problem.hpp"

namespace proxsg {

enum class SolverKind { kProposed, kGppa, kPdcae };

const char* to_string(SolverKind kind);
SolverKind parse_solver_kind(const std::string& s);

/// Compressed-sensing sweep settings. See README for the config keys.
struct CSExperimentConfig {
  std::vector<int> cases{1, 2, 5, 6};
  /// Custom shape used when `cases` is empty.
  std::optional<CSCase> custom;
  LossTag loss = LossTag::kLeastSquares;
  std::vector<SolverKind> solvers{SolverKind::kGppa, SolverKind::kPdcae, SolverKind::kProposed};
  std::optional<double> gamma;  ///< default: 0.1 least squares, 0.001 Lorentzian
  std::optional<BRule> b_rule;  ///< default per loss, see case_options
  bool impulsive_noise = false;
  int seeds = 5;
  std::uint64_t seed_base = 0;
  int max_iter = 3000;
  SolverParams proposed;
  double stop_rel_tol = 1e-8;
  int workers = 0;  ///< 0: hardware concurrency
  std::string output_csv;
  std::string runs_csv;

  void validate() const;
};

CSExperimentConfig cs_config_from(const Config& cfg);

struct CSRunRecord {
  int case_id = 0;
  std::uint64_t seed = 0;
  SolverKind solver = SolverKind::kProposed;
  bool ok = false;
  std::string error;
  int iterations = 0;
  double objective = 0.0;
  double gt_error = 0.0;
  double cpu_s = 0.0;
  double initial_objective = 0.0;
  double lyapunov_violation = 0.0;  ///< proposed solver only
  std::string status;
};

struct CSCellSummary {
  CSCase shape;
  SolverKind solver = SolverKind::kProposed;
  int runs = 0;
  int failed = 0;
  double mean_iterations = 0.0;
  double mean_objective = 0.0;
  double mean_error = 0.0;
  double mean_cpu_s = 0.0;
  double max_lyapunov_ratio = 0.0;  ///< max violation / (1 + |F(x_0)|)
};

struct CSSweepResult {
  LossTag loss = LossTag::kLeastSquares;
  std::vector<CSRunRecord> runs;  ///< ordered by case, seed, solver
  std::vector<CSCellSummary> cells;
  bool all_ok = true;

  /// Aggregated table; the CPU column header carries a [nondeterministic] marker.
  std::string to_csv() const;
  std::string runs_to_csv() const;
  /// Fraction of seeds of `case_id` on which `a` needed fewer iterations than `b`.
  double fraction_fewer_iterations(int case_id, SolverKind a, SolverKind b) const;
};

CSSweepResult run_cs_sweep(const CSExperimentConfig& cfg);

struct OPFExperimentConfig {
  std::string network_dir = "data/network";
  std::optional<double> gamma;  ///< default: the network's gamma
  int starts = 30;
  std::uint64_t seed_base = 0;
  std::vector<SolverKind> solvers{SolverKind::kGppa, SolverKind::kPdcae, SolverKind::kProposed};
  int max_iter = 1000;
  double stop_rel_tol = 1e-8;
  double projection_tol = 1e-8;
  double round_tol = 1e-6;
  MuRule mu_rule = MuRule::kConstant;
  std::optional<double> baseline_cost_units;
  int workers = 0;
  std::string output_csv;
  std::string report_json;

  void validate() const;
};

OPFExperimentConfig opf_config_from(const Config& cfg);

struct OPFRunRecord {
  SolverKind solver = SolverKind::kProposed;
  int start = 0;
  bool ok = false;
  std::string error;
  double objective = 0.0;
  double initial_objective = 0.0;
  int iterations = 0;
  double cpu_s = 0.0;
  double lyapunov_violation = 0.0;
  double binary_gap = 0.0;
  std::vector<int> placement;
  Vec x;
};

struct OPFSolverSummary {
  SolverKind solver = SolverKind::kProposed;
  int runs = 0;
  int failed = 0;
  double mean_objective = 0.0;
  double best_objective = 0.0;
  int best_start = -1;
  double mean_iterations = 0.0;
  double mean_cpu_s = 0.0;
  double max_lyapunov_ratio = 0.0;
};

/// Least-squares line through (n, log ||x_n - x_last||) over the tail of a trace.
struct RateFit {
  double slope = 0.0;
  double r2 = 0.0;
  int points = 0;
};

/// nullopt when fewer than three iterates have a positive distance to the last one.
std::optional<RateFit> tail_rate_fit(const std::vector<Vec>& iterates);

struct OPFResult {
  std::vector<OPFRunRecord> runs;  ///< ordered by solver, start
  std::vector<OPFSolverSummary> summaries;
  std::optional<PlanReport> best;  ///< best run of the proposed solver (or the first solver)
  SolverKind best_solver = SolverKind::kProposed;
  std::optional<RateFit> rate;
  bool all_ok = true;

  std::string to_csv() const;
  std::string to_json() const;
};

OPFResult run_opf(const OPFExperimentConfig& cfg);

/// Best objective among the first k starts of `solver`, for k = 1..starts.
std::vector<double> running_best(const OPFResult& result, SolverKind solver);

struct CheckOutcome {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct CheckOptions {
  std::string network_dir = "data/network";
  /// Test hook: raise F at one step of a recorded trace before checking decrease.
  bool inject_monotonicity_breaker = false;
  std::uint64_t seed = 7;
};

/// Runs the invariant suite. The caller prints the matrix; the suite passes iff every outcome passes.
std::vector<CheckOutcome> run_checks(const CheckOptions& opts);

/// Writes `content` to `path`, creating parent directories.
void write_text(const std::string& path, const std::string& content);

}  // namespace proxsg

#endif  // PROXSG_BENCH_HPP_
