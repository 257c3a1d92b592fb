#ifndef PROXSG_PROBLEM_HPP_
#define PROXSG_PROBLEM_HPP_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "proxsg/linear_map.hpp"

namespace proxsg {

/**
 * @brief Structured problem  min_{x in C}  f(x) + h(Ax) - g(x).
 *
 * The oracles are pure callables over immutable captured state, so one
 * ProblemSpec can back any number of concurrent solves.
 */
struct ProblemSpec {
  /// (w, tau) -> a minimizer of f(x) + iota_C(x) + ||x - w||^2 / (2 tau).
  std::function<Vec(const Vec& w, double tau)> prox_fC;
  /// z -> grad h(z), z in the range of A.
  std::function<Vec(const Vec& z)> grad_h;
  /// x -> one element of the limiting subdifferential of g at x.
  std::function<Vec(const Vec& x)> subgrad_g;

  std::function<double(const Vec& x)> value_f;
  std::function<double(const Vec& z)> value_h;
  std::function<double(const Vec& x)> value_g;

  /// Membership test for C at a tolerance; empty means C is the whole space.
  std::function<bool(const Vec& x, double tol)> in_C;

  LinearMap map_A = LinearMap::identity(1);

  double lipschitz_ell = 0.0;        ///< Lipschitz modulus of grad h
  double weak_convexity_beta = 0.0;  ///< g + (beta/2)||.||^2 convex
  double norm_A = 1.0;               ///< certified upper bound on ||A||

  Index dim() const { return map_A.cols(); }

  /// F(x) = f(x) + h(Ax) - g(x).
  double objective(const Vec& x) const;

  bool contains(const Vec& x, double tol) const { return !in_C || in_C(x, tol); }

  /// Throws Error{kInvalidArgument} on missing oracles or negative constants.
  void validate() const;
};

enum class MuRule {
  kFista,     ///< mu_n = mu_bar tau_n (kappa_{n-1} - 1) / kappa_n
  kConstant,  ///< mu_n = mu_bar tau_n
};

enum class TracePolicy { kAuto, kAlways, kNever };

struct SolverParams {
  double lambda_bar = 0.1;
  double mu_bar = 0.01;
  double delta = 5e-25;
  /// Reset kappa every `restart_period` iterations; nullopt never restarts.
  std::optional<int> restart_period = 50;
  int max_iter = 3000;
  double stop_rel_tol = 1e-8;
  MuRule mu_rule = MuRule::kFista;
  /// Optional tau_n schedule (n, upper bound) -> tau_n. Empty: tau_n = upper bound.
  std::function<double(int n, double upper)> tau_sequence;
  /// Iterate storage. kAuto keeps iterates when dim <= 2048.
  TracePolicy store_iterates = TracePolicy::kAuto;
  /// Tolerance for the x0 in C check.
  double feasibility_tol = 1e-7;

  void validate() const;
};

/// Per-iteration scalars; index n refers to x_n.
struct IterRecord {
  double objective = 0.0;  ///< F(x_n)
  double lyapunov = 0.0;   ///< F(x_n) + c ||x_n - x_{n-1}||^2
  double step_norm = 0.0;  ///< ||x_n - x_{n-1}||
  double lambda = 0.0;     ///< coefficient used to produce x_n
  double mu = 0.0;
  double tau = 0.0;
};

enum class SolveStatus { kConverged, kMaxIter };

const char* to_string(SolveStatus status);

struct IterateTrace {
  std::vector<IterRecord> records;  ///< records[0] describes x_0
  std::vector<Vec> iterates;        ///< empty when thinned
  double lyapunov_c = 0.0;
  SolveStatus status = SolveStatus::kMaxIter;
  double wall_time_s = 0.0;
};

struct SolveReport {
  Vec x;
  double objective = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::kMaxIter;
  IterateTrace trace;
  /// max_n [L_{n+1} + delta s_{n+1}^2 - L_n]_+ over the run.
  double max_lyapunov_violation = 0.0;
  std::string solver;
};

/// 1 / (beta + 2 delta + ell ||A||^2 (2 lambda_bar + 1) + 2 mu_bar).
double tau_upper_bound(const ProblemSpec& spec, const SolverParams& params);

/// c = (ell ||A||^2 lambda_bar + mu_bar) / 2.
double lyapunov_constant(const ProblemSpec& spec, const SolverParams& params);

}  // namespace proxsg

#endif  // PROXSG_PROBLEM_HPP_
