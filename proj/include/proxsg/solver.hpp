#ifndef PROXSG_SOLVER_HPP_
#define PROXSG_SOLVER_HPP_

#include <optional>

#include "proxsg/problem.hpp"

namespace proxsg {

/// FISTA-type kappa recursion with periodic restart. Starts at kappa_{-1} = kappa_0 = 1.
struct ExtrapolationState {
  double kappa_prev = 1.0;  ///< kappa_{n-1}
  double kappa_curr = 1.0;  ///< kappa_n
  int iter_since_restart = 0;
};

struct ExtrapolationCoeffs {
  double lambda = 0.0;
  double mu = 0.0;
  ExtrapolationState next;
};

/**
 * lambda_n = lambda_bar (kappa_{n-1} - 1) / kappa_n and
 * mu_n = mu_bar tau_n (kappa_{n-1} - 1) / kappa_n, then advance kappa.
 * After `restart_period` advances both kappas are reset to 1.
 */
ExtrapolationCoeffs extrapolation_coeffs(const ExtrapolationState& state, double lambda_bar, double mu_bar,
                                         double tau, std::optional<int> restart_period);

/**
 * One Step-2 update:
 *   u = x + lambda (x - x_prev),  v = x + mu (x - x_prev),
 *   x_next = prox_fC(v - tau A^* grad_h(A u) + tau g, tau).
 */
Vec psg_step(const ProblemSpec& spec, const Vec& x, const Vec& x_prev, const Vec& g, double lambda, double mu,
             double tau);

/// Extrapolated proximal subgradient method from x_{-1} = x_0 = x0.
SolveReport solve(const ProblemSpec& spec, const Vec& x0, const SolverParams& params);

struct DecreaseCheck {
  double max_violation = 0.0;
  /// n such that the worst violation is between x_n and x_{n+1}; -1 when none.
  int worst_index = -1;
  bool passed = true;
};

/**
 * Checks  L_{n+1} + delta ||x_{n+1} - x_n||^2 <= L_n  with L_n = F(x_n) + c ||x_n - x_{n-1}||^2
 * over a trace. Violations are clipped at zero; `passed` compares against `tol`.
 */
DecreaseCheck check_decrease(const IterateTrace& trace, double c, double delta, double tol);

namespace detail {

/// Stopping rule shared with the baselines.
struct StopRule {
  double rel_tol;
  /// true when the step from x_n (norm x_norm) to x_{n+1} (length step) terminates.
  bool satisfied(int n, double x_norm, double step) const;
};

void ensure_finite(const Vec& x, int iteration);

bool keep_iterates(TracePolicy policy, Index dim);

}  // namespace detail

}  // namespace proxsg

#endif  // PROXSG_SOLVER_HPP_
