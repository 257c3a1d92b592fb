#ifndef PROXSG_BASELINES_HPP_
#define PROXSG_BASELINES_HPP_

#include <optional>

#include "proxsg/problem.hpp"

namespace proxsg {

/// Fixed-step parameters for GPPA and pDCAe.
struct BaselineParams {
  double step_tau = 0.0;
  int max_iter = 3000;
  double stop_rel_tol = 1e-8;
  /// pDCAe only: FISTA-type extrapolation theta_n = (kappa_{n-1} - 1) / kappa_n.
  bool extrapolation = true;
  std::optional<int> restart_period = 50;
  TracePolicy store_iterates = TracePolicy::kAuto;
  double feasibility_tol = 1e-7;

  void validate() const;
};

/// Generalized proximal point algorithm:
///   x_{n+1} = prox_fC(x_n - tau A^* grad_h(A x_n) + tau g_n, tau).
SolveReport gppa_solve(const ProblemSpec& spec, const Vec& x0, const BaselineParams& params);

/// Proximal DC algorithm with extrapolation:
///   y_n = x_n + theta_n (x_n - x_{n-1}),
///   x_{n+1} = prox_fC(y_n - tau (A^* grad_h(A y_n) - g_n), tau),  g_n in dg(x_n).
/// Requires convex f, g and convex h o A; that is the caller's obligation.
SolveReport pdcae_solve(const ProblemSpec& spec, const Vec& x0, const BaselineParams& params);

}  // namespace proxsg

#endif  // PROXSG_BASELINES_HPP_
