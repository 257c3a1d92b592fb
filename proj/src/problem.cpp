#include "proxsg/problem.hpp"

#include <cmath>

#include "proxsg/error.hpp"

namespace proxsg {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kDegenerateStep: return "step-size rule degenerate";
    case ErrorCode::kNotConverged: return "not converged";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kInfeasibleStart: return "infeasible start";
    case ErrorCode::kNumericalFailure: return "numerical failure";
    case ErrorCode::kProxFailure: return "prox failure";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kLoad: return "load error";
  }
  return "unknown";
}

const char* to_string(SolveStatus status) {
  return status == SolveStatus::kConverged ? "converged" : "max-iter";
}

double ProblemSpec::objective(const Vec& x) const {
  return value_f(x) + value_h(map_A.apply(x)) - value_g(x);
}

void ProblemSpec::validate() const {
  if (!prox_fC || !grad_h || !subgrad_g || !value_f || !value_h || !value_g) {
    throw Error(ErrorCode::kInvalidArgument, "ProblemSpec: every oracle must be set");
  }
  if (!(lipschitz_ell >= 0.0) || !(weak_convexity_beta >= 0.0) || !(norm_A >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "ProblemSpec: ell, beta and ||A|| must be nonnegative");
  }
}

void SolverParams::validate() const {
  if (!(delta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "SolverParams: delta must be positive");
  if (!(lambda_bar >= 0.0) || !(mu_bar >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "SolverParams: lambda_bar and mu_bar must be nonnegative");
  }
  if (!(stop_rel_tol >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "SolverParams: stop_rel_tol must be nonnegative");
  if (max_iter <= 0) throw Error(ErrorCode::kInvalidArgument, "SolverParams: max_iter must be positive");
  if (restart_period && *restart_period <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "SolverParams: restart_period must be positive");
  }
}

double tau_upper_bound(const ProblemSpec& spec, const SolverParams& params) {
  const double denom = spec.weak_convexity_beta + 2.0 * params.delta +
                       spec.lipschitz_ell * spec.norm_A * spec.norm_A * (2.0 * params.lambda_bar + 1.0) +
                       2.0 * params.mu_bar;
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw Error(ErrorCode::kDegenerateStep, "step-size rule degenerate");
  }
  return 1.0 / denom;
}

double lyapunov_constant(const ProblemSpec& spec, const SolverParams& params) {
  return 0.5 * (spec.lipschitz_ell * spec.norm_A * spec.norm_A * params.lambda_bar + params.mu_bar);
}

}  // namespace proxsg
