#include "proxsg/baselines.hpp"

#include <chrono>
#include <sstream>

#include "proxsg/error.hpp"
#include "proxsg/solver.hpp"

namespace proxsg {

void BaselineParams::validate() const {
  if (!(step_tau > 0.0)) throw Error(ErrorCode::kInvalidArgument, "BaselineParams: step_tau must be positive");
  if (max_iter <= 0) throw Error(ErrorCode::kInvalidArgument, "BaselineParams: max_iter must be positive");
  if (!(stop_rel_tol >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "BaselineParams: stop_rel_tol must be nonnegative");
  if (restart_period && *restart_period <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "BaselineParams: restart_period must be positive");
  }
}

namespace {

enum class Variant { kGppa, kPdcae };

SolveReport run_baseline(const ProblemSpec& spec, const Vec& x0, const BaselineParams& params, Variant variant) {
  spec.validate();
  params.validate();
  if (x0.size() != spec.dim()) throw Error(ErrorCode::kDimensionMismatch, "baseline: x0 has the wrong dimension");
  if (!spec.contains(x0, params.feasibility_tol)) {
    throw Error(ErrorCode::kInfeasibleStart, "baseline: x0 is not in C");
  }

  const auto start = std::chrono::steady_clock::now();
  const double tau = params.step_tau;
  const bool keep = detail::keep_iterates(params.store_iterates, spec.dim());
  const detail::StopRule stop{params.stop_rel_tol};

  SolveReport report;
  report.solver = variant == Variant::kGppa ? "gppa" : "pdcae";
  IterateTrace& trace = report.trace;

  Vec x = x0;
  Vec x_prev = x0;
  double fx = spec.objective(x);
  trace.records.push_back({fx, fx, 0.0, 0.0, 0.0, tau});
  if (keep) trace.iterates.push_back(x);

  ExtrapolationState kappa;
  for (int n = 0; n < params.max_iter; ++n) {
    const Vec g = spec.subgrad_g(x);
    double theta = 0.0;
    Vec x_next;
    try {
      if (variant == Variant::kGppa) {
        const Vec w = x - tau * spec.map_A.adjoint(spec.grad_h(spec.map_A.apply(x))) + tau * g;
        x_next = spec.prox_fC(w, tau);
      } else {
        if (params.extrapolation) {
          const ExtrapolationCoeffs co = extrapolation_coeffs(kappa, 1.0, 0.0, tau, params.restart_period);
          kappa = co.next;
          theta = co.lambda;
        }
        const Vec y = x + theta * (x - x_prev);
        const Vec w = y - tau * (spec.map_A.adjoint(spec.grad_h(spec.map_A.apply(y))) - g);
        x_next = spec.prox_fC(w, tau);
      }
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "prox oracle failed at iteration " << n << ": " << e.what();
      Error err(e.code() == ErrorCode::kInvalidArgument ? ErrorCode::kProxFailure : e.code(), msg.str());
      err.iteration = n;
      throw err;
    }
    detail::ensure_finite(x_next, n + 1);

    const double step = (x_next - x).norm();
    const double x_norm = x.norm();
    fx = spec.objective(x_next);
    trace.records.push_back({fx, fx, step, theta, 0.0, tau});
    if (keep) trace.iterates.push_back(x_next);

    x_prev = std::move(x);
    x = std::move(x_next);
    report.iterations = n + 1;
    if (stop.satisfied(n, x_norm, step)) {
      trace.status = SolveStatus::kConverged;
      break;
    }
  }

  report.x = x;
  report.objective = fx;
  report.status = trace.status;
  // With c = 0 the check reduces to monotonicity of F.
  report.max_lyapunov_violation = check_decrease(trace, 0.0, 0.0, 0.0).max_violation;
  trace.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace

SolveReport gppa_solve(const ProblemSpec& spec, const Vec& x0, const BaselineParams& params) {
  return run_baseline(spec, x0, params, Variant::kGppa);
}

SolveReport pdcae_solve(const ProblemSpec& spec, const Vec& x0, const BaselineParams& params) {
  return run_baseline(spec, x0, params, Variant::kPdcae);
}

}  // namespace proxsg
