#include "proxsg/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "proxsg/error.hpp"

namespace proxsg {

ExtrapolationCoeffs extrapolation_coeffs(const ExtrapolationState& state, double lambda_bar, double mu_bar,
                                         double tau, std::optional<int> restart_period) {
  const double theta = (state.kappa_prev - 1.0) / state.kappa_curr;
  ExtrapolationCoeffs out;
  out.lambda = lambda_bar * theta;
  out.mu = mu_bar * tau * theta;

  const double k = state.kappa_curr;
  out.next.kappa_prev = k;
  out.next.kappa_curr = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * k * k));
  out.next.iter_since_restart = state.iter_since_restart + 1;
  if (restart_period && out.next.iter_since_restart >= *restart_period) {
    out.next = ExtrapolationState{};
  }
  return out;
}

Vec psg_step(const ProblemSpec& spec, const Vec& x, const Vec& x_prev, const Vec& g, double lambda, double mu,
             double tau) {
  const Vec diff = x - x_prev;
  const Vec u = x + lambda * diff;
  const Vec v = x + mu * diff;
  const Vec w = v - tau * spec.map_A.adjoint(spec.grad_h(spec.map_A.apply(u))) + tau * g;
  return spec.prox_fC(w, tau);
}

namespace detail {

bool StopRule::satisfied(int n, double x_norm, double step) const {
  if (x_norm > 0.0) return step / x_norm < rel_tol;
  // ||x_n|| = 0: absolute fallback, never on the very first step.
  return n >= 1 && step < rel_tol;
}

void ensure_finite(const Vec& x, int iteration) {
  if (!x.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite iterate at iteration " << iteration;
    Error err(ErrorCode::kNumericalFailure, msg.str());
    err.iteration = iteration;
    throw err;
  }
}

bool keep_iterates(TracePolicy policy, Index dim) {
  switch (policy) {
    case TracePolicy::kAlways: return true;
    case TracePolicy::kNever: return false;
    case TracePolicy::kAuto: return dim <= 2048;
  }
  return false;
}

}  // namespace detail

SolveReport solve(const ProblemSpec& spec, const Vec& x0, const SolverParams& params) {
  spec.validate();
  params.validate();
  if (x0.size() != spec.dim()) throw Error(ErrorCode::kDimensionMismatch, "solve: x0 has the wrong dimension");
  if (!spec.contains(x0, params.feasibility_tol)) {
    throw Error(ErrorCode::kInfeasibleStart, "solve: x0 is not in C");
  }

  const auto start = std::chrono::steady_clock::now();
  const double tau_max = tau_upper_bound(spec, params);
  const double c = lyapunov_constant(spec, params);
  const bool keep = detail::keep_iterates(params.store_iterates, spec.dim());
  const detail::StopRule stop{params.stop_rel_tol};

  SolveReport report;
  report.solver = "proposed";
  IterateTrace& trace = report.trace;
  trace.lyapunov_c = c;
  trace.records.reserve(static_cast<size_t>(std::min(params.max_iter, 4096)) + 1);

  Vec x = x0;
  Vec x_prev = x0;
  double fx = spec.objective(x);
  trace.records.push_back({fx, fx, 0.0, 0.0, 0.0, 0.0});
  if (keep) trace.iterates.push_back(x);

  ExtrapolationState kappa;
  for (int n = 0; n < params.max_iter; ++n) {
    double tau = tau_max;
    if (params.tau_sequence) {
      tau = params.tau_sequence(n, tau_max);
      if (!(tau > 0.0) || tau > tau_max) {
        Error err(ErrorCode::kInvalidArgument, "solve: tau_n outside (0, tau_upper_bound]");
        err.iteration = n;
        throw err;
      }
    }
    const ExtrapolationCoeffs co = extrapolation_coeffs(kappa, params.lambda_bar, params.mu_bar, tau,
                                                        params.restart_period);
    kappa = co.next;
    const double lambda = co.lambda;
    const double mu = params.mu_rule == MuRule::kFista ? co.mu : params.mu_bar * tau;
    if (!(lambda >= 0.0 && lambda <= params.lambda_bar && mu >= 0.0 && mu <= params.mu_bar * tau)) {
      Error err(ErrorCode::kNumericalFailure, "solve: extrapolation coefficients left their admissible range");
      err.iteration = n;
      throw err;
    }

    Vec x_next;
    try {
      x_next = psg_step(spec, x, x_prev, spec.subgrad_g(x), lambda, mu, tau);
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
    trace.records.push_back({fx, fx + c * step * step, step, lambda, mu, tau});
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
  report.max_lyapunov_violation = check_decrease(trace, c, params.delta, 0.0).max_violation;
  trace.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

DecreaseCheck check_decrease(const IterateTrace& trace, double c, double delta, double tol) {
  DecreaseCheck out;
  const auto& r = trace.records;
  for (size_t n = 0; n + 1 < r.size(); ++n) {
    const double lyap_n = r[n].objective + c * r[n].step_norm * r[n].step_norm;
    const double s = r[n + 1].step_norm;
    const double lyap_next = r[n + 1].objective + c * s * s;
    const double violation = std::max(0.0, lyap_next + delta * s * s - lyap_n);
    if (violation > out.max_violation) {
      out.max_violation = violation;
      out.worst_index = static_cast<int>(n);
    }
  }
  out.passed = out.max_violation <= tol;
  return out;
}

}  // namespace proxsg
