#include "proxsg/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "csv.hpp"
#include "json.hpp"
#include "proxsg/baselines.hpp"
#include "proxsg/error.hpp"
#include "proxsg/polyhedral.hpp"
#include "proxsg/solver.hpp"

namespace proxsg {

namespace {

std::string fmt_e(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6e", v);
  return buf;
}

std::string fmt_f(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

int worker_count(int requested, size_t jobs) {
  int n = requested > 0 ? requested : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return std::max(1, std::min(n, static_cast<int>(jobs)));
}

// Runs job(i) for i in [0, count) on a bounded pool. Jobs write only their own slots.
void parallel_for(size_t count, int workers, const std::function<void(size_t)>& job) {
  const int n = worker_count(workers, count);
  if (n <= 1) {
    for (size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(n));
  for (int t = 0; t < n; ++t) {
    pool.emplace_back([&] {
      for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) job(i);
    });
  }
  for (auto& th : pool) th.join();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SolverParams solver_params_from(const Config& cfg, SolverParams p) {
  p.lambda_bar = cfg.get_double("lambda_bar", p.lambda_bar);
  p.mu_bar = cfg.get_double("mu_bar", p.mu_bar);
  p.delta = cfg.get_double("delta", p.delta);
  if (cfg.has("restart_period")) {
    const std::string& r = cfg.get("restart_period");
    if (r == "none" || r == "0") {
      p.restart_period.reset();
    } else {
      p.restart_period = static_cast<int>(cfg.get_int("restart_period", 50));
    }
  }
  if (cfg.has("mu_rule")) {
    const std::string& m = cfg.get("mu_rule");
    if (m == "fista") {
      p.mu_rule = MuRule::kFista;
    } else if (m == "constant") {
      p.mu_rule = MuRule::kConstant;
    } else {
      throw Error(ErrorCode::kParse, "mu_rule must be fista or constant");
    }
  }
  return p;
}

std::vector<SolverKind> solvers_from(const Config& cfg, std::vector<SolverKind> fallback) {
  if (!cfg.has("solvers")) return fallback;
  std::vector<SolverKind> out;
  for (const auto& s : cfg.get_list("solvers")) out.push_back(parse_solver_kind(s));
  return out;
}

SolveReport run_solver(SolverKind kind, const ProblemSpec& spec, const Vec& x0, const SolverParams& proposed,
                       const BaselineParams& gppa, const BaselineParams& pdcae) {
  switch (kind) {
    case SolverKind::kProposed: return solve(spec, x0, proposed);
    case SolverKind::kGppa: return gppa_solve(spec, x0, gppa);
    case SolverKind::kPdcae: return pdcae_solve(spec, x0, pdcae);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown solver");
}

}  // namespace

const char* to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::kProposed: return "proposed";
    case SolverKind::kGppa: return "gppa";
    case SolverKind::kPdcae: return "pdcae";
  }
  return "unknown";
}

SolverKind parse_solver_kind(const std::string& s) {
  if (s == "proposed" || s == "psg") return SolverKind::kProposed;
  if (s == "gppa") return SolverKind::kGppa;
  if (s == "pdcae") return SolverKind::kPdcae;
  throw Error(ErrorCode::kParse, "unknown solver '" + s + "'");
}

void write_text(const std::string& path, const std::string& content) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + parent.string() + ": " + ec.message());
  }
  csv::write_file(path, content);
}

// ---------------------------------------------------------------------------
// Compressed sensing

void CSExperimentConfig::validate() const {
  if (cases.empty() && !custom) throw Error(ErrorCode::kInvalidArgument, "cs config: no cases selected");
  for (int c : cases) table_case(c);
  if (solvers.empty()) throw Error(ErrorCode::kInvalidArgument, "cs config: no solvers selected");
  if (seeds < 1) throw Error(ErrorCode::kInvalidArgument, "cs config: seeds must be >= 1");
  if (max_iter < 1) throw Error(ErrorCode::kInvalidArgument, "cs config: max_iter must be >= 1");
  if (loss == LossTag::kLorentzian &&
      std::find(solvers.begin(), solvers.end(), SolverKind::kPdcae) != solvers.end()) {
    throw Error(ErrorCode::kInvalidArgument, "cs config: pdcae needs a convex loss; drop it for lorentzian");
  }
  proposed.validate();
}

CSExperimentConfig cs_config_from(const Config& cfg) {
  cfg.require_known({"cases", "m", "d", "s", "matrix", "loss", "solvers", "gamma", "b_rule", "impulsive_noise", "seeds",
                     "seed_base", "max_iter", "lambda_bar", "mu_bar", "delta", "restart_period", "mu_rule",
                     "stop_rel_tol", "workers", "output_csv", "runs_csv"});
  CSExperimentConfig c;
  if (cfg.has("cases")) c.cases = cfg.get_int_list("cases");
  if (c.cases.empty() || cfg.has("m")) {
    c.cases.clear();
    CSCase custom;
    custom.id = 0;
    custom.m = cfg.get_int("m", 0);
    custom.d = cfg.get_int("d", 0);
    custom.s = cfg.get_int("s", 0);
    custom.kind = parse_matrix_kind(cfg.get_or("matrix", "gaussian"));
    c.custom = custom;
  }
  c.loss = parse_loss_tag(cfg.get_or("loss", "least_squares"));
  c.solvers = solvers_from(cfg, c.loss == LossTag::kLeastSquares
                                    ? std::vector<SolverKind>{SolverKind::kGppa, SolverKind::kPdcae, SolverKind::kProposed}
                                    : std::vector<SolverKind>{SolverKind::kGppa, SolverKind::kProposed});
  c.gamma = cfg.get_optional_double("gamma");
  if (cfg.has("b_rule")) c.b_rule = parse_b_rule(cfg.get("b_rule"));
  c.impulsive_noise = cfg.get_bool("impulsive_noise", false);
  c.seeds = static_cast<int>(cfg.get_int("seeds", c.seeds));
  c.seed_base = cfg.get_uint64("seed_base", 0);
  c.max_iter = static_cast<int>(cfg.get_int("max_iter", c.loss == LossTag::kLeastSquares ? 3000 : 4000));
  c.stop_rel_tol = cfg.get_double("stop_rel_tol", c.stop_rel_tol);
  c.proposed = solver_params_from(cfg, SolverParams{});
  c.proposed.max_iter = c.max_iter;
  c.proposed.stop_rel_tol = c.stop_rel_tol;
  c.workers = static_cast<int>(cfg.get_int("workers", 0));
  c.output_csv = cfg.get_or("output_csv", "");
  c.runs_csv = cfg.get_or("runs_csv", "");
  c.validate();
  return c;
}

CSSweepResult run_cs_sweep(const CSExperimentConfig& cfg) {
  cfg.validate();
  std::vector<CSCase> shapes;
  for (int id : cfg.cases) shapes.push_back(table_case(id));
  if (shapes.empty()) shapes.push_back(*cfg.custom);

  const size_t n_solvers = cfg.solvers.size();
  const size_t n_seeds = static_cast<size_t>(cfg.seeds);
  CSSweepResult result;
  result.loss = cfg.loss;
  result.runs.resize(shapes.size() * n_seeds * n_solvers);

  parallel_for(shapes.size() * n_seeds, cfg.workers, [&](size_t job) {
    const CSCase& shape = shapes[job / n_seeds];
    const std::uint64_t seed = cfg.seed_base + job % n_seeds;
    CSRunRecord* slot = &result.runs[job * n_solvers];
    for (size_t k = 0; k < n_solvers; ++k) {
      slot[k].case_id = shape.id;
      slot[k].seed = seed;
      slot[k].solver = cfg.solvers[k];
    }
    try {
      CSInstanceOptions opts;
      opts.kind = shape.kind;
      opts.m = shape.m;
      opts.d = shape.d;
      opts.s = shape.s;
      opts.loss = cfg.loss;
      opts.gamma = cfg.gamma.value_or(cfg.loss == LossTag::kLeastSquares ? 0.1 : 0.001);
      opts.b_rule = cfg.b_rule.value_or(cfg.loss == LossTag::kLeastSquares ? BRule::kStationary : BRule::kNoiseless);
      opts.impulsive_noise = cfg.impulsive_noise;
      opts.seed = seed;
      const CSInstance inst = make_cs_instance(opts);
      const ProblemSpec spec = build_cs_problem(inst);
      const Vec x0 = Vec::Zero(inst.d());
      const double f0 = spec.objective(x0);

      SolverParams prop = cfg.proposed;
      prop.store_iterates = TracePolicy::kNever;
      BaselineParams gppa = gppa_params(inst, cfg.max_iter);
      BaselineParams pdcae = pdcae_params(inst, cfg.max_iter);
      gppa.stop_rel_tol = pdcae.stop_rel_tol = cfg.stop_rel_tol;
      gppa.store_iterates = pdcae.store_iterates = TracePolicy::kNever;

      for (size_t k = 0; k < n_solvers; ++k) {
        CSRunRecord& rec = slot[k];
        rec.initial_objective = f0;
        try {
          const auto t0 = std::chrono::steady_clock::now();
          const SolveReport rep = run_solver(rec.solver, spec, x0, prop, gppa, pdcae);
          rec.cpu_s = seconds_since(t0);
          rec.ok = true;
          rec.iterations = rep.iterations;
          rec.objective = rep.objective;
          rec.gt_error = ground_truth_error(rep.x, inst.x_g);
          rec.lyapunov_violation = rep.max_lyapunov_violation;
          rec.status = to_string(rep.status);
        } catch (const std::exception& e) {
          rec.error = e.what();
          rec.status = "error";
        }
      }
    } catch (const std::exception& e) {
      for (size_t k = 0; k < n_solvers; ++k) {
        slot[k].error = std::string("instance: ") + e.what();
        slot[k].status = "error";
      }
    }
  });

  for (const CSCase& shape : shapes) {
    for (SolverKind solver : cfg.solvers) {
      CSCellSummary cell;
      cell.shape = shape;
      cell.solver = solver;
      for (const auto& r : result.runs) {
        if (r.case_id != shape.id || r.solver != solver) continue;
        if (!r.ok) {
          ++cell.failed;
          continue;
        }
        ++cell.runs;
        cell.mean_iterations += r.iterations;
        cell.mean_objective += r.objective;
        cell.mean_error += r.gt_error;
        cell.mean_cpu_s += r.cpu_s;
        if (solver == SolverKind::kProposed) {
          cell.max_lyapunov_ratio =
              std::max(cell.max_lyapunov_ratio, r.lyapunov_violation / (1.0 + std::abs(r.initial_objective)));
        }
      }
      if (cell.runs > 0) {
        cell.mean_iterations /= cell.runs;
        cell.mean_objective /= cell.runs;
        cell.mean_error /= cell.runs;
        cell.mean_cpu_s /= cell.runs;
      }
      if (cell.failed > 0) result.all_ok = false;
      result.cells.push_back(cell);
    }
  }
  return result;
}

std::string CSSweepResult::to_csv() const {
  std::ostringstream out;
  out << "case,m,d,s,matrix,loss,solver,runs,failed,mean_iterations,mean_objective,mean_error,"
         "max_lyapunov_ratio,mean_cpu_s[nondeterministic]\n";
  for (const auto& c : cells) {
    out << c.shape.id << ',' << c.shape.m << ',' << c.shape.d << ',' << c.shape.s << ',' << to_string(c.shape.kind)
        << ',' << to_string(loss) << ',' << to_string(c.solver) << ',' << c.runs << ',' << c.failed << ','
        << fmt_f(c.mean_iterations, 2) << ',' << fmt_e(c.mean_objective) << ',' << fmt_e(c.mean_error) << ','
        << (c.solver == SolverKind::kProposed ? fmt_e(c.max_lyapunov_ratio) : "") << ','
        << fmt_f(c.mean_cpu_s, 4) << '\n';
  }
  return out.str();
}

std::string CSSweepResult::runs_to_csv() const {
  std::ostringstream out;
  out << "case,seed,solver,status,iterations,objective,error,lyapunov_violation,cpu_s[nondeterministic],message\n";
  for (const auto& r : runs) {
    out << r.case_id << ',' << r.seed << ',' << to_string(r.solver) << ',' << r.status << ',' << r.iterations << ','
        << (r.ok ? fmt_e(r.objective) : "") << ',' << (r.ok ? fmt_e(r.gt_error) : "") << ','
        << (r.ok && r.solver == SolverKind::kProposed ? fmt_e(r.lyapunov_violation) : "") << ','
        << (r.ok ? fmt_f(r.cpu_s, 4) : "") << ',' << csv_escape(r.error) << '\n';
  }
  return out.str();
}

double CSSweepResult::fraction_fewer_iterations(int case_id, SolverKind a, SolverKind b) const {
  std::map<std::uint64_t, std::pair<int, int>> by_seed;
  std::map<std::uint64_t, int> seen;
  for (const auto& r : runs) {
    if (r.case_id != case_id || !r.ok) continue;
    if (r.solver == a) {
      by_seed[r.seed].first = r.iterations;
      seen[r.seed] |= 1;
    } else if (r.solver == b) {
      by_seed[r.seed].second = r.iterations;
      seen[r.seed] |= 2;
    }
  }
  int total = 0;
  int fewer = 0;
  for (const auto& [seed, its] : by_seed) {
    if (seen[seed] != 3) continue;
    ++total;
    fewer += its.first < its.second ? 1 : 0;
  }
  return total == 0 ? 0.0 : static_cast<double>(fewer) / total;
}

// ---------------------------------------------------------------------------
// DC OPF

void OPFExperimentConfig::validate() const {
  if (starts < 1) throw Error(ErrorCode::kInvalidArgument, "opf config: starts must be >= 1");
  if (solvers.empty()) throw Error(ErrorCode::kInvalidArgument, "opf config: no solvers selected");
  if (max_iter < 1) throw Error(ErrorCode::kInvalidArgument, "opf config: max_iter must be >= 1");
  if (!(projection_tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "opf config: projection_tol must be positive");
  if (gamma && !(*gamma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "opf config: gamma must be positive");
}

OPFExperimentConfig opf_config_from(const Config& cfg) {
  cfg.require_known({"network_dir", "gamma", "starts", "seed_base", "solvers", "max_iter", "stop_rel_tol",
                     "projection_tol", "round_tol", "mu_rule", "baseline_cost_units", "workers", "output_csv",
                     "report_json"});
  OPFExperimentConfig c;
  c.network_dir = cfg.get_or("network_dir", c.network_dir);
  c.gamma = cfg.get_optional_double("gamma");
  c.starts = static_cast<int>(cfg.get_int("starts", c.starts));
  c.seed_base = cfg.get_uint64("seed_base", 0);
  c.solvers = solvers_from(cfg, c.solvers);
  c.max_iter = static_cast<int>(cfg.get_int("max_iter", c.max_iter));
  c.stop_rel_tol = cfg.get_double("stop_rel_tol", c.stop_rel_tol);
  c.projection_tol = cfg.get_double("projection_tol", c.projection_tol);
  c.round_tol = cfg.get_double("round_tol", c.round_tol);
  SolverParams defaults;
  defaults.mu_rule = MuRule::kConstant;
  c.mu_rule = solver_params_from(cfg, defaults).mu_rule;
  c.baseline_cost_units = cfg.get_optional_double("baseline_cost_units");
  c.workers = static_cast<int>(cfg.get_int("workers", 0));
  c.output_csv = cfg.get_or("output_csv", "");
  c.report_json = cfg.get_or("report_json", "");
  c.validate();
  return c;
}

std::optional<RateFit> tail_rate_fit(const std::vector<Vec>& iterates) {
  if (iterates.size() < 4) return std::nullopt;
  const Vec& last = iterates.back();
  std::vector<std::pair<double, double>> pts;
  for (size_t n = 0; n + 1 < iterates.size(); ++n) {
    const double dist = (iterates[n] - last).norm();
    if (dist > 0.0) pts.emplace_back(static_cast<double>(n), std::log(dist));
  }
  if (pts.size() < 3) return std::nullopt;
  const size_t keep = std::max<size_t>(3, pts.size() / 2);
  pts.erase(pts.begin(), pts.end() - static_cast<std::ptrdiff_t>(keep));

  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  RateFit fit;
  fit.points = static_cast<int>(pts.size());
  fit.slope = sxy / sxx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

OPFResult run_opf(const OPFExperimentConfig& cfg) {
  cfg.validate();
  const NetworkData net = load_network(cfg.network_dir);
  const DCOPFModel model = build_dcopf(net, cfg.gamma.value_or(net.gamma), cfg.projection_tol);
  const double ell = model.spec.lipschitz_ell;

  SolverParams prop;
  prop.mu_rule = cfg.mu_rule;
  prop.max_iter = cfg.max_iter;
  prop.stop_rel_tol = cfg.stop_rel_tol;
  prop.feasibility_tol = 10.0 * cfg.projection_tol;
  BaselineParams gppa;
  gppa.step_tau = 0.8 / ell;
  gppa.extrapolation = false;
  BaselineParams pdcae;
  pdcae.step_tau = 1.0 / ell;
  for (BaselineParams* b : {&gppa, &pdcae}) {
    b->max_iter = cfg.max_iter;
    b->stop_rel_tol = cfg.stop_rel_tol;
    b->feasibility_tol = prop.feasibility_tol;
  }

  const size_t n_starts = static_cast<size_t>(cfg.starts);
  std::vector<Vec> starts(n_starts);
  parallel_for(n_starts, cfg.workers, [&](size_t k) {
    starts[k] = random_feasible_start(model, cfg.seed_base + k);
  });

  OPFResult result;
  result.runs.resize(cfg.solvers.size() * n_starts);
  parallel_for(result.runs.size(), cfg.workers, [&](size_t job) {
    OPFRunRecord& rec = result.runs[job];
    rec.solver = cfg.solvers[job / n_starts];
    rec.start = static_cast<int>(job % n_starts);
    const Vec& x0 = starts[static_cast<size_t>(rec.start)];
    try {
      rec.initial_objective = model.spec.objective(x0);
      SolverParams p = prop;
      p.store_iterates = TracePolicy::kNever;
      const auto t0 = std::chrono::steady_clock::now();
      const SolveReport rep = run_solver(rec.solver, model.spec, x0, p, gppa, pdcae);
      rec.cpu_s = seconds_since(t0);
      rec.ok = true;
      rec.objective = rep.objective;
      rec.iterations = rep.iterations;
      rec.lyapunov_violation = rep.max_lyapunov_violation;
      rec.binary_gap = binary_relaxation_gap(rep.x, model.layout);
      for (Index i = 0; i < model.layout.n_bus; ++i) {
        if (rep.x[model.layout.x(i)] > 0.5) rec.placement.push_back(static_cast<int>(i + 1));
      }
      rec.x = rep.x;
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
  });

  for (SolverKind solver : cfg.solvers) {
    OPFSolverSummary s;
    s.solver = solver;
    s.best_objective = std::numeric_limits<double>::infinity();
    for (const auto& r : result.runs) {
      if (r.solver != solver) continue;
      if (!r.ok) {
        ++s.failed;
        continue;
      }
      ++s.runs;
      s.mean_objective += r.objective;
      s.mean_iterations += r.iterations;
      s.mean_cpu_s += r.cpu_s;
      s.max_lyapunov_ratio = std::max(s.max_lyapunov_ratio, r.lyapunov_violation / (1.0 + std::abs(r.initial_objective)));
      if (r.objective < s.best_objective) {
        s.best_objective = r.objective;
        s.best_start = r.start;
      }
    }
    if (s.runs > 0) {
      s.mean_objective /= s.runs;
      s.mean_iterations /= s.runs;
      s.mean_cpu_s /= s.runs;
    }
    if (s.failed > 0) result.all_ok = false;
    result.summaries.push_back(s);
  }

  const auto has_proposed = std::find(cfg.solvers.begin(), cfg.solvers.end(), SolverKind::kProposed);
  result.best_solver = has_proposed != cfg.solvers.end() ? SolverKind::kProposed : cfg.solvers.front();
  for (const auto& s : result.summaries) {
    if (s.solver != result.best_solver || s.best_start < 0) continue;
    const OPFRunRecord* best = nullptr;
    for (const auto& r : result.runs) {
      if (r.solver == s.solver && r.start == s.best_start) best = &r;
    }
    result.best = postprocess_solution(best->x, net, model, cfg.round_tol, cfg.baseline_cost_units);
    // Rerun the (deterministic) best start with iterate storage for the rate diagnostic.
    SolverParams p = prop;
    p.store_iterates = TracePolicy::kAlways;
    const SolveReport rep =
        run_solver(s.solver, model.spec, starts[static_cast<size_t>(s.best_start)], p,
                   [&] { BaselineParams b = gppa; b.store_iterates = TracePolicy::kAlways; return b; }(),
                   [&] { BaselineParams b = pdcae; b.store_iterates = TracePolicy::kAlways; return b; }());
    result.rate = tail_rate_fit(rep.trace.iterates);
  }
  return result;
}

std::vector<double> running_best(const OPFResult& result, SolverKind solver) {
  std::vector<double> out;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : result.runs) {
    if (r.solver != solver) continue;
    if (r.ok) best = std::min(best, r.objective);
    out.push_back(best);
  }
  return out;
}

std::string OPFResult::to_csv() const {
  std::ostringstream out;
  out << "solver,runs,failed,mean_objective,best_objective,best_start,mean_iterations,max_lyapunov_ratio,"
         "mean_cpu_s[nondeterministic]\n";
  for (const auto& s : summaries) {
    out << to_string(s.solver) << ',' << s.runs << ',' << s.failed << ',' << fmt_f(s.mean_objective, 6) << ','
        << fmt_f(s.best_objective, 6) << ',' << s.best_start << ',' << fmt_f(s.mean_iterations, 2) << ','
        << fmt_e(s.max_lyapunov_ratio) << ',' << fmt_f(s.mean_cpu_s, 4) << '\n';
  }
  return out.str();
}

std::string OPFResult::to_json() const {
  using nlohmann::ordered_json;
  ordered_json j;
  ordered_json sums = ordered_json::array();
  for (const auto& s : summaries) {
    sums.push_back({{"solver", to_string(s.solver)},
                    {"runs", s.runs},
                    {"failed", s.failed},
                    {"mean_objective", s.mean_objective},
                    {"best_objective", s.best_objective},
                    {"best_start", s.best_start},
                    {"mean_iterations", s.mean_iterations},
                    {"max_lyapunov_ratio", s.max_lyapunov_ratio}});
  }
  j["summaries"] = sums;
  j["best_solver"] = to_string(best_solver);
  j["plan"] = best ? ordered_json::parse(best->to_json()) : ordered_json(nullptr);
  if (rate) {
    j["rate_diagnostic"] = {{"slope", rate->slope}, {"r2", rate->r2}, {"points", rate->points}, {"advisory", true}};
  } else {
    j["rate_diagnostic"] = nullptr;
  }
  ordered_json errs = ordered_json::array();
  for (const auto& r : runs) {
    if (!r.ok) errs.push_back({{"solver", to_string(r.solver)}, {"start", r.start}, {"error", r.error}});
  }
  j["errors"] = errs;
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Invariant suite

namespace {

class CheckList {
 public:
  void run(const std::string& name, const std::function<std::string()>& body) {
    CheckOutcome out;
    out.name = name;
    try {
      out.detail = body();
      out.passed = out.detail.rfind("FAIL", 0) != 0;
    } catch (const std::exception& e) {
      out.passed = false;
      out.detail = e.what();
    }
    outcomes_.push_back(std::move(out));
  }
  std::vector<CheckOutcome> take() { return std::move(outcomes_); }

 private:
  std::vector<CheckOutcome> outcomes_;
};

std::string verdict(bool ok, const std::string& what) { return (ok ? "" : "FAIL: ") + what; }

Vec random_vec(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

Mat random_mat(Index r, Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Mat m(r, c);
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < c; ++j) m(i, j) = normal(rng);
  }
  return m;
}

CSInstance small_cs_instance(std::uint64_t seed, LossTag loss, BRule rule) {
  CSInstanceOptions o;
  o.m = 60;
  o.d = 200;
  o.s = 6;
  o.loss = loss;
  o.gamma = loss == LossTag::kLeastSquares ? 0.1 : 0.001;
  o.b_rule = rule;
  o.seed = seed;
  return make_cs_instance(o);
}

}  // namespace

std::vector<CheckOutcome> run_checks(const CheckOptions& opts) {
  CheckList checks;
  std::mt19937_64 rng(opts.seed);

  checks.run("core.adjoint_consistency", [&] {
    const LinearMap A = LinearMap::dense(random_mat(20, 50, rng));
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Vec x = random_vec(50, rng);
      const Vec y = random_vec(20, rng);
      const double lhs = A.apply(x).dot(y);
      const double rhs = x.dot(A.adjoint(y));
      worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
    }
    return verdict(worst <= 1e-10, "max relative mismatch " + fmt_e(worst));
  });

  checks.run("core.spectral_norm_upper_bound", [&] {
    const LinearMap A = LinearMap::dense(random_mat(20, 50, rng));
    const double sigma = spectral_norm(A);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const Vec x = random_vec(50, rng).normalized();
      worst = std::max(worst, A.apply(x).norm());
    }
    return verdict(sigma >= worst, "bound " + fmt_e(sigma) + " vs sampled " + fmt_e(worst));
  });

  checks.run("core.tau_monotone", [&] {
    ProblemSpec spec;
    spec.lipschitz_ell = 1.0;
    spec.norm_A = 1.0;
    SolverParams p;
    const double base = tau_upper_bound(spec, p);
    bool ok = true;
    auto bump = [&](auto&& mutate) {
      ProblemSpec s = spec;
      SolverParams q = p;
      mutate(s, q);
      ok = ok && tau_upper_bound(s, q) < base;
    };
    bump([](ProblemSpec& s, SolverParams&) { s.weak_convexity_beta += 0.1; });
    bump([](ProblemSpec&, SolverParams& q) { q.delta += 0.1; });
    bump([](ProblemSpec& s, SolverParams&) { s.lipschitz_ell += 0.1; });
    bump([](ProblemSpec& s, SolverParams&) { s.norm_A += 0.1; });
    bump([](ProblemSpec&, SolverParams& q) { q.lambda_bar += 0.1; });
    bump([](ProblemSpec&, SolverParams& q) { q.mu_bar += 0.1; });
    return verdict(ok, "tau decreases in every constant");
  });

  checks.run("prox.soft_threshold", [&] {
    bool ok = true;
    for (int k = 0; k < 200; ++k) {
      const Vec u = random_vec(10, rng);
      const Vec v = random_vec(10, rng);
      const double t = 0.3;
      const Vec su = soft_threshold(u, t);
      const Vec sv = soft_threshold(v, t);
      ok = ok && (su - sv).norm() <= (u - v).norm() + 1e-15;
      for (Index i = 0; i < u.size(); ++i) {
        ok = ok && std::abs(su[i]) <= std::max(0.0, std::abs(u[i]) - t) + 1e-15;
        ok = ok && (su[i] == 0.0 || (su[i] > 0.0) == (u[i] > 0.0));
      }
    }
    return verdict(ok, "nonexpansive, shrinking, sign preserving");
  });

  checks.run("prox.norm_subgradient", [&] {
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
      const Vec x = k == 0 ? Vec::Zero(8) : random_vec(8, rng);
      const Vec g = norm_subgradient(x);
      const Vec y = random_vec(8, rng);
      worst = std::max(worst, x.norm() + g.dot(y - x) - y.norm());
    }
    return verdict(worst <= 1e-12, "max subgradient inequality excess " + fmt_e(worst));
  });

  checks.run("prox.loss_gradients", [&] {
    const Vec b = random_vec(12, rng);
    double worst = 0.0;
    for (LossTag tag : {LossTag::kLeastSquares, LossTag::kLorentzian}) {
      const LossKind loss{tag, b};
      const Vec z = random_vec(12, rng);
      const Vec g = loss.grad(z);
      Vec fd(z.size());
      for (Index i = 0; i < z.size(); ++i) {
        Vec zp = z;
        Vec zm = z;
        zp[i] += 1e-6;
        zm[i] -= 1e-6;
        fd[i] = (loss.value(zp) - loss.value(zm)) / 2e-6;
      }
      worst = std::max(worst, (fd - g).norm() / std::max(1e-12, g.norm()));
    }
    double slope = 0.0;
    const LossKind lor{LossTag::kLorentzian, b};
    for (int k = 0; k < 2000; ++k) {
      const Vec z1 = b + 2.0 * random_vec(12, rng);
      const Vec z2 = z1 + 0.1 * random_vec(12, rng);
      slope = std::max(slope, (lor.grad(z1) - lor.grad(z2)).norm() / (z1 - z2).norm());
    }
    return verdict(worst <= 1e-6 && slope <= 2.0 + 1e-9,
                   "finite-difference error " + fmt_e(worst) + ", secant slope " + fmt_f(slope, 6));
  });

  checks.run("psg.lyapunov_decrease", [&] {
    const CSInstance inst = small_cs_instance(opts.seed, LossTag::kLeastSquares, BRule::kStationary);
    const ProblemSpec spec = build_cs_problem(inst);
    SolverParams p;
    p.max_iter = 500;
    SolveReport rep = solve(spec, Vec::Zero(inst.d()), p);
    if (opts.inject_monotonicity_breaker && rep.trace.records.size() > 3) {
      rep.trace.records[rep.trace.records.size() / 2].objective += 1.0;
    }
    const double tol = 1e-10 * (1.0 + std::abs(rep.trace.records.front().objective));
    const DecreaseCheck dc = check_decrease(rep.trace, rep.trace.lyapunov_c, p.delta, tol);
    return verdict(dc.passed, "max violation " + fmt_e(dc.max_violation) + " at step " +
                                  std::to_string(dc.worst_index) + " (tol " + fmt_e(tol) + ")");
  });

  checks.run("psg.coefficients_and_summability", [&] {
    const CSInstance inst = small_cs_instance(opts.seed + 1, LossTag::kLorentzian, BRule::kNoiseless);
    const ProblemSpec spec = build_cs_problem(inst);
    SolverParams p;
    p.max_iter = 400;
    const SolveReport rep = solve(spec, Vec::Zero(inst.d()), p);
    bool ok = true;
    double steps = 0.0;
    double lyap_min = rep.trace.records.front().lyapunov;
    for (const auto& r : rep.trace.records) {
      ok = ok && r.lambda >= 0.0 && r.lambda <= p.lambda_bar && r.mu >= 0.0 && r.mu <= p.mu_bar * r.tau;
      steps += r.step_norm * r.step_norm;
      lyap_min = std::min(lyap_min, r.lyapunov);
    }
    const double bound = (rep.trace.records.front().lyapunov - lyap_min) / p.delta + 1e-10;
    ok = ok && steps <= bound && rep.trace.records.size() <= static_cast<size_t>(p.max_iter) + 1;
    return verdict(ok, "coefficients admissible; sum of squared steps " + fmt_e(steps));
  });

  checks.run("psg.gppa_equivalence", [&] {
    const Index d = 40;
    const Vec b = random_vec(d, rng);
    CSInstance inst = make_cs_instance(Mat::Identity(d, d), b, Vec::Ones(d), 0.1, LossTag::kLeastSquares);
    inst.A = LinearMap::identity(d);
    inst.norm_A = 1.0;
    const ProblemSpec spec = build_cs_problem(inst);
    SolverParams p;
    p.lambda_bar = 0.0;
    p.mu_bar = 0.0;
    p.max_iter = 100;
    p.stop_rel_tol = 0.0;
    p.store_iterates = TracePolicy::kAlways;
    BaselineParams g;
    g.step_tau = tau_upper_bound(spec, p);
    g.max_iter = 100;
    g.stop_rel_tol = 0.0;
    g.store_iterates = TracePolicy::kAlways;
    const Vec x0 = random_vec(d, rng);
    const SolveReport a = solve(spec, x0, p);
    const SolveReport c = gppa_solve(spec, x0, g);
    double worst = 0.0;
    for (size_t n = 0; n < a.trace.iterates.size(); ++n) {
      worst = std::max(worst, (a.trace.iterates[n] - c.trace.iterates[n]).cwiseAbs().maxCoeff());
    }
    const bool same_len = a.trace.iterates.size() == c.trace.iterates.size() && a.trace.iterates.size() == 101;
    return verdict(same_len && worst <= 1e-12, "max per-step difference " + fmt_e(worst));
  });

  checks.run("baselines.monotone_without_extrapolation", [&] {
    const CSInstance inst = small_cs_instance(opts.seed + 2, LossTag::kLeastSquares, BRule::kStationary);
    const ProblemSpec spec = build_cs_problem(inst);
    BaselineParams g = gppa_params(inst, 300);
    BaselineParams q = pdcae_params(inst, 300);
    q.extrapolation = false;
    const Vec x0 = Vec::Zero(inst.d());
    const SolveReport a = gppa_solve(spec, x0, g);
    const SolveReport c = pdcae_solve(spec, x0, q);
    const double tol = 1e-10 * (1.0 + std::abs(spec.objective(x0)));
    return verdict(a.max_lyapunov_violation <= tol && c.max_lyapunov_violation <= tol,
                   "max increase gppa " + fmt_e(a.max_lyapunov_violation) + ", pdcae " +
                       fmt_e(c.max_lyapunov_violation));
  });

  checks.run("cs.determinism_and_noiseless_b", [&] {
    const CSInstance a = small_cs_instance(opts.seed + 3, LossTag::kLeastSquares, BRule::kNoiseless);
    const CSInstance b = small_cs_instance(opts.seed + 3, LossTag::kLeastSquares, BRule::kNoiseless);
    const bool same = *a.A.matrix() == *b.A.matrix() && a.b == b.b && a.x_g == b.x_g;
    const double resid = (a.A.apply(a.x_g) - a.b).cwiseAbs().maxCoeff();
    SolverParams p;
    p.max_iter = 50;
    p.store_iterates = TracePolicy::kAlways;
    const SolveReport ra = solve(build_cs_problem(a), Vec::Zero(a.d()), p);
    const SolveReport rb = solve(build_cs_problem(b), Vec::Zero(b.d()), p);
    bool bitwise = ra.trace.iterates.size() == rb.trace.iterates.size();
    for (size_t n = 0; bitwise && n < ra.trace.iterates.size(); ++n) bitwise = ra.trace.iterates[n] == rb.trace.iterates[n];
    return verdict(same && resid <= 1e-12 && bitwise && a.sparsity() == 6, "b - A x_g residual " + fmt_e(resid));
  });

  checks.run("qp.projection_properties", [&] {
    double worst = 0.0;
    const double tol = 1e-8;
    for (int k = 0; k < 20; ++k) {
      const Index d = 2 + static_cast<Index>(rng() % 7);
      PolyhedralSet S = PolyhedralSet::free_space(d);
      const Vec center = random_vec(d, rng);
      S.ineq_mat = random_mat(10, d, rng);
      S.ineq_rhs = S.ineq_mat * center + Vec::Ones(10);
      S.lo = center - 3.0 * Vec::Ones(d);
      S.hi = center + 3.0 * Vec::Ones(d);
      const PolytopeProjector P(S);
      for (int t = 0; t < 5; ++t) {
        const Vec u = center + 4.0 * random_vec(d, rng);
        const Vec v = center + 4.0 * random_vec(d, rng);
        const Vec pu = P.project(u, tol).x;
        const Vec pv = P.project(v, tol).x;
        worst = std::max(worst, (P.project(pu, tol).x - pu).norm() / (10.0 * tol));
        worst = std::max(worst, ((pu - pv).norm() - (u - v).norm()) / (10.0 * tol));
        worst = std::max(worst, (u - pu).dot(pv - pu) / (10.0 * tol));
      }
    }
    return verdict(worst <= 1.0, "worst property ratio to 10 tol " + fmt_e(worst));
  });

  std::optional<NetworkData> net;
  checks.run("opf.load_network", [&] {
    net = load_network(opts.network_dir);
    const bool ok = net->n_bus == 14 && net->susceptance(0, 1) == net->susceptance(1, 0);
    return verdict(ok, "loaded " + std::to_string(net->n_bus) + " buses");
  });

  auto need_net = [&]() -> const NetworkData& {
    if (!net) throw Error(ErrorCode::kLoad, "network not loaded");
    return *net;
  };

  checks.run("opf.layout_and_ac_model", [&] {
    const NetworkData& nd = need_net();
    const DCOPFVariables L{nd.n_bus, static_cast<Index>(nd.generator_buses.size())};
    const Vec v = random_vec(L.dim(), rng);
    const ACModel ac = load_ac_model(nd);
    const bool ok = L.pack(L.unpack(v)) == v && L.dim() == 239 && ac.edges.size() == 14 && ac.edges.front().first == 0;
    return verdict(ok, "dimension " + std::to_string(L.dim()) + ", " + std::to_string(ac.edges.size()) + " AC links");
  });

  checks.run("opf.feasible_start_invariants_and_decrease", [&] {
    const NetworkData& nd = need_net();
    const DCOPFModel model = build_dcopf(nd, nd.gamma);
    const Vec x0 = random_feasible_start(model, opts.seed);
    SolverParams p;
    p.mu_rule = MuRule::kConstant;
    p.max_iter = 1000;
    p.feasibility_tol = 1e-7;
    const SolveReport rep = solve(model.spec, x0, p);
    const auto blk = model.layout.unpack(rep.x);
    const double pen = blk.pv.sum() - nd.penetration_min * nd.total_demand();
    const double anti = (blk.flow + blk.flow.transpose()).cwiseAbs().maxCoeff();
    const double tol = 1e-6 * (1.0 + std::abs(model.spec.objective(x0)));
    const bool ok = pen >= -1e-8 && anti <= 1e-8 && rep.max_lyapunov_violation <= tol;
    return verdict(ok, "penetration slack " + fmt_e(pen) + ", antisymmetry " + fmt_e(anti) + ", violation " +
                           fmt_e(rep.max_lyapunov_violation));
  });

  return checks.take();
}

}  // namespace proxsg
