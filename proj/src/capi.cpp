#include "proxsg/proxsg.h"

#include <exception>
#include <new>
#include <string>

#include "proxsg/baselines.hpp"
#include "proxsg/bench.hpp"
#include "proxsg/config.hpp"
#include "proxsg/cs.hpp"
#include "proxsg/error.hpp"
#include "proxsg/solver.hpp"

struct proxsg_config {
  proxsg::Config cfg;
};

struct proxsg_cs_instance {
  proxsg::CSInstance inst;
};

struct proxsg_cs_result {
  proxsg::CSSweepResult result;
  std::string csv;
  std::string runs_csv;
  std::string output_csv;
  std::string output_runs_csv;
};

struct proxsg_opf_result {
  proxsg::OPFResult result;
  std::string csv;
  std::string json;
  std::string table;
  std::string output_csv;
  std::string report_json;
};

struct proxsg_check_result {
  std::vector<proxsg::CheckOutcome> outcomes;
};

namespace {

thread_local std::string g_last_error;

proxsg_status fail(proxsg_status status, const std::string& msg) {
  g_last_error = msg;
  return status;
}

// Converts any exception escaping `body` into a status code.
template <class F>
proxsg_status guarded(F&& body) {
  try {
    return body();
  } catch (const proxsg::Error& e) {
    return fail(static_cast<proxsg_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(PROXSG_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PROXSG_E_INTERNAL, e.what());
  } catch (...) {
    return fail(PROXSG_E_INTERNAL, "unknown error");
  }
}

#define PROXSG_REQUIRE(cond, what)                                 \
  do {                                                             \
    if (!(cond)) return fail(PROXSG_E_INVALID_ARGUMENT, what);     \
  } while (0)

}  // namespace

extern "C" {

const char* proxsg_version(void) { return "1.0.0"; }

const char* proxsg_status_string(proxsg_status status) {
  switch (status) {
    case PROXSG_OK: return "ok";
    case PROXSG_E_RUN_FAILED: return "some runs failed";
    case PROXSG_E_INTERNAL: return "internal error";
    default: break;
  }
  const int code = static_cast<int>(status);
  if (code >= 1 && code <= 11) return proxsg::to_string(static_cast<proxsg::ErrorCode>(code));
  return "unknown status";
}

const char* proxsg_last_error(void) { return g_last_error.c_str(); }

proxsg_status proxsg_config_load(const char* path, proxsg_config** out) {
  PROXSG_REQUIRE(path && out, "proxsg_config_load: null argument");
  return guarded([&] {
    *out = new proxsg_config{proxsg::Config::load(path)};
    return PROXSG_OK;
  });
}

proxsg_status proxsg_config_parse(const char* text, proxsg_config** out) {
  PROXSG_REQUIRE(text && out, "proxsg_config_parse: null argument");
  return guarded([&] {
    *out = new proxsg_config{proxsg::Config::parse(text)};
    return PROXSG_OK;
  });
}

void proxsg_config_free(proxsg_config* cfg) { delete cfg; }

proxsg_status proxsg_cs_instance_create(int case_id, const char* loss, uint64_t seed, proxsg_cs_instance** out) {
  PROXSG_REQUIRE(loss && out, "proxsg_cs_instance_create: null argument");
  return guarded([&] {
    const auto opts = proxsg::case_options(case_id, proxsg::parse_loss_tag(loss), seed);
    *out = new proxsg_cs_instance{proxsg::make_cs_instance(opts)};
    return PROXSG_OK;
  });
}

proxsg_status proxsg_cs_instance_load(const char* dir, proxsg_cs_instance** out) {
  PROXSG_REQUIRE(dir && out, "proxsg_cs_instance_load: null argument");
  return guarded([&] {
    *out = new proxsg_cs_instance{proxsg::read_cs_bundle(dir)};
    return PROXSG_OK;
  });
}

proxsg_status proxsg_cs_instance_write(const proxsg_cs_instance* inst, const char* dir) {
  PROXSG_REQUIRE(inst && dir, "proxsg_cs_instance_write: null argument");
  return guarded([&] {
    proxsg::write_cs_bundle(inst->inst, dir);
    return PROXSG_OK;
  });
}

proxsg_status proxsg_cs_instance_dims(const proxsg_cs_instance* inst, size_t* m, size_t* d, size_t* s) {
  PROXSG_REQUIRE(inst, "proxsg_cs_instance_dims: null instance");
  if (m) *m = static_cast<size_t>(inst->inst.m());
  if (d) *d = static_cast<size_t>(inst->inst.d());
  if (s) *s = static_cast<size_t>(inst->inst.sparsity());
  return PROXSG_OK;
}

proxsg_status proxsg_cs_solve(const proxsg_cs_instance* inst, const char* solver, int max_iter,
                              proxsg_solve_summary* out) {
  PROXSG_REQUIRE(inst && solver && out, "proxsg_cs_solve: null argument");
  PROXSG_REQUIRE(max_iter > 0, "proxsg_cs_solve: max_iter must be positive");
  return guarded([&] {
    const proxsg::ProblemSpec spec = proxsg::build_cs_problem(inst->inst);
    const proxsg::Vec x0 = proxsg::Vec::Zero(inst->inst.d());
    proxsg::SolveReport rep;
    switch (proxsg::parse_solver_kind(solver)) {
      case proxsg::SolverKind::kProposed: {
        proxsg::SolverParams p;
        p.max_iter = max_iter;
        p.store_iterates = proxsg::TracePolicy::kNever;
        rep = proxsg::solve(spec, x0, p);
        break;
      }
      case proxsg::SolverKind::kGppa: {
        auto p = proxsg::gppa_params(inst->inst, max_iter);
        p.store_iterates = proxsg::TracePolicy::kNever;
        rep = proxsg::gppa_solve(spec, x0, p);
        break;
      }
      case proxsg::SolverKind::kPdcae: {
        auto p = proxsg::pdcae_params(inst->inst, max_iter);
        p.store_iterates = proxsg::TracePolicy::kNever;
        rep = proxsg::pdcae_solve(spec, x0, p);
        break;
      }
    }
    out->iterations = rep.iterations;
    out->converged = rep.status == proxsg::SolveStatus::kConverged ? 1 : 0;
    out->objective = rep.objective;
    out->initial_objective = rep.trace.records.front().objective;
    out->gt_error = proxsg::ground_truth_error(rep.x, inst->inst.x_g);
    out->lyapunov_violation = rep.max_lyapunov_violation;
    return PROXSG_OK;
  });
}

void proxsg_cs_instance_free(proxsg_cs_instance* inst) { delete inst; }

proxsg_status proxsg_cs_run(const proxsg_config* cfg, proxsg_cs_result** out) {
  PROXSG_REQUIRE(cfg && out, "proxsg_cs_run: null argument");
  return guarded([&] {
    const proxsg::CSExperimentConfig c = proxsg::cs_config_from(cfg->cfg);
    auto* res = new proxsg_cs_result{proxsg::run_cs_sweep(c), {}, {}, c.output_csv, c.runs_csv};
    res->csv = res->result.to_csv();
    res->runs_csv = res->result.runs_to_csv();
    *out = res;
    return PROXSG_OK;
  });
}

int proxsg_cs_result_all_ok(const proxsg_cs_result* res) { return res && res->result.all_ok ? 1 : 0; }

proxsg_status proxsg_cs_result_csv(const proxsg_cs_result* res, const char** csv) {
  PROXSG_REQUIRE(res && csv, "proxsg_cs_result_csv: null argument");
  *csv = res->csv.c_str();
  return PROXSG_OK;
}

proxsg_status proxsg_cs_result_runs_csv(const proxsg_cs_result* res, const char** csv) {
  PROXSG_REQUIRE(res && csv, "proxsg_cs_result_runs_csv: null argument");
  *csv = res->runs_csv.c_str();
  return PROXSG_OK;
}

proxsg_status proxsg_cs_result_write(const proxsg_cs_result* res) {
  PROXSG_REQUIRE(res, "proxsg_cs_result_write: null result");
  return guarded([&] {
    if (!res->output_csv.empty()) proxsg::write_text(res->output_csv, res->csv);
    if (!res->output_runs_csv.empty()) proxsg::write_text(res->output_runs_csv, res->runs_csv);
    return PROXSG_OK;
  });
}

void proxsg_cs_result_free(proxsg_cs_result* res) { delete res; }

proxsg_status proxsg_opf_run(const proxsg_config* cfg, proxsg_opf_result** out) {
  PROXSG_REQUIRE(cfg && out, "proxsg_opf_run: null argument");
  return guarded([&] {
    const proxsg::OPFExperimentConfig c = proxsg::opf_config_from(cfg->cfg);
    auto* res = new proxsg_opf_result{proxsg::run_opf(c), {}, {}, {}, c.output_csv, c.report_json};
    res->csv = res->result.to_csv();
    res->json = res->result.to_json();
    res->table = res->result.best ? res->result.best->to_table() : std::string("no successful run\n");
    *out = res;
    return PROXSG_OK;
  });
}

int proxsg_opf_result_all_ok(const proxsg_opf_result* res) { return res && res->result.all_ok ? 1 : 0; }

proxsg_status proxsg_opf_result_csv(const proxsg_opf_result* res, const char** csv) {
  PROXSG_REQUIRE(res && csv, "proxsg_opf_result_csv: null argument");
  *csv = res->csv.c_str();
  return PROXSG_OK;
}

proxsg_status proxsg_opf_result_json(const proxsg_opf_result* res, const char** json) {
  PROXSG_REQUIRE(res && json, "proxsg_opf_result_json: null argument");
  *json = res->json.c_str();
  return PROXSG_OK;
}

proxsg_status proxsg_opf_result_plan_table(const proxsg_opf_result* res, const char** table) {
  PROXSG_REQUIRE(res && table, "proxsg_opf_result_plan_table: null argument");
  *table = res->table.c_str();
  return PROXSG_OK;
}

proxsg_status proxsg_opf_result_best_objective(const proxsg_opf_result* res, double* value) {
  PROXSG_REQUIRE(res && value, "proxsg_opf_result_best_objective: null argument");
  if (!res->result.best) return fail(PROXSG_E_RUN_FAILED, "no successful run");
  *value = res->result.best->objective;
  return PROXSG_OK;
}

proxsg_status proxsg_opf_result_placement(const proxsg_opf_result* res, int* buses, size_t cap, size_t* count) {
  PROXSG_REQUIRE(res && count, "proxsg_opf_result_placement: null argument");
  PROXSG_REQUIRE(buses || cap == 0, "proxsg_opf_result_placement: null buffer");
  if (!res->result.best) return fail(PROXSG_E_RUN_FAILED, "no successful run");
  const auto& p = res->result.best->placement;
  *count = p.size();
  for (size_t i = 0; i < p.size() && i < cap; ++i) buses[i] = p[i];
  return PROXSG_OK;
}

proxsg_status proxsg_opf_result_write(const proxsg_opf_result* res) {
  PROXSG_REQUIRE(res, "proxsg_opf_result_write: null result");
  return guarded([&] {
    if (!res->output_csv.empty()) proxsg::write_text(res->output_csv, res->csv);
    if (!res->report_json.empty()) proxsg::write_text(res->report_json, res->json + "\n");
    return PROXSG_OK;
  });
}

void proxsg_opf_result_free(proxsg_opf_result* res) { delete res; }

proxsg_status proxsg_check_run(const char* network_dir, int inject_monotonicity_breaker, proxsg_check_result** out) {
  PROXSG_REQUIRE(out, "proxsg_check_run: null argument");
  return guarded([&] {
    proxsg::CheckOptions opts;
    if (network_dir) opts.network_dir = network_dir;
    opts.inject_monotonicity_breaker = inject_monotonicity_breaker != 0;
    *out = new proxsg_check_result{proxsg::run_checks(opts)};
    return PROXSG_OK;
  });
}

size_t proxsg_check_count(const proxsg_check_result* res) { return res ? res->outcomes.size() : 0; }

proxsg_status proxsg_check_get(const proxsg_check_result* res, size_t index, const char** name, int* passed,
                               const char** detail) {
  PROXSG_REQUIRE(res, "proxsg_check_get: null result");
  PROXSG_REQUIRE(index < res->outcomes.size(), "proxsg_check_get: index out of range");
  const auto& o = res->outcomes[index];
  if (name) *name = o.name.c_str();
  if (passed) *passed = o.passed ? 1 : 0;
  if (detail) *detail = o.detail.c_str();
  return PROXSG_OK;
}

int proxsg_check_all_passed(const proxsg_check_result* res) {
  if (!res) return 0;
  for (const auto& o : res->outcomes) {
    if (!o.passed) return 0;
  }
  return 1;
}

void proxsg_check_result_free(proxsg_check_result* res) { delete res; }

}  // extern "C"
