// Command-line driver for the proxsg library. Talks to the library only through its C interface.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "proxsg/proxsg.h"

namespace {

int report_failure(const char* what, proxsg_status st) {
  std::cerr << "proxsg-bench: " << what << ": " << proxsg_status_string(st) << ": " << proxsg_last_error() << "\n";
  return 2;
}

int cmd_cs_run(const std::string& config_path) {
  proxsg_config* cfg = nullptr;
  if (auto st = proxsg_config_load(config_path.c_str(), &cfg); st != PROXSG_OK) return report_failure("config", st);
  proxsg_cs_result* res = nullptr;
  auto st = proxsg_cs_run(cfg, &res);
  proxsg_config_free(cfg);
  if (st != PROXSG_OK) return report_failure("cs-run", st);

  const char* csv = nullptr;
  proxsg_cs_result_csv(res, &csv);
  std::cout << csv;
  st = proxsg_cs_result_write(res);
  const bool ok = proxsg_cs_result_all_ok(res) != 0;
  proxsg_cs_result_free(res);
  if (st != PROXSG_OK) return report_failure("writing results", st);
  if (!ok) {
    std::cerr << "proxsg-bench: some runs failed; see the runs CSV\n";
    return 1;
  }
  return 0;
}

int cmd_opf_run(const std::string& config_path) {
  proxsg_config* cfg = nullptr;
  if (auto st = proxsg_config_load(config_path.c_str(), &cfg); st != PROXSG_OK) return report_failure("config", st);
  proxsg_opf_result* res = nullptr;
  auto st = proxsg_opf_run(cfg, &res);
  proxsg_config_free(cfg);
  if (st != PROXSG_OK) return report_failure("opf-run", st);

  const char* csv = nullptr;
  const char* table = nullptr;
  proxsg_opf_result_csv(res, &csv);
  proxsg_opf_result_plan_table(res, &table);
  std::cout << csv << "\n" << table;
  st = proxsg_opf_result_write(res);
  const bool ok = proxsg_opf_result_all_ok(res) != 0;
  proxsg_opf_result_free(res);
  if (st != PROXSG_OK) return report_failure("writing results", st);
  if (!ok) {
    std::cerr << "proxsg-bench: some starts failed; see the results CSV\n";
    return 1;
  }
  return 0;
}

int cmd_check(const std::string& network_dir, bool breaker) {
  proxsg_check_result* res = nullptr;
  if (auto st = proxsg_check_run(network_dir.c_str(), breaker ? 1 : 0, &res); st != PROXSG_OK) {
    return report_failure("check", st);
  }
  const size_t n = proxsg_check_count(res);
  for (size_t i = 0; i < n; ++i) {
    const char* name = nullptr;
    const char* detail = nullptr;
    int passed = 0;
    proxsg_check_get(res, i, &name, &passed, &detail);
    std::printf("%-48s %s  %s\n", name, passed ? "PASS" : "FAIL", detail);
  }
  const bool all = proxsg_check_all_passed(res) != 0;
  std::printf("%zu checks, %s\n", n, all ? "all passed" : "FAILURES");
  proxsg_check_result_free(res);
  return all ? 0 : 1;
}

int cmd_gen(int case_id, unsigned long long seed, const std::string& loss, const std::string& out_dir) {
  proxsg_cs_instance* inst = nullptr;
  if (auto st = proxsg_cs_instance_create(case_id, loss.c_str(), seed, &inst); st != PROXSG_OK) {
    return report_failure("gen", st);
  }
  auto st = proxsg_cs_instance_write(inst, out_dir.c_str());
  size_t m = 0, d = 0, s = 0;
  proxsg_cs_instance_dims(inst, &m, &d, &s);
  proxsg_cs_instance_free(inst);
  if (st != PROXSG_OK) return report_failure("gen", st);
  std::cout << "wrote case " << case_id << " (m=" << m << ", d=" << d << ", s=" << s << ", seed=" << seed
            << ") to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proximal subgradient benchmarks: compressed sensing and PV placement"};
  app.set_version_flag("--version", std::string(proxsg_version()));
  app.require_subcommand(1);

  std::string cs_config;
  auto* cs = app.add_subcommand("cs-run", "Run a compressed-sensing sweep");
  cs->add_option("--config", cs_config, "Config file")->required()->check(CLI::ExistingFile);

  std::string opf_config;
  auto* opf = app.add_subcommand("opf-run", "Run the multi-start PV placement experiment");
  opf->add_option("--config", opf_config, "Config file")->required()->check(CLI::ExistingFile);

  std::string network_dir = "data/network";
  bool breaker = false;
  auto* check = app.add_subcommand("check", "Run the invariant suite and print a pass/fail matrix");
  check->add_option("--network", network_dir, "Network data directory");
  check->add_flag("--inject-monotonicity-breaker", breaker, "Corrupt one trace step (suite must then fail)");

  int case_id = 0;
  unsigned long long seed = 0;
  std::string loss = "least_squares";
  std::string out_dir;
  auto* gen = app.add_subcommand("gen", "Write a compressed-sensing instance as CSV files");
  gen->add_option("--case", case_id, "Case number 1-8")->required()->check(CLI::Range(1, 8));
  gen->add_option("--seed", seed, "Instance seed")->required();
  gen->add_option("--loss", loss, "least_squares or lorentzian");
  gen->add_option("--out", out_dir, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (*cs) return cmd_cs_run(cs_config);
  if (*opf) return cmd_opf_run(opf_config);
  if (*check) return cmd_check(network_dir, breaker);
  if (*gen) return cmd_gen(case_id, seed, loss, out_dir);
  return 2;
}
