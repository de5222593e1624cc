/*
Copyright 2026 The RMN Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS-IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

// rmn: benchmark, ablation and Poisson experiment driver.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rmn/rmn.hpp"

#ifndef RMN_DATA_DIR
#define RMN_DATA_DIR "data"
#endif

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kConfigError = 2;

struct Globals {
  std::vector<std::uint64_t> seeds;
  std::string out_dir = "results";
  int threads = 1;
};

void print_warnings(const std::vector<std::string>& w) {
  for (const auto& s : w) std::cerr << "warning: " << s << "\n";
}

void print_summary(const rmn::BenchmarkResult& r) {
  std::printf("%-18s %-22s seeds=%zu  rmse %s +- %s  params=%zu\n", r.config.benchmark.c_str(), r.config.method.c_str(),
              r.summary.n, rmn::fmt_double(r.summary.mean, 3).c_str(), rmn::fmt_double(r.summary.std, 3).c_str(),
              r.rows.empty() ? std::size_t{0} : r.rows.front().param_count);
}

rmn::Json load_config(const std::string& path) { return rmn::read_json_file(path); }

int bench_run(const Globals& g, const std::string& cfg_path) {
  auto cfg = rmn::parse_experiment(load_config(cfg_path));
  if (!g.seeds.empty()) cfg.seeds = g.seeds;
  const auto res = rmn::run_benchmark(cfg, g.threads);
  rmn::emit_benchmark(res, g.out_dir);
  print_warnings(res.warnings);
  print_summary(res);
  return kOk;
}

int run_suite(const Globals& g, const std::vector<rmn::ExperimentConfig>& cfgs, const std::string& summary_name) {
  std::vector<rmn::BenchmarkResult> all;
  for (const auto& c : cfgs) {
    all.push_back(rmn::run_benchmark(c, g.threads));
    rmn::emit_benchmark(all.back(), g.out_dir);
    print_warnings(all.back().warnings);
    print_summary(all.back());
  }
  rmn::write_json_file(rmn::summary_json(all), (fs::path(g.out_dir) / summary_name).string());
  return kOk;
}

int pinn_run(const Globals& g, const std::string& cfg_path) {
  auto cfg = rmn::parse_pinn_experiment(load_config(cfg_path));
  if (!g.seeds.empty()) {
    if (!cfg.centers.empty() && cfg.centers.size() != g.seeds.size())
      throw rmn::ConfigError("$.centers", "need one center per seed in --seed-list");
    cfg.seeds = g.seeds;
  }
  if (cfg.cache_dir.empty()) cfg.cache_dir = (fs::path(g.out_dir) / "cache").string();
  const auto res = rmn::run_pinn_experiment(cfg, g.threads);
  print_warnings(res.warnings);
  fs::create_directories(fs::path(g.out_dir) / "reports");
  for (auto mode : cfg.modes) {
    const std::string method = "rmn_mc_" + rmn::to_string(mode);
    std::vector<rmn::ResultRow> rows;
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
      if (res.rows[i].method != method) continue;
      rows.push_back(res.rows[i]);
      rmn::Json j = rmn::to_json(res.reports[i]);
      j["benchmark"] = "poisson3d";
      j["method"] = method;
      j["config"] = rmn::to_json(cfg);
      rmn::write_json_file(j, (fs::path(g.out_dir) / "reports" /
                               ("poisson3d__" + method + "__seed" + std::to_string(res.rows[i].seed) + ".json"))
                                  .string());
    }
    rmn::write_rows_csv(rows, fs::path(g.out_dir) / ("poisson3d__" + method + ".csv"));
    std::vector<rmn::ResultRow> tmp = rows;
    for (auto& r : tmp) r.rmse = r.rel_l2.value_or(std::nan(""));
    const auto rel = rmn::aggregate(tmp);
    for (auto& r : tmp) r.rmse = r.flux_err.value_or(std::nan(""));
    const auto flux = rmn::aggregate(tmp);
    std::printf("poisson3d %-22s seeds=%zu  rel L2 %s +- %s  flux err %s\n", method.c_str(), rel.n,
                rmn::fmt_double(rel.mean, 3).c_str(), rmn::fmt_double(rel.std, 3).c_str(),
                rmn::fmt_double(flux.mean, 3).c_str());
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
      const auto& sp = res.reports[i].spectrum;
      if (res.rows[i].method == method && !sp.empty())
        std::printf("  seed %llu  mu_1 %.4f  mu_K %.4f\n", static_cast<unsigned long long>(res.rows[i].seed), sp.front().mu,
                    sp.back().mu);
    }
  }
  return kOk;
}

int check_grads() {
  bool ok = true;
  for (const auto& l : rmn::gradient_oracle_suite()) {
    std::printf("%-16s %-13s max rel err %.2e  tol %.0e  %s  %s\n", l.model.c_str(), l.check.c_str(), l.max_rel_err, l.tol,
                l.passed ? "ok" : "FAIL", l.worst.c_str());
    ok = ok && l.passed;
  }
  return ok ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radial Muntz-Szasz Network benchmarks"};
  app.require_subcommand(1);
  Globals g;
  std::string baselines = std::string(RMN_DATA_DIR) + "/paper_baselines.json";
  app.add_option("--seed-list", g.seeds, "comma-separated seeds, overriding the config")->delimiter(',');
  app.add_option("--out-dir", g.out_dir, "directory for CSV and JSON output");
  app.add_option("--threads", g.threads, "worker threads (1 gives bitwise-reproducible output)")->check(CLI::Range(1, 1024));

  auto* bench = app.add_subcommand("bench", "function-fitting benchmarks");
  bench->require_subcommand(1);
  std::string cfg_path;
  auto* bench_run_cmd = bench->add_subcommand("run", "run one experiment config");
  bench_run_cmd->add_option("config", cfg_path, "experiment JSON")->required();
  auto* bench_all = bench->add_subcommand("all", "run the standard benchmark suite");

  auto* ablate = app.add_subcommand("ablate", "run an ablation suite");
  std::string which;
  ablate->add_option("which", which, "K_sweep | range_sweep | log_primitive_toggle")->required();

  auto* pinn = app.add_subcommand("pinn", "3D Poisson point-charge experiment");
  pinn->require_subcommand(1);
  auto* pinn_run_cmd = pinn->add_subcommand("run", "run a Poisson experiment config");
  pinn_run_cmd->add_option("config", cfg_path, "Poisson experiment JSON")->required();

  auto* check = app.add_subcommand("check", "self checks");
  check->require_subcommand(1);
  auto* grads = check->add_subcommand("grads", "finite-difference gradient suite");

  auto* report = app.add_subcommand("report", "summarize a results directory");
  std::string report_dir;
  report->add_option("dir", report_dir, "results directory")->required()->check(CLI::ExistingDirectory);
  report->add_option("--baselines", baselines, "reference baseline JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (bench_run_cmd->parsed()) return bench_run(g, cfg_path);
    if (bench_all->parsed()) {
      auto seeds = g.seeds.empty() ? std::vector<std::uint64_t>{0, 1, 2, 3, 4} : g.seeds;
      return run_suite(g, rmn::standard_configs(seeds), "summary.json");
    }
    if (ablate->parsed()) {
      const auto& names = rmn::ablation_names();
      if (std::find(names.begin(), names.end(), which) == names.end()) {
        std::string msg = "unknown ablation '" + which + "'; valid:";
        for (const auto& n : names) msg += " " + n;
        throw rmn::ConfigError("which", msg);
      }
      auto seeds = g.seeds.empty() ? std::vector<std::uint64_t>{0, 1, 2, 3, 4} : g.seeds;
      return run_suite(g, rmn::ablation_configs(which, seeds), "ablation_" + which + ".json");
    }
    if (pinn_run_cmd->parsed()) return pinn_run(g, cfg_path);
    if (grads->parsed()) return check_grads();
    if (report->parsed()) {
      std::cout << rmn::summary_table(report_dir, baselines);
      return kOk;
    }
  } catch (const rmn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
