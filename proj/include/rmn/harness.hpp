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

// Experiment orchestration: configs, seed sweeps, MC initializers, ablations, the Poisson
// experiment and result emission.

#ifndef RMN_HARNESS_HPP
#define RMN_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rmn/io.hpp"
#include "rmn/model.hpp"
#include "rmn/optim.hpp"
#include "rmn/pinn_poisson.hpp"
#include "rmn/sampling.hpp"
#include "rmn/targets.hpp"

namespace rmn {

/// splitmix64 of (seed, stream): independent, reproducible sub-seeds.
inline std::uint64_t seed_mix(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index writes its own slot,
/// so the result does not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t w = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errs(n);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < w; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          errs[i] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

enum class McInit { Random, ResidualBased };

struct ExperimentConfig {
  std::string benchmark;
  std::string method;  // output label; derived from the model when empty
  ModelSpec model;
  TrainConfig train;
  std::size_t n_train = 10000;
  std::size_t n_test = 5000;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  McInit mc_init = McInit::ResidualBased;
  int restarts = 1;
  int prefit_iterations = 1000;
  std::vector<Vec3> target_centers;  // replaces the centers of a multi-source target
};

inline std::string default_method(const ModelSpec& s) {
  switch (s.kind) {
    case ModelKind::Direct: return "rmn_direct";
    case ModelKind::Angular2D: return s.half_integer ? "rmn_angular_half" : "rmn_angular";
    case ModelKind::Angular3D: return "rmn_angular";
    case ModelKind::MultiCenter: return "rmn_mc";
    case ModelKind::MsnCoord: return "msn_coord";
  }
  return "rmn";
}

inline std::string unknown_benchmark_message(const std::string& name) {
  std::string msg = "unknown benchmark '" + name + "'; valid names:";
  for (const auto& n : target_names()) msg += " " + n;
  return msg;
}

/// Config for `benchmark` with the per-dimension defaults (2D: lr 2e-3, 5000 iterations;
/// 3D: lr 1e-3, 8000 iterations) and the given model kind.
inline ExperimentConfig default_experiment(const std::string& benchmark, ModelKind kind = ModelKind::Direct) {
  const auto t = find_target(benchmark);
  require(t.has_value(), unknown_benchmark_message(benchmark));
  ExperimentConfig c;
  c.benchmark = benchmark;
  c.model.kind = kind;
  c.model.dim = t->dim;
  c.train.lr = t->dim == 2 ? 2e-3 : 1e-3;
  c.train.iterations = t->dim == 2 ? 5000 : 8000;
  if (kind == ModelKind::MultiCenter) {
    c.model.K = 9;
    c.model.J = std::max<int>(1, static_cast<int>(t->sources.size()));
  }
  return c;
}

inline std::string to_string(McInit m) { return m == McInit::Random ? "random" : "residual_based"; }

/// Parses an experiment JSON object. Absent keys take the defaults of default_experiment.
inline ExperimentConfig parse_experiment(const Json& j, const std::string& path = "$") {
  JsonReader r(j, path);
  std::string bench;
  if (!r.get("benchmark", bench)) throw ConfigError(r.path_of("benchmark"), "missing");
  const auto t = find_target(bench);
  if (!t) throw ConfigError(r.path_of("benchmark"), unknown_benchmark_message(bench));

  ModelKind kind = ModelKind::Direct;
  if (const Json* m = r.raw("model"); m && m->is_object() && m->contains("kind") && m->at("kind").is_string()) {
    try {
      kind = model_kind_from_string(m->at("kind").get<std::string>());
    } catch (const ContractViolation&) {
    }
  }
  ExperimentConfig c = default_experiment(bench, kind);
  r.get("method", c.method);
  if (r.has("model")) {
    JsonReader mr = r.child("model");
    read_model_spec(mr, c.model);
    mr.finish();
    if (c.model.dim != t->dim)
      throw ConfigError(r.path_of("model") + ".dim", "benchmark " + bench + " is " + std::to_string(t->dim) + "D");
  }
  try {
    validate(c.model);
  } catch (const ContractViolation& e) {
    throw ConfigError(r.path_of("model"), e.what());
  }
  if (r.has("train")) {
    JsonReader tr = r.child("train");
    tr.get("lr", c.train.lr);
    std::string s;
    if (tr.get("schedule", s)) {
      if (s == "constant") c.train.schedule = Schedule::Constant;
      else if (s == "cosine") c.train.schedule = Schedule::Cosine;
      else throw ConfigError(tr.path_of("schedule"), "expected 'constant' or 'cosine'");
    }
    tr.get("lr_final", c.train.lr_final);
    tr.get("iterations", c.train.iterations);
    tr.get("clip_norm", c.train.clip_norm);
    tr.get("resample_every", c.train.resample_every);
    if (tr.get("weighting", s)) {
      if (s == "uniform") c.train.weighting = Weighting::Uniform;
      else if (s == "r_squared") c.train.weighting = Weighting::RSquared;
      else throw ConfigError(tr.path_of("weighting"), "expected 'uniform' or 'r_squared'");
    }
    tr.get("output_normalization", c.train.output_normalization);
    tr.get("log_every", c.train.log_every);
    tr.finish();
    try {
      validate(c.train);
    } catch (const ContractViolation& e) {
      throw ConfigError(r.path_of("train"), e.what());
    }
  }
  r.get("n_train", c.n_train);
  r.get("n_test", c.n_test);
  if (c.n_train < 1) throw ConfigError(r.path_of("n_train"), "must be >= 1");
  if (c.n_test < 1) throw ConfigError(r.path_of("n_test"), "must be >= 1");
  r.get("seeds", c.seeds);
  if (c.seeds.empty()) throw ConfigError(r.path_of("seeds"), "must not be empty");
  std::string mi;
  if (r.get("mc_init", mi)) {
    if (mi == "random") c.mc_init = McInit::Random;
    else if (mi == "residual_based") c.mc_init = McInit::ResidualBased;
    else throw ConfigError(r.path_of("mc_init"), "expected 'random' or 'residual_based'");
  }
  r.get("restarts", c.restarts);
  if (c.restarts < 1) throw ConfigError(r.path_of("restarts"), "must be >= 1");
  r.get("prefit_iterations", c.prefit_iterations);
  if (const Json* tc = r.raw("target_centers")) {
    if (t->sources.empty()) throw ConfigError(r.path_of("target_centers"), "benchmark has no sources");
    if (!tc->is_array() || tc->size() != t->sources.size())
      throw ConfigError(r.path_of("target_centers"), "expected " + std::to_string(t->sources.size()) + " centers");
    for (std::size_t i = 0; i < tc->size(); ++i) {
      const auto& e = (*tc)[i];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        throw ConfigError(r.path_of("target_centers") + "[" + std::to_string(i) + "]", "expected [x, y]");
      c.target_centers.push_back({e[0].get<double>(), e[1].get<double>(), 0.0});
    }
  }
  r.finish();
  if (c.method.empty()) c.method = default_method(c.model);
  return c;
}

inline Json to_json(const ExperimentConfig& c) {
  Json j;
  j["benchmark"] = c.benchmark;
  j["method"] = c.method.empty() ? default_method(c.model) : c.method;
  j["model"] = to_json(c.model);
  j["train"] = {{"lr", c.train.lr},
                {"schedule", c.train.schedule == Schedule::Cosine ? "cosine" : "constant"},
                {"lr_final", c.train.lr_final},
                {"iterations", c.train.iterations},
                {"clip_norm", c.train.clip_norm},
                {"resample_every", c.train.resample_every},
                {"weighting", c.train.weighting == Weighting::RSquared ? "r_squared" : "uniform"},
                {"output_normalization", c.train.output_normalization},
                {"log_every", c.train.log_every}};
  j["n_train"] = c.n_train;
  j["n_test"] = c.n_test;
  j["seeds"] = c.seeds;
  j["mc_init"] = to_string(c.mc_init);
  j["restarts"] = c.restarts;
  j["prefit_iterations"] = c.prefit_iterations;
  if (!c.target_centers.empty()) {
    Json a = Json::array();
    for (const auto& v : c.target_centers) a.push_back({v[0], v[1]});
    j["target_centers"] = a;
  }
  return j;
}

/// The target named by the config, with any center override applied.
inline TargetSpec resolve_target(const ExperimentConfig& c) {
  auto t = find_target(c.benchmark);
  require(t.has_value(), unknown_benchmark_message(c.benchmark));
  if (c.target_centers.empty()) return *t;
  require(c.target_centers.size() == t->sources.size(), "resolve_target: center count mismatch");
  if (t->sources.size() == 2) return two_source_target(c.target_centers, t->name);
  if (t->sources.size() == 3) {
    auto s = three_source_target(c.target_centers);
    s.name = t->name;
    return s;
  }
  throw ContractViolation("resolve_target: unsupported source count");
}

struct ResultRow {
  std::string benchmark;
  std::string method;
  std::uint64_t seed = 0;
  double rmse = 0.0;
  std::optional<double> rel_l2;
  std::optional<double> flux_err;
  std::size_t param_count = 0;
  double wall_time_s = 0.0;
  std::vector<SpectrumEntry> dominant;
  std::vector<Vec3> centers;
  int dim = 2;
  bool failed = false;
};

/// Lloyd's k-means with k-means++ seeding. Ties go to the lowest centroid index; an
/// empty cluster keeps its previous centroid.
inline std::vector<Vec3> kmeans(const std::vector<Vec3>& pts, std::size_t k, int iterations, std::uint64_t seed) {
  require(k >= 1 && pts.size() >= k, "kmeans: need at least k points");
  std::mt19937_64 rng(seed);
  auto d2 = [](const Vec3& a, const Vec3& b) {
    const Vec3 d{a[0] - b[0], a[1] - b[1], a[2] - b[2]};
    return dot(d, d);
  };
  std::vector<Vec3> c;
  c.push_back(pts[std::uniform_int_distribution<std::size_t>(0, pts.size() - 1)(rng)]);
  std::vector<double> best(pts.size());
  while (c.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      best[i] = d2(pts[i], c[0]);
      for (std::size_t j = 1; j < c.size(); ++j) best[i] = std::min(best[i], d2(pts[i], c[j]));
      total += best[i];
    }
    if (total <= 0.0) break;
    double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    std::size_t pick = pts.size() - 1;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      u -= best[i];
      if (u < 0.0) {
        pick = i;
        break;
      }
    }
    c.push_back(pts[pick]);
  }
  require(c.size() == k, "kmeans: fewer distinct points than clusters");
  std::vector<std::size_t> assign(pts.size(), 0);
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      std::size_t a = 0;
      double bd = d2(pts[i], c[0]);
      for (std::size_t j = 1; j < k; ++j) {
        const double dj = d2(pts[i], c[j]);
        if (dj < bd) {
          bd = dj;
          a = j;
        }
      }
      assign[i] = a;
    }
    std::vector<Vec3> sum(k, Vec3{0.0, 0.0, 0.0});
    std::vector<std::size_t> cnt(k, 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (int d = 0; d < 3; ++d) sum[assign[i]][d] += pts[i][d];
      ++cnt[assign[i]];
    }
    for (std::size_t j = 0; j < k; ++j)
      if (cnt[j] > 0)
        for (int d = 0; d < 3; ++d) c[j][d] = sum[j][d] / static_cast<double>(cnt[j]);
  }
  return c;
}

/// k-means centroids (k = J, 50 iterations) of the top 5% |residual| points, or nullopt
/// when there are fewer than J distinct such points.
inline std::optional<std::vector<Vec3>> residual_init_centers(const PointBatch& batch, std::span<const double> residuals,
                                                              std::size_t J, std::uint64_t seed) {
  require(residuals.size() == batch.size(), "residual_init_centers: size mismatch");
  std::vector<std::size_t> idx(batch.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(residuals[a]) > std::abs(residuals[b]); });
  const std::size_t top = std::max<std::size_t>(J, static_cast<std::size_t>(std::ceil(0.05 * batch.size())));
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < std::min(top, idx.size()); ++i) pts.push_back(batch.vec(idx[i]));
  std::vector<Vec3> distinct = pts;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < J) return std::nullopt;
  return kmeans(pts, J, 50, seed);
}

/// Centers uniform in the bounding box of the target domain, shrunk by half.
inline std::vector<Vec3> random_centers(const TargetSpec& t, std::size_t J, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<Vec3> out(J, Vec3{0.0, 0.0, 0.0});
  for (auto& c : out)
    for (int d = 0; d < t.dim; ++d) c[d] = u(rng);
  return out;
}

struct RunOutcome {
  ResultRow row;
  TrainReport report;
  std::vector<std::string> warnings;
};

/// One seed of one experiment: sample, initialize (with restarts), train, evaluate.
inline RunOutcome run_seed(const ExperimentConfig& cfg, const TargetSpec& target, const PointBatch& test,
                           const std::vector<double>& test_truth, std::uint64_t seed) {
  RunOutcome out;
  const auto batch = sample_uniform(target.domain, cfg.n_train, seed_mix(seed, 1));
  const auto values = eval_batch(target, batch);
  TrainConfig tc = cfg.train;
  tc.seed = seed;

  std::optional<std::vector<Vec3>> init_centers;
  if (cfg.model.kind == ModelKind::MultiCenter && cfg.mc_init == McInit::ResidualBased) {
    ModelSpec pre = ModelSpec::direct(target.dim);
    FitObjective obj(batch, values, Weighting::Uniform, false);
    TrainConfig pc = tc;
    pc.iterations = std::max(1, cfg.prefit_iterations);
    pc.schedule = Schedule::Constant;
    const auto rep = train(initialize(pre, seed_mix(seed, 2)), obj, pc);
    auto pred = forward_batch(rep.params, batch);
    for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = values[i] - pred[i];
    init_centers = residual_init_centers(batch, pred, static_cast<std::size_t>(cfg.model.J), seed_mix(seed, 3));
    if (!init_centers) out.warnings.push_back("seed " + std::to_string(seed) + ": too few high-residual points, random centers");
  }

  FitObjective obj(batch, values, cfg.train.weighting, cfg.train.output_normalization);
  bool have = false;
  for (int r = 0; r < cfg.restarts; ++r) {
    ModelParams p0 = initialize(cfg.model, seed_mix(seed, 10 + static_cast<std::uint64_t>(r)));
    if (cfg.model.kind == ModelKind::MultiCenter) {
      auto cs = init_centers ? *init_centers
                             : random_centers(target, static_cast<std::size_t>(cfg.model.J), seed_mix(seed, 20 + static_cast<std::uint64_t>(r)));
      if (r > 0 && init_centers) {
        std::mt19937_64 rng(seed_mix(seed, 30 + static_cast<std::uint64_t>(r)));
        std::normal_distribution<double> n(0.0, 0.02);
        for (auto& c : cs)
          for (int d = 0; d < target.dim; ++d) c[d] += n(rng);
      }
      auto seg = p0.segment("centers");
      for (std::size_t j = 0; j < cs.size(); ++j)
        for (int d = 0; d < target.dim; ++d) seg[j * static_cast<std::size_t>(target.dim) + static_cast<std::size_t>(d)] = cs[j][d];
    }
    auto rep = train(p0, obj, tc);
    const bool better = !have || (out.report.failed && !rep.failed) ||
                        (rep.failed == out.report.failed && rep.final_loss < out.report.final_loss);
    if (better) {
      out.report = std::move(rep);
      have = true;
    }
  }
  out.report.norm_mean = obj.mean();
  out.report.norm_scale = obj.scale();
  const auto pred = predict(out.report.params, test, obj.mean(), obj.scale());
  out.report.rmse = rmse(pred, test_truth);

  ResultRow& row = out.row;
  row.benchmark = cfg.benchmark;
  row.method = cfg.method.empty() ? default_method(cfg.model) : cfg.method;
  row.seed = seed;
  row.rmse = out.report.rmse;
  row.param_count = out.report.param_count;
  row.wall_time_s = out.report.wall_time_s;
  row.dominant = dominant_exponents(out.report.spectrum);
  row.centers = out.report.centers;
  row.dim = target.dim;
  row.failed = out.report.failed || !std::isfinite(row.rmse);
  if (row.failed) out.warnings.push_back("seed " + std::to_string(seed) + ": " + (out.report.failure.empty() ? "non-finite RMSE" : out.report.failure));
  return out;
}

struct Aggregate {
  std::string benchmark;
  std::string method;
  std::size_t n = 0;
  std::size_t n_failed = 0;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over finite rows
  double min = 0.0;
  double max = 0.0;
};

inline Aggregate aggregate(const std::vector<ResultRow>& rows, double ResultRow::*field = &ResultRow::rmse) {
  Aggregate a;
  if (!rows.empty()) {
    a.benchmark = rows.front().benchmark;
    a.method = rows.front().method;
  }
  std::vector<double> v;
  for (const auto& r : rows) {
    if (r.failed || !std::isfinite(r.*field)) {
      ++a.n_failed;
      continue;
    }
    v.push_back(r.*field);
  }
  a.n = v.size();
  if (v.empty()) {
    a.mean = a.std = a.min = a.max = std::nan("");
    return a;
  }
  a.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double q = 0.0;
  for (double x : v) q += (x - a.mean) * (x - a.mean);
  a.std = std::sqrt(q / static_cast<double>(v.size()));
  a.min = *std::min_element(v.begin(), v.end());
  a.max = *std::max_element(v.begin(), v.end());
  return a;
}

struct BenchmarkResult {
  ExperimentConfig config;
  std::vector<ResultRow> rows;
  std::vector<TrainReport> reports;
  std::vector<std::string> warnings;
  Aggregate summary;
};

/// Trains every seed of `cfg` (seeds in parallel up to `threads`) and aggregates.
inline BenchmarkResult run_benchmark(const ExperimentConfig& cfg, int threads = 1) {
  validate(cfg.model);
  validate(cfg.train);
  const TargetSpec target = resolve_target(cfg);
  require(cfg.model.dim == target.dim, "run_benchmark: model and benchmark dimensions differ");
  const auto test = test_grid(target.domain, cfg.n_test);
  const auto truth = eval_batch(target, test);
  std::vector<RunOutcome> outs(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), threads, [&](std::size_t i) { outs[i] = run_seed(cfg, target, test, truth, cfg.seeds[i]); });
  BenchmarkResult res;
  res.config = cfg;
  if (res.config.method.empty()) res.config.method = default_method(cfg.model);
  for (auto& o : outs) {
    res.rows.push_back(o.row);
    res.reports.push_back(std::move(o.report));
    for (auto& w : o.warnings) res.warnings.push_back(cfg.benchmark + "/" + res.config.method + " " + w);
  }
  res.summary = aggregate(res.rows);
  if (res.summary.n_failed > 0)
    res.warnings.push_back(cfg.benchmark + "/" + res.config.method + ": " + std::to_string(res.summary.n_failed) +
                           " seed(s) failed; aggregate over finite rows only");
  return res;
}

struct ProfileBin {
  double r_lo = 0.0;
  double r_hi = 0.0;
  std::size_t count = 0;
  double rmse = 0.0;
};

/// Test points sorted by |x| and split into n_bins equal-count bins; RMSE per bin.
inline std::vector<ProfileBin> radial_error_profile(const ModelParams& params, const TargetSpec& target,
                                                    const PointBatch& test, std::size_t n_bins, double mean = 0.0,
                                                    double scale = 1.0) {
  require(n_bins >= 2, "radial_error_profile: n_bins must be >= 2");
  require(test.size() >= n_bins, "radial_error_profile: fewer points than bins");
  const auto pred = predict(params, test, mean, scale);
  const auto truth = eval_batch(target, test);
  std::vector<double> r(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) r[i] = norm(test.vec(i));
  std::vector<std::size_t> idx(test.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return r[a] < r[b]; });
  std::vector<ProfileBin> out;
  for (std::size_t b = 0; b < n_bins; ++b) {
    const std::size_t lo = b * test.size() / n_bins, hi = (b + 1) * test.size() / n_bins;
    ProfileBin bin;
    bin.r_lo = r[idx[lo]];
    bin.r_hi = r[idx[hi - 1]];
    bin.count = hi - lo;
    double s = 0.0;
    for (std::size_t k = lo; k < hi; ++k) s += (pred[idx[k]] - truth[idx[k]]) * (pred[idx[k]] - truth[idx[k]]);
    bin.rmse = std::sqrt(s / static_cast<double>(bin.count));
    out.push_back(bin);
  }
  return out;
}

/// The benchmark suite run by `bench all`.
inline std::vector<ExperimentConfig> standard_configs(const std::vector<std::uint64_t>& seeds) {
  std::vector<ExperimentConfig> out;
  for (const char* b : {"log_r_2d", "sqrt_r_2d", "inv_r_2d", "multi_power_2d", "coulomb_3d", "smooth_2d"})
    out.push_back(default_experiment(b));
  {
    auto c = default_experiment("crack_tip_2d", ModelKind::Angular2D);
    c.model = ModelSpec::angular2d();
    out.push_back(c);
    c.model = ModelSpec::angular2d(6, 4, 4, true, 0);
    out.push_back(c);
  }
  out.push_back(default_experiment("two_source_2d", ModelKind::MultiCenter));
  out.push_back(default_experiment("three_source_2d", ModelKind::MultiCenter));
  {
    auto c = default_experiment("dipole_3d", ModelKind::Angular3D);
    c.model = ModelSpec::angular3d();
    out.push_back(c);
  }
  for (const char* b : {"log_r_2d", "inv_r_2d", "coulomb_3d"}) out.push_back(default_experiment(b, ModelKind::MsnCoord));
  for (auto& c : out) {
    c.seeds = seeds;
    if (c.method.empty()) c.method = default_method(c.model);
  }
  return out;
}

inline const std::vector<std::string>& ablation_names() {
  static const std::vector<std::string> n{"K_sweep", "range_sweep", "log_primitive_toggle"};
  return n;
}

/// K_sweep: log r with K in {2,4,6,8,10,12,16}. range_sweep: r^-1 with mu_min in {0,-1,-2}.
/// log_primitive_toggle: log r with the log term held at zero versus free.
inline std::vector<ExperimentConfig> ablation_configs(const std::string& which, const std::vector<std::uint64_t>& seeds) {
  std::vector<ExperimentConfig> out;
  if (which == "K_sweep") {
    for (int K : {2, 4, 6, 8, 10, 12, 16}) {
      auto c = default_experiment("log_r_2d");
      c.model.K = K;
      c.method = "rmn_direct_K" + std::to_string(K);
      out.push_back(c);
    }
  } else if (which == "range_sweep") {
    for (int m : {0, -1, -2}) {
      auto c = default_experiment("inv_r_2d");
      c.model.mu_min = m;
      c.method = "rmn_direct_mumin" + std::to_string(m);
      out.push_back(c);
    }
  } else if (which == "log_primitive_toggle") {
    auto c = default_experiment("log_r_2d");
    c.model.log_enabled = false;
    c.method = "rmn_direct_nolog";
    out.push_back(c);
    c.model.log_enabled = true;
    c.method = "rmn_direct";
    out.push_back(c);
  } else {
    std::string msg = "unknown ablation '" + which + "'; valid:";
    for (const auto& n : ablation_names()) msg += " " + n;
    throw ContractViolation(msg);
  }
  for (auto& c : out) c.seeds = seeds;
  return out;
}

inline std::vector<BenchmarkResult> ablation_suite(const std::string& which, const std::vector<std::uint64_t>& seeds,
                                                   int threads = 1) {
  std::vector<BenchmarkResult> out;
  for (const auto& c : ablation_configs(which, seeds)) out.push_back(run_benchmark(c, threads));
  return out;
}

// ---------------------------------------------------------------------------------------
// Poisson point-charge experiment.

enum class PinnMode { Pinn, Supervised };

inline std::string to_string(PinnMode m) { return m == PinnMode::Pinn ? "pinn" : "supervised"; }

struct PinnExperimentConfig {
  std::vector<PinnMode> modes{PinnMode::Pinn, PinnMode::Supervised};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  int K = 6;
  double mu_min = -1.0;
  double mu_max = 2.0;
  PinnSampling sampling;
  int steps = 25000;
  double lr = 1e-2;
  double lr_final = 1e-4;
  double clip_norm = 1.0;
  int resample_every = 2500;
  double warmup_fraction = 0.2;
  LossWeights weights;
  double q = 1.0;
  double eps = 0.08;
  double d_min = 0.15;
  double half_width = 1.0;
  int n_grid = 65;
  double tol = 1e-8;
  std::size_t n_eval = 5000;
  std::size_t n_flux = 1500;
  std::string cache_dir;
  std::vector<Vec3> centers;  // one per seed; random per seed when empty
};

/// The single-core desk scale: 10000 steps on 10000 interior and 4000 boundary points,
/// other settings as the defaults.
inline PinnExperimentConfig desk_pinn_config() {
  PinnExperimentConfig c;
  c.steps = 10000;
  c.sampling.n_interior = 10000;
  c.sampling.n_boundary = 4000;
  return c;
}

inline PinnExperimentConfig parse_pinn_experiment(const Json& j, const std::string& path = "$") {
  PinnExperimentConfig c;
  JsonReader r(j, path);
  if (const Json* m = r.raw("modes")) {
    if (!m->is_array() || m->empty()) throw ConfigError(r.path_of("modes"), "expected a non-empty array");
    c.modes.clear();
    for (std::size_t i = 0; i < m->size(); ++i) {
      const auto& e = (*m)[i];
      if (e == "pinn") c.modes.push_back(PinnMode::Pinn);
      else if (e == "supervised") c.modes.push_back(PinnMode::Supervised);
      else throw ConfigError(r.path_of("modes") + "[" + std::to_string(i) + "]", "expected 'pinn' or 'supervised'");
    }
  }
  r.get("seeds", c.seeds);
  if (c.seeds.empty()) throw ConfigError(r.path_of("seeds"), "must not be empty");
  r.get("K", c.K);
  r.get("mu_min", c.mu_min);
  r.get("mu_max", c.mu_max);
  r.get("n_interior", c.sampling.n_interior);
  r.get("n_boundary", c.sampling.n_boundary);
  r.get("n_sphere", c.sampling.n_sphere);
  r.get("steps", c.steps);
  r.get("lr", c.lr);
  r.get("lr_final", c.lr_final);
  r.get("clip_norm", c.clip_norm);
  r.get("resample_every", c.resample_every);
  r.get("warmup_fraction", c.warmup_fraction);
  if (r.has("weights")) {
    JsonReader w = r.child("weights");
    w.get("pde", c.weights.pde);
    w.get("bc", c.weights.bc);
    w.get("flux", c.weights.flux);
    w.finish();
  }
  r.get("q", c.q);
  r.get("eps", c.eps);
  r.get("d_min", c.d_min);
  r.get("half_width", c.half_width);
  r.get("n_grid", c.n_grid);
  r.get("tol", c.tol);
  r.get("n_eval", c.n_eval);
  r.get("n_flux", c.n_flux);
  r.get("cache_dir", c.cache_dir);
  if (const Json* cs = r.raw("centers")) {
    if (!cs->is_array()) throw ConfigError(r.path_of("centers"), "expected an array of [x, y, z]");
    for (std::size_t i = 0; i < cs->size(); ++i) {
      const auto& e = (*cs)[i];
      if (!e.is_array() || e.size() != 3 || !e[0].is_number() || !e[1].is_number() || !e[2].is_number())
        throw ConfigError(r.path_of("centers") + "[" + std::to_string(i) + "]", "expected [x, y, z]");
      c.centers.push_back({e[0].get<double>(), e[1].get<double>(), e[2].get<double>()});
    }
    if (c.centers.size() != c.seeds.size()) throw ConfigError(r.path_of("centers"), "need one center per seed");
  }
  r.finish();
  const auto bad = [&](const char* key, const std::string& what) { throw ConfigError(r.path_of(key), what); };
  if (c.K < 1) bad("K", "must be >= 1");
  if (!(c.mu_min < c.mu_max)) bad("mu_min", "must be < mu_max");
  if (c.steps < 1) bad("steps", "must be >= 1");
  if (c.sampling.n_interior < 1) bad("n_interior", "must be >= 1");
  if (c.sampling.n_boundary < 6) bad("n_boundary", "must be >= 6");
  if (c.sampling.n_sphere < 2) bad("n_sphere", "must be >= 2");
  if (c.warmup_fraction < 0.0 || c.warmup_fraction > 1.0) bad("warmup_fraction", "must be in [0, 1]");
  if (!(c.eps > 0.0 && c.eps < c.d_min)) bad("eps", "need 0 < eps < d_min");
  if (c.n_grid < 17) bad("n_grid", "must be >= 17");
  if (c.n_flux < 100) bad("n_flux", "must be >= 100");
  return c;
}

inline Json to_json(const PinnExperimentConfig& c) {
  Json modes = Json::array();
  for (auto m : c.modes) modes.push_back(to_string(m));
  Json j = {{"modes", modes},
            {"seeds", c.seeds},
            {"K", c.K},
            {"mu_min", c.mu_min},
            {"mu_max", c.mu_max},
            {"n_interior", c.sampling.n_interior},
            {"n_boundary", c.sampling.n_boundary},
            {"n_sphere", c.sampling.n_sphere},
            {"steps", c.steps},
            {"lr", c.lr},
            {"lr_final", c.lr_final},
            {"clip_norm", c.clip_norm},
            {"resample_every", c.resample_every},
            {"warmup_fraction", c.warmup_fraction},
            {"weights", {{"pde", c.weights.pde}, {"bc", c.weights.bc}, {"flux", c.weights.flux}}},
            {"q", c.q},
            {"eps", c.eps},
            {"d_min", c.d_min},
            {"half_width", c.half_width},
            {"n_grid", c.n_grid},
            {"tol", c.tol},
            {"n_eval", c.n_eval},
            {"n_flux", c.n_flux},
            {"cache_dir", c.cache_dir}};
  if (!c.centers.empty()) {
    Json a = Json::array();
    for (const auto& v : c.centers) a.push_back({v[0], v[1], v[2]});
    j["centers"] = a;
  }
  return j;
}

struct PinnExperimentResult {
  std::vector<ResultRow> rows;  // seed-major, modes in config order
  std::vector<TrainReport> reports;
  std::vector<std::string> warnings;
};

inline ChargeConfig charge_config_for_seed(const PinnExperimentConfig& c, std::size_t seed_index) {
  ChargeConfig cc;
  cc.eps = c.eps;
  cc.d_min = c.d_min;
  cc.half_width = c.half_width;
  const Vec3 center = c.centers.empty()
                          ? random_charge_center(c.half_width, c.d_min, seed_mix(c.seeds[seed_index], 5))
                          : c.centers[seed_index];
  cc.charges.push_back({center, c.q});
  return cc;
}

inline PinnExperimentResult run_pinn_experiment(const PinnExperimentConfig& c, int threads = 1) {
  const std::size_t nm = c.modes.size();
  std::vector<RunOutcome> outs(c.seeds.size() * nm);
  parallel_for(c.seeds.size(), threads, [&](std::size_t si) {
    const std::uint64_t seed = c.seeds[si];
    const ChargeConfig cc = charge_config_for_seed(c, si);
    validate(cc);
    const auto field = cached_ground_truth(cc, c.n_grid, c.tol, c.cache_dir);
    const auto eval_pts = test_grid(punctured_cube(cc), c.n_eval);
    const auto truth = eval_ground_truth(field, eval_pts);
    const ModelSpec spec = pinn_model_spec(c.K, c.mu_min, c.mu_max);
    TrainConfig tc;
    tc.lr = c.lr;
    tc.lr_final = c.lr_final;
    tc.schedule = Schedule::Cosine;
    tc.iterations = c.steps;
    tc.clip_norm = c.clip_norm;
    tc.resample_every = c.resample_every;
    tc.seed = seed;
    for (std::size_t mi = 0; mi < nm; ++mi) {
      const ModelParams p0 = pinn_initial_params(spec, cc.charges[0].center, seed_mix(seed, 6));
      RunOutcome o;
      if (c.modes[mi] == PinnMode::Pinn) {
        const auto warm = static_cast<std::int64_t>(std::llround(c.warmup_fraction * c.steps));
        PinnObjective obj(cc, c.sampling, c.weights, warm);
        o.report = train(p0, obj, tc);
      } else {
        SupervisedPoissonObjective obj(field, c.sampling.n_interior);
        o.report = train(p0, obj, tc);
      }
      o.report.rmse = rmse(forward_batch(o.report.params, eval_pts), truth);
      ResultRow& row = o.row;
      row.benchmark = "poisson3d";
      row.method = "rmn_mc_" + to_string(c.modes[mi]);
      row.seed = seed;
      row.rmse = o.report.rmse;
      row.rel_l2 = rel_l2(o.report.params, field, eval_pts);
      row.flux_err = flux_error(o.report.params, cc, c.n_flux)[0];
      row.param_count = o.report.trainable_count;
      row.wall_time_s = o.report.wall_time_s;
      row.dominant = dominant_exponents(o.report.spectrum);
      row.centers = o.report.centers;
      row.dim = 3;
      row.failed = o.report.failed;
      if (o.report.failed) o.warnings.push_back("seed " + std::to_string(seed) + " " + row.method + ": " + o.report.failure);
      outs[si * nm + mi] = std::move(o);
    }
  });
  PinnExperimentResult res;
  for (auto& o : outs) {
    res.rows.push_back(o.row);
    res.reports.push_back(std::move(o.report));
    for (auto& w : o.warnings) res.warnings.push_back(w);
  }
  return res;
}

// ---------------------------------------------------------------------------------------
// CSV emission and reading (RFC 4180).

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::string fmt_double(double v, int prec = 10) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", prec, v);
  return buf;
}

/// "mu:coeff" pairs separated by spaces; "group|mu:coeff" when the model has several ladders.
inline std::string format_spectrum(const std::vector<SpectrumEntry>& e) {
  bool multi = false;
  for (const auto& x : e) multi = multi || x.group != 0;
  std::string s;
  for (const auto& x : e) {
    if (!s.empty()) s += ' ';
    if (multi) s += std::to_string(x.group) + "|";
    s += fmt_double(x.mu, 6) + ":" + fmt_double(x.coeff, 6);
  }
  return s;
}

inline std::string format_centers(const std::vector<Vec3>& cs, int dim) {
  std::string s;
  for (const auto& c : cs) {
    if (!s.empty()) s += ';';
    for (int d = 0; d < dim; ++d) s += (d ? " " : "") + fmt_double(c[static_cast<std::size_t>(d)], 8);
  }
  return s;
}

/// Column order of every results CSV. Wall time is kept out so reruns compare bitwise.
inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> c{"benchmark", "method",   "seed",      "rmse",   "rel_l2",
                                          "flux_err",  "param_count", "dominant_exponents", "centers", "status"};
  return c;
}

inline std::string csv_line(const ResultRow& r) {
  std::vector<std::string> f{r.benchmark,
                             r.method,
                             std::to_string(r.seed),
                             fmt_double(r.rmse),
                             r.rel_l2 ? fmt_double(*r.rel_l2) : "",
                             r.flux_err ? fmt_double(*r.flux_err) : "",
                             std::to_string(r.param_count),
                             format_spectrum(r.dominant),
                             format_centers(r.centers, r.dim),
                             r.failed ? "failed" : "ok"};
  std::string s;
  for (std::size_t i = 0; i < f.size(); ++i) s += (i ? "," : "") + csv_escape(f[i]);
  return s;
}

inline void write_rows_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "write_rows_csv: cannot open " + path.string());
  for (std::size_t i = 0; i < csv_columns().size(); ++i) out << (i ? "," : "") << csv_columns()[i];
  out << "\r\n";
  for (const auto& r : rows) out << csv_line(r) << "\r\n";
}

/// Parses RFC 4180 text into records of fields.
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> recs;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    if (ch == '"') {
      quoted = true;
      any = true;
    } else if (ch == ',') {
      rec.push_back(field);
      field.clear();
      any = true;
    } else if (ch == '\r' || ch == '\n') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        rec.push_back(field);
        recs.push_back(rec);
      }
      rec.clear();
      field.clear();
      any = false;
    } else {
      field += ch;
      any = true;
    }
  }
  if (any || !field.empty()) {
    rec.push_back(field);
    recs.push_back(rec);
  }
  return recs;
}

/// Rows of a results CSV; files with a different header yield nothing.
inline std::vector<ResultRow> read_rows_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "read_rows_csv: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const auto recs = parse_csv(ss.str());
  std::vector<ResultRow> rows;
  if (recs.empty() || recs[0] != csv_columns()) return rows;
  const auto num = [](const std::string& s) { return s.empty() ? std::nan("") : std::stod(s); };
  for (std::size_t i = 1; i < recs.size(); ++i) {
    const auto& f = recs[i];
    require(f.size() == csv_columns().size(), "read_rows_csv: bad field count in " + path.string());
    ResultRow r;
    r.benchmark = f[0];
    r.method = f[1];
    r.seed = std::stoull(f[2]);
    r.rmse = num(f[3]);
    if (!f[4].empty()) r.rel_l2 = num(f[4]);
    if (!f[5].empty()) r.flux_err = num(f[5]);
    r.param_count = std::stoull(f[6]);
    r.failed = f[9] != "ok";
    rows.push_back(r);
  }
  return rows;
}

/// Published reference means keyed by "benchmark/method" (not reproduced here).
inline std::map<std::string, double> load_baselines(const std::filesystem::path& path) {
  std::map<std::string, double> out;
  if (path.empty() || !std::filesystem::exists(path)) return out;
  const Json j = read_json_file(path.string());
  if (!j.contains("rmse")) return out;
  for (const auto& [bench, methods] : j.at("rmse").items())
    for (const auto& [m, v] : methods.items())
      if (v.is_number()) out[bench + "/" + m] = v.get<double>();
  return out;
}

/// Mean +- std table over every results CSV in `dir`, grouped by (benchmark, method).
inline std::string summary_table(const std::filesystem::path& dir, const std::filesystem::path& baselines = {}) {
  std::map<std::pair<std::string, std::string>, std::vector<ResultRow>> groups;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files)
    for (auto& r : read_rows_csv(f)) groups[{r.benchmark, r.method}].push_back(std::move(r));
  const auto base = load_baselines(baselines);
  const auto paper = [&](const std::string& bench, const std::string& method) {
    const auto it = base.find(bench + "/" + method);
    return it == base.end() ? std::string("-") : fmt_double(it->second, 2);
  };
  std::ostringstream out;
  char line[320];
  std::snprintf(line, sizeof line, "%-18s %-18s %5s %-22s %6s | %-9s %-9s %-9s %-9s\n", "benchmark", "method", "seeds",
                "RMSE mean +- std", "params", "reported", "MLP", "SIREN", "RBF");
  out << line;
  for (const auto& [key, rows] : groups) {
    const auto a = aggregate(rows);
    std::snprintf(line, sizeof line, "%-18s %-18s %5zu %9s +- %-9s %6zu | %-9s %-9s %-9s %-9s\n", key.first.c_str(),
                  key.second.c_str(), a.n, fmt_double(a.mean, 2).c_str(), fmt_double(a.std, 2).c_str(),
                  rows.front().param_count, paper(key.first, key.second).c_str(), paper(key.first, "mlp").c_str(),
                  paper(key.first, "siren").c_str(), paper(key.first, "rbf").c_str());
    out << line;
    if (a.n_failed) out << "    (" << a.n_failed << " failed seed(s) excluded)\n";
    if (rows.front().rel_l2) {
      std::vector<ResultRow> tmp = rows;
      for (auto& r : tmp) r.rmse = r.rel_l2.value_or(std::nan(""));
      const auto b = aggregate(tmp);
      for (auto& r : tmp) r.rmse = r.flux_err.value_or(std::nan(""));
      const auto fl = aggregate(tmp);
      std::snprintf(line, sizeof line, "    rel L2 %s +- %s   flux err %s +- %s\n", fmt_double(b.mean, 2).c_str(),
                    fmt_double(b.std, 2).c_str(), fmt_double(fl.mean, 2).c_str(), fmt_double(fl.std, 2).c_str());
      out << line;
    }
  }
  if (!base.empty()) out << "reported columns: paper-reported, not reproduced\n";
  return out.str();
}

/// Writes <dir>/<benchmark>__<method>.csv and one JSON report per seed.
inline void emit_benchmark(const BenchmarkResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "reports");
  const std::string stem = r.config.benchmark + "__" + r.config.method;
  write_rows_csv(r.rows, dir / (stem + ".csv"));
  for (std::size_t i = 0; i < r.reports.size(); ++i) {
    Json j = to_json(r.reports[i]);
    j["benchmark"] = r.config.benchmark;
    j["method"] = r.config.method;
    j["config"] = to_json(r.config);
    write_json_file(j, (dir / "reports" / (stem + "__seed" + std::to_string(r.rows[i].seed) + ".json")).string());
  }
}

inline Json summary_json(const std::vector<BenchmarkResult>& results) {
  Json a = Json::array();
  for (const auto& r : results) {
    double wall = 0.0;
    for (const auto& row : r.rows) wall += row.wall_time_s;
    a.push_back({{"benchmark", r.config.benchmark},
                 {"method", r.config.method},
                 {"seeds", r.summary.n},
                 {"failed", r.summary.n_failed},
                 {"rmse_mean", r.summary.mean},
                 {"rmse_std", r.summary.std},
                 {"rmse_min", r.summary.min},
                 {"rmse_max", r.summary.max},
                 {"param_count", r.rows.empty() ? 0 : r.rows.front().param_count},
                 {"wall_time_s", wall}});
  }
  return a;
}

// ---------------------------------------------------------------------------------------
// Finite-difference gradient suite.

struct GradCheckLine {
  std::string model;
  std::string check;  // mse, pinn, spatial_grad, laplacian
  double max_rel_err = 0.0;
  double tol = 0.0;
  std::string worst;
  bool passed = true;
};

inline std::vector<std::pair<std::string, ModelSpec>> grad_suite_specs() {
  return {{"direct_2d", ModelSpec::direct(2)},
          {"direct_3d", ModelSpec::direct(3)},
          {"angular_2d", ModelSpec::angular2d()},
          {"angular_2d_half", ModelSpec::angular2d(6, 4, 4, true, 1)},
          {"angular_3d", ModelSpec::angular3d()},
          {"mc_2d", ModelSpec::multicenter(2, 2)},
          {"mc_3d", ModelSpec::multicenter(3, 2)},
          {"msn_2d", ModelSpec::msn_coord(2)},
          {"msn_3d", ModelSpec::msn_coord(3)}};
}

/// Random parameters for gradient checks: every entry N(0, 0.4^2), centers within 0.05 of
/// the origin so that sample points with |x| >= 0.2 stay clear of them.
inline ModelParams random_params(const ModelSpec& spec, std::uint64_t seed) {
  ModelParams p(spec);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.4);
  for (auto& v : p.data()) v = n(rng);
  if (p.layout().has("centers"))
    for (auto& v : p.segment("centers")) v = std::clamp(0.1 * v, -0.05, 0.05);
  return p;
}

/// n points of `dom`; for the separable baseline also |x_i| >= 0.05 on every axis, since its
/// singular set is the coordinate hyperplanes rather than the origin.
inline PointBatch grad_check_points(const ModelSpec& spec, const Domain& dom, std::size_t n, std::uint64_t seed) {
  if (spec.kind != ModelKind::MsnCoord) return sample_uniform(dom, n, seed);
  PointBatch out;
  out.dim = spec.dim;
  for (std::uint64_t round = 0; out.size() < n; ++round) {
    const auto b = sample_uniform(dom, 4 * n, seed_mix(seed, round));
    for (std::size_t i = 0; i < b.size() && out.size() < n; ++i) {
      const auto x = b.point(i);
      if (std::all_of(x.begin(), x.end(), [](double v) { return std::abs(v) >= 0.05; }))
        out.coords.insert(out.coords.end(), x.begin(), x.end());
    }
  }
  return out;
}

/// Analytic versus central-difference gradients for every model kind, `instances` random
/// parameter draws each: grad_mse (tol 1e-4), grad_pinn (1e-3), spatial gradient (1e-4) and
/// Laplacian (1e-3) at points with |x| >= 0.05.
inline std::vector<GradCheckLine> gradient_oracle_suite(int instances = 20, std::uint64_t seed = 0) {
  std::vector<GradCheckLine> out;
  for (const auto& [name, spec] : grad_suite_specs()) {
    GradCheckLine mse{name, "mse", 0.0, 1e-4, "", true}, pinn{name, "pinn", 0.0, 1e-3, "", true};
    GradCheckLine sg{name, "spatial_grad", 0.0, 1e-4, "", true}, lp{name, "laplacian", 0.0, 1e-3, "", true};
    const auto note = [](GradCheckLine& l, double err, const std::string& where) {
      if (err > l.max_rel_err || l.worst.empty()) {
        l.max_rel_err = std::max(l.max_rel_err, err);
        if (err >= l.max_rel_err) l.worst = where;
      }
      l.passed = l.passed && err <= l.tol;
    };
    for (int inst = 0; inst < instances; ++inst) {
      const std::uint64_t s = seed_mix(seed, static_cast<std::uint64_t>(inst) * 31 + spec.dim);
      const ModelParams p = random_params(spec, s);
      const Domain dom = spec.dim == 2 ? Domain{Annulus2D{0.2, 1.0}} : Domain{ShellBall3D{0.2, 1.0}};
      const auto batch = grad_check_points(spec, dom, 16, seed_mix(s, 1));
      std::vector<double> tgt(batch.size());
      {
        std::mt19937_64 rng(seed_mix(s, 2));
        std::normal_distribution<double> n(0.0, 1.0);
        for (auto& t : tgt) t = n(rng);
      }
      const auto with = [&](std::span<const double> q) {
        ModelParams pp = p;
        std::copy(q.begin(), q.end(), pp.data().begin());
        return pp;
      };
      const auto tag = " (instance " + std::to_string(inst) + ")";
      const auto gm = grad_mse(p, batch, tgt);
      const auto rm = fd_check([&](std::span<const double> q) { return mse_loss(with(q), batch, tgt); }, p.values(),
                               gm.grad.values(), 1e-6, mse.tol, &p.layout());
      note(mse, rm.max_rel_err, rm.worst_name + tag);

      const PointBatch bnd = spec.dim == 2 ? sample_uniform(Domain{Annulus2D{0.9, 1.0}}, 12, seed_mix(s, 3))
                                           : boundary_sample_cube(1.0, 12, seed_mix(s, 3));
      std::vector<SphereSamples> sph;
      if (spec.dim == 3) {
        auto ss = fibonacci_sphere({0.1, 0.0, 0.0}, 0.12, 24);
        ss.charge = 1.0;
        sph.push_back(ss);
      }
      const auto gp = grad_pinn(p, batch, bnd, sph, LossWeights{});
      const auto rp = fd_check([&](std::span<const double> q) { return pinn_loss(with(q), batch, bnd, sph, LossWeights{}).total; },
                               p.values(), gp.grad.values(), 1e-6, pinn.tol, &p.layout());
      note(pinn, rp.max_rel_err, rp.worst_name + tag);

      // spatial derivatives at radii down to 0.05
      const auto pts = grad_check_points(
          spec, spec.dim == 2 ? Domain{Annulus2D{0.05, 1.0}} : Domain{ShellBall3D{0.05, 1.0}}, 4, seed_mix(s, 4));
      for (std::size_t i = 0; i < pts.size(); ++i) {
        auto x = pts.point(i);
        std::vector<double> xv(x.begin(), x.end());
        const auto g = spatial_gradient(p, xv);
        const double lap = laplacian(p, xv);
        double r = norm(pts.vec(i));
        if (spec.kind == ModelKind::MsnCoord)
          for (double v : x) r = std::min(r, std::abs(v));
        const double h = 1e-5 * r;
        const double f0 = forward(p, xv);
        double lfd = 0.0, gscale = 0.0, gerr = 0.0;
        for (int d = 0; d < spec.dim; ++d) gscale = std::max(gscale, std::abs(g[static_cast<std::size_t>(d)]));
        for (int d = 0; d < spec.dim; ++d) {
          auto a = xv, b = xv;
          a[static_cast<std::size_t>(d)] += h;
          b[static_cast<std::size_t>(d)] -= h;
          const double fa = forward(p, a), fb = forward(p, b);
          gerr = std::max(gerr, std::abs((fa - fb) / (2.0 * h) - g[static_cast<std::size_t>(d)]) / std::max(gscale, 1e-12));
        }
        // second differences need a larger step to stay clear of rounding
        const double h2 = 1e-3 * r;
        for (int d = 0; d < spec.dim; ++d) {
          auto a = xv, b = xv;
          a[static_cast<std::size_t>(d)] += h2;
          b[static_cast<std::size_t>(d)] -= h2;
          lfd += (forward(p, a) - 2.0 * f0 + forward(p, b)) / (h2 * h2);
        }
        const double lscale = std::max({std::abs(lap), std::abs(lfd), gscale / r, 1e-12});
        const std::string where = "r=" + fmt_double(r, 3) + tag;
        note(sg, gerr, where);
        note(lp, std::abs(lap - lfd) / lscale, where);
      }
    }
    out.push_back(mse);
    out.push_back(pinn);
    out.push_back(sg);
    out.push_back(lp);
  }
  return out;
}

}  // namespace rmn

#endif  // RMN_HARNESS_HPP
