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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "rmn/harness.hpp"

namespace rmn {
namespace {

namespace fs = std::filesystem;

std::string error_text(const std::function<void()>& f, std::string* path = nullptr) {
  try {
    f();
  } catch (const ConfigError& e) {
    if (path) *path = e.path;
    return e.what();
  }
  return "<no error>";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

ExperimentConfig quick(const std::string& bench, ModelKind kind = ModelKind::Direct) {
  auto c = default_experiment(bench, kind);
  c.n_train = 400;
  c.n_test = 300;
  c.train.iterations = 60;
  c.prefit_iterations = 30;
  c.seeds = {0, 1, 2};
  c.method = default_method(c.model);
  return c;
}

TEST(SeedMix, DistinctStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 20; ++s)
    for (std::uint64_t k = 0; k < 40; ++k) seen.insert(seed_mix(s, k));
  EXPECT_EQ(seen.size(), 800u);
  EXPECT_EQ(seed_mix(3, 1), seed_mix(3, 1));
}

TEST(ParallelFor, SlotResultsIndependentOfThreads) {
  for (int t : {1, 2, 4}) {
    std::vector<double> out(37);
    parallel_for(out.size(), t, [&](std::size_t i) { out[i] = std::sqrt(static_cast<double>(i)); });
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], std::sqrt(static_cast<double>(i)));
  }
  EXPECT_THROW(parallel_for(5, 2,
                            [](std::size_t i) {
                              if (i == 3) throw ContractViolation("boom");
                            }),
               ContractViolation);
}

TEST(ExperimentConfig, DefaultsPerBenchmark) {
  const auto d2 = default_experiment("log_r_2d");
  EXPECT_EQ(d2.train.lr, 2e-3);
  EXPECT_EQ(d2.train.iterations, 5000);
  EXPECT_EQ(d2.n_train, 10000u);
  EXPECT_EQ(d2.n_test, 5000u);
  EXPECT_EQ(d2.seeds.size(), 5u);
  EXPECT_EQ(d2.train.clip_norm, 0.0);
  EXPECT_FALSE(d2.train.output_normalization);
  const auto d3 = default_experiment("coulomb_3d");
  EXPECT_EQ(d3.train.lr, 1e-3);
  EXPECT_EQ(d3.train.iterations, 8000);
  const auto mc = default_experiment("three_source_2d", ModelKind::MultiCenter);
  EXPECT_EQ(mc.model.J, 3);
  EXPECT_EQ(mc.model.K, 9);
  EXPECT_EQ(mc.mc_init, McInit::ResidualBased);
}

TEST(ExperimentConfig, ParseOverridesAndRoundTrip) {
  const Json j = Json::parse(R"({
    "benchmark": "two_source_2d_offset",
    "model": {"kind": "multicenter", "K": 5},
    "train": {"lr": 0.01, "schedule": "cosine", "iterations": 300, "clip_norm": 1.0},
    "seeds": [7, 8],
    "mc_init": "random",
    "restarts": 3,
    "target_centers": [[-0.25, -0.2], [0.3, -0.1]]
  })");
  const auto c = parse_experiment(j);
  EXPECT_EQ(c.model.kind, ModelKind::MultiCenter);
  EXPECT_EQ(c.model.K, 5);
  EXPECT_EQ(c.model.J, 2);
  EXPECT_EQ(c.train.schedule, Schedule::Cosine);
  EXPECT_EQ(c.train.iterations, 300);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{7, 8}));
  EXPECT_EQ(c.mc_init, McInit::Random);
  EXPECT_EQ(c.restarts, 3);
  EXPECT_EQ(c.method, "rmn_mc");
  ASSERT_EQ(c.target_centers.size(), 2u);
  EXPECT_EQ(resolve_target(c).sources[0].center, (Vec3{-0.25, -0.2, 0.0}));
  const auto back = parse_experiment(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(ExperimentConfig, ErrorsNamePaths) {
  std::string path;
  const auto msg = error_text([] { parse_experiment(Json{{"benchmark", "log_r_3d"}}); }, &path);
  EXPECT_EQ(path, "$.benchmark");
  EXPECT_NE(msg.find("log_r_2d"), std::string::npos);
  EXPECT_NE(msg.find("coulomb_3d"), std::string::npos);

  const std::vector<std::pair<std::string, std::string>> cases{
      {R"({})", "$.benchmark"},
      {R"({"benchmark": "log_r_2d", "train": {"lr": "fast"}})", "$.train.lr"},
      {R"({"benchmark": "log_r_2d", "train": {"learning_rate": 0.1}})", "$.train.learning_rate"},
      {R"({"benchmark": "log_r_2d", "train": {"schedule": "step"}})", "$.train.schedule"},
      {R"({"benchmark": "log_r_2d", "train": {"iterations": 0}})", "$.train"},
      {R"({"benchmark": "log_r_2d", "model": {"kind": "mlp"}})", "$.model.kind"},
      {R"({"benchmark": "log_r_2d", "model": {"dim": 3}})", "$.model.dim"},
      {R"({"benchmark": "log_r_2d", "model": {"K": 0}})", "$.model"},
      {R"({"benchmark": "log_r_2d", "seeds": []})", "$.seeds"},
      {R"({"benchmark": "log_r_2d", "seeds": [0, -1]})", "$.seeds[1]"},
      {R"({"benchmark": "log_r_2d", "restarts": 0})", "$.restarts"},
      {R"({"benchmark": "log_r_2d", "mc_init": "kmeans"})", "$.mc_init"},
      {R"({"benchmark": "log_r_2d", "target_centers": [[0, 0]]})", "$.target_centers"},
      {R"({"benchmark": "two_source_2d", "target_centers": [[0, 0], [1]]})", "$.target_centers[1]"},
      {R"({"benchmark": "log_r_2d", "colour": "red"})", "$.colour"}};
  for (const auto& [text, want] : cases) {
    path.clear();
    error_text([&] { parse_experiment(Json::parse(text)); }, &path);
    EXPECT_EQ(path, want) << text;
  }
}

TEST(KMeans, SeparatedClustersAndDeterminism) {
  std::vector<Vec3> pts;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 0.02);
  for (int i = 0; i < 200; ++i) pts.push_back({-0.5 + n(rng), 0.1 + n(rng), 0.0});
  for (int i = 0; i < 100; ++i) pts.push_back({0.4 + n(rng), -0.3 + n(rng), 0.0});
  auto c = kmeans(pts, 2, 50, 9);
  std::sort(c.begin(), c.end());
  EXPECT_NEAR(c[0][0], -0.5, 0.01);
  EXPECT_NEAR(c[0][1], 0.1, 0.01);
  EXPECT_NEAR(c[1][0], 0.4, 0.01);
  EXPECT_NEAR(c[1][1], -0.3, 0.01);
  EXPECT_EQ(kmeans(pts, 2, 50, 9), kmeans(pts, 2, 50, 9));
}

double dist2(const Vec3& a, const Vec3& b) {
  double s = 0.0;
  for (int d = 0; d < 3; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return s;
}

TEST(KMeans, CentroidsAreLloydFixedPoints) {
  const std::vector<Vec3> pts{{-1.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 0.0, 0.0},
                              {0.0, 1.0, 0.0}, {0.0, -1.0, 0.0}};
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto c = kmeans(pts, 3, 50, s);
    std::vector<Vec3> sum(3, Vec3{0.0, 0.0, 0.0});
    std::vector<int> cnt(3, 0);
    for (const auto& p : pts) {
      std::size_t a = 0;
      for (std::size_t j = 1; j < 3; ++j)
        if (dist2(p, c[j]) < dist2(p, c[a])) a = j;
      for (int d = 0; d < 3; ++d) sum[a][d] += p[d];
      ++cnt[a];
    }
    for (std::size_t j = 0; j < 3; ++j) {
      if (cnt[j] == 0) continue;
      for (int d = 0; d < 3; ++d) EXPECT_NEAR(c[j][d], sum[j][d] / cnt[j], 1e-12) << s;
    }
  }
  EXPECT_THROW(kmeans(pts, 8, 5, 0), ContractViolation);
}

TEST(ResidualInit, EqualResidualsKeepLowestPointIndices) {
  PointBatch b(2);
  for (int i = 0; i < 100; ++i) b.push(Vec3{0.01 * i, 0.0, 0.0});
  const std::vector<double> r(100, 2.0);
  // top 5% are points 0..4
  const auto c = residual_init_centers(b, r, 1, 0);
  ASSERT_TRUE(c.has_value());
  EXPECT_NEAR((*c)[0][0], 0.02, 1e-15);
  EXPECT_EQ(residual_init_centers(b, r, 1, 7), c);
}

TEST(ResidualInit, FallsBackWhenTooFewDistinctPoints) {
  PointBatch b(2);
  for (int i = 0; i < 40; ++i) b.push(Vec3{0.2, 0.2, 0.0});
  const std::vector<double> r(40, 1.0);
  EXPECT_FALSE(residual_init_centers(b, r, 2, 0).has_value());
  EXPECT_TRUE(residual_init_centers(b, r, 1, 0).has_value());
}

std::vector<Vec3> prefit_centroids(const TargetSpec& t, std::size_t J, std::uint64_t seed) {
  const auto batch = sample_uniform(t.domain, 10000, seed_mix(seed, 1));
  const auto values = eval_batch(t, batch);
  FitObjective obj(batch, values, Weighting::Uniform, false);
  TrainConfig tc;
  tc.iterations = 1000;
  const auto rep = train(initialize(ModelSpec::direct(2), seed_mix(seed, 2)), obj, tc);
  auto res = forward_batch(rep.params, batch);
  for (std::size_t i = 0; i < res.size(); ++i) res[i] = values[i] - res[i];
  return *residual_init_centers(batch, res, J, seed_mix(seed, 3));
}

TEST(ResidualInit, TwoSourceFindsDominantSource) {
  // the weaker source is not isolated by the top-5% set; only the strong one is checked
  const auto t = *find_target("two_source_2d");
  for (std::uint64_t seed : {0, 1, 2}) {
    const auto c = prefit_centroids(t, 2, seed);
    double best = 1e9;
    for (const auto& v : c) best = std::min(best, std::hypot(v[0] - t.sources[0].center[0], v[1] - t.sources[0].center[1]));
    EXPECT_LT(best, 0.1) << seed;
  }
}

TEST(ResidualInit, SingleSourceCentroid) {
  const auto t = detail::multi_source_target("one_source", {{{0.3, -0.2, 0.0}, 1.0}}, "");
  const auto c = prefit_centroids(t, 1, 1);
  EXPECT_NEAR(c[0][0], 0.3, 0.1);
  EXPECT_NEAR(c[0][1], -0.2, 0.1);
}

TEST(RunBenchmark, ParamCountsMatchAnalyticCounts) {
  const std::map<std::string, std::size_t> expected{{"rmn_direct", 27},    {"rmn_angular", 51}, {"rmn_angular_half", 59},
                                                    {"rmn_mc", 43},        {"msn_coord", 0}};
  for (const auto& c : standard_configs({0})) {
    auto q = c;
    q.n_train = 200;
    q.n_test = 100;
    q.train.iterations = 2;
    q.prefit_iterations = 2;
    const auto res = run_benchmark(q);
    ASSERT_EQ(res.rows.size(), 1u);
    EXPECT_EQ(res.rows[0].param_count, parameter_count(q.model)) << c.benchmark << "/" << c.method;
    if (c.method == "msn_coord") {
      EXPECT_EQ(res.rows[0].param_count, c.model.dim == 2 ? 49u : 73u);
    } else if (c.benchmark == "three_source_2d") {
      EXPECT_EQ(res.rows[0].param_count, 64u);
    } else if (c.benchmark == "dipole_3d") {
      EXPECT_EQ(res.rows[0].param_count, 51u);
    } else {
      EXPECT_EQ(res.rows[0].param_count, expected.at(c.method)) << c.benchmark;
    }
  }
}

TEST(RunBenchmark, DeterministicCsvAcrossRunsAndThreads) {
  const auto d = fresh_dir("rmn_det_test");
  for (const char* b : {"log_r_2d", "two_source_2d"}) {
    const auto c = quick(b, std::string(b) == "log_r_2d" ? ModelKind::Direct : ModelKind::MultiCenter);
    write_rows_csv(run_benchmark(c, 1).rows, d / "a.csv");
    write_rows_csv(run_benchmark(c, 1).rows, d / "b.csv");
    write_rows_csv(run_benchmark(c, 3).rows, d / "c.csv");
    EXPECT_EQ(slurp(d / "a.csv"), slurp(d / "b.csv")) << b;
    EXPECT_EQ(slurp(d / "a.csv"), slurp(d / "c.csv")) << b;
  }
  fs::remove_all(d);
}

TEST(RunBenchmark, MultiCenterReportsCenters) {
  const auto res = run_benchmark(quick("two_source_2d", ModelKind::MultiCenter));
  for (const auto& r : res.rows) {
    EXPECT_EQ(r.centers.size(), 2u);
    EXPECT_EQ(r.method, "rmn_mc");
  }
}

TEST(Aggregate, PopulationStdAndFailedRows) {
  std::vector<ResultRow> rows(4);
  rows[0].rmse = 1.0;
  rows[1].rmse = 3.0;
  rows[2].rmse = std::nan("");
  rows[3].rmse = 2.0;
  rows[3].failed = true;
  const auto a = aggregate(rows);
  EXPECT_EQ(a.n, 2u);
  EXPECT_EQ(a.n_failed, 2u);
  EXPECT_DOUBLE_EQ(a.mean, 2.0);
  EXPECT_DOUBLE_EQ(a.std, 1.0);
  EXPECT_EQ(a.min, 1.0);
  EXPECT_EQ(a.max, 3.0);
  EXPECT_TRUE(std::isnan(aggregate({}).mean));
}

TEST(Csv, QuotingRoundTrip) {
  EXPECT_EQ(csv_escape("plain"), "plain");
  EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
  const std::vector<std::string> fields{"x", "a,b", "q\"q", "line\r\nbreak", ""};
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) line += (i ? "," : "") + csv_escape(fields[i]);
  const auto recs = parse_csv(line + "\r\n" + line + "\r\n");
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0], fields);
  EXPECT_EQ(recs[1], fields);
}

TEST(Csv, RowsRoundTripAndReportAggregation) {
  const auto d = fresh_dir("rmn_report_test");
  const auto res = run_benchmark(quick("sqrt_r_2d"));
  emit_benchmark(res, d);
  EXPECT_TRUE(fs::exists(d / "sqrt_r_2d__rmn_direct.csv"));
  EXPECT_TRUE(fs::exists(d / "reports" / "sqrt_r_2d__rmn_direct__seed2.json"));
  const auto rows = read_rows_csv(d / "sqrt_r_2d__rmn_direct.csv");
  ASSERT_EQ(rows.size(), res.rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].seed, res.rows[i].seed);
    EXPECT_NEAR(rows[i].rmse, res.rows[i].rmse, 1e-10 * res.rows[i].rmse);
    EXPECT_EQ(rows[i].param_count, 27u);
  }
  const auto table = summary_table(d, fs::path(RMN_DATA_DIR) / "paper_baselines.json");
  const auto a = aggregate(rows);
  EXPECT_NE(table.find(fmt_double(a.mean, 2) + " +- " + fmt_double(a.std, 2)), std::string::npos) << table;
  EXPECT_NE(table.find("2.66e-03"), std::string::npos) << table;
  EXPECT_NE(table.find("paper-reported, not reproduced"), std::string::npos);
  const Json s = summary_json({res});
  EXPECT_EQ(s[0]["seeds"], 3);
  EXPECT_DOUBLE_EQ(s[0]["rmse_mean"].get<double>(), res.summary.mean);
  fs::remove_all(d);
}

TEST(Csv, WallTimeIsNotAColumn) {
  for (const auto& c : csv_columns()) EXPECT_EQ(c.find("time"), std::string::npos);
  ResultRow r;
  r.benchmark = "b";
  r.method = "m";
  r.rmse = 0.5;
  r.dim = 2;
  r.centers = {{0.1, -0.2, 0.0}, {0.3, 0.0, 0.0}};
  r.dominant = {{0, -1.0, 0.5}};
  EXPECT_EQ(csv_line(r), "b,m,0,5.0000000000e-01,,,0,-1.000000e+00:5.000000e-01,"
                         "1.00000000e-01 -2.00000000e-01;3.00000000e-01 0.00000000e+00,ok");
}

TEST(Baselines, ShippedFileIsLabeled) {
  const auto path = fs::path(RMN_DATA_DIR) / "paper_baselines.json";
  const auto j = read_json_file(path.string());
  EXPECT_EQ(j["label"], "paper-reported, not reproduced");
  const auto b = load_baselines(path);
  EXPECT_DOUBLE_EQ(b.at("log_r_2d/rmn_direct"), 4.85e-3);
  EXPECT_DOUBLE_EQ(b.at("coulomb_3d/rmn_direct"), 4.61e-3);
  EXPECT_DOUBLE_EQ(b.at("crack_tip_2d/rmn_angular_half"), 1.20e-2);
}

TEST(RadialProfile, ExactRepresentationAndPartition) {
  const auto t = *find_target("inv_r_2d");
  ModelParams p(ModelSpec::direct(2, 2));
  set_ladder_exponents(p, 0, std::vector<double>{-1.0, 4.0});
  p.segment("coeffs")[0] = 1.0;
  p.segment("log_coeff")[0] = 0.0;
  const auto tg = test_grid(t.domain, 5000);
  const auto bins = radial_error_profile(p, t, tg, 7);
  std::size_t total = 0;
  double prev_hi = 0.0;
  for (const auto& b : bins) {
    EXPECT_LT(b.rmse, 1e-10);
    EXPECT_GE(b.r_lo, prev_hi);
    prev_hi = b.r_hi;
    total += b.count;
  }
  EXPECT_EQ(total, 5000u);
  EXPECT_THROW(radial_error_profile(p, t, tg, 1), ContractViolation);
}

const BenchmarkResult& inverse_radius_seed0() {
  static const BenchmarkResult res = [] {
    auto c = default_experiment("inv_r_2d");
    c.seeds = {0};
    return run_benchmark(c);
  }();
  return res;
}

TEST(RadialProfile, TrainedInverseRadiusIsUniform) {
  const auto t = *find_target("inv_r_2d");
  const auto bins = radial_error_profile(inverse_radius_seed0().reports[0].params, t, test_grid(t.domain, 5000), 10);
  // innermost bin within 10x of the outermost
  EXPECT_LT(bins.front().rmse, 10.0 * bins.back().rmse);
}

TEST(Train, InverseRadiusLadderBracketsMinusOne) {
  // trained exponents do not collapse onto -1; active terms sit on both sides of it
  const auto& rep = inverse_radius_seed0().reports[0];
  EXPECT_LT(rep.rmse, 2e-2);
  const auto d = dominant_exponents(rep.spectrum, 1e-3);
  double below = -1e9, above = 1e9;
  for (const auto& e : d) {
    if (e.mu <= -1.0) below = std::max(below, e.mu);
    else above = std::min(above, e.mu);
  }
  EXPECT_GT(below, -1.25);
  EXPECT_LT(above, -0.5);
}

TEST(Ablations, ConfigsAndLabels) {
  const auto k = ablation_configs("K_sweep", {0, 1});
  ASSERT_EQ(k.size(), 7u);
  EXPECT_EQ(k[0].model.K, 2);
  EXPECT_EQ(k[6].model.K, 16);
  EXPECT_EQ(k[5].method, "rmn_direct_K12");
  const auto r = ablation_configs("range_sweep", {0});
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].benchmark, "inv_r_2d");
  EXPECT_EQ(r[0].model.mu_min, 0.0);
  EXPECT_EQ(r[2].model.mu_min, -2.0);
  const auto l = ablation_configs("log_primitive_toggle", {0});
  ASSERT_EQ(l.size(), 2u);
  EXPECT_FALSE(l[0].model.log_enabled);
  EXPECT_EQ(l[0].method, "rmn_direct_nolog");
  EXPECT_TRUE(l[1].model.log_enabled);
  EXPECT_THROW(ablation_configs("width_sweep", {0}), ContractViolation);
}

TEST(Ablations, DisabledLogTermStaysZero) {
  auto c = ablation_configs("log_primitive_toggle", {0})[0];
  c.n_train = 300;
  c.n_test = 100;
  c.train.iterations = 50;
  const auto res = run_benchmark(c);
  EXPECT_EQ(res.reports[0].log_coeff, 0.0);
}

TEST(PinnConfig, DeskAndFullDefaults) {
  const PinnExperimentConfig full;
  EXPECT_EQ(full.steps, 25000);
  EXPECT_EQ(full.sampling.n_interior, 30000u);
  EXPECT_EQ(full.sampling.n_boundary, 8000u);
  EXPECT_EQ(full.resample_every, 2500);
  EXPECT_EQ(full.clip_norm, 1.0);
  EXPECT_EQ(full.weights.bc, 200.0);
  EXPECT_EQ(full.weights.flux, 50.0);
  const auto desk = desk_pinn_config();
  EXPECT_EQ(desk.steps, 10000);
  EXPECT_EQ(desk.sampling.n_interior, 10000u);
  EXPECT_EQ(desk.sampling.n_boundary, 4000u);
  EXPECT_EQ(desk.n_grid, 65);
}

TEST(PinnConfig, ParseRoundTripAndErrors) {
  auto c = desk_pinn_config();
  c.modes = {PinnMode::Supervised};
  c.seeds = {3, 4};
  c.centers = {{0.1, 0.2, 0.3}, {-0.1, 0.0, 0.5}};
  const auto back = parse_pinn_experiment(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  const std::vector<std::pair<std::string, std::string>> cases{
      {R"({"modes": ["pinn", "mlp"]})", "$.modes[1]"},
      {R"({"steps": 0})", "$.steps"},
      {R"({"eps": 0.2})", "$.eps"},
      {R"({"n_grid": 9})", "$.n_grid"},
      {R"({"weights": {"pde": 1, "bcc": 2}})", "$.weights.bcc"},
      {R"({"centers": [[0, 0, 0]]})", "$.centers"},
      {R"({"seeds": [0], "centers": [[0, 0]]})", "$.centers[0]"},
      {R"({"lr": "big"})", "$.lr"},
      {R"({"stepz": 3})", "$.stepz"}};
  for (const auto& [text, want] : cases) {
    std::string path;
    error_text([&] { parse_pinn_experiment(Json::parse(text)); }, &path);
    EXPECT_EQ(path, want) << text;
  }
}

TEST(PinnExperiment, TinyRunRowsAndDeterminism) {
  PinnExperimentConfig c;
  c.seeds = {0, 1};
  c.steps = 40;
  c.resample_every = 20;
  c.sampling = {300, 60, 200};
  c.n_grid = 17;
  c.n_eval = 300;
  c.n_flux = 200;
  const auto a = run_pinn_experiment(c), b = run_pinn_experiment(c, 2);
  ASSERT_EQ(a.rows.size(), 4u);
  EXPECT_EQ(a.rows[0].method, "rmn_mc_pinn");
  EXPECT_EQ(a.rows[1].method, "rmn_mc_supervised");
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(csv_line(a.rows[i]), csv_line(b.rows[i]));
    EXPECT_EQ(a.rows[i].benchmark, "poisson3d");
    EXPECT_TRUE(a.rows[i].rel_l2.has_value());
    EXPECT_TRUE(a.rows[i].flux_err.has_value());
    EXPECT_EQ(a.rows[i].param_count, 13u);  // 6 gaps + 6 coefficients + bias, center held
    EXPECT_EQ(a.reports[i].spectrum.back().mu, 2.0);
  }
  // the charge center differs per seed and respects the margin
  const auto c0 = charge_config_for_seed(c, 0).charges[0].center, c1 = charge_config_for_seed(c, 1).charges[0].center;
  EXPECT_NE(c0, c1);
  for (double v : c0) EXPECT_LE(std::abs(v), 0.85);
}

TEST(ShippedConfigs, AllParse) {
  const auto dir = fs::path(RMN_DATA_DIR).parent_path() / "configs";
  int n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto j = read_json_file(e.path().string());
    if (e.path().filename().string().rfind("poisson3d", 0) == 0) {
      EXPECT_NO_THROW(parse_pinn_experiment(j)) << e.path();
    } else {
      EXPECT_NO_THROW(parse_experiment(j)) << e.path();
    }
    ++n;
  }
  EXPECT_EQ(n, 4);
  EXPECT_EQ(parse_pinn_experiment(read_json_file((dir / "poisson3d_full.json").string())).steps, 25000);
}

TEST(GradientOracles, EveryKindPasses) {
  const auto lines = gradient_oracle_suite(20, 0);
  EXPECT_EQ(lines.size(), 36u);
  for (const auto& l : lines)
    EXPECT_TRUE(l.passed) << l.model << " " << l.check << " " << l.max_rel_err << " at " << l.worst;
}

}  // namespace
}  // namespace rmn
