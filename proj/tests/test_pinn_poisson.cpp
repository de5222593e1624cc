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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <vector>

#include <gtest/gtest.h>

#include "rmn/pinn_poisson.hpp"

namespace rmn {
namespace {

ChargeConfig centered_charge() { return {{{{0.0, 0.0, 0.0}, 1.0}}, 0.08, 0.15, 1.0}; }

const GroundTruthField& field33() {
  static const GroundTruthField f = solve_smooth_correction(centered_charge(), 33, 1e-10);
  return f;
}

const GroundTruthField& field65() {
  static const GroundTruthField f = solve_smooth_correction(centered_charge(), 65, 1e-10);
  return f;
}

// Exact free-space Coulomb field of a unit charge at c, scaled by `s`. The ladder keeps
// exponents strictly above mu_min, so the range starts below -1.
ModelParams coulomb_params(const Vec3& c, double s = 1.0) {
  ModelParams p(pinn_model_spec(6, -1.5, 2.0));
  set_ladder_exponents(p, 0, std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0, 2.0});
  for (int i = 0; i < 3; ++i) p.segment("centers")[static_cast<std::size_t>(i)] = c[static_cast<std::size_t>(i)];
  p.segment("coeffs")[0] = s / (4.0 * kPi);
  return p;
}

TEST(SmoothCorrection, ZeroChargesGiveZeroField) {
  const auto f = solve_smooth_correction({{}, 0.08, 0.15, 1.0}, 17, 1e-10);
  for (double v : f.v) EXPECT_EQ(v, 0.0);
}

TEST(SmoothCorrection, ConvergesToTolerance) {
  const auto& f = field33();
  EXPECT_LT(f.rel_residual, 1e-10);
  EXPECT_GT(f.iterations, 0);
  // boundary nodes carry -u_sing
  EXPECT_NEAR(f.v[f.index(0, 16, 16)], -1.0 / (4.0 * kPi), 1e-15);
}

TEST(SmoothCorrection, OctahedralSymmetryForCenteredCharge) {
  const auto& f = field33();
  const int n = f.n;
  double worst = 0.0;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double v = f.v[f.index(i, j, k)];
        for (double w : {f.v[f.index(j, i, k)], f.v[f.index(k, j, i)], f.v[f.index(i, k, j)],
                         f.v[f.index(n - 1 - i, j, k)], f.v[f.index(i, n - 1 - j, k)], f.v[f.index(i, j, n - 1 - k)]})
          worst = std::max(worst, std::abs(v - w));
      }
  EXPECT_LT(worst, 1e-8);
}

TEST(SmoothCorrection, GridRefinementAtOrigin) {
  const double v33 = field33().v[field33().index(16, 16, 16)];
  const double v65 = field65().v[field65().index(32, 32, 32)];
  EXPECT_LT(v33, 0.0);
  EXPECT_LT(std::abs(v33 - v65) / std::abs(v65), 0.02);
}

TEST(SmoothCorrection, DiscreteMaximumPrinciple) {
  const auto& f = field33();
  double bmin = 1e300, bmax = -1e300, imin = 1e300, imax = -1e300;
  for (int k = 0; k < f.n; ++k)
    for (int j = 0; j < f.n; ++j)
      for (int i = 0; i < f.n; ++i) {
        const double v = f.v[f.index(i, j, k)];
        const bool face = i == 0 || j == 0 || k == 0 || i == f.n - 1 || j == f.n - 1 || k == f.n - 1;
        (face ? bmin : imin) = std::min(face ? bmin : imin, v);
        (face ? bmax : imax) = std::max(face ? bmax : imax, v);
      }
  EXPECT_GE(imin, bmin - 1e-9);
  EXPECT_LE(imax, bmax + 1e-9);
}

TEST(SmoothCorrection, RejectsBadArguments) {
  EXPECT_THROW(solve_smooth_correction(centered_charge(), 9, 1e-8), ContractViolation);
  EXPECT_THROW(solve_smooth_correction(centered_charge(), 17, 0.0), ContractViolation);
  ChargeConfig near_face{{{{0.9, 0.0, 0.0}, 1.0}}, 0.08, 0.15, 1.0};
  EXPECT_THROW(solve_smooth_correction(near_face, 17, 1e-8), ContractViolation);
  ChargeConfig big_eps{{{{0.0, 0.0, 0.0}, 1.0}}, 0.2, 0.15, 1.0};
  EXPECT_THROW(validate(big_eps), ContractViolation);
}

TEST(GroundTruth, NodeInterpolationIdentity) {
  const auto& f = field33();
  for (const auto& [i, j, k] : {std::array<int, 3>{3, 5, 7}, {0, 16, 30}, {32, 32, 32}, {20, 10, 16}}) {
    const Vec3 x = f.node(i, j, k);
    EXPECT_NEAR(eval_ground_truth(f, x), u_singular(f.config, x) + f.v[f.index(i, j, k)], 1e-15);
  }
}

TEST(GroundTruth, LinearFieldInterpolatedExactly) {
  GroundTruthField f = field33();
  for (int k = 0; k < f.n; ++k)
    for (int j = 0; j < f.n; ++j)
      for (int i = 0; i < f.n; ++i) {
        const Vec3 x = f.node(i, j, k);
        f.v[f.index(i, j, k)] = 0.3 + 1.5 * x[0] - 0.7 * x[1] + 2.0 * x[2];
      }
  for (const Vec3 x : {Vec3{0.123, -0.456, 0.789}, Vec3{-0.99, 0.99, 0.0}, Vec3{1.0, -1.0, 1.0}})
    EXPECT_NEAR(interpolate_correction(f, x), 0.3 + 1.5 * x[0] - 0.7 * x[1] + 2.0 * x[2], 1e-13);
}

TEST(GroundTruth, DirichletBoundaryResidual) {
  const auto& f = field65();
  const auto b = boundary_sample_cube(1.0, 600, 4);
  double umax = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    umax = std::max(umax, u_singular(f.config, b.vec(i)));
    worst = std::max(worst, std::abs(eval_ground_truth(f, b.vec(i))));
  }
  EXPECT_LT(worst, 5e-2 * umax);
}

TEST(GroundTruth, SelfConsistencyUnderRefinement) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto fine = solve_smooth_correction(centered_charge(), 129, 1e-8);
  const auto pts = sample_uniform(punctured_cube(centered_charge()), 4000, 8);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double a = eval_ground_truth(field65(), pts.vec(i)), b = eval_ground_truth(fine, pts.vec(i));
    num += (a - b) * (a - b);
    den += b * b;
  }
  EXPECT_LT(std::sqrt(num / den), 0.02);
  RecordProperty("solve_129_seconds",
                 std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()));
}

TEST(GroundTruth, GaussFluxThroughEnclosingSphere) {
  ChargeConfig cfg{{{{0.2, -0.1, 0.3}, 1.0}}, 0.08, 0.15, 1.0};
  const auto f = solve_smooth_correction(cfg, 65, 1e-10);
  const double rad = 0.16;
  const auto s = fibonacci_sphere(cfg.charges[0].center, rad, 1500);
  const double h = 1e-4;
  double m = 0.0;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    Vec3 a = s.points[i], b = s.points[i];
    for (int d = 0; d < 3; ++d) {
      a[d] += h * s.normals[i][d];
      b[d] -= h * s.normals[i][d];
    }
    m += (eval_ground_truth(f, a) - eval_ground_truth(f, b)) / (2.0 * h);
  }
  EXPECT_NEAR(4.0 * kPi * rad * rad * m / 1500.0, -1.0, 1e-2);
}

TEST(GroundTruth, PunctureAndCubeViolations) {
  const auto& f = field33();
  EXPECT_THROW(eval_ground_truth(f, Vec3{0.05, 0.0, 0.0}), ContractViolation);
  EXPECT_THROW(eval_ground_truth(f, Vec3{1.1, 0.0, 0.0}), ContractViolation);
}

TEST(FieldCache, RoundTripAndKeying) {
  const auto dir = std::filesystem::temp_directory_path() / "rmn_field_cache_test";
  std::filesystem::remove_all(dir);
  const auto cfg = centered_charge();
  const auto a = cached_ground_truth(cfg, 17, 1e-9, dir);
  const auto b = cached_ground_truth(cfg, 17, 1e-9, dir);
  EXPECT_EQ(a.v, b.v);
  EXPECT_EQ(a.n, b.n);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.rel_residual, b.rel_residual);
  EXPECT_EQ(b.config.charges.size(), 1u);
  EXPECT_NE(field_cache_key(cfg, 17, 1e-9), field_cache_key(cfg, 33, 1e-9));
  EXPECT_NE(field_cache_key(cfg, 17, 1e-9), field_cache_key(cfg, 17, 1e-8));
  auto moved = cfg;
  moved.charges[0].center[0] = 0.1;
  EXPECT_NE(field_cache_key(cfg, 17, 1e-9), field_cache_key(moved, 17, 1e-9));
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) files += e.is_regular_file();
  EXPECT_EQ(files, 1u);
  {
    std::ofstream bad(dir / "junk.bin", std::ios::binary);
    bad << "NOTAFIELD";
  }
  EXPECT_THROW(load_field(dir / "junk.bin"), ContractViolation);
  std::filesystem::remove_all(dir);
}

TEST(FluxError, ExactCoulombAndConstantField) {
  ChargeConfig cfg{{{{0.2, -0.1, 0.3}, 1.0}}, 0.08, 0.15, 1.0};
  EXPECT_LT(flux_error(coulomb_params(cfg.charges[0].center), cfg, 1500)[0], 1e-3);
  ModelParams c(pinn_model_spec());
  c.segment("bias")[0] = 3.0;
  cfg.charges[0].q = -2.5;
  EXPECT_NEAR(flux_error(c, cfg, 500)[0], 2.5, 1e-15);
  EXPECT_THROW(flux_error(c, cfg, 50), ContractViolation);
}

TEST(FluxError, LinearInCoefficients) {
  ChargeConfig cfg{{{{0.0, 0.0, 0.0}, 0.0}}, 0.08, 0.15, 1.0};
  ModelParams p = pinn_initial_params(pinn_model_spec(), {0.01, 0.0, 0.0}, 3);
  // with q = 0 the error is |flux integral|, which scales linearly with all coefficients
  const double base = flux_error(p, cfg, 500)[0];
  for (double& a : p.segment("coeffs")) a *= 2.0;
  EXPECT_NEAR(flux_error(p, cfg, 500)[0], 2.0 * base, 1e-12 * std::max(1.0, base));
}

TEST(RelL2, ReferenceCases) {
  GroundTruthField free;  // v = 0, so u* is the free-space field
  free.config = centered_charge();
  free.n = 17;
  free.v.assign(17 * 17 * 17, 0.0);
  const auto pts = sample_uniform(punctured_cube(free.config), 2000, 3);
  EXPECT_LT(rel_l2(coulomb_params({0.0, 0.0, 0.0}), free, pts), 1e-12);
  EXPECT_NEAR(rel_l2(ModelParams(pinn_model_spec()), free, pts), 1.0, 1e-15);
  EXPECT_NEAR(rel_l2(coulomb_params({0.0, 0.0, 0.0}, 2.0), free, pts), 1.0, 1e-12);
  GroundTruthField none = free;
  none.config.charges.clear();
  EXPECT_THROW(rel_l2(ModelParams(pinn_model_spec()), none, pts), ContractViolation);
}

TEST(RelL2, FreeSpaceLimitOnLargeDomain) {
  // a cube much larger than the charge scale: the correction is small
  ChargeConfig cfg{{{{0.0, 0.0, 0.0}, 1.0}}, 0.08, 0.15, 100.0};
  const auto f = solve_smooth_correction(cfg, 33, 1e-10);
  const auto pts = sample_uniform(ShellBall3D{0.08, 1.0}, 2000, 4);
  EXPECT_LT(rel_l2(coulomb_params({0.0, 0.0, 0.0}), f, pts), 0.01);
}

TEST(PinnModel, SpecAndInit) {
  const auto s = pinn_model_spec();
  EXPECT_EQ(s.K, 6);
  EXPECT_EQ(s.mu_min, -1.0);
  EXPECT_EQ(s.mu_max, 2.0);
  const auto p = pinn_initial_params(s, {0.1, 0.2, 0.3}, 5);
  EXPECT_EQ(p.segment("centers")[2], 0.3);
  EXPECT_NEAR(p.segment("coeffs")[0], 0.0796, 1e-4);
  EXPECT_EQ(p.trainable_count(), p.size() - 3);
  EXPECT_EQ(p.exponents().back(), 2.0);
  EXPECT_FALSE(p.layout().has("log_coeffs"));
}

TEST(PinnModel, RandomChargeCenterRespectsMargin) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const Vec3 c = random_charge_center(1.0, 0.15, s);
    for (double v : c) EXPECT_LE(std::abs(v), 0.85);
  }
}

TEST(PinnObjective, ComponentsAndDeterministicResample) {
  const auto cfg = centered_charge();
  PinnObjective a(cfg, {200, 60, 100}, LossWeights{}, 100), b(cfg, {200, 60, 100}, LossWeights{}, 100);
  a.resample(3, 0);
  b.resample(3, 0);
  const auto p = pinn_initial_params(pinn_model_spec(), {0.0, 0.0, 0.0}, 1);
  std::vector<double> ga(p.size()), gb(p.size()), ca, cb;
  const double la = a.evaluate(p, 0, ga, ca), lb = b.evaluate(p, 0, gb, cb);
  EXPECT_EQ(la, lb);
  EXPECT_EQ(ga, gb);
  ASSERT_EQ(ca.size(), 3u);
  EXPECT_EQ(a.component_names(), (std::vector<std::string>{"pde", "bc", "flux"}));
  // step 0 uses curriculum multipliers (0.1, 1, 0.1)
  EXPECT_NEAR(la, 0.1 * ca[0] + 200.0 * ca[1] + 5.0 * ca[2], 1e-12 * std::max(1.0, la));
  b.resample(3, 1);
  std::vector<double> gc(p.size());
  EXPECT_NE(b.evaluate(p, 0, gc, cb), la);
}

}  // namespace
}  // namespace rmn
