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
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "rmn/radial_basis.hpp"

namespace rmn {
namespace {

TEST(LadderExponents, EqualGapsSpreadUniformly) {
  for (double s : {-3.0, 0.0, 0.7, 5.0}) {
    const auto mu = ladder_exponents({{s, s, s, s}, -2.0, 4.0, 0.01});
    ASSERT_EQ(mu.size(), 4u);
    EXPECT_NEAR(mu[0], -0.5, 1e-12);
    EXPECT_NEAR(mu[1], 1.0, 1e-12);
    EXPECT_NEAR(mu[2], 2.5, 1e-12);
    EXPECT_EQ(mu[3], 4.0);
  }
}

TEST(LadderExponents, SingleExponentIsPinned) {
  EXPECT_EQ(ladder_exponents({{-7.3}, -2.0, 4.0, 0.01}), std::vector<double>{4.0});
}

TEST(LadderExponents, HandComputedValues) {
  // softplus(0, 1, -1) + 0.01, cumulated and normalized.
  const auto mu = ladder_exponents({{0.0, 1.0, -1.0}, 0.0, 1.0, 0.01});
  EXPECT_NEAR(mu[0], 0.29925351827949055, 1e-14);
  EXPECT_NEAR(mu[1], 0.86242254823839639, 1e-14);
  EXPECT_EQ(mu[2], 1.0);
}

TEST(LadderExponents, StrictlyIncreasingAndPinnedForRandomGaps) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 3.0);
  std::uniform_int_distribution<int> kd(1, 16);
  for (int trial = 0; trial < 1000; ++trial) {
    ExponentLadder L;
    L.raw_gaps.resize(static_cast<std::size_t>(kd(rng)));
    for (auto& s : L.raw_gaps) s = n(rng);
    const auto mu = ladder_exponents(L);
    EXPECT_GT(mu[0], L.mu_min);
    for (std::size_t k = 1; k < mu.size(); ++k) ASSERT_LT(mu[k - 1], mu[k]);
    ASSERT_EQ(mu.back(), L.mu_max);
  }
}

TEST(LadderExponents, GapsRespectMinimum) {
  // With s -> -inf every delta tends to eps, so consecutive exponents stay apart.
  const auto mu = ladder_exponents({{-50.0, -50.0, 40.0}, 0.0, 1.0, 0.01});
  EXPECT_GT(mu[1] - mu[0], 0.0);
  EXPECT_GT(mu[0], 0.0);
}

TEST(LadderJacobian, OneByOneIsZero) {
  EXPECT_EQ(ladder_jacobian({{0.3}, -2.0, 4.0, 0.01}), std::vector<double>{0.0});
}

TEST(LadderJacobian, MatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.5);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    ExponentLadder L{{}, -2.0, 4.0, 0.01};
    L.raw_gaps.resize(1 + static_cast<std::size_t>(trial % 12));
    for (auto& s : L.raw_gaps) s = n(rng);
    const std::size_t K = L.raw_gaps.size();
    const auto J = ladder_jacobian(L);
    for (std::size_t j = 0; j < K; ++j) {
      ExponentLadder p = L, m = L;
      p.raw_gaps[j] += 1e-6;
      m.raw_gaps[j] -= 1e-6;
      const auto mp = ladder_exponents(p), mm = ladder_exponents(m);
      for (std::size_t k = 0; k < K; ++k) {
        const double fd = (mp[k] - mm[k]) / 2e-6;
        const double a = J[k * K + j];
        worst = std::max(worst, std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6}));
      }
    }
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(LadderJacobian, UpperTriangleRowsAreConstant) {
  const ExponentLadder L{{0.2, -0.4, 1.1, 0.0, 0.5}, -1.0, 2.0, 0.01};
  const auto J = ladder_jacobian(L);
  double total = 0.0;
  std::vector<double> sigma;
  for (double s : L.raw_gaps) sigma.push_back(total += softplus(s) + L.eps_gap);
  for (std::size_t k = 0; k + 1 < 5; ++k)
    for (std::size_t j = k + 1; j < 5; ++j)
      EXPECT_NEAR(J[k * 5 + j], -3.0 * logistic(L.raw_gaps[j]) * sigma[k] / (total * total), 1e-15);
  for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(J[4 * 5 + j], 0.0);
}

TEST(LadderBackprop, AgreesWithJacobianTranspose) {
  const ExponentLadder L{{0.2, -0.4, 1.1, 0.0, 0.5, -2.0}, -2.0, 4.0, 0.01};
  const std::vector<double> g{0.3, -1.0, 2.0, 0.5, -0.7, 9.0};
  std::vector<double> out(6);
  ladder_backprop(L.raw_gaps, L.mu_min, L.mu_max, L.eps_gap, g, out);
  const auto J = ladder_jacobian(L);
  for (std::size_t j = 0; j < 6; ++j) {
    double ref = 0.0;
    for (std::size_t k = 0; k < 6; ++k) ref += J[k * 6 + j] * g[k];
    EXPECT_NEAR(out[j], ref, 1e-13);
  }
}

TEST(StablePow, Examples) {
  EXPECT_EQ(stable_pow(1.0, -1.0), 1.0);
  EXPECT_DOUBLE_EQ(stable_pow(0.5, -1.0), 2.0);
  EXPECT_NEAR(stable_pow(0.0, -1.0), 1e12, 1e-3);
  for (double r : {0.0, 1e-30, 0.3, 1.0, 7.0}) EXPECT_EQ(stable_pow(r, 0.0), 1.0);
}

TEST(Softplus, StableForLargeArguments) {
  EXPECT_DOUBLE_EQ(softplus(800.0), 800.0);
  EXPECT_GT(softplus(-800.0), -1.0);
  EXPECT_NEAR(softplus(0.0), std::log(2.0), 1e-16);
}

TEST(LogPrimitive, Examples) {
  EXPECT_NEAR(log_primitive(std::exp(1.0), 1.0), std::exp(1.0) - 1.0, 1e-14);
  EXPECT_NEAR(log_primitive(0.5, 0.0), std::log(0.5), 1e-16);
  EXPECT_NEAR(log_primitive(2.0, 1e-5), 0.6931495828305653209, 1e-10 * 0.69);
  EXPECT_NEAR(log_primitive(0.05, -0.5), -6.9442719099991587856, 1e-13);
  EXPECT_NEAR(log_primitive(0.3, 0.7), -0.81355482821437967988, 1e-14);
}

TEST(LogPrimitive, ContinuousAcrossBranch) {
  const LogPrimitiveParams p;
  for (double r = 0.01; r <= 1.0; r += 0.0173) {
    for (double sgn : {-1.0, 1.0}) {
      const double below = log_primitive(r, sgn * p.eps_log * (1.0 - 1e-3));
      const double above = log_primitive(r, sgn * p.eps_log * (1.0 + 1e-3));
      const double slope = log_primitive_dmu(r, sgn * p.eps_log);
      // The two sides differ by the change in mu times the slope, plus branch error.
      EXPECT_LT(std::abs(above - below - slope * sgn * p.eps_log * 2e-3), 1e-10) << r;
    }
  }
}

TEST(LogPrimitiveDmu, Examples) {
  for (double mu : {-1.0, 0.0, 1e-6, 0.5}) EXPECT_EQ(log_primitive_dmu(1.0, mu), 0.0);
  EXPECT_NEAR(log_primitive_dmu(std::exp(1.0), 0.0), 0.5, 1e-15);
  EXPECT_NEAR(log_primitive_dmu(std::exp(1.0), 1e-9), 0.5, 1e-8);
}

TEST(LogPrimitiveDmu, MatchesFiniteDifferences) {
  for (double r : {0.05, 0.3, 1.0})
    for (double mu : {-0.5, -1e-5, 0.0, 1e-5, 0.7}) {
      const double h = 1e-6;
      const double fd = (log_primitive(r, mu + h) - log_primitive(r, mu - h)) / (2 * h);
      const double a = log_primitive_dmu(r, mu);
      EXPECT_LE(std::abs(a - fd), 1e-5 * std::max(1.0, std::abs(a))) << "r=" << r << " mu=" << mu;
    }
}

TEST(LogPrimitiveDr, ExamplesAndFiniteDifferences) {
  EXPECT_DOUBLE_EQ(log_primitive_dr(2.0, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(log_primitive_dr(1.0, 3.0), 1.0);
  for (double r : {0.05, 0.3, 0.9})
    for (double mu : {-1.2, -2e-5, 0.0, 0.4, 2.0}) {
      const double h = 1e-6 * r;
      const double fd = (log_primitive(r + h, mu) - log_primitive(r - h, mu)) / (2 * h);
      EXPECT_LE(std::abs(log_primitive_dr(r, mu) - fd), 1e-5 * std::max(1.0, std::abs(fd)));
    }
}

}  // namespace
}  // namespace rmn
