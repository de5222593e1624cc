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

// Exact benchmark targets: values, gradients and the metadata the harness needs.

#ifndef RMN_TARGETS_HPP
#define RMN_TARGETS_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rmn/core.hpp"
#include "rmn/sampling.hpp"

namespace rmn {

struct SourceTerm {
  Vec3 center{0.0, 0.0, 0.0};
  double weight = 1.0;
};

struct TargetSpec {
  std::string name;
  int dim = 2;
  Domain domain;
  std::function<double(const Vec3&)> exact_value;
  std::function<Vec3(const Vec3&)> exact_gradient;
  std::vector<double> known_exponents;  // empty when not a power law
  bool logarithmic = false;
  std::vector<SourceTerm> sources;  // multi-source targets only
  std::string notes;
};

namespace detail {

inline TargetSpec radial_power_target(std::string name, int dim, std::vector<double> coeffs, std::vector<double> powers,
                                      std::string notes) {
  TargetSpec t;
  t.name = std::move(name);
  t.dim = dim;
  t.domain = dim == 2 ? Domain{Annulus2D{0.01, 1.0}} : Domain{ShellBall3D{0.01, 1.0}};
  t.known_exponents = powers;
  t.notes = std::move(notes);
  t.exact_value = [coeffs, powers](const Vec3& x) {
    const double r = norm(x);
    double v = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) v += coeffs[k] * std::pow(r, powers[k]);
    return v;
  };
  t.exact_gradient = [coeffs, powers](const Vec3& x) {
    const double r = norm(x);
    double s = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) s += coeffs[k] * powers[k] * std::pow(r, powers[k] - 2.0);
    return Vec3{s * x[0], s * x[1], s * x[2]};
  };
  return t;
}

inline TargetSpec multi_source_target(std::string name, std::vector<SourceTerm> sources, std::string notes) {
  TargetSpec t;
  t.name = std::move(name);
  t.dim = 2;
  PuncturedBox box{2, 1.0, {}};
  for (const auto& s : sources) box.punctures.push_back({s.center, 0.01});
  t.domain = box;
  t.logarithmic = true;
  t.sources = sources;
  t.notes = std::move(notes);
  t.exact_value = [sources](const Vec3& x) {
    double v = 0.0;
    for (const auto& s : sources) v += s.weight * std::log(std::hypot(x[0] - s.center[0], x[1] - s.center[1]));
    return v;
  };
  t.exact_gradient = [sources](const Vec3& x) {
    Vec3 g{0.0, 0.0, 0.0};
    for (const auto& s : sources) {
      const double dx = x[0] - s.center[0], dy = x[1] - s.center[1];
      const double r2 = dx * dx + dy * dy;
      g[0] += s.weight * dx / r2;
      g[1] += s.weight * dy / r2;
    }
    return g;
  };
  return t;
}

}  // namespace detail

inline TargetSpec two_source_target(std::vector<Vec3> centers = {{-0.3, 0.0, 0.0}, {0.3, 0.0, 0.0}},
                                    std::string name = "two_source_2d") {
  require(centers.size() == 2, "two_source_target: need two centers");
  return detail::multi_source_target(std::move(name), {{centers[0], 1.0}, {centers[1], 0.5}},
                                     "log|x-c1| + 0.5 log|x-c2| on [-1,1]^2 minus eps=0.01 discs");
}

inline TargetSpec three_source_target(std::vector<Vec3> centers = {{-0.3, -0.2, 0.0}, {0.3, -0.2, 0.0}, {0.0, 0.3, 0.0}}) {
  require(centers.size() == 3, "three_source_target: need three centers");
  return detail::multi_source_target("three_source_2d", {{centers[0], 1.0}, {centers[1], 0.7}, {centers[2], 0.5}},
                                     "weights (1, 0.7, 0.5); centers fixed by this library");
}

/// The benchmark families: seven singular families plus the smooth control.
inline std::vector<TargetSpec> catalog() {
  std::vector<TargetSpec> out;
  {
    TargetSpec t;
    t.name = "log_r_2d";
    t.dim = 2;
    t.domain = Annulus2D{0.01, 1.0};
    t.logarithmic = true;
    t.notes = "log r on 0.01 <= r <= 1";
    t.exact_value = [](const Vec3& x) { return std::log(std::hypot(x[0], x[1])); };
    t.exact_gradient = [](const Vec3& x) {
      const double r2 = x[0] * x[0] + x[1] * x[1];
      return Vec3{x[0] / r2, x[1] / r2, 0.0};
    };
    out.push_back(t);
  }
  out.push_back(detail::radial_power_target("sqrt_r_2d", 2, {1.0}, {0.5}, "r^(1/2)"));
  out.push_back(detail::radial_power_target("inv_r_2d", 2, {1.0}, {-1.0}, "r^-1"));
  out.push_back(detail::radial_power_target("multi_power_2d", 2, {0.5, 0.3, 0.2}, {0.5, -0.5, 1.5},
                                            "0.5 r^(1/2) + 0.3 r^(-1/2) + 0.2 r^(3/2)"));
  {
    TargetSpec t;
    t.name = "crack_tip_2d";
    t.dim = 2;
    t.domain = Annulus2D{0.01, 1.0};
    t.known_exponents = {0.5};
    t.notes = "r^(1/2) cos(theta/2), theta = atan2(y, x) in (-pi, pi]";
    t.exact_value = [](const Vec3& x) {
      return std::sqrt(std::hypot(x[0], x[1])) * std::cos(0.5 * std::atan2(x[1], x[0]));
    };
    t.exact_gradient = [](const Vec3& x) {
      const double r = std::hypot(x[0], x[1]);
      const double th = std::atan2(x[1], x[0]);
      const double dr = 0.5 / std::sqrt(r) * std::cos(0.5 * th);     // d/dr
      const double dt = -0.5 / std::sqrt(r) * std::sin(0.5 * th);    // (1/r) d/dtheta
      const double c = std::cos(th), s = std::sin(th);
      return Vec3{dr * c - dt * s, dr * s + dt * c, 0.0};
    };
    out.push_back(t);
  }
  out.push_back(two_source_target());
  out.push_back(three_source_target());
  out.push_back(detail::radial_power_target("coulomb_3d", 3, {1.0}, {-1.0}, "1/r on 0.01 <= r <= 1"));
  {
    TargetSpec t;
    t.name = "dipole_3d";
    t.dim = 3;
    t.domain = ShellBall3D{0.01, 1.0};
    t.known_exponents = {-2.0};
    t.notes = "z / r^3 = r^-2 cos(theta)";
    t.exact_value = [](const Vec3& x) {
      const double r = norm(x);
      return x[2] / (r * r * r);
    };
    t.exact_gradient = [](const Vec3& x) {
      const double r = norm(x);
      const double r3 = r * r * r, r5 = r3 * r * r;
      return Vec3{-3.0 * x[2] * x[0] / r5, -3.0 * x[2] * x[1] / r5, 1.0 / r3 - 3.0 * x[2] * x[2] / r5};
    };
    out.push_back(t);
  }
  {
    TargetSpec t;
    t.name = "smooth_2d";
    t.dim = 2;
    t.domain = square_2d(2.0);
    t.notes = "sin(pi x) sin(pi y) on [-1,1]^2 (control: no singularity)";
    t.exact_value = [](const Vec3& x) { return std::sin(kPi * x[0]) * std::sin(kPi * x[1]); };
    t.exact_gradient = [](const Vec3& x) {
      return Vec3{kPi * std::cos(kPi * x[0]) * std::sin(kPi * x[1]), kPi * std::sin(kPi * x[0]) * std::cos(kPi * x[1]), 0.0};
    };
    out.push_back(t);
  }
  return out;
}

/// Named configurations outside the main catalog.
inline std::vector<TargetSpec> extra_targets() {
  return {two_source_target({{-0.3, -0.2, 0.0}, {0.3, -0.2, 0.0}}, "two_source_2d_offset")};
}

inline std::vector<std::string> target_names() {
  std::vector<std::string> names;
  for (const auto& t : catalog()) names.push_back(t.name);
  for (const auto& t : extra_targets()) names.push_back(t.name);
  return names;
}

inline std::optional<TargetSpec> find_target(std::string_view name) {
  for (auto& t : catalog())
    if (t.name == name) return t;
  for (auto& t : extra_targets())
    if (t.name == name) return t;
  return std::nullopt;
}

/// Exact values on a batch; every point must lie in the target's domain.
inline std::vector<double> eval_batch(const TargetSpec& spec, const PointBatch& batch) {
  require(batch.dim == spec.dim, "eval_batch: dimension mismatch");
  std::vector<double> out(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Vec3 x = batch.vec(i);
    require(contains(spec.domain, x), "eval_batch: point " + std::to_string(i) + " lies outside the domain of " + spec.name);
    out[i] = spec.exact_value(x);
  }
  return out;
}

}  // namespace rmn

#endif  // RMN_TARGETS_HPP
