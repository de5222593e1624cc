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

#ifndef RMN_SAMPLING_HPP
#define RMN_SAMPLING_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "rmn/core.hpp"
#include "rmn/param_grad.hpp"

namespace rmn {

struct Annulus2D {
  double r_min = 0.01;
  double r_max = 1.0;
};

struct ShellBall3D {
  double r_min = 0.01;
  double r_max = 1.0;
};

struct Puncture {
  Vec3 center{0.0, 0.0, 0.0};
  double radius = 0.0;
};

/// Axis-aligned box [-h, h]^d with balls removed. Square2D is the puncture-free 2D case.
struct PuncturedBox {
  int dim = 3;
  double half_width = 1.0;
  std::vector<Puncture> punctures;
};

using Domain = std::variant<Annulus2D, ShellBall3D, PuncturedBox>;

inline PuncturedBox square_2d(double side = 2.0) { return {2, side / 2.0, {}}; }

inline int domain_dim(const Domain& d) {
  if (std::holds_alternative<Annulus2D>(d)) return 2;
  if (std::holds_alternative<ShellBall3D>(d)) return 3;
  return std::get<PuncturedBox>(d).dim;
}

inline void validate(const Domain& dom) {
  if (const auto* a = std::get_if<Annulus2D>(&dom)) require(0.0 < a->r_min && a->r_min < a->r_max, "Annulus2D: need 0 < r_min < r_max");
  if (const auto* s = std::get_if<ShellBall3D>(&dom)) require(0.0 < s->r_min && s->r_min < s->r_max, "ShellBall3D: need 0 < r_min < r_max");
  if (const auto* b = std::get_if<PuncturedBox>(&dom)) {
    require(b->dim == 2 || b->dim == 3, "PuncturedBox: dim must be 2 or 3");
    require(b->half_width > 0.0, "PuncturedBox: half_width must be > 0");
    for (const auto& p : b->punctures) {
      require(p.radius > 0.0, "PuncturedBox: puncture radius must be > 0");
      for (int i = 0; i < b->dim; ++i)
        require(std::abs(p.center[i]) + p.radius < b->half_width, "PuncturedBox: puncture must lie strictly inside the box");
    }
  }
}

/// Membership predicate.
inline bool contains(const Domain& dom, const Vec3& x) {
  if (const auto* a = std::get_if<Annulus2D>(&dom)) {
    const double r = std::hypot(x[0], x[1]);
    return r >= a->r_min && r <= a->r_max;
  }
  if (const auto* s = std::get_if<ShellBall3D>(&dom)) {
    const double r = norm(x);
    return r >= s->r_min && r <= s->r_max;
  }
  const auto& b = std::get<PuncturedBox>(dom);
  for (int i = 0; i < b.dim; ++i)
    if (std::abs(x[i]) > b.half_width) return false;
  for (const auto& p : b.punctures) {
    Vec3 d{x[0] - p.center[0], x[1] - p.center[1], b.dim == 3 ? x[2] - p.center[2] : 0.0};
    if (norm(d) < p.radius) return false;
  }
  return true;
}

namespace detail {

inline double uniform01(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Maps (u, v) in [0,1)^2 to a point of the annulus with density proportional to r.
inline Vec3 annulus_point(const Annulus2D& a, double u, double v) {
  const double r = std::sqrt(a.r_min * a.r_min + u * (a.r_max * a.r_max - a.r_min * a.r_min));
  const double th = -kPi + 2.0 * kPi * v;
  return {r * std::cos(th), r * std::sin(th), 0.0};
}

// Maps (u, v, w) to a point of the shell with density proportional to r^2.
inline Vec3 shell_point(const ShellBall3D& s, double u, double v, double w) {
  const double r3 = s.r_min * s.r_min * s.r_min;
  const double R3 = s.r_max * s.r_max * s.r_max;
  const double r = std::cbrt(r3 + u * (R3 - r3));
  const double z = 1.0 - 2.0 * v;
  const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double ph = 2.0 * kPi * w;
  return {r * rho * std::cos(ph), r * rho * std::sin(ph), r * z};
}

inline double punctured_fraction(const PuncturedBox& b) {
  double removed = 0.0;
  for (const auto& p : b.punctures)
    removed += b.dim == 2 ? kPi * p.radius * p.radius : 4.0 / 3.0 * kPi * p.radius * p.radius * p.radius;
  return removed / std::pow(2.0 * b.half_width, b.dim);
}

}  // namespace detail

/// n i.i.d. points uniform (Lebesgue) on the domain. Deterministic in `seed`.
inline PointBatch sample_uniform(const Domain& dom, std::size_t n, std::uint64_t seed) {
  require(n >= 1, "sample_uniform: n must be >= 1");
  validate(dom);
  std::mt19937_64 rng(seed);
  PointBatch out(domain_dim(dom));
  out.coords.reserve(n * static_cast<std::size_t>(out.dim));
  if (const auto* b = std::get_if<PuncturedBox>(&dom))
    require(detail::punctured_fraction(*b) < 0.5, "sample_uniform: punctures cover >= 50% of the box");
  while (out.size() < n) {
    Vec3 x{};
    if (const auto* a = std::get_if<Annulus2D>(&dom)) {
      const double u = detail::uniform01(rng);
      x = detail::annulus_point(*a, u, detail::uniform01(rng));
    } else if (const auto* s = std::get_if<ShellBall3D>(&dom)) {
      const double u = detail::uniform01(rng);
      const double v = detail::uniform01(rng);
      x = detail::shell_point(*s, u, v, detail::uniform01(rng));
    } else {
      const auto& b = std::get<PuncturedBox>(dom);
      for (int i = 0; i < b.dim; ++i) x[i] = b.half_width * (2.0 * detail::uniform01(rng) - 1.0);
    }
    // Rounding can put an inverse-CDF point an ulp outside; redraw in that case.
    if (contains(dom, x)) out.push(x);
  }
  return out;
}

/// Near-uniform points on a sphere (3D) by the Fibonacci lattice, with outward normals.
inline SphereSamples fibonacci_sphere(const Vec3& center, double radius, std::size_t n) {
  require(n >= 2, "fibonacci_sphere: n must be >= 2");
  require(radius > 0.0, "fibonacci_sphere: radius must be > 0");
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  SphereSamples s;
  s.center = center;
  s.radius = radius;
  s.points.reserve(n);
  s.normals.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double ph = golden * static_cast<double>(i);
    const Vec3 nrm{rho * std::cos(ph), rho * std::sin(ph), z};
    s.normals.push_back(nrm);
    s.points.push_back({center[0] + radius * nrm[0], center[1] + radius * nrm[1], center[2] + radius * nrm[2]});
  }
  return s;
}

/// Equispaced points on a circle (the 2D analogue of fibonacci_sphere).
inline SphereSamples circle_points(const Vec3& center, double radius, std::size_t n) {
  require(n >= 2, "circle_points: n must be >= 2");
  require(radius > 0.0, "circle_points: radius must be > 0");
  SphereSamples s;
  s.center = {center[0], center[1], 0.0};
  s.radius = radius;
  for (std::size_t i = 0; i < n; ++i) {
    const double th = 2.0 * kPi * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const Vec3 nrm{std::cos(th), std::sin(th), 0.0};
    s.normals.push_back(nrm);
    s.points.push_back({center[0] + radius * nrm[0], center[1] + radius * nrm[1], 0.0});
  }
  return s;
}

/// Points on the surface of [-h, h]^3. Each face receives floor(n/6) points (the
/// remainder goes to randomly chosen faces); positions within a face are uniform.
inline PointBatch boundary_sample_cube(double half_width, std::size_t n, std::uint64_t seed) {
  require(n >= 6, "boundary_sample_cube: n must be >= 6");
  require(half_width > 0.0, "boundary_sample_cube: half_width must be > 0");
  std::mt19937_64 rng(seed);
  std::vector<int> faces;
  faces.reserve(n);
  for (std::size_t i = 0; i < n - n % 6; ++i) faces.push_back(static_cast<int>(i % 6));
  for (std::size_t i = 0; i < n % 6; ++i) faces.push_back(static_cast<int>(rng() % 6));
  std::shuffle(faces.begin(), faces.end(), rng);
  PointBatch out(3);
  out.coords.reserve(3 * n);
  for (int f : faces) {
    const int axis = f / 2;
    const double side = (f % 2 == 0) ? -half_width : half_width;
    Vec3 x{};
    for (int i = 0; i < 3; ++i) x[i] = i == axis ? side : half_width * (2.0 * detail::uniform01(rng) - 1.0);
    out.push(x);
  }
  return out;
}

/// Van der Corput radical inverse of `index` in `base`.
inline double radical_inverse(std::uint64_t index, unsigned base) {
  const double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

/// Deterministic Halton point set of exactly n points inside the domain. Radial
/// domains use the same inverse-CDF maps as sample_uniform; punctured boxes skip
/// rejected Halton indices and keep going until n points are accepted.
inline PointBatch test_grid(const Domain& dom, std::size_t n) {
  require(n >= 1, "test_grid: n must be >= 1");
  validate(dom);
  PointBatch out(domain_dim(dom));
  out.coords.reserve(n * static_cast<std::size_t>(out.dim));
  for (std::uint64_t idx = 1; out.size() < n; ++idx) {
    const double u = radical_inverse(idx, 2);
    const double v = radical_inverse(idx, 3);
    const double w = radical_inverse(idx, 5);
    Vec3 x{};
    if (const auto* a = std::get_if<Annulus2D>(&dom)) {
      x = detail::annulus_point(*a, u, v);
    } else if (const auto* s = std::get_if<ShellBall3D>(&dom)) {
      x = detail::shell_point(*s, u, v, w);
    } else {
      const auto& b = std::get<PuncturedBox>(dom);
      const double c[3] = {u, v, w};
      for (int i = 0; i < b.dim; ++i) x[i] = b.half_width * (2.0 * c[i] - 1.0);
    }
    if (contains(dom, x)) out.push(x);
  }
  return out;
}

/// Writes x_1..x_d[, weight][, value] rows with a header line.
inline void write_batch_csv(const std::string& path, const PointBatch& batch, std::span<const double> values = {}) {
  std::ofstream os(path);
  require(static_cast<bool>(os), "write_batch_csv: cannot open " + path);
  for (int i = 0; i < batch.dim; ++i) os << (i ? "," : "") << "x" << (i + 1);
  if (batch.has_weights()) os << ",weight";
  if (!values.empty()) os << ",value";
  os << "\n";
  os.precision(17);
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const auto p = batch.point(k);
    for (int i = 0; i < batch.dim; ++i) os << (i ? "," : "") << p[static_cast<std::size_t>(i)];
    if (batch.has_weights()) os << "," << batch.weights[k];
    if (!values.empty()) os << "," << values[k];
    os << "\n";
  }
}

}  // namespace rmn

#endif  // RMN_SAMPLING_HPP
