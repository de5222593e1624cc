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

#ifndef RMN_CORE_HPP
#define RMN_CORE_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rmn {

/// Raised when a caller breaks a documented precondition.
struct ContractViolation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ContractViolation(what);
}

inline constexpr double kPi = 3.14159265358979323846;

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Loads a d-dimensional point (d <= 3) into a zero-padded Vec3.
inline Vec3 load_point(std::span<const double> x) {
  Vec3 v{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < x.size() && i < 3; ++i) v[i] = x[i];
  return v;
}

/// A set of d-dimensional points stored row-major, with optional per-point weights.
struct PointBatch {
  int dim = 2;
  std::vector<double> coords;
  std::vector<double> weights;

  PointBatch() = default;
  explicit PointBatch(int d) : dim(d) {}

  [[nodiscard]] std::size_t size() const { return dim > 0 ? coords.size() / static_cast<std::size_t>(dim) : 0; }
  [[nodiscard]] bool empty() const { return coords.empty(); }
  [[nodiscard]] bool has_weights() const { return !weights.empty(); }

  [[nodiscard]] std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  [[nodiscard]] Vec3 vec(std::size_t i) const { return load_point(point(i)); }

  void push(std::span<const double> x) {
    require(static_cast<int>(x.size()) == dim, "PointBatch::push: dimension mismatch");
    coords.insert(coords.end(), x.begin(), x.end());
  }
  void push(const Vec3& x) { push(std::span<const double>(x.data(), static_cast<std::size_t>(dim))); }
};

/// Value, spatial gradient and Laplacian of a scalar field at one point.
struct Jet {
  double value = 0.0;
  Vec3 grad{0.0, 0.0, 0.0};
  double lap = 0.0;
};

/// Adjoint weights on the outputs of a Jet; contracted against per-parameter sensitivities.
struct JetSeed {
  double value = 0.0;
  Vec3 grad{0.0, 0.0, 0.0};
  double lap = 0.0;
};

}  // namespace rmn

#endif  // RMN_CORE_HPP
