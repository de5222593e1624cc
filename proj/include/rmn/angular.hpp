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

#ifndef RMN_ANGULAR_HPP
#define RMN_ANGULAR_HPP

#include <cmath>
#include <span>
#include <vector>

#include "rmn/core.hpp"

namespace rmn {

inline int sh_index(int l, int m) { return l * l + l + m; }
inline int sh_count(int L_max) { return (L_max + 1) * (L_max + 1); }

/// Regular real solid harmonics S_lm(x) (homogeneous harmonic polynomials of degree l)
/// and their Cartesian gradients, for l <= L_max, in (l, m) order.
///
/// Normalised so that S_lm(x) = sqrt(4 pi / (2l + 1)) r^l Y_lm(x / r) with Y_lm the real
/// orthonormal spherical harmonics (no Condon-Shortley phase, S_11 = x, S_1-1 = y).
/// The gradient is carried through the recurrence by the product rule.
inline void solid_harmonics(int L_max, const Vec3& x, std::span<double> S, std::span<Vec3> dS) {
  const double r2 = dot(x, x);
  S[0] = 1.0;
  dS[0] = {0.0, 0.0, 0.0};
  for (int l = 0; l < L_max; ++l) {
    const int lp = l + 1;
    // Sectoral terms m = +-(l+1).
    const double f = std::sqrt((l == 0 ? 2.0 : 1.0) * (2.0 * l + 1.0) / (2.0 * l + 2.0));
    const int ill = sh_index(l, l);
    const int ilm = sh_index(l, -l);
    const double s_ll = S[ill];
    const double s_lm = l == 0 ? 0.0 : S[ilm];
    const Vec3 d_ll = dS[ill];
    const Vec3 d_lm = l == 0 ? Vec3{0.0, 0.0, 0.0} : dS[ilm];
    const int itop = sh_index(lp, lp);
    const int ibot = sh_index(lp, -lp);
    S[itop] = f * (x[0] * s_ll - x[1] * s_lm);
    S[ibot] = f * (x[1] * s_ll + x[0] * s_lm);
    for (int c = 0; c < 3; ++c) {
      dS[itop][c] = f * (x[0] * d_ll[c] - x[1] * d_lm[c]);
      dS[ibot][c] = f * (x[1] * d_ll[c] + x[0] * d_lm[c]);
    }
    dS[itop][0] += f * s_ll;
    dS[itop][1] -= f * s_lm;
    dS[ibot][1] += f * s_ll;
    dS[ibot][0] += f * s_lm;
    // Raise l for |m| <= l.
    for (int m = -l; m <= l; ++m) {
      const double denom = std::sqrt(static_cast<double>((lp + m) * (lp - m)));
      const double a = (2.0 * l + 1.0) / denom;
      const double b = std::sqrt(static_cast<double>((l + m) * (l - m))) / denom;
      const int i0 = sh_index(l, m);
      const int inew = sh_index(lp, m);
      const double s_prev = (l >= 1 && std::abs(m) <= l - 1) ? S[sh_index(l - 1, m)] : 0.0;
      const Vec3 d_prev = (l >= 1 && std::abs(m) <= l - 1) ? dS[sh_index(l - 1, m)] : Vec3{0.0, 0.0, 0.0};
      S[inew] = a * x[2] * S[i0] - b * r2 * s_prev;
      for (int c = 0; c < 3; ++c) dS[inew][c] = a * x[2] * dS[i0][c] - b * (r2 * d_prev[c] + 2.0 * x[c] * s_prev);
      dS[inew][2] += a * S[i0];
    }
  }
}

/// sqrt((2l + 1) / (4 pi)): converts S_lm into r^l Y_lm.
inline double sh_norm(int l) { return std::sqrt((2.0 * l + 1.0) / (4.0 * kPi)); }

/// Real orthonormal spherical harmonics Y_lm(u) for a unit vector u, l = 0..L_max,
/// ordered (0,0), (1,-1), (1,0), (1,1), (2,-2), ...
inline std::vector<double> sh_basis_3d(int L_max, const Vec3& unit_dir) {
  require(L_max >= 0, "sh_basis_3d: L_max must be >= 0");
  require(std::abs(norm(unit_dir) - 1.0) <= 1e-9, "sh_basis_3d: direction is not a unit vector");
  const int n = sh_count(L_max);
  std::vector<double> S(static_cast<std::size_t>(n));
  std::vector<Vec3> dS(static_cast<std::size_t>(n));
  solid_harmonics(L_max, unit_dir, S, dS);
  for (int l = 0; l <= L_max; ++l) {
    const double c = sh_norm(l);
    for (int m = -l; m <= l; ++m) S[static_cast<std::size_t>(sh_index(l, m))] *= c;
  }
  return S;
}

/// One entry of the 2D angular basis: Theta(theta) = cos(nu theta) or sin(nu theta).
struct AngularMode2D {
  double nu = 1.0;
  bool is_sin = false;
};

/// Mode list: cos m theta, sin m theta for m = 1..M_max, then, when half_integer,
/// cos((2n+1) theta / 2), sin((2n+1) theta / 2) for n = 0..N_max.
inline std::vector<AngularMode2D> angular_modes_2d(int M_max, bool half_integer, int N_max) {
  std::vector<AngularMode2D> modes;
  for (int m = 1; m <= M_max; ++m) {
    modes.push_back({static_cast<double>(m), false});
    modes.push_back({static_cast<double>(m), true});
  }
  if (half_integer) {
    for (int n = 0; n <= N_max; ++n) {
      const double nu = (2.0 * n + 1.0) / 2.0;
      modes.push_back({nu, false});
      modes.push_back({nu, true});
    }
  }
  return modes;
}

inline std::vector<double> angular_basis_2d(int M_max, bool half_integer, int N_max, double theta) {
  const auto modes = angular_modes_2d(M_max, half_integer, N_max);
  std::vector<double> out;
  out.reserve(modes.size());
  for (const auto& md : modes) out.push_back(md.is_sin ? std::sin(md.nu * theta) : std::cos(md.nu * theta));
  return out;
}

}  // namespace rmn

#endif  // RMN_ANGULAR_HPP
