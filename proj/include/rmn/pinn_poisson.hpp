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

// Point-charge Poisson problem on [-h, h]^3 with homogeneous Dirichlet data: finite-difference
// ground truth by singular-smooth splitting, flux and L2 metrics, and the training objectives.

#ifndef RMN_PINN_POISSON_HPP
#define RMN_PINN_POISSON_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmn/core.hpp"
#include "rmn/model.hpp"
#include "rmn/optim.hpp"
#include "rmn/param_grad.hpp"
#include "rmn/sampling.hpp"

namespace rmn {

struct Charge {
  Vec3 center{0.0, 0.0, 0.0};
  double q = 1.0;
};

struct ChargeConfig {
  std::vector<Charge> charges;
  double eps = 0.08;
  double d_min = 0.15;
  double half_width = 1.0;
};

inline void validate(const ChargeConfig& c) {
  require(c.half_width > 0.0, "ChargeConfig: half_width must be > 0");
  require(c.eps > 0.0 && c.eps < c.d_min, "ChargeConfig: need 0 < eps < d_min");
  for (const auto& ch : c.charges)
    for (int i = 0; i < 3; ++i)
      require(c.half_width - std::abs(ch.center[i]) >= c.d_min - 1e-12,
              "ChargeConfig: charge closer than d_min to a face");
}

/// The punctured cube as a sampling domain.
inline PuncturedBox punctured_cube(const ChargeConfig& c) {
  PuncturedBox b{3, c.half_width, {}};
  for (const auto& ch : c.charges) b.punctures.push_back({ch.center, c.eps});
  return b;
}

/// Charge center uniform in [-h + d_min, h - d_min]^3.
inline Vec3 random_charge_center(double half_width, double d_min, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-half_width + d_min, half_width - d_min);
  Vec3 c{};
  for (double& v : c) v = u(rng);
  return c;
}

/// Free-space part sum_j q_j / (4 pi |x - c_j|).
inline double u_singular(const ChargeConfig& c, const Vec3& x) {
  double s = 0.0;
  for (const auto& ch : c.charges) {
    const Vec3 d{x[0] - ch.center[0], x[1] - ch.center[1], x[2] - ch.center[2]};
    s += ch.q / (4.0 * kPi * norm(d));
  }
  return s;
}

/// Harmonic correction v on an n^3 node grid; node (i, j, k) sits at
/// (-h + i*dx, -h + j*dx, -h + k*dx) and is stored at (k*n + j)*n + i.
struct GroundTruthField {
  ChargeConfig config;
  int n = 0;
  double tol = 0.0;
  std::vector<double> v;
  int iterations = 0;
  double rel_residual = 0.0;

  [[nodiscard]] double spacing() const { return 2.0 * config.half_width / (n - 1); }
  [[nodiscard]] std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * n + static_cast<std::size_t>(j)) * n + static_cast<std::size_t>(i);
  }
  [[nodiscard]] Vec3 node(int i, int j, int k) const {
    const double h = spacing(), a = -config.half_width;
    return {a + i * h, a + j * h, a + k * h};
  }
};

/// Solves the 7-point discrete Laplace problem for v with v = -u_sing on the faces, by
/// conjugate gradients to relative residual `tol`.
inline GroundTruthField solve_smooth_correction(const ChargeConfig& cfg, int n_grid, double tol,
                                                int max_iter = 20000) {
  validate(cfg);
  require(n_grid >= 17, "solve_smooth_correction: n_grid must be >= 17");
  require(tol > 0.0, "solve_smooth_correction: tol must be > 0");
  GroundTruthField f;
  f.config = cfg;
  f.n = n_grid;
  f.tol = tol;
  const int n = n_grid;
  f.v.assign(static_cast<std::size_t>(n) * n * n, 0.0);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        if (i == 0 || j == 0 || k == 0 || i == n - 1 || j == n - 1 || k == n - 1)
          f.v[f.index(i, j, k)] = -u_singular(cfg, f.node(i, j, k));

  // Unknowns are the (n-2)^3 interior nodes; system (scaled by dx^2) is 6 v_p - sum nb = b.
  const int m = n - 2;
  const std::size_t N = static_cast<std::size_t>(m) * m * m;
  auto id = [m](int i, int j, int k) {
    return (static_cast<std::size_t>(k) * m + static_cast<std::size_t>(j)) * m + static_cast<std::size_t>(i);
  };
  std::vector<double> b(N, 0.0), x(N, 0.0), r(N), p(N), Ap(N);
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) {
        double s = 0.0;
        const int I = i + 1, J = j + 1, K = k + 1;
        if (I == 1) s += f.v[f.index(0, J, K)];
        if (I == n - 2) s += f.v[f.index(n - 1, J, K)];
        if (J == 1) s += f.v[f.index(I, 0, K)];
        if (J == n - 2) s += f.v[f.index(I, n - 1, K)];
        if (K == 1) s += f.v[f.index(I, J, 0)];
        if (K == n - 2) s += f.v[f.index(I, J, n - 1)];
        b[id(i, j, k)] = s;
      }
  auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
    for (int k = 0; k < m; ++k)
      for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) {
          const std::size_t c = id(i, j, k);
          double s = 6.0 * in[c];
          if (i > 0) s -= in[c - 1];
          if (i < m - 1) s -= in[c + 1];
          if (j > 0) s -= in[c - static_cast<std::size_t>(m)];
          if (j < m - 1) s -= in[c + static_cast<std::size_t>(m)];
          if (k > 0) s -= in[c - static_cast<std::size_t>(m) * m];
          if (k < m - 1) s -= in[c + static_cast<std::size_t>(m) * m];
          out[c] = s;
        }
  };
  auto dotv = [N](const std::vector<double>& a, const std::vector<double>& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += a[i] * c[i];
    return s;
  };
  const double bnorm = std::sqrt(dotv(b, b));
  r = b;
  p = r;
  double rr = dotv(r, r);
  int it = 0;
  if (bnorm > 0.0) {
    while (std::sqrt(rr) > tol * bnorm) {
      if (it >= max_iter) {
        throw std::runtime_error("solve_smooth_correction: no convergence after " + std::to_string(it) +
                                 " iterations, relative residual " + std::to_string(std::sqrt(rr) / bnorm));
      }
      apply(p, Ap);
      const double alpha = rr / dotv(p, Ap);
      for (std::size_t i = 0; i < N; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * Ap[i];
      }
      const double rr_new = dotv(r, r);
      const double beta = rr_new / rr;
      rr = rr_new;
      for (std::size_t i = 0; i < N; ++i) p[i] = r[i] + beta * p[i];
      ++it;
    }
  }
  f.iterations = it;
  f.rel_residual = bnorm > 0.0 ? std::sqrt(rr) / bnorm : 0.0;
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) f.v[f.index(i + 1, j + 1, k + 1)] = x[id(i, j, k)];
  return f;
}

/// Trilinear interpolation of the stored correction v.
inline double interpolate_correction(const GroundTruthField& f, const Vec3& x) {
  const double h = f.spacing(), a = -f.config.half_width;
  int idx[3];
  double t[3];
  for (int d = 0; d < 3; ++d) {
    const double s = (x[d] - a) / h;
    int i = static_cast<int>(std::floor(s));
    i = std::clamp(i, 0, f.n - 2);
    idx[d] = i;
    t[d] = s - i;
  }
  double out = 0.0;
  for (int c = 0; c < 8; ++c) {
    const int di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
    const double w = (di ? t[0] : 1.0 - t[0]) * (dj ? t[1] : 1.0 - t[1]) * (dk ? t[2] : 1.0 - t[2]);
    out += w * f.v[f.index(idx[0] + di, idx[1] + dj, idx[2] + dk)];
  }
  return out;
}

/// u*(x) = u_sing(x) + v(x), for x in the cube and outside every puncture.
inline double eval_ground_truth(const GroundTruthField& f, const Vec3& x) {
  const double hw = f.config.half_width;
  for (int d = 0; d < 3; ++d) require(std::abs(x[d]) <= hw * (1.0 + 1e-12), "eval_ground_truth: point outside the cube");
  for (const auto& ch : f.config.charges) {
    const Vec3 d{x[0] - ch.center[0], x[1] - ch.center[1], x[2] - ch.center[2]};
    require(norm(d) >= f.config.eps * (1.0 - 1e-12), "eval_ground_truth: point inside a puncture");
  }
  return u_singular(f.config, x) + interpolate_correction(f, x);
}

inline std::vector<double> eval_ground_truth(const GroundTruthField& f, const PointBatch& batch) {
  std::vector<double> out(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) out[i] = eval_ground_truth(f, batch.vec(i));
  return out;
}

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

constexpr char kFieldMagic[8] = {'R', 'M', 'N', 'G', 'T', '0', '0', '1'};

}  // namespace detail

/// Cache key over everything that determines the solve.
inline std::string field_cache_key(const ChargeConfig& c, int n_grid, double tol) {
  std::ostringstream s;
  s.precision(17);
  s << "n=" << n_grid << ";tol=" << tol << ";hw=" << c.half_width << ";eps=" << c.eps;
  for (const auto& ch : c.charges) s << ";c=" << ch.center[0] << "," << ch.center[1] << "," << ch.center[2] << ",q=" << ch.q;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(detail::fnv1a(s.str())));
  return buf;
}

/// Binary layout: 8-byte magic "RMNGT001", int32 n, float64 tol, float64 half_width,
/// float64 eps, int32 charge count, (cx, cy, cz, q) float64 per charge, int32 iterations,
/// float64 relative residual, then n^3 float64 node values in the order of GroundTruthField.
inline void save_field(const GroundTruthField& f, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "save_field: cannot open " + path.string());
  auto put = [&](const auto& v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
  out.write(detail::kFieldMagic, 8);
  put(static_cast<std::int32_t>(f.n));
  put(f.tol);
  put(f.config.half_width);
  put(f.config.eps);
  put(static_cast<std::int32_t>(f.config.charges.size()));
  for (const auto& ch : f.config.charges) {
    put(ch.center[0]);
    put(ch.center[1]);
    put(ch.center[2]);
    put(ch.q);
  }
  put(static_cast<std::int32_t>(f.iterations));
  put(f.rel_residual);
  out.write(reinterpret_cast<const char*>(f.v.data()), static_cast<std::streamsize>(f.v.size() * sizeof(double)));
}

inline GroundTruthField load_field(const std::filesystem::path& path, double d_min = 0.15) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "load_field: cannot open " + path.string());
  auto get = [&](auto& v) { in.read(reinterpret_cast<char*>(&v), sizeof v); };
  char magic[8];
  in.read(magic, 8);
  require(std::equal(magic, magic + 8, detail::kFieldMagic), "load_field: bad magic in " + path.string());
  GroundTruthField f;
  std::int32_t n = 0, nc = 0, iters = 0;
  get(n);
  get(f.tol);
  get(f.config.half_width);
  get(f.config.eps);
  get(nc);
  require(n >= 2 && nc >= 0, "load_field: corrupt header");
  f.n = n;
  f.config.d_min = d_min;
  for (std::int32_t c = 0; c < nc; ++c) {
    Charge ch;
    get(ch.center[0]);
    get(ch.center[1]);
    get(ch.center[2]);
    get(ch.q);
    f.config.charges.push_back(ch);
  }
  get(iters);
  f.iterations = iters;
  get(f.rel_residual);
  f.v.resize(static_cast<std::size_t>(n) * n * n);
  in.read(reinterpret_cast<char*>(f.v.data()), static_cast<std::streamsize>(f.v.size() * sizeof(double)));
  require(static_cast<bool>(in), "load_field: truncated file " + path.string());
  return f;
}

/// Loads the field from `cache_dir` when a file with the matching key exists, else solves
/// and writes it there. An empty cache_dir disables caching.
inline GroundTruthField cached_ground_truth(const ChargeConfig& cfg, int n_grid, double tol,
                                           const std::filesystem::path& cache_dir) {
  if (cache_dir.empty()) return solve_smooth_correction(cfg, n_grid, tol);
  const auto path = cache_dir / ("gt_" + field_cache_key(cfg, n_grid, tol) + ".bin");
  if (std::filesystem::exists(path)) {
    auto f = load_field(path, cfg.d_min);
    f.config.d_min = cfg.d_min;
    return f;
  }
  auto f = solve_smooth_correction(cfg, n_grid, tol);
  std::filesystem::create_directories(cache_dir);
  const auto tmp = path.string() + ".tmp";
  save_field(f, tmp);
  std::filesystem::rename(tmp, path);
  return f;
}

/// Per charge: | 4 pi eps^2 mean_i grad phi . n_i + q_j | on a Fibonacci sphere of n points.
inline std::vector<double> flux_error(const ModelParams& params, const ChargeConfig& cfg, std::size_t n_sphere) {
  require(n_sphere >= 100, "flux_error: n_sphere must be >= 100");
  require(params.dim() == 3, "flux_error: model must be 3D");
  const Evaluator ev(params);
  Workspace ws = ev.make_workspace();
  std::vector<double> out;
  for (const auto& ch : cfg.charges) {
    const auto s = fibonacci_sphere(ch.center, cfg.eps, n_sphere);
    double m = 0.0;
    for (std::size_t i = 0; i < s.points.size(); ++i) m += dot(ev.jet(s.points[i], ws).grad, s.normals[i]);
    m /= static_cast<double>(s.points.size());
    out.push_back(std::abs(sphere_area(3, cfg.eps) * m + ch.q));
  }
  return out;
}

/// ||u_theta - u*||_2 / ||u*||_2 over `points`.
inline double rel_l2(const ModelParams& params, const GroundTruthField& field, const PointBatch& points) {
  const auto u = forward_batch(params, points);
  const auto us = eval_ground_truth(field, points);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    num += (u[i] - us[i]) * (u[i] - us[i]);
    den += us[i] * us[i];
  }
  require(den > 0.0, "rel_l2: reference field is identically zero");
  return std::sqrt(num / den);
}

struct PinnSampling {
  std::size_t n_interior = 30000;
  std::size_t n_boundary = 8000;
  std::size_t n_sphere = 1500;
};

/// Physics-only loss: PDE residual, Dirichlet boundary and Gauss flux, with the warmup curriculum.
class PinnObjective : public Objective {
 public:
  PinnObjective(ChargeConfig cfg, PinnSampling sizes, LossWeights base, std::int64_t warmup_steps)
      : cfg_(std::move(cfg)), sizes_(sizes), base_(base), warmup_(warmup_steps) {
    for (const auto& ch : cfg_.charges) {
      auto s = fibonacci_sphere(ch.center, cfg_.eps, sizes_.n_sphere);
      s.charge = ch.q;
      spheres_.push_back(std::move(s));
    }
  }

  void resample(std::uint64_t seed, int round) override {
    const std::uint64_t s = seed * 1000003ull + static_cast<std::uint64_t>(round) * 7919ull + 11ull;
    interior_ = sample_uniform(punctured_cube(cfg_), sizes_.n_interior, s);
    boundary_ = boundary_sample_cube(cfg_.half_width, sizes_.n_boundary, s + 1);
  }

  double evaluate(const ModelParams& p, std::int64_t step, std::span<double> grad,
                  std::vector<double>& components) override {
    const LossWeights w = curriculum_weights(step, warmup_, base_);
    auto res = grad_pinn(p, interior_, boundary_, spheres_, w);
    std::copy(res.grad.data().begin(), res.grad.data().end(), grad.begin());
    components = {res.loss.pde, res.loss.bc, res.loss.flux};
    return res.loss.total;
  }

  [[nodiscard]] std::vector<std::string> component_names() const override { return {"pde", "bc", "flux"}; }

 private:
  ChargeConfig cfg_;
  PinnSampling sizes_;
  LossWeights base_;
  std::int64_t warmup_;
  std::vector<SphereSamples> spheres_;
  PointBatch interior_{3};
  PointBatch boundary_{3};
};

/// MSE against the ground truth on resampled interior points.
class SupervisedPoissonObjective : public Objective {
 public:
  SupervisedPoissonObjective(const GroundTruthField& field, std::size_t n_interior)
      : field_(field), n_(n_interior) {}

  void resample(std::uint64_t seed, int round) override {
    const std::uint64_t s = seed * 1000003ull + static_cast<std::uint64_t>(round) * 7919ull + 11ull;
    batch_ = sample_uniform(punctured_cube(field_.config), n_, s);
    targets_ = eval_ground_truth(field_, batch_);
  }

  double evaluate(const ModelParams& p, std::int64_t, std::span<double> grad, std::vector<double>&) override {
    auto res = grad_mse(p, batch_, targets_);
    std::copy(res.grad.data().begin(), res.grad.data().end(), grad.begin());
    return res.loss;
  }

 private:
  const GroundTruthField& field_;
  std::size_t n_;
  PointBatch batch_{3};
  std::vector<double> targets_;
};

/// RMN-MC with one fixed center at the charge, no log term, exponents on [mu_min, mu_max].
inline ModelSpec pinn_model_spec(int K = 6, double mu_min = -1.0, double mu_max = 2.0) {
  ModelSpec s = ModelSpec::multicenter(3, 1, K);
  s.mu_min = mu_min;
  s.mu_max = mu_max;
  s.center_log = false;
  s.learn_centers = false;
  return s;
}

/// Default init with the center at the charge and the first coefficient at 1/(4 pi).
inline ModelParams pinn_initial_params(const ModelSpec& spec, const Vec3& center, std::uint64_t seed) {
  ModelParams p = initialize(spec, seed);
  auto c = p.segment("centers");
  for (int i = 0; i < 3; ++i) c[static_cast<std::size_t>(i)] = center[static_cast<std::size_t>(i)];
  p.segment("coeffs")[0] = 1.0 / (4.0 * kPi);
  return p;
}

}  // namespace rmn

#endif  // RMN_PINN_POISSON_HPP
