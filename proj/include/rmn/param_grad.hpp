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

// Loss functions with hand-assembled reverse-mode gradients, and a central
// finite-difference verifier that works on any scalar function of the parameters.

#ifndef RMN_PARAM_GRAD_HPP
#define RMN_PARAM_GRAD_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rmn/core.hpp"
#include "rmn/model.hpp"

namespace rmn {

struct MseResult {
  double loss = 0.0;
  ParamGradient grad;
};

namespace detail {

inline double point_weight(std::span<const double> weights, std::size_t i) {
  return weights.empty() ? 1.0 : weights[i];
}

inline void check_weights(std::span<const double> weights, std::size_t n) {
  require(weights.empty() || weights.size() == n, "loss: weights and batch differ in length");
  for (double w : weights) require(w >= 0.0, "loss: weights must be nonnegative");
}

}  // namespace detail

/// loss = (1/N) sum_i w_i (phi(x_i) - f_i)^2 and its gradient. Empty `weights` means
/// the batch's own weights if it carries them, else uniform.
inline MseResult grad_mse(const ModelParams& params, const PointBatch& batch, std::span<const double> targets,
                          std::span<const double> weights = {}) {
  require(!batch.empty(), "grad_mse: empty batch");
  require(batch.dim == params.dim(), "grad_mse: batch dimension does not match model");
  require(targets.size() == batch.size(), "grad_mse: batch and targets differ in length");
  if (weights.empty() && batch.has_weights()) weights = batch.weights;
  detail::check_weights(weights, batch.size());

  const Evaluator ev(params);
  Workspace ws = ev.make_workspace();
  MseResult out{0.0, params.zero_gradient()};
  std::span<double> g = out.grad.values();
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double w = detail::point_weight(weights, i);
    const double f = targets[i];
    ev.evaluate(
        batch.vec(i),
        [&](const Jet& jet) {
          const double res = jet.value - f;
          loss += w * res * res;
          JetSeed s;
          s.value = 2.0 * w * res * inv_n;
          return s;
        },
        g, ws);
  }
  out.loss = loss * inv_n;
  ev.finalize_gradient(g);
  return out;
}

/// Loss only (no gradient), same definition as grad_mse.
inline double mse_loss(const ModelParams& params, const PointBatch& batch, std::span<const double> targets,
                       std::span<const double> weights = {}) {
  require(!batch.empty(), "mse_loss: empty batch");
  require(targets.size() == batch.size(), "mse_loss: batch and targets differ in length");
  if (weights.empty() && batch.has_weights()) weights = batch.weights;
  const Evaluator ev(params);
  Workspace ws = ev.make_workspace();
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double res = ev.value(batch.vec(i), ws) - targets[i];
    loss += detail::point_weight(weights, i) * res * res;
  }
  return loss / static_cast<double>(batch.size());
}

struct LossWeights {
  double pde = 1.0;
  double bc = 200.0;
  double flux = 50.0;
};

/// Quadrature points on the boundary of one puncture, with outward normals.
struct SphereSamples {
  Vec3 center{0.0, 0.0, 0.0};
  double radius = 0.0;
  double charge = 0.0;
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
};

/// Surface measure of the sphere of radius eps in dimension d (circle length in 2D).
inline double sphere_area(int dim, double eps) { return dim == 2 ? 2.0 * kPi * eps : 4.0 * kPi * eps * eps; }

struct PinnLoss {
  double pde = 0.0;
  double bc = 0.0;
  double flux = 0.0;
  double total = 0.0;
};

struct PinnResult {
  PinnLoss loss;
  ParamGradient grad;
};

namespace detail {

template <bool WithGrad>
PinnLoss pinn_impl(const ModelParams& params, const PointBatch& interior, const PointBatch& boundary,
                   const std::vector<SphereSamples>& spheres, const LossWeights& w, std::span<double> g) {
  require(!interior.empty() && !boundary.empty(), "grad_pinn: empty collocation set");
  require(interior.dim == params.dim() && boundary.dim == params.dim(), "grad_pinn: dimension mismatch");
  for (const auto& sp : spheres) {
    require(!sp.points.empty() && sp.points.size() == sp.normals.size(), "grad_pinn: bad sphere samples");
    for (const auto& p : sp.points) {
      Vec3 d{p[0] - sp.center[0], p[1] - sp.center[1], p[2] - sp.center[2]};
      require(std::abs(norm(d) - sp.radius) <= 1e-9 * std::max(1.0, sp.radius),
              "grad_pinn: sphere point is not on its puncture sphere");
    }
  }
  const Evaluator ev(params);
  Workspace ws = ev.make_workspace();
  const std::span<double> gg = WithGrad ? g : std::span<double>{};
  PinnLoss L;

  const double ni = 1.0 / static_cast<double>(interior.size());
  for (std::size_t i = 0; i < interior.size(); ++i) {
    const Jet jet = ev.evaluate(
        interior.vec(i),
        [&](const Jet& jet) {
          JetSeed s;
          s.lap = w.pde * 2.0 * jet.lap * ni;
          return s;
        },
        gg, ws);
    L.pde += jet.lap * jet.lap;
  }
  L.pde *= ni;

  const double nb = 1.0 / static_cast<double>(boundary.size());
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    const Jet jet = ev.evaluate(
        boundary.vec(i),
        [&](const Jet& jet) {
          JetSeed s;
          s.value = w.bc * 2.0 * jet.value * nb;
          return s;
        },
        gg, ws);
    L.bc += jet.value * jet.value;
  }
  L.bc *= nb;

  for (const auto& sp : spheres) {
    const double area = sphere_area(params.dim(), sp.radius);
    const double ns = 1.0 / static_cast<double>(sp.points.size());
    double mean_flux = 0.0;
    for (std::size_t i = 0; i < sp.points.size(); ++i) mean_flux += dot(ev.jet(sp.points[i], ws).grad, sp.normals[i]);
    mean_flux *= ns;
    const double resid = area * mean_flux + sp.charge;
    L.flux += resid * resid;
    if constexpr (WithGrad) {
      const double coef = w.flux * 2.0 * resid * area * ns;
      for (std::size_t i = 0; i < sp.points.size(); ++i) {
        const Vec3 n = sp.normals[i];
        ev.evaluate(
            sp.points[i],
            [&](const Jet&) {
              JetSeed s;
              s.grad = {coef * n[0], coef * n[1], coef * n[2]};
              return s;
            },
            gg, ws);
      }
    }
  }
  L.total = w.pde * L.pde + w.bc * L.bc + w.flux * L.flux;
  if constexpr (WithGrad) ev.finalize_gradient(g);
  return L;
}

}  // namespace detail

/// Punctured-domain physics loss: mean (lap phi)^2 over the interior, mean phi^2 on the
/// outer boundary, and sum_j (|dB_j| mean(grad phi . n) + q_j)^2 over the puncture
/// spheres, combined with `weights`; plus its parameter gradient.
inline PinnResult grad_pinn(const ModelParams& params, const PointBatch& interior, const PointBatch& boundary,
                            const std::vector<SphereSamples>& spheres, const LossWeights& weights) {
  PinnResult out{{}, params.zero_gradient()};
  out.loss = detail::pinn_impl<true>(params, interior, boundary, spheres, weights, out.grad.values());
  return out;
}

inline PinnLoss pinn_loss(const ModelParams& params, const PointBatch& interior, const PointBatch& boundary,
                          const std::vector<SphereSamples>& spheres, const LossWeights& weights) {
  return detail::pinn_impl<false>(params, interior, boundary, spheres, weights, {});
}

struct FdEntry {
  std::size_t index = 0;
  std::string name;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_err = 0.0;
};

struct FdReport {
  double max_rel_err = 0.0;
  std::size_t worst_index = 0;
  std::string worst_name;
  std::vector<FdEntry> flagged;  // entries above tolerance
  bool passed = true;
};

/// Compares `analytic` with central differences of f, step h_i = step * max(1, |p_i|).
/// Relative error is |a - n| / max(|a|, |n|, 1e-6 * max_j |a_j|, 1e-12).
inline FdReport fd_check(const std::function<double(std::span<const double>)>& f, std::span<const double> params,
                         std::span<const double> analytic, double step, double tol,
                         const ParamLayout* layout = nullptr) {
  require(step > 0.0, "fd_check: step must be > 0");
  require(params.size() == analytic.size(), "fd_check: gradient size mismatch");
  double gmax = 0.0;
  for (double a : analytic) gmax = std::max(gmax, std::abs(a));
  const double floor = std::max(1e-6 * gmax, 1e-12);
  std::vector<double> p(params.begin(), params.end());
  FdReport rep;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double h = step * std::max(1.0, std::abs(params[i]));
    p[i] = params[i] + h;
    const double fp = f(p);
    p[i] = params[i] - h;
    const double fm = f(p);
    p[i] = params[i];
    const double num = (fp - fm) / (2.0 * h);
    const double den = std::max({std::abs(analytic[i]), std::abs(num), floor});
    const double err = std::abs(analytic[i] - num) / den;
    const std::string name = layout ? layout->entry_name(i) : "p[" + std::to_string(i) + "]";
    if (i == 0 || err > rep.max_rel_err) {
      rep.max_rel_err = err;
      rep.worst_index = i;
      rep.worst_name = name;
    }
    if (!(err <= tol)) rep.flagged.push_back({i, name, analytic[i], num, err});
  }
  rep.passed = rep.flagged.empty();
  return rep;
}

}  // namespace rmn

#endif  // RMN_PARAM_GRAD_HPP
