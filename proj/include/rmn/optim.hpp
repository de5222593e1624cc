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

// Adam, learning-rate schedules, clipping, loss curricula and the training loop.

#ifndef RMN_OPTIM_HPP
#define RMN_OPTIM_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmn/core.hpp"
#include "rmn/model.hpp"
#include "rmn/param_grad.hpp"

namespace rmn {

/// Raised by adam_step when a gradient entry is NaN or infinite.
struct NonFiniteGradient : std::runtime_error {
  NonFiniteGradient(std::string name, std::size_t index, double value)
      : std::runtime_error("non-finite gradient " + std::to_string(value) + " for parameter " + name),
        parameter(std::move(name)),
        index(index) {}
  std::string parameter;
  std::size_t index;
};

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;

  AdamState() = default;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update. Entries whose trainable flag is 0 are left alone,
/// moments included.
inline void adam_step(AdamState& st, ModelParams& params, std::span<const double> grad, double lr) {
  require(st.m.size() == params.size() && st.v.size() == params.size(), "adam_step: state shape mismatch");
  require(grad.size() == params.size(), "adam_step: gradient shape mismatch");
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (!std::isfinite(grad[i])) throw NonFiniteGradient(params.layout().entry_name(i), i, grad[i]);
  ++st.step;
  const double t = static_cast<double>(st.step);
  const double c1 = 1.0 - std::pow(st.beta1, t);
  const double c2 = 1.0 - std::pow(st.beta2, t);
  const auto& mask = params.trainable_mask();
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!mask[i]) continue;
    st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * grad[i];
    st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * grad[i] * grad[i];
    params[i] -= lr * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + st.eps);
  }
}

enum class Schedule { Constant, Cosine };

/// Learning rate at `step` of `total`; cosine runs from lr0 at 0 to lr_final at total.
inline double scheduled_lr(Schedule s, double lr0, double lr_final, std::int64_t step, std::int64_t total) {
  if (s == Schedule::Constant || total <= 0) return lr0;
  const double t = std::clamp(static_cast<double>(step) / static_cast<double>(total), 0.0, 1.0);
  return lr_final + 0.5 * (lr0 - lr_final) * (1.0 + std::cos(kPi * t));
}

/// Rescales g in place so its l2 norm is at most max_norm; returns the norm before clipping.
inline double clip_global_norm(std::span<double> g, double max_norm) {
  double s = 0.0;
  for (double v : g) s += v * v;
  const double n = std::sqrt(s);
  if (max_norm > 0.0 && n > max_norm) {
    const double f = max_norm / n;
    for (double& v : g) v *= f;
  }
  return n;
}

/// Two-phase warmup. Phase 1 (first 40%): pde x 0.1->1, flux x 0.1->0.5.
/// Phase 2: pde x 1, flux x 0.5->1. After warmup both multipliers are 1; bc is never scaled.
inline LossWeights curriculum_weights(std::int64_t step, std::int64_t warmup_steps, const LossWeights& base) {
  require(step >= 0, "curriculum_weights: negative step");
  double sp = 1.0, sf = 1.0;
  if (warmup_steps > 0 && step < warmup_steps) {
    const double t = static_cast<double>(step) / static_cast<double>(warmup_steps);
    if (t < 0.4) {
      const double u = t / 0.4;
      sp = 0.1 + 0.9 * u;
      sf = 0.1 + 0.4 * u;
    } else {
      sf = 0.5 + 0.5 * (t - 0.4) / 0.6;
    }
  }
  return {base.pde * sp, base.bc, base.flux * sf};
}

enum class Weighting { Uniform, RSquared };

struct TrainConfig {
  double lr = 2e-3;
  Schedule schedule = Schedule::Constant;
  double lr_final = 1e-4;
  int iterations = 5000;
  double clip_norm = 0.0;  // <= 0 disables clipping
  int resample_every = 0;  // <= 0 disables resampling
  std::uint64_t seed = 0;
  Weighting weighting = Weighting::Uniform;
  bool output_normalization = false;
  int log_every = 50;
};

inline void validate(const TrainConfig& c) {
  require(c.iterations >= 1, "TrainConfig: iterations must be >= 1");
  require(c.lr >= 0.0 && std::isfinite(c.lr), "TrainConfig: lr must be finite and >= 0");
  require(c.lr_final >= 0.0, "TrainConfig: lr_final must be >= 0");
  require(c.log_every >= 1, "TrainConfig: log_every must be >= 1");
}

struct TracePoint {
  int iter = 0;
  double loss = 0.0;
  std::vector<double> components;
};

struct SpectrumEntry {
  int group = 0;  // ladder index (center or coordinate for MC / MSN)
  double mu = 0.0;
  double coeff = 0.0;
};

struct TrainReport {
  std::uint64_t seed = 0;
  bool failed = false;
  std::string failure;
  int iterations_run = 0;
  double final_loss = 0.0;
  double rmse = 0.0;
  std::vector<TracePoint> trace;
  std::vector<std::string> component_names;
  std::vector<SpectrumEntry> spectrum;
  double log_coeff = 0.0;
  double log_exponent = 0.0;
  std::vector<Vec3> centers;
  double norm_mean = 0.0;
  double norm_scale = 1.0;
  std::size_t param_count = 0;
  std::size_t trainable_count = 0;
  double wall_time_s = 0.0;
  ModelParams params;
};

/// Radial (mu_k, a_k) pairs, one group per ladder that multiplies radial coefficients.
inline std::vector<SpectrumEntry> exponent_spectrum(const ModelParams& p) {
  std::vector<SpectrumEntry> out;
  const auto coeffs = p.segment("coeffs");
  const auto K = static_cast<std::size_t>(p.spec().K);
  const std::size_t groups = p.kind() == ModelKind::MultiCenter ? static_cast<std::size_t>(p.spec().J)
                             : p.kind() == ModelKind::MsnCoord  ? static_cast<std::size_t>(p.dim())
                                                                : 1;
  for (std::size_t g = 0; g < groups; ++g) {
    const auto mu = p.exponents(g);
    for (std::size_t k = 0; k < K; ++k) out.push_back({static_cast<int>(g), mu[k], coeffs[g * K + k]});
  }
  return out;
}

/// Exponents whose |a_k| exceeds rel_threshold * max |a_j| within the same group,
/// ordered by decreasing |a_k|.
inline std::vector<SpectrumEntry> dominant_exponents(const std::vector<SpectrumEntry>& spec,
                                                     double rel_threshold = 1e-3) {
  std::vector<SpectrumEntry> out;
  int groups = 0;
  for (const auto& e : spec) groups = std::max(groups, e.group + 1);
  for (int g = 0; g < groups; ++g) {
    double amax = 0.0;
    for (const auto& e : spec)
      if (e.group == g) amax = std::max(amax, std::abs(e.coeff));
    for (const auto& e : spec)
      if (e.group == g && std::abs(e.coeff) > rel_threshold * amax && amax > 0.0) out.push_back(e);
  }
  std::stable_sort(out.begin(), out.end(), [](const SpectrumEntry& a, const SpectrumEntry& b) {
    return a.group != b.group ? a.group < b.group : std::abs(a.coeff) > std::abs(b.coeff);
  });
  return out;
}

inline std::vector<Vec3> model_centers(const ModelParams& p) {
  std::vector<Vec3> out;
  if (p.kind() != ModelKind::MultiCenter) return out;
  const auto c = p.segment("centers");
  const auto d = static_cast<std::size_t>(p.dim());
  for (std::size_t j = 0; j < static_cast<std::size_t>(p.spec().J); ++j) {
    Vec3 v{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < d; ++i) v[i] = c[j * d + i];
    out.push_back(v);
  }
  return out;
}

/// Default initialization: raw gaps 0 plus N(0, 0.05^2) jitter (near-uniform exponents),
/// coefficients N(0, 1/K), log coefficient and log exponent 0.1, bias 0.
/// MC centers are zero here; callers place them.
inline ModelParams initialize(const ModelSpec& spec, std::uint64_t seed) {
  ModelParams p(spec);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, 0.05);
  const auto fill_normal = [&](std::span<double> s, double var) {
    std::normal_distribution<double> n(0.0, std::sqrt(var));
    for (double& v : s) v = n(rng);
  };
  for (const auto& L : p.layout().ladders())
    for (std::size_t k = 0; k < L.K; ++k) p[L.offset + k] = jitter(rng);
  fill_normal(p.segment("coeffs"), 1.0 / spec.K);
  if (p.layout().has("ang_coeffs")) fill_normal(p.segment("ang_coeffs"), 1.0 / spec.K_a);
  if (p.layout().has("log_coeff")) {
    p.segment("log_coeff")[0] = spec.log_enabled ? 0.1 : 0.0;
    p.segment("log_exponent")[0] = 0.1;
  }
  if (p.layout().has("log_coeffs"))
    for (double& v : p.segment("log_coeffs")) v = 0.1;
  return p;
}

/// A differentiable training loss. evaluate() fills `grad` (stored-parameter coordinates)
/// and returns the loss; `components` receives named sub-losses when there are any.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual double evaluate(const ModelParams& p, std::int64_t step, std::span<double> grad,
                          std::vector<double>& components) = 0;
  /// Called before step 0 with round 0 and again every resample_every steps.
  virtual void resample(std::uint64_t /*seed*/, int /*round*/) {}
  [[nodiscard]] virtual std::vector<std::string> component_names() const { return {}; }
};

/// Full-batch Adam on `obj` from `init`. A non-finite loss or gradient stops the run,
/// marks the report failed and keeps the last finite parameters.
inline TrainReport train(const ModelParams& init, Objective& obj, const TrainConfig& cfg) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  TrainReport rep;
  rep.seed = cfg.seed;
  rep.component_names = obj.component_names();
  rep.param_count = init.size();
  rep.trainable_count = init.trainable_count();

  ModelParams p = init;
  AdamState st(p.size());
  ParamGradient g = p.zero_gradient();
  std::vector<double> comps;
  int round = 0;
  obj.resample(cfg.seed, round);
  double loss = 0.0;
  int it = 0;
  for (; it < cfg.iterations; ++it) {
    if (cfg.resample_every > 0 && it > 0 && it % cfg.resample_every == 0) obj.resample(cfg.seed, ++round);
    std::fill(g.data().begin(), g.data().end(), 0.0);
    comps.clear();
    loss = obj.evaluate(p, it, g.values(), comps);
    const bool finite = std::isfinite(loss) && std::all_of(g.data().begin(), g.data().end(),
                                                           [](double v) { return std::isfinite(v); });
    if (!finite) {
      rep.failed = true;
      rep.failure = "non-finite loss or gradient at iteration " + std::to_string(it);
      break;
    }
    if (it % cfg.log_every == 0) rep.trace.push_back({it, loss, comps});
    const auto& mask = p.trainable_mask();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!mask[i]) g[i] = 0.0;
    if (cfg.clip_norm > 0.0) clip_global_norm(g.values(), cfg.clip_norm);
    ModelParams prev = p;
    adam_step(st, p, g.values(), scheduled_lr(cfg.schedule, cfg.lr, cfg.lr_final, it, cfg.iterations));
    if (!std::all_of(p.data().begin(), p.data().end(), [](double v) { return std::isfinite(v); })) {
      p = prev;
      rep.failed = true;
      rep.failure = "non-finite parameters after iteration " + std::to_string(it);
      break;
    }
  }
  rep.iterations_run = it;
  if (!rep.failed) {
    std::fill(g.data().begin(), g.data().end(), 0.0);
    comps.clear();
    loss = obj.evaluate(p, it, g.values(), comps);
    rep.trace.push_back({it, loss, comps});
  }
  rep.final_loss = rep.trace.empty() ? loss : rep.trace.back().loss;
  rep.spectrum = exponent_spectrum(p);
  if (p.layout().has("log_coeff")) {
    rep.log_coeff = p.segment("log_coeff")[0];
    rep.log_exponent = p.segment("log_exponent")[0];
  }
  rep.centers = model_centers(p);
  rep.params = std::move(p);
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

/// Supervised fit to fixed samples, with optional r^2 weighting and output normalization.
class FitObjective : public Objective {
 public:
  FitObjective(PointBatch batch, std::vector<double> targets, Weighting weighting, bool normalize)
      : batch_(std::move(batch)), targets_(std::move(targets)) {
    require(targets_.size() == batch_.size() && !batch_.empty(), "FitObjective: batch/target mismatch");
    if (normalize) {
      double s = 0.0;
      for (double v : targets_) s += v;
      mean_ = s / static_cast<double>(targets_.size());
      double q = 0.0;
      for (double v : targets_) q += (v - mean_) * (v - mean_);
      scale_ = std::sqrt(q / static_cast<double>(targets_.size()));
      require(scale_ > 0.0, "FitObjective: constant targets cannot be normalized");
      for (double& v : targets_) v = (v - mean_) / scale_;
    }
    if (weighting == Weighting::RSquared) {
      weights_.resize(batch_.size());
      double s = 0.0;
      for (std::size_t i = 0; i < batch_.size(); ++i) {
        const double r = norm(batch_.vec(i));
        weights_[i] = r * r;
        s += weights_[i];
      }
      for (double& w : weights_) w *= static_cast<double>(batch_.size()) / s;
    }
  }

  double evaluate(const ModelParams& p, std::int64_t, std::span<double> grad, std::vector<double>&) override {
    auto res = grad_mse(p, batch_, targets_, weights_);
    std::copy(res.grad.data().begin(), res.grad.data().end(), grad.begin());
    return res.loss;
  }

  [[nodiscard]] double mean() const { return mean_; }
  [[nodiscard]] double scale() const { return scale_; }

 private:
  PointBatch batch_;
  std::vector<double> targets_;
  std::vector<double> weights_;
  double mean_ = 0.0;
  double scale_ = 1.0;
};

/// Prediction in target units: scale * phi(x) + mean.
inline std::vector<double> predict(const ModelParams& p, const PointBatch& batch, double mean = 0.0,
                                   double scale = 1.0) {
  auto v = forward_batch(p, batch);
  for (double& x : v) x = scale * x + mean;
  return v;
}

inline double rmse(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size() && !a.empty(), "rmse: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

}  // namespace rmn

#endif  // RMN_OPTIM_HPP
