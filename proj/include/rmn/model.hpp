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

// Model variants, their named parameter layout, and closed-form evaluation of
// value / gradient / Laplacian together with hand-derived parameter sensitivities.
//
// Every kernel works in "natural" coordinates: the slots that hold raw ladder gaps
// in ModelParams hold the derived exponents instead. Backprop writes d/d(exponent)
// into those slots and finalize_gradient() maps them onto the raw gaps through the
// ladder Jacobian.

#ifndef RMN_MODEL_HPP
#define RMN_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rmn/angular.hpp"
#include "rmn/core.hpp"
#include "rmn/radial_basis.hpp"

namespace rmn {

enum class ModelKind { Direct, Angular2D, Angular3D, MultiCenter, MsnCoord };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Direct: return "direct";
    case ModelKind::Angular2D: return "angular2d";
    case ModelKind::Angular3D: return "angular3d";
    case ModelKind::MultiCenter: return "multicenter";
    case ModelKind::MsnCoord: return "msn_coord";
  }
  return "unknown";
}

inline ModelKind model_kind_from_string(std::string_view s) {
  if (s == "direct") return ModelKind::Direct;
  if (s == "angular2d") return ModelKind::Angular2D;
  if (s == "angular3d") return ModelKind::Angular3D;
  if (s == "multicenter") return ModelKind::MultiCenter;
  if (s == "msn_coord") return ModelKind::MsnCoord;
  throw ContractViolation("unknown model kind '" + std::string(s) + "'");
}

/// Architecture hyperparameters. Fields that do not apply to a kind are ignored.
struct ModelSpec {
  ModelKind kind = ModelKind::Direct;
  int dim = 2;
  int K = 12;  // radial exponents (per center for MultiCenter, per axis for MsnCoord)
  double mu_min = -2.0;
  double mu_max = 4.0;
  double eps_gap = 0.01;
  double r_floor = 1e-12;

  // Direct / Angular log-primitive. When disabled its coefficient is held at zero.
  bool log_enabled = true;
  double eps_log = 1e-4;

  // Angular branch.
  int K_a = 4;
  double lambda_min = -2.0;
  double lambda_max = 4.0;
  int M_max = 4;
  bool half_integer = false;
  int N_max = 0;
  int L_max = 2;

  // MultiCenter.
  int J = 2;
  bool center_log = true;
  bool learn_centers = true;

  static ModelSpec direct(int dim, int K = 12) {
    ModelSpec s;
    s.kind = ModelKind::Direct;
    s.dim = dim;
    s.K = K;
    return s;
  }
  static ModelSpec angular2d(int K_r = 6, int K_a = 4, int M_max = 4, bool half_integer = false, int N_max = 0) {
    ModelSpec s;
    s.kind = ModelKind::Angular2D;
    s.dim = 2;
    s.K = K_r;
    s.K_a = K_a;
    s.M_max = M_max;
    s.half_integer = half_integer;
    s.N_max = N_max;
    return s;
  }
  static ModelSpec angular3d(int K_r = 6, int K_a = 4, int L_max = 2) {
    ModelSpec s;
    s.kind = ModelKind::Angular3D;
    s.dim = 3;
    s.K = K_r;
    s.K_a = K_a;
    s.L_max = L_max;
    return s;
  }
  static ModelSpec multicenter(int dim, int J, int K = 9) {
    ModelSpec s;
    s.kind = ModelKind::MultiCenter;
    s.dim = dim;
    s.J = J;
    s.K = K;
    return s;
  }
  static ModelSpec msn_coord(int dim, int K = 12) {
    ModelSpec s;
    s.kind = ModelKind::MsnCoord;
    s.dim = dim;
    s.K = K;
    return s;
  }
};

inline int angular_mode_count(const ModelSpec& s) {
  if (s.kind == ModelKind::Angular2D) return 2 * s.M_max + (s.half_integer ? 2 * (s.N_max + 1) : 0);
  if (s.kind == ModelKind::Angular3D) return sh_count(s.L_max) - 1;
  return 0;
}

inline void validate(const ModelSpec& s) {
  require(s.dim == 2 || s.dim == 3, "ModelSpec: dim must be 2 or 3");
  require(s.K >= 1, "ModelSpec: K must be >= 1");
  require(s.mu_min < s.mu_max, "ModelSpec: mu_min must be < mu_max");
  require(s.eps_gap > 0.0, "ModelSpec: eps_gap must be > 0");
  require(s.r_floor > 0.0, "ModelSpec: r_floor must be > 0");
  require(s.eps_log > 0.0, "ModelSpec: eps_log must be > 0");
  if (s.kind == ModelKind::Angular2D) {
    require(s.dim == 2, "ModelSpec: Angular2D requires dim = 2");
    require(s.K_a >= 1 && s.M_max >= 0 && s.N_max >= 0, "ModelSpec: invalid angular sizes");
    require(s.lambda_min < s.lambda_max, "ModelSpec: lambda_min must be < lambda_max");
  }
  if (s.kind == ModelKind::Angular3D) {
    require(s.dim == 3, "ModelSpec: Angular3D requires dim = 3");
    require(s.K_a >= 1 && s.L_max >= 1, "ModelSpec: invalid angular sizes");
    require(s.lambda_min < s.lambda_max, "ModelSpec: lambda_min must be < lambda_max");
  }
  if (s.kind == ModelKind::MultiCenter) require(s.J >= 1, "ModelSpec: J must be >= 1");
}

struct Segment {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// A run of raw gaps that feeds one exponent ladder.
struct LadderSlot {
  std::size_t offset = 0;
  std::size_t K = 0;
  double mu_min = 0.0;
  double mu_max = 0.0;
  double eps_gap = 0.01;
};

class ParamLayout {
 public:
  ParamLayout() = default;

  static ParamLayout for_spec(const ModelSpec& s) {
    validate(s);
    ParamLayout L;
    const auto K = static_cast<std::size_t>(s.K);
    const auto d = static_cast<std::size_t>(s.dim);
    switch (s.kind) {
      case ModelKind::Direct:
        L.add("coeffs", K);
        L.add_ladder("raw_gaps", K, s.mu_min, s.mu_max, s.eps_gap);
        L.add("log_coeff", 1);
        L.add("log_exponent", 1);
        L.add("bias", 1);
        break;
      case ModelKind::Angular2D:
      case ModelKind::Angular3D: {
        const auto Ka = static_cast<std::size_t>(s.K_a);
        L.add("coeffs", K);
        L.add_ladder("raw_gaps", K, s.mu_min, s.mu_max, s.eps_gap);
        L.add_ladder("ang_raw_gaps", Ka, s.lambda_min, s.lambda_max, s.eps_gap);
        L.add("ang_coeffs", static_cast<std::size_t>(angular_mode_count(s)) * Ka);
        L.add("log_coeff", 1);
        L.add("log_exponent", 1);
        L.add("bias", 1);
        break;
      }
      case ModelKind::MultiCenter: {
        const auto J = static_cast<std::size_t>(s.J);
        L.add("centers", J * d);
        const std::size_t gaps = L.add("raw_gaps", J * K);
        for (std::size_t j = 0; j < J; ++j) L.ladders_.push_back({gaps + j * K, K, s.mu_min, s.mu_max, s.eps_gap});
        L.add("coeffs", J * K);
        if (s.center_log) L.add("log_coeffs", J);
        L.add("bias", 1);
        break;
      }
      case ModelKind::MsnCoord: {
        const std::size_t gaps = L.add("raw_gaps", d * K);
        for (std::size_t i = 0; i < d; ++i) L.ladders_.push_back({gaps + i * K, K, s.mu_min, s.mu_max, s.eps_gap});
        L.add("coeffs", d * K);
        L.add("bias", 1);
        break;
      }
    }
    return L;
  }

  [[nodiscard]] std::size_t size() const { return total_; }
  [[nodiscard]] const std::vector<Segment>& segments() const { return segments_; }
  [[nodiscard]] const std::vector<LadderSlot>& ladders() const { return ladders_; }

  [[nodiscard]] bool has(std::string_view name) const {
    return std::any_of(segments_.begin(), segments_.end(), [&](const Segment& s) { return s.name == name; });
  }

  [[nodiscard]] const Segment& segment(std::string_view name) const {
    for (const auto& s : segments_)
      if (s.name == name) return s;
    throw ContractViolation("ParamLayout: no segment named '" + std::string(name) + "'");
  }

  /// "coeffs[3]" style name of a flat index.
  [[nodiscard]] std::string entry_name(std::size_t i) const {
    for (const auto& s : segments_)
      if (i >= s.offset && i < s.offset + s.size) return s.name + "[" + std::to_string(i - s.offset) + "]";
    return "?[" + std::to_string(i) + "]";
  }

  friend bool operator==(const ParamLayout& a, const ParamLayout& b) {
    if (a.total_ != b.total_ || a.segments_.size() != b.segments_.size()) return false;
    for (std::size_t i = 0; i < a.segments_.size(); ++i)
      if (a.segments_[i].name != b.segments_[i].name || a.segments_[i].size != b.segments_[i].size) return false;
    return true;
  }

 private:
  std::size_t add(std::string name, std::size_t n) {
    segments_.push_back({std::move(name), total_, n});
    total_ += n;
    return total_ - n;
  }
  void add_ladder(std::string name, std::size_t n, double lo, double hi, double eps) {
    const std::size_t off = add(std::move(name), n);
    ladders_.push_back({off, n, lo, hi, eps});
  }

  std::vector<Segment> segments_;
  std::vector<LadderSlot> ladders_;
  std::size_t total_ = 0;
};

/// Flat vector with the same named segments as a parameter layout.
class NamedVector {
 public:
  NamedVector() = default;
  explicit NamedVector(ParamLayout layout) : layout_(std::move(layout)), values_(layout_.size(), 0.0) {}

  [[nodiscard]] const ParamLayout& layout() const { return layout_; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] std::span<double> values() { return values_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] std::vector<double>& data() { return values_; }
  [[nodiscard]] const std::vector<double>& data() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  [[nodiscard]] std::span<double> segment(std::string_view name) {
    const auto& s = layout_.segment(name);
    return {values_.data() + s.offset, s.size};
  }
  [[nodiscard]] std::span<const double> segment(std::string_view name) const {
    const auto& s = layout_.segment(name);
    return {values_.data() + s.offset, s.size};
  }

 protected:
  ParamLayout layout_;
  std::vector<double> values_;
};

/// d(loss) / d(parameter), congruent with the ModelParams it was taken against.
class ParamGradient : public NamedVector {
 public:
  using NamedVector::NamedVector;

  [[nodiscard]] double inf_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }
  [[nodiscard]] double l2_norm() const {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(s);
  }
};

class ModelParams : public NamedVector {
 public:
  ModelParams() = default;
  explicit ModelParams(ModelSpec spec) : NamedVector(ParamLayout::for_spec(spec)), spec_(spec) {
    mask_.assign(values_.size(), 1);
    if (spec_.kind == ModelKind::MultiCenter && !spec_.learn_centers) freeze("centers");
    if ((spec_.kind == ModelKind::Direct || spec_.kind == ModelKind::Angular2D ||
         spec_.kind == ModelKind::Angular3D) &&
        !spec_.log_enabled) {
      freeze("log_coeff");
      freeze("log_exponent");
    }
  }

  [[nodiscard]] const ModelSpec& spec() const { return spec_; }
  [[nodiscard]] ModelKind kind() const { return spec_.kind; }
  [[nodiscard]] int dim() const { return spec_.dim; }

  /// 1 for parameters the optimizer may move, 0 for held ones.
  [[nodiscard]] const std::vector<char>& trainable_mask() const { return mask_; }
  [[nodiscard]] std::size_t trainable_count() const {
    return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), char{1}));
  }

  void freeze(std::string_view name) {
    const auto& s = layout_.segment(name);
    for (std::size_t i = 0; i < s.size; ++i) mask_[s.offset + i] = 0;
  }

  /// Derived exponents of ladder `i` (see ParamLayout::ladders()).
  [[nodiscard]] std::vector<double> exponents(std::size_t i = 0) const {
    const auto& L = layout_.ladders().at(i);
    std::vector<double> mu(L.K);
    ladder_exponents({values_.data() + L.offset, L.K}, L.mu_min, L.mu_max, L.eps_gap, mu);
    return mu;
  }

  [[nodiscard]] ParamGradient zero_gradient() const { return ParamGradient(layout_); }

 private:
  ModelSpec spec_;
  std::vector<char> mask_;
};

/// Analytic parameter count for a spec (all segments, including held ones).
inline std::size_t parameter_count(const ModelSpec& s) { return ParamLayout::for_spec(s).size(); }

/// Scratch space for Evaluator; one per thread.
struct Workspace {
  std::vector<double> a;
  std::vector<double> b;
  std::vector<Vec3> v;
};

/// Read-only evaluation view of a ModelParams. Resolves ladders once on construction.
class Evaluator {
 public:
  explicit Evaluator(const ModelParams& params)
      : params_(&params), spec_(params.spec()), layout_(&params.layout()), natural_(params.data()) {
    for (const auto& L : layout_->ladders())
      ladder_exponents({params.data().data() + L.offset, L.K}, L.mu_min, L.mu_max, L.eps_gap,
                       {natural_.data() + L.offset, L.K});
    if (spec_.kind == ModelKind::Direct || spec_.kind == ModelKind::Angular2D ||
        spec_.kind == ModelKind::Angular3D) {
      off_coeffs_ = layout_->segment("coeffs").offset;
      off_mu_ = layout_->segment("raw_gaps").offset;
      off_logc_ = layout_->segment("log_coeff").offset;
      off_logmu_ = layout_->segment("log_exponent").offset;
    }
    if (spec_.kind == ModelKind::Angular2D || spec_.kind == ModelKind::Angular3D) {
      off_lambda_ = layout_->segment("ang_raw_gaps").offset;
      off_angc_ = layout_->segment("ang_coeffs").offset;
      n_ang_ = static_cast<std::size_t>(angular_mode_count(spec_));
      if (spec_.kind == ModelKind::Angular2D) modes_ = angular_modes_2d(spec_.M_max, spec_.half_integer, spec_.N_max);
    }
    if (spec_.kind == ModelKind::MultiCenter) {
      off_centers_ = layout_->segment("centers").offset;
      off_mu_ = layout_->segment("raw_gaps").offset;
      off_coeffs_ = layout_->segment("coeffs").offset;
      if (spec_.center_log) off_logc_ = layout_->segment("log_coeffs").offset;
    }
    if (spec_.kind == ModelKind::MsnCoord) {
      off_mu_ = layout_->segment("raw_gaps").offset;
      off_coeffs_ = layout_->segment("coeffs").offset;
    }
    off_bias_ = layout_->segment("bias").offset;
  }

  [[nodiscard]] const ModelSpec& spec() const { return spec_; }
  [[nodiscard]] const ModelParams& params() const { return *params_; }
  /// Parameter vector with ladder slots replaced by their exponents.
  [[nodiscard]] const std::vector<double>& natural() const { return natural_; }

  [[nodiscard]] Workspace make_workspace() const {
    Workspace ws;
    const std::size_t n = layout_->size() + 4 * n_ang_ + 9 * static_cast<std::size_t>(spec_.J) + 16;
    ws.a.assign(n, 0.0);
    ws.b.assign(n, 0.0);
    ws.v.assign(static_cast<std::size_t>(sh_count(std::max(spec_.L_max, 1))), Vec3{});
    return ws;
  }

  /// Jet at x. When `grad_natural` is non-empty, the seed returned by seed_fn(jet) is
  /// contracted against every parameter sensitivity and accumulated into it.
  template <class SeedFn>
  Jet evaluate(const Vec3& x, SeedFn&& seed_fn, std::span<double> grad_natural, Workspace& ws) const {
    switch (spec_.kind) {
      case ModelKind::Direct: return eval_radial_family(x, seed_fn, grad_natural, ws);
      case ModelKind::Angular2D:
      case ModelKind::Angular3D: return eval_radial_family(x, seed_fn, grad_natural, ws);
      case ModelKind::MultiCenter: return eval_multicenter(x, seed_fn, grad_natural, ws);
      case ModelKind::MsnCoord: return eval_msn(x, seed_fn, grad_natural, ws);
    }
    return {};
  }

  [[nodiscard]] Jet jet(const Vec3& x, Workspace& ws) const {
    return evaluate(x, [](const Jet&) { return JetSeed{}; }, {}, ws);
  }
  [[nodiscard]] Jet jet(const Vec3& x) const {
    Workspace ws = make_workspace();
    return jet(x, ws);
  }
  [[nodiscard]] double value(const Vec3& x, Workspace& ws) const { return jet(x, ws).value; }

  /// Maps a natural-coordinate gradient onto the stored parameters (raw gaps) in place.
  void finalize_gradient(std::span<double> grad) const {
    std::vector<double> gmu;
    for (const auto& L : layout_->ladders()) {
      gmu.assign(grad.begin() + static_cast<std::ptrdiff_t>(L.offset),
                 grad.begin() + static_cast<std::ptrdiff_t>(L.offset + L.K));
      ladder_backprop({params_->data().data() + L.offset, L.K}, L.mu_min, L.mu_max, L.eps_gap, gmu,
                      grad.subspan(L.offset, L.K));
    }
  }

 private:
  // Direct and the two Angular kinds share the radial branch + log-primitive + bias.
  template <class SeedFn>
  Jet eval_radial_family(const Vec3& x, SeedFn& seed_fn, std::span<double> g, Workspace& ws) const {
    const double* p = natural_.data();
    const int d = spec_.dim;
    const double dd = static_cast<double>(d);
    const double r = std::max(norm(x), spec_.r_floor);
    const double L = std::log(r);
    const double inv_r2 = 1.0 / (r * r);
    const auto K = static_cast<std::size_t>(spec_.K);

    Jet jet;
    double radial = 0.0;  // gradient = radial * x + (non-radial part)
    double* pw = ws.a.data();
    for (std::size_t k = 0; k < K; ++k) {
      const double mu = p[off_mu_ + k];
      const double a = p[off_coeffs_ + k];
      const double t = std::exp(mu * L);
      pw[k] = t;
      const double q = t * inv_r2;
      jet.value += a * t;
      radial += a * mu * q;
      jet.lap += a * mu * (mu + dd - 2.0) * q;
    }
    const double c0 = p[off_logc_];
    const double m = p[off_logmu_];
    const double psi = detail::log_primitive_from_log(L, m, spec_.eps_log);
    const double q_log = std::exp((m - 2.0) * L);
    jet.value += c0 * psi;
    radial += c0 * q_log;
    jet.lap += c0 * (m + dd - 2.0) * q_log;
    jet.value += p[off_bias_];
    for (int i = 0; i < 3; ++i) jet.grad[i] = radial * x[i];

    if (spec_.kind == ModelKind::Angular2D) angular2d_forward(x, r, L, inv_r2, jet, ws);
    if (spec_.kind == ModelKind::Angular3D) angular3d_forward(x, r, L, inv_r2, jet, ws);

    if (g.empty()) return jet;
    const JetSeed s = seed_fn(jet);
    const double gx = dot(s.grad, x);
    for (std::size_t k = 0; k < K; ++k) {
      const double mu = p[off_mu_ + k];
      const double a = p[off_coeffs_ + k];
      const double t = pw[k];
      const double q = t * inv_r2;
      const double lap_k = mu * (mu + dd - 2.0);
      g[off_coeffs_ + k] += s.value * t + mu * q * gx + s.lap * lap_k * q;
      g[off_mu_ + k] += a * (s.value * t * L + (1.0 + mu * L) * q * gx + s.lap * ((2.0 * mu + dd - 2.0) + lap_k * L) * q);
    }
    g[off_logc_] += s.value * psi + q_log * gx + s.lap * (m + dd - 2.0) * q_log;
    g[off_logmu_] += c0 * (s.value * detail::log_primitive_dmu_from_log(L, m, spec_.eps_log) + q_log * L * gx +
                           s.lap * (1.0 + (m + dd - 2.0) * L) * q_log);
    g[off_bias_] += s.value;

    if (spec_.kind == ModelKind::Angular2D) angular2d_backprop(x, L, inv_r2, s, g, ws);
    if (spec_.kind == ModelKind::Angular3D) angular3d_backprop(x, L, inv_r2, s, g, ws);
    return jet;
  }

  // f = r^lambda Theta(theta):  grad f = r^(lambda-2) (lambda Theta x + Theta' x_perp),
  // lap f = (lambda^2 - nu^2) r^(lambda-2) Theta.
  void angular2d_forward(const Vec3& x, double /*r*/, double L, double inv_r2, Jet& jet, Workspace& ws) const {
    const double* p = natural_.data();
    const double theta = std::atan2(x[1], x[0]);
    const std::size_t Ka = static_cast<std::size_t>(spec_.K_a);
    double* th = ws.b.data();            // Theta_i
    double* dth = th + n_ang_;           // Theta_i'
    double* tl = dth + n_ang_;           // r^lambda_j
    for (std::size_t i = 0; i < n_ang_; ++i) {
      const auto& md = modes_[i];
      const double c = std::cos(md.nu * theta);
      const double sn = std::sin(md.nu * theta);
      th[i] = md.is_sin ? sn : c;
      dth[i] = md.is_sin ? md.nu * c : -md.nu * sn;
    }
    const Vec3 xp{-x[1], x[0], 0.0};
    for (std::size_t j = 0; j < Ka; ++j) {
      const double lam = p[off_lambda_ + j];
      const double t = std::exp(lam * L);
      tl[j] = t;
      const double u = t * inv_r2;
      double sv = 0.0, sx = 0.0, sp = 0.0, sl = 0.0;
      for (std::size_t i = 0; i < n_ang_; ++i) {
        const double c = p[off_angc_ + i * Ka + j];
        const double nu = modes_[i].nu;
        sv += c * th[i];
        sx += c * th[i];
        sp += c * dth[i];
        sl += c * (lam * lam - nu * nu) * th[i];
      }
      jet.value += t * sv;
      for (int k = 0; k < 2; ++k) jet.grad[k] += u * (lam * sx * x[k] + sp * xp[k]);
      jet.lap += u * sl;
    }
  }

  void angular2d_backprop(const Vec3& x, double L, double inv_r2, const JetSeed& s, std::span<double> g,
                          Workspace& ws) const {
    const double* p = natural_.data();
    const std::size_t Ka = static_cast<std::size_t>(spec_.K_a);
    const double* th = ws.b.data();
    const double* dth = th + n_ang_;
    const double* tl = dth + n_ang_;
    const double gx = s.grad[0] * x[0] + s.grad[1] * x[1];
    const double gp = -s.grad[0] * x[1] + s.grad[1] * x[0];
    for (std::size_t j = 0; j < Ka; ++j) {
      const double lam = p[off_lambda_ + j];
      const double t = tl[j];
      const double u = t * inv_r2;
      double glam = 0.0;
      for (std::size_t i = 0; i < n_ang_; ++i) {
        const std::size_t ic = off_angc_ + i * Ka + j;
        const double c = p[ic];
        const double nu2 = modes_[i].nu * modes_[i].nu;
        const double e = lam * lam - nu2;
        g[ic] += s.value * t * th[i] + u * (lam * th[i] * gx + dth[i] * gp) + s.lap * e * u * th[i];
        glam += c * (s.value * t * L * th[i] + u * ((1.0 + lam * L) * th[i] * gx + L * dth[i] * gp) +
                     s.lap * (2.0 * lam + e * L) * u * th[i]);
      }
      g[off_lambda_ + j] += glam;
    }
  }

  // f = r^p T(x) with T = N_l S_lm (degree-l harmonic polynomial), p = lambda - l:
  // grad f = p r^(p-2) T x + r^p grad T,  lap f = p (p + 2l + 1) r^(p-2) T.
  void angular3d_forward(const Vec3& x, double r, double L, double inv_r2, Jet& jet, Workspace& ws) const {
    const double* p = natural_.data();
    const int Lm = spec_.L_max;
    const std::size_t Ka = static_cast<std::size_t>(spec_.K_a);
    const auto nsh = static_cast<std::size_t>(sh_count(Lm));
    double* S = ws.b.data();
    double* tl = S + nsh;          // r^lambda_j
    double* inv_rl = tl + Ka;      // r^-l
    solid_harmonics(Lm, x, {S, nsh}, {ws.v.data(), nsh});
    for (int l = 0; l <= Lm; ++l) {
      const double c = sh_norm(l);
      for (int m = -l; m <= l; ++m) {
        const auto i = static_cast<std::size_t>(sh_index(l, m));
        S[i] *= c;
        for (int k = 0; k < 3; ++k) ws.v[i][k] *= c;
      }
    }
    inv_rl[0] = 1.0;
    for (int l = 1; l <= Lm; ++l) inv_rl[l] = inv_rl[l - 1] / r;
    for (std::size_t j = 0; j < Ka; ++j) {
      const double lam = p[off_lambda_ + j];
      tl[j] = std::exp(lam * L);
      for (int l = 1; l <= Lm; ++l) {
        const double pe = lam - l;
        const double t = tl[j] * inv_rl[l];
        const double u = t * inv_r2;
        double sv = 0.0;
        Vec3 sg{0.0, 0.0, 0.0};
        for (int m = -l; m <= l; ++m) {
          const auto i = static_cast<std::size_t>(sh_index(l, m));
          const double c = p[off_angc_ + (i - 1) * Ka + j];
          sv += c * S[i];
          for (int k = 0; k < 3; ++k) sg[k] += c * ws.v[i][k];
        }
        jet.value += t * sv;
        for (int k = 0; k < 3; ++k) jet.grad[k] += pe * u * sv * x[k] + t * sg[k];
        jet.lap += pe * (pe + 2.0 * l + 1.0) * u * sv;
      }
    }
  }

  void angular3d_backprop(const Vec3& x, double L, double inv_r2, const JetSeed& s, std::span<double> g,
                          Workspace& ws) const {
    const double* p = natural_.data();
    const int Lm = spec_.L_max;
    const std::size_t Ka = static_cast<std::size_t>(spec_.K_a);
    const auto nsh = static_cast<std::size_t>(sh_count(Lm));
    const double* S = ws.b.data();
    const double* tl = S + nsh;
    const double* inv_rl = tl + Ka;
    const double gx = dot(s.grad, x);
    for (std::size_t j = 0; j < Ka; ++j) {
      const double lam = p[off_lambda_ + j];
      double glam = 0.0;
      for (int l = 1; l <= Lm; ++l) {
        const double pe = lam - l;
        const double t = tl[j] * inv_rl[l];
        const double u = t * inv_r2;
        const double e = pe * (pe + 2.0 * l + 1.0);
        const double de = 2.0 * pe + 2.0 * l + 1.0;
        for (int m = -l; m <= l; ++m) {
          const auto i = static_cast<std::size_t>(sh_index(l, m));
          const std::size_t ic = off_angc_ + (i - 1) * Ka + j;
          const double c = p[ic];
          const double T = S[i];
          const double gT = dot(s.grad, ws.v[i]);
          g[ic] += s.value * t * T + pe * u * T * gx + t * gT + s.lap * e * u * T;
          glam += c * (s.value * t * L * T + (1.0 + pe * L) * u * T * gx + t * L * gT + s.lap * (de + e * L) * u * T);
        }
      }
      g[off_lambda_ + j] += glam;
    }
  }

  // Sum over centers of K powers of |x - c_j| plus an optional log|x - c_j| term.
  template <class SeedFn>
  Jet eval_multicenter(const Vec3& x, SeedFn& seed_fn, std::span<double> g, Workspace& ws) const {
    const double* p = natural_.data();
    const int d = spec_.dim;
    const double dd = static_cast<double>(d);
    const auto K = static_cast<std::size_t>(spec_.K);
    const auto J = static_cast<std::size_t>(spec_.J);
    double* pw = ws.a.data();        // J*K powers
    double* geo = ws.b.data();       // per center: rho, L, inv_r2, A, B, C, y0, y1, y2
    Jet jet;
    for (std::size_t j = 0; j < J; ++j) {
      Vec3 y{0.0, 0.0, 0.0};
      for (int i = 0; i < d; ++i) y[i] = x[i] - p[off_centers_ + j * d + i];
      const double rho = std::max(norm(y), spec_.r_floor);
      const double L = std::log(rho);
      const double inv_r2 = 1.0 / (rho * rho);
      double A = 0.0;  // h'/rho summed: grad = A y
      double B = 0.0;  // (h'' - h'/rho) / rho^2
      double C = 0.0;  // (lap h)' / rho
      for (std::size_t k = 0; k < K; ++k) {
        const double mu = p[off_mu_ + j * K + k];
        const double a = p[off_coeffs_ + j * K + k];
        const double t = std::exp(mu * L);
        pw[j * K + k] = t;
        const double q = t * inv_r2;
        jet.value += a * t;
        A += a * mu * q;
        jet.lap += a * mu * (mu + dd - 2.0) * q;
        B += a * mu * (mu - 2.0) * q * inv_r2;
        C += a * mu * (mu + dd - 2.0) * (mu - 2.0) * q * inv_r2;
      }
      if (spec_.center_log) {
        const double c = p[off_logc_ + j];
        jet.value += c * L;
        A += c * inv_r2;
        jet.lap += c * (dd - 2.0) * inv_r2;
        B += -2.0 * c * inv_r2 * inv_r2;
        C += -2.0 * (dd - 2.0) * c * inv_r2 * inv_r2;
      }
      for (int i = 0; i < 3; ++i) jet.grad[i] += A * y[i];
      double* gj = geo + j * 9;
      gj[0] = rho; gj[1] = L; gj[2] = inv_r2; gj[3] = A; gj[4] = B; gj[5] = C;
      gj[6] = y[0]; gj[7] = y[1]; gj[8] = y[2];
    }
    jet.value += p[off_bias_];
    if (g.empty()) return jet;

    const JetSeed s = seed_fn(jet);
    for (std::size_t j = 0; j < J; ++j) {
      const double* gj = geo + j * 9;
      const double L = gj[1], inv_r2 = gj[2], A = gj[3], B = gj[4], C = gj[5];
      const Vec3 y{gj[6], gj[7], gj[8]};
      const double gy = dot(s.grad, y);
      for (std::size_t k = 0; k < K; ++k) {
        const std::size_t ik = j * K + k;
        const double mu = p[off_mu_ + ik];
        const double a = p[off_coeffs_ + ik];
        const double t = pw[ik];
        const double q = t * inv_r2;
        const double lap_k = mu * (mu + dd - 2.0);
        g[off_coeffs_ + ik] += s.value * t + mu * q * gy + s.lap * lap_k * q;
        g[off_mu_ + ik] += a * (s.value * t * L + (1.0 + mu * L) * q * gy + s.lap * ((2.0 * mu + dd - 2.0) + lap_k * L) * q);
      }
      if (spec_.center_log)
        g[off_logc_ + j] += s.value * L + inv_r2 * gy + s.lap * (dd - 2.0) * inv_r2;
      // Terms depend on x - c_j, so d/dc_j = -d/dx of this center's part.
      for (int i = 0; i < d; ++i) {
        const double dv = s.value * A * y[i] + A * s.grad[i] + B * gy * y[i] + s.lap * C * y[i];
        g[off_centers_ + j * d + i] -= dv;
      }
    }
    g[off_bias_] += s.value;
    return jet;
  }

  // Coordinate-wise separable baseline: sum_i sum_k a_ik |x_i|^mu_ik + b.
  template <class SeedFn>
  Jet eval_msn(const Vec3& x, SeedFn& seed_fn, std::span<double> g, Workspace& ws) const {
    const double* p = natural_.data();
    const int d = spec_.dim;
    const auto K = static_cast<std::size_t>(spec_.K);
    double* pw = ws.a.data();
    Jet jet;
    for (int i = 0; i < d; ++i) {
      const double ti = std::max(std::abs(x[i]), spec_.r_floor);
      const double sg = x[i] < 0.0 ? -1.0 : 1.0;
      const double L = std::log(ti);
      const double inv_t = 1.0 / ti;
      for (std::size_t k = 0; k < K; ++k) {
        const std::size_t ik = static_cast<std::size_t>(i) * K + k;
        const double mu = p[off_mu_ + ik];
        const double a = p[off_coeffs_ + ik];
        const double t = std::exp(mu * L);
        pw[ik] = t;
        jet.value += a * t;
        jet.grad[i] += a * mu * t * inv_t * sg;
        jet.lap += a * mu * (mu - 1.0) * t * inv_t * inv_t;
      }
    }
    jet.value += p[off_bias_];
    if (g.empty()) return jet;
    const JetSeed s = seed_fn(jet);
    for (int i = 0; i < d; ++i) {
      const double ti = std::max(std::abs(x[i]), spec_.r_floor);
      const double sg = x[i] < 0.0 ? -1.0 : 1.0;
      const double L = std::log(ti);
      const double inv_t = 1.0 / ti;
      for (std::size_t k = 0; k < K; ++k) {
        const std::size_t ik = static_cast<std::size_t>(i) * K + k;
        const double mu = p[off_mu_ + ik];
        const double a = p[off_coeffs_ + ik];
        const double t = pw[ik];
        const double t1 = t * inv_t * sg;
        const double t2 = t * inv_t * inv_t;
        g[off_coeffs_ + ik] += s.value * t + s.grad[i] * mu * t1 + s.lap * mu * (mu - 1.0) * t2;
        g[off_mu_ + ik] += a * (s.value * t * L + s.grad[i] * (1.0 + mu * L) * t1 +
                                s.lap * ((2.0 * mu - 1.0) + mu * (mu - 1.0) * L) * t2);
      }
    }
    g[off_bias_] += s.value;
    return jet;
  }

  const ModelParams* params_;
  ModelSpec spec_;
  const ParamLayout* layout_;
  std::vector<double> natural_;
  std::vector<AngularMode2D> modes_;
  std::size_t n_ang_ = 0;
  std::size_t off_coeffs_ = 0, off_mu_ = 0, off_logc_ = 0, off_logmu_ = 0, off_bias_ = 0;
  std::size_t off_lambda_ = 0, off_angc_ = 0, off_centers_ = 0;
};

inline Vec3 checked_point(const ModelParams& params, std::span<const double> x) {
  require(static_cast<int>(x.size()) == params.dim(),
          "model evaluation: point has dimension " + std::to_string(x.size()) + ", model expects " +
              std::to_string(params.dim()));
  return load_point(x);
}

/// phi(x).
inline double forward(const ModelParams& params, std::span<const double> x) {
  return Evaluator(params).jet(checked_point(params, x)).value;
}

/// Closed-form spatial gradient (first dim() components meaningful).
inline std::vector<double> spatial_gradient(const ModelParams& params, std::span<const double> x) {
  const Jet j = Evaluator(params).jet(checked_point(params, x));
  return {j.grad.begin(), j.grad.begin() + params.dim()};
}

/// Closed-form Laplacian.
inline double laplacian(const ModelParams& params, std::span<const double> x) {
  return Evaluator(params).jet(checked_point(params, x)).lap;
}

/// Batch forward evaluation.
inline std::vector<double> forward_batch(const ModelParams& params, const PointBatch& batch) {
  require(batch.dim == params.dim(), "forward_batch: dimension mismatch");
  const Evaluator ev(params);
  Workspace ws = ev.make_workspace();
  std::vector<double> out(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) out[i] = ev.value(batch.vec(i), ws);
  return out;
}

/// Sets raw gaps of ladder `i` so that its exponents match `target` (strictly increasing,
/// inside (mu_min, mu_max], last equal to mu_max). Used to build exact representations.
inline void set_ladder_exponents(ModelParams& params, std::size_t ladder, std::span<const double> target) {
  const auto& L = params.layout().ladders().at(ladder);
  require(target.size() == L.K, "set_ladder_exponents: size mismatch");
  require(std::abs(target.back() - L.mu_max) < 1e-12, "set_ladder_exponents: last exponent must equal mu_max");
  const double range = L.mu_max - L.mu_min;
  // Pick gaps delta_k proportional to the exponent increments, scaled so every
  // softplus argument is representable: delta_k = scale * (u_k - u_{k-1}).
  std::vector<double> inc(L.K);
  double prev = 0.0;
  for (std::size_t k = 0; k < L.K; ++k) {
    const double u = (target[k] - L.mu_min) / range;
    inc[k] = u - prev;
    require(inc[k] > 0.0, "set_ladder_exponents: exponents must be strictly increasing and above mu_min");
    prev = u;
  }
  const double min_inc = *std::min_element(inc.begin(), inc.end());
  const double scale = 2.0 * L.eps_gap / min_inc;  // every delta_k >= 2 eps
  for (std::size_t k = 0; k < L.K; ++k) {
    const double sp = scale * inc[k] - L.eps_gap;  // softplus(s) = sp > 0
    // softplus^{-1}(y) = y + log(-expm1(-y)).
    params[L.offset + k] = sp + std::log(-std::expm1(-sp));
  }
}

}  // namespace rmn

#endif  // RMN_MODEL_HPP
