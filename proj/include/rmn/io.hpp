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

// JSON forms of model specs, parameter vectors and training reports, plus a strict
// reader that reports the path of any malformed or unknown key.

#ifndef RMN_IO_HPP
#define RMN_IO_HPP

#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "rmn/model.hpp"
#include "rmn/optim.hpp"

namespace rmn {

using Json = nlohmann::json;

/// Malformed configuration; `path` locates the offending key, e.g. "$.train.lr".
struct ConfigError : std::runtime_error {
  ConfigError(std::string p, const std::string& what) : std::runtime_error(p + ": " + what), path(std::move(p)) {}
  std::string path;
};

/// Reads optional keys of one JSON object with type checks; finish() rejects keys never read.
class JsonReader {
 public:
  JsonReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key); }
  [[nodiscard]] std::string path_of(const std::string& key) const { return path_ + "." + key; }

  template <class T>
  bool get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return false;
    const Json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(path_of(key), "expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError(path_of(key), "expected an integer");
        if constexpr (std::is_unsigned_v<T>)
          if (v.get<long long>() < 0) throw ConfigError(path_of(key), "expected a nonnegative integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError(path_of(key), "expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(path_of(key), "expected a string");
      } else if constexpr (std::is_same_v<T, std::vector<std::uint64_t>>) {
        if (!v.is_array()) throw ConfigError(path_of(key), "expected an array");
        for (std::size_t i = 0; i < v.size(); ++i)
          if (!v[i].is_number_unsigned())
            throw ConfigError(path_of(key) + "[" + std::to_string(i) + "]", "expected a nonnegative integer");
      }
      out = v.get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path_of(key), e.what());
    }
    return true;
  }

  /// Raw access for structured values; marks the key as read.
  const Json* raw(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  JsonReader child(const std::string& key) {
    seen_.insert(key);
    return JsonReader(j_.at(key), path_of(key));
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError(path_of(k), "unknown key");
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline Json to_json(const ModelSpec& s) {
  Json j;
  j["kind"] = to_string(s.kind);
  j["dim"] = s.dim;
  j["K"] = s.K;
  j["mu_min"] = s.mu_min;
  j["mu_max"] = s.mu_max;
  j["eps_gap"] = s.eps_gap;
  j["r_floor"] = s.r_floor;
  if (s.kind == ModelKind::Direct || s.kind == ModelKind::Angular2D || s.kind == ModelKind::Angular3D) {
    j["log_enabled"] = s.log_enabled;
    j["eps_log"] = s.eps_log;
  }
  if (s.kind == ModelKind::Angular2D || s.kind == ModelKind::Angular3D) {
    j["K_a"] = s.K_a;
    j["lambda_min"] = s.lambda_min;
    j["lambda_max"] = s.lambda_max;
  }
  if (s.kind == ModelKind::Angular2D) {
    j["M_max"] = s.M_max;
    j["half_integer"] = s.half_integer;
    j["N_max"] = s.N_max;
  }
  if (s.kind == ModelKind::Angular3D) j["L_max"] = s.L_max;
  if (s.kind == ModelKind::MultiCenter) {
    j["J"] = s.J;
    j["center_log"] = s.center_log;
    j["learn_centers"] = s.learn_centers;
  }
  return j;
}

/// Fills `s` from a model object; keys absent from `j` keep their current value.
inline void read_model_spec(JsonReader& r, ModelSpec& s) {
  std::string kind;
  if (r.get("kind", kind)) {
    try {
      s.kind = model_kind_from_string(kind);
    } catch (const ContractViolation&) {
      throw ConfigError(r.path_of("kind"), "unknown model kind '" + kind +
                                               "' (valid: direct, angular2d, angular3d, multicenter, msn_coord)");
    }
  }
  r.get("dim", s.dim);
  r.get("K", s.K);
  r.get("mu_min", s.mu_min);
  r.get("mu_max", s.mu_max);
  r.get("eps_gap", s.eps_gap);
  r.get("r_floor", s.r_floor);
  r.get("log_enabled", s.log_enabled);
  r.get("eps_log", s.eps_log);
  r.get("K_a", s.K_a);
  r.get("lambda_min", s.lambda_min);
  r.get("lambda_max", s.lambda_max);
  r.get("M_max", s.M_max);
  r.get("half_integer", s.half_integer);
  r.get("N_max", s.N_max);
  r.get("L_max", s.L_max);
  r.get("J", s.J);
  r.get("center_log", s.center_log);
  r.get("learn_centers", s.learn_centers);
}

/// {"spec": {...}, "segments": {name: [values]}, "exponents": [[...] per ladder]}.
/// "exponents" is derived output and ignored by params_from_json.
inline Json to_json(const ModelParams& p) {
  Json j;
  j["spec"] = to_json(p.spec());
  Json seg = Json::object();
  for (const auto& s : p.layout().segments()) {
    const auto v = p.segment(s.name);
    seg[s.name] = std::vector<double>(v.begin(), v.end());
  }
  j["segments"] = seg;
  Json ex = Json::array();
  for (std::size_t i = 0; i < p.layout().ladders().size(); ++i) ex.push_back(p.exponents(i));
  j["exponents"] = ex;
  return j;
}

inline ModelParams params_from_json(const Json& j, const std::string& path = "$") {
  JsonReader r(j, path);
  ModelSpec spec;
  if (!r.has("spec")) throw ConfigError(r.path_of("spec"), "missing");
  {
    JsonReader sr = r.child("spec");
    read_model_spec(sr, spec);
    sr.finish();
  }
  try {
    validate(spec);
  } catch (const ContractViolation& e) {
    throw ConfigError(r.path_of("spec"), e.what());
  }
  ModelParams p(spec);
  const Json* seg = r.raw("segments");
  if (!seg || !seg->is_object()) throw ConfigError(r.path_of("segments"), "expected an object");
  for (const auto& [name, vals] : seg->items()) {
    const std::string where = r.path_of("segments") + "." + name;
    if (!p.layout().has(name)) throw ConfigError(where, "unknown segment for kind " + std::string(to_string(spec.kind)));
    auto dst = p.segment(name);
    if (!vals.is_array() || vals.size() != dst.size())
      throw ConfigError(where, "expected an array of " + std::to_string(dst.size()) + " numbers");
    for (std::size_t i = 0; i < dst.size(); ++i) {
      if (!vals[i].is_number()) throw ConfigError(where + "[" + std::to_string(i) + "]", "expected a number");
      dst[i] = vals[i].get<double>();
    }
  }
  for (const auto& s : p.layout().segments())
    if (!seg->contains(s.name)) throw ConfigError(r.path_of("segments") + "." + s.name, "missing");
  r.raw("exponents");
  r.finish();
  return p;
}

inline Json to_json(const std::vector<SpectrumEntry>& spec) {
  Json a = Json::array();
  for (const auto& e : spec) a.push_back({{"group", e.group}, {"mu", e.mu}, {"coeff", e.coeff}});
  return a;
}

inline Json to_json(const TrainReport& r) {
  Json j;
  j["seed"] = r.seed;
  j["failed"] = r.failed;
  if (r.failed) j["failure"] = r.failure;
  j["iterations_run"] = r.iterations_run;
  j["final_loss"] = r.final_loss;
  j["rmse"] = r.rmse;
  j["param_count"] = r.param_count;
  j["trainable_count"] = r.trainable_count;
  j["wall_time_s"] = r.wall_time_s;
  j["spectrum"] = to_json(r.spectrum);
  j["dominant_exponents"] = to_json(dominant_exponents(r.spectrum));
  j["log_coeff"] = r.log_coeff;
  j["log_exponent"] = r.log_exponent;
  Json c = Json::array();
  for (const auto& v : r.centers) c.push_back(std::vector<double>(v.begin(), v.begin() + r.params.dim()));
  j["centers"] = c;
  j["output_normalization"] = {{"mean", r.norm_mean}, {"scale", r.norm_scale}};
  Json tr = Json::array();
  for (const auto& t : r.trace) {
    Json e = {{"iter", t.iter}, {"loss", t.loss}};
    for (std::size_t i = 0; i < t.components.size() && i < r.component_names.size(); ++i)
      e[r.component_names[i]] = t.components[i];
    tr.push_back(e);
  }
  j["loss_trace"] = tr;
  if (r.params.size() > 0) j["params"] = to_json(r.params);
  return j;
}

/// Loss trace as CSV: iter,loss[,component...].
inline void write_trace_csv(const TrainReport& r, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "write_trace_csv: cannot open " + path);
  out.precision(17);
  out << "iter,loss";
  for (const auto& n : r.component_names) out << "," << n;
  out << "\n";
  for (const auto& t : r.trace) {
    out << t.iter << "," << t.loss;
    for (double c : t.components) out << "," << c;
    out << "\n";
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open file");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path, std::string("invalid JSON: ") + e.what());
  }
}

inline void write_json_file(const Json& j, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "write_json_file: cannot open " + path);
  out << j.dump(2) << "\n";
}

}  // namespace rmn

#endif  // RMN_IO_HPP
