// Copyright 2026 The meandimlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Experiment configuration, schema "meandimlab/v1". Fields accept "AUTO"
// where the factor construction can derive them.

#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>

#include "json.hpp"
#include "meandimlab/dynsys.hpp"
#include "meandimlab/errors.hpp"

namespace meandimlab::pipeline {

inline constexpr const char* kConfigSchema = "meandimlab/v1";

struct MarkerArcs {
  double arc_center = 0.0;
  double arc_radius = 0.0;
  double inner_radius = 0.0;
};

// Sizes of the verification suites. Defaults are the acceptance sizes.
struct Verification {
  int tiling_instances = 1000;
  int tiling_window_factor = 1000;  // window = factor * M1
  int plateau_samples = 1000;
  int plateau_window_factor = 1000;
  int g_samples = 1000;
  int g_window = 1000;
  int fiber_probes = 64;
  int fiber_points = 24;
  int chain_fibers = 200;
  int chain_per_fiber = 40;
  int fiber_mdim_samples = 8;
  int fiber_mdim_window_factor = 10;
};

struct ExperimentConfig {
  int D = 1;
  double theta = dynsys::kGoldenTheta;
  std::optional<int> window_radius;  // AUTO: large enough for the factor windows
  double decay = 0.5;
  dynsys::BaseExtension extension = dynsys::BaseExtension::kConstantZero;

  std::optional<MarkerArcs> marker;  // AUTO: designed from the M bound
  std::optional<double> tiling_r;      // AUTO: 3m
  std::optional<double> tiling_delta;  // AUTO: delta'
  std::optional<double> tiling_c;      // AUTO: minimizer of the M bound

  double eps = 0.25;
  double delta = 0.2;
  std::optional<int> n_horizon;
  std::optional<int> m;
  int max_horizon = 12;

  int sample_count = 1000;
  std::uint64_t seed = 1;
  std::string mode = "greedy";

  Verification verification;
  std::string out_dir = "out";
};

namespace internal {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

inline bool is_auto(const nlohmann::json& v) { return v.is_string() && v.get<std::string>() == "AUTO"; }

template <typename T>
std::optional<T> auto_or(const nlohmann::json& j, const char* key, std::optional<T> fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (is_auto(v)) return std::nullopt;
  if (!v.is_number()) throw ConfigError(std::string("'") + key + "' must be a number or \"AUTO\"");
  return v.get<T>();
}

template <typename T>
T number_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return j.at(key).get<T>();
}

}  // namespace internal

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using internal::auto_or;
  using internal::number_or;
  internal::reject_unknown(j, {"schema", "system", "marker", "tiling", "factor", "sampling", "verification", "outputs", "solver"},
                           "config");
  if (!j.contains("schema") || j.at("schema") != kConfigSchema) {
    throw ConfigError(std::string("config schema must be \"") + kConfigSchema + "\"");
  }
  ExperimentConfig c;
  if (j.contains("system")) {
    const auto& s = j.at("system");
    internal::reject_unknown(s, {"D", "theta", "window_radius", "decay", "base_extension"}, "system");
    c.D = number_or(s, "D", c.D);
    c.theta = number_or(s, "theta", c.theta);
    c.window_radius = auto_or<int>(s, "window_radius", std::nullopt);
    c.decay = number_or(s, "decay", c.decay);
    if (s.contains("base_extension")) c.extension = dynsys::base_extension_from_string(s.at("base_extension"));
  }
  if (j.contains("marker") && !internal::is_auto(j.at("marker"))) {
    const auto& mk = j.at("marker");
    internal::reject_unknown(mk, {"arc_center", "arc_radius", "inner_radius"}, "marker");
    MarkerArcs a;
    a.arc_center = number_or(mk, "arc_center", 0.0);
    a.arc_radius = number_or(mk, "arc_radius", 0.0);
    a.inner_radius = number_or(mk, "inner_radius", a.arc_radius / 2.0);
    c.marker = a;
  }
  if (j.contains("tiling")) {
    const auto& t = j.at("tiling");
    internal::reject_unknown(t, {"r", "delta", "c"}, "tiling");
    c.tiling_r = auto_or<double>(t, "r", std::nullopt);
    c.tiling_delta = auto_or<double>(t, "delta", std::nullopt);
    c.tiling_c = auto_or<double>(t, "c", std::nullopt);
  }
  if (j.contains("factor")) {
    const auto& f = j.at("factor");
    internal::reject_unknown(f, {"eps", "delta", "n_horizon", "m", "max_horizon"}, "factor");
    c.eps = number_or(f, "eps", c.eps);
    c.delta = number_or(f, "delta", c.delta);
    c.n_horizon = auto_or<int>(f, "n_horizon", std::nullopt);
    c.m = auto_or<int>(f, "m", std::nullopt);
    c.max_horizon = number_or(f, "max_horizon", c.max_horizon);
  }
  if (j.contains("sampling")) {
    const auto& s = j.at("sampling");
    internal::reject_unknown(s, {"count", "seed"}, "sampling");
    c.sample_count = number_or(s, "count", c.sample_count);
    c.seed = number_or<std::uint64_t>(s, "seed", c.seed);
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    internal::reject_unknown(s, {"mode"}, "solver");
    if (s.contains("mode")) c.mode = s.at("mode").get<std::string>();
  }
  if (j.contains("verification")) {
    const auto& v = j.at("verification");
    internal::reject_unknown(v, {"tiling_instances", "tiling_window_factor", "plateau_samples", "plateau_window_factor",
                                 "g_samples", "g_window", "fiber_probes", "fiber_points", "chain_fibers",
                                 "chain_per_fiber", "fiber_mdim_samples", "fiber_mdim_window_factor"},
                             "verification");
    Verification& w = c.verification;
    w.tiling_instances = number_or(v, "tiling_instances", w.tiling_instances);
    w.tiling_window_factor = number_or(v, "tiling_window_factor", w.tiling_window_factor);
    w.plateau_samples = number_or(v, "plateau_samples", w.plateau_samples);
    w.plateau_window_factor = number_or(v, "plateau_window_factor", w.plateau_window_factor);
    w.g_samples = number_or(v, "g_samples", w.g_samples);
    w.g_window = number_or(v, "g_window", w.g_window);
    w.fiber_probes = number_or(v, "fiber_probes", w.fiber_probes);
    w.fiber_points = number_or(v, "fiber_points", w.fiber_points);
    w.chain_fibers = number_or(v, "chain_fibers", w.chain_fibers);
    w.chain_per_fiber = number_or(v, "chain_per_fiber", w.chain_per_fiber);
    w.fiber_mdim_samples = number_or(v, "fiber_mdim_samples", w.fiber_mdim_samples);
    w.fiber_mdim_window_factor = number_or(v, "fiber_mdim_window_factor", w.fiber_mdim_window_factor);
  }
  if (j.contains("outputs")) {
    const auto& o = j.at("outputs");
    internal::reject_unknown(o, {"dir"}, "outputs");
    if (o.contains("dir")) c.out_dir = o.at("dir").get<std::string>();
  }

  if (c.D < 0) throw ConfigError("system.D must be nonnegative");
  if (!(c.eps > 0.0 && c.eps <= 1.0)) throw ConfigError("factor.eps must lie in (0, 1]");
  if (!(c.delta > 0.0 && c.delta < 1.0)) throw ConfigError("factor.delta must lie in (0, 1)");
  if (c.m && *c.m < 2) throw ConfigError("factor.m must be at least 2");
  if (c.n_horizon && *c.n_horizon < 1) throw ConfigError("factor.n_horizon must be positive");
  if (c.max_horizon < 3) throw ConfigError("factor.max_horizon must be at least 3");
  if (c.sample_count < 1) throw ConfigError("sampling.count must be positive");
  const Verification& w = c.verification;
  for (int v : {w.tiling_instances, w.tiling_window_factor, w.plateau_samples, w.plateau_window_factor, w.g_samples,
                w.g_window, w.fiber_probes, w.fiber_points, w.chain_fibers, w.chain_per_fiber, w.fiber_mdim_samples,
                w.fiber_mdim_window_factor}) {
    if (v < 1) throw ConfigError("verification sizes must be positive");
  }
  if (c.mode != "exact" && c.mode != "greedy" && c.mode != "local_search") {
    throw ConfigError("solver.mode must be exact, greedy or local_search");
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace meandimlab::pipeline
