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

// The factor pipeline: parameter selection, marker, tiling, Phi, F, g and
// the fiber chain, with one report per run.
//
// Parameter rules (AUTO):
//   mdim_{eps/2} upper = inf_n W_{eps/2}(n)/n over the computed horizons
//   n = first horizon with W_{eps/2}(n)/n < mdim_{eps/2} + 1
//   m = floor((mdim_{eps/2} + 1)/delta) + 1
//   delta' = 0.9 min((mdim_{eps/2} + 1)/(2m), delta/2)
//   tiling: r = 3m, tiling delta = delta', c minimizing the M bound
//   marker: designed so that M exceeds the bound.

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "meandimlab/dynsys.hpp"
#include "meandimlab/errors.hpp"
#include "meandimlab/fibre/chain.hpp"
#include "meandimlab/fibre/product_fmap.hpp"
#include "meandimlab/marker.hpp"
#include "meandimlab/pipeline/config.hpp"
#include "meandimlab/pipeline/suites.hpp"
#include "meandimlab/signal.hpp"
#include "meandimlab/tiling.hpp"
#include "meandimlab/widim/orbit.hpp"

namespace meandimlab::pipeline {

inline constexpr const char* kReportSchema = "meandimlab/v1/report";
inline constexpr const char* kVerdictViolated = "hurewicz inequality violated";
inline constexpr const char* kVerdictInconclusive = "inconclusive";
inline constexpr const char* kVerdictTrivial = "trivially satisfied";

struct FactorParams {
  double eps = 0.25;
  double delta = 0.2;
  double delta_prime = 0.0;
  double mdim_half = 0.0;
  int n = 1;
  int m = 2;
  bool n_auto = true;
  bool m_auto = true;
  std::map<int, int> half_series;  // W_{eps/2}(X, d_n)
};

struct Resolved {
  ExperimentConfig config;
  dynsys::SystemSpec small;  // short window: widim series
  dynsys::SystemSpec sys;    // long window: factor windows
  FactorParams factor;
  marker::MarkerSpec marker;
  tiling::TilingParams tiling;
  signal::SignalParams signal;
  std::int64_t K = 0;
  double m_bound = 0.0;
};

inline std::map<int, int> widim_series(const std::vector<OrbitWindow>& samples, double eps, int max_n) {
  std::map<int, int> s;
  for (int n = 1; n <= max_n; ++n) s[n] = widim::widim_orbit(samples, n, eps).upper;
  return s;
}

inline std::map<int, double> as_double(const std::map<int, int>& s) {
  std::map<int, double> out;
  for (const auto& [n, w] : s) out[n] = w;
  return out;
}

inline nlohmann::json series_json(const std::map<int, int>& s) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [n, w] : s) j[std::to_string(n)] = w;
  return j;
}

// Horizon of the widim samples: enough for max_horizon plus the eps/2 reach.
inline dynsys::SystemSpec small_system(const ExperimentConfig& c) {
  const int reach = widim::effective_reach(c.decay, c.eps / 2.0);
  return dynsys::SystemSpec::make(c.D, c.theta, c.max_horizon + reach + 8, c.decay, c.extension);
}

// `chain_window`: size the long window for the fiber chain (K-scale) or only
// for the g windows.
inline std::int64_t trace_span(const marker::MarkerSpec& mk) { return std::min<std::int64_t>(2 * mk.M1, 20000); }

inline Resolved resolve(const ExperimentConfig& c, bool chain_window = true) {
  Resolved r;
  r.config = c;
  r.small = small_system(c);
  FactorParams& f = r.factor;
  f.eps = c.eps;
  f.delta = c.delta;
  const auto samples = dynsys::sample_points(r.small, static_cast<std::size_t>(c.sample_count), c.seed);
  f.half_series = widim_series(samples, c.eps / 2.0, c.max_horizon);
  f.mdim_half = widim::mdim_estimate(as_double(f.half_series)).inf_ratio;
  f.n_auto = !c.n_horizon;
  if (c.n_horizon) {
    f.n = *c.n_horizon;
  } else {
    f.n = 0;
    for (const auto& [n, w] : f.half_series) {
      if (static_cast<double>(w) / n < f.mdim_half + 1.0) {
        f.n = n;
        break;
      }
    }
    if (f.n == 0) throw ConstructionError("no horizon satisfies W(n)/n < mdim + 1");
  }
  f.m_auto = !c.m;
  f.m = c.m ? *c.m : static_cast<int>(std::floor((f.mdim_half + 1.0) / c.delta)) + 1;
  f.delta_prime = 0.9 * std::min((f.mdim_half + 1.0) / (2.0 * f.m), c.delta / 2.0);

  const double r_t = c.tiling_r.value_or(3.0 * f.m);
  const double delta_t = c.tiling_delta.value_or(f.delta_prime);
  const double c_t = c.tiling_c.value_or(tiling::choose_c(r_t, delta_t));
  r.m_bound = tiling::m_lower_bound(std::max(r_t, 9.0), delta_t, c_t);
  if (c.marker) {
    r.marker = marker::make_marker(r.small.theta, c.marker->arc_center, c.marker->arc_radius, c.marker->inner_radius);
  } else {
    r.marker = marker::design_marker(r.small.theta, static_cast<std::int64_t>(std::floor(r.m_bound)) + 1);
  }
  r.tiling = tiling::make_tiling_params(r_t, delta_t, c_t, r.marker.M, r.marker.M1);
  r.signal = signal::SignalParams{r.tiling.R, f.m, signal::GammaVariant::kMaxAtZero};
  r.signal.validate();
  r.K = 2 * r.marker.M1 + 2;

  const int reach_half = widim::effective_reach(c.decay, c.eps / 2.0);
  // The z trace reads span = min(2 M1, 20000) either way.
  const std::int64_t ahead = std::max<std::int64_t>(chain_window ? r.K : 0, trace_span(r.marker));
  const std::int64_t need = ahead + c.verification.g_window + 6 * f.m + f.n + reach_half + 8;
  const std::int64_t W = c.window_radius ? *c.window_radius : need;
  if (W < need) {
    throw ConfigError("system.window_radius " + std::to_string(W) + " is below the required " + std::to_string(need));
  }
  if (W > 50'000'000) throw ConfigError("required window radius " + std::to_string(W) + " is beyond desk scale");
  r.sys = dynsys::SystemSpec::make(c.D, c.theta, static_cast<int>(W), c.decay, c.extension);
  return r;
}

inline nlohmann::json to_json(const FactorParams& f) {
  return {{"eps", f.eps},
          {"delta", f.delta},
          {"delta_prime", f.delta_prime},
          {"mdim_half_upper", f.mdim_half},
          {"n", f.n},
          {"m", f.m},
          {"n_auto", f.n_auto},
          {"m_auto", f.m_auto},
          {"widim_half_series", series_json(f.half_series)}};
}

inline nlohmann::json parameters_json(const Resolved& r) {
  return {{"system", dynsys::to_json(r.sys)},
          {"marker", marker::to_json(r.marker)},
          {"tiling", tiling::to_json(r.tiling)},
          {"m_bound", r.m_bound},
          {"signal", {{"R", r.signal.R}, {"m", r.signal.m}, {"gamma_variant", signal::to_string(r.signal.gamma_variant)}}},
          {"factor", to_json(r.factor)},
          {"K", r.K}};
}

// ------------------------------------------------------------- Hurewicz

struct HurewiczRecord {
  double mdim_X_upper = 0.0;
  double mdim_X_lower = 0.0;
  double mdim_Y_bound = 0.0;
  double mdim_Z_bound = 0.0;
  double factor_side = 0.0;
  double fiber_claimed = 0.0;   // W_{eps/2}(X, d_n)/(n m), as the chain asserts
  double fiber_measured = 0.0;  // free-coordinate density of sampled pi-fibers
  std::string verdict_claimed;
  std::string verdict;
};

inline std::string hurewicz_verdict(int D, double lhs_lower, double factor_side, double fiber) {
  if (D == 0) return kVerdictTrivial;
  if (lhs_lower > factor_side + fiber) return kVerdictViolated;
  return kVerdictInconclusive;
}

inline nlohmann::json to_json(const HurewiczRecord& h) {
  return {{"mdim_X_upper", h.mdim_X_upper},   {"mdim_X_lower", h.mdim_X_lower},
          {"mdim_Y_bound", h.mdim_Y_bound},   {"mdim_Z_bound", h.mdim_Z_bound},
          {"factor_side", h.factor_side},     {"fiber_claimed", h.fiber_claimed},
          {"fiber_measured", h.fiber_measured}, {"verdict_claimed", h.verdict_claimed},
          {"verdict", h.verdict}};
}

// Free-coordinate density of pi-fibers: the share of cube coordinates in
// [0, L) that no live coding block reads, maximized over sampled points.
inline double fiber_free_density(const Resolved& r, const fibre::ProductFMap& F, int samples, int window_factor,
                                 std::uint64_t seed) {
  const std::int64_t L = static_cast<std::int64_t>(window_factor) * r.marker.M1;
  const int m = r.signal.m;
  const std::int64_t lead = 4 * m + 8;
  const std::int64_t pad = r.marker.M1 + 2;
  std::mt19937_64 rng(seed);
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    const OrbitWindow x = dynsys::constant_point(r.small, dynsys::unit_draw(rng));
    const auto seq = marker::marker_sequence(r.marker, x, -lead - pad, L + lead + pad);
    const auto t = tiling::slice_tiling(seq, r.tiling.H, -lead, L + lead);
    std::vector<char> read(static_cast<std::size_t>(L), 0);
    for (std::int64_t k = -m; k < L + m; ++k) {
      const signal::Location loc = signal::locate(t, k);
      if (loc.on_boundary || signal::alpha_phase5(loc.dist, m) == 0.0) continue;
      const std::int64_t A = signal::block_anchor(loc.label, k, m);
      for (std::int64_t j = std::max<std::int64_t>(0, A + F.first_coord());
           j <= std::min<std::int64_t>(L - 1, A + F.last_coord()); ++j) {
        read[static_cast<std::size_t>(j)] = 1;
      }
    }
    std::int64_t n_read = 0;
    for (char v : read) n_read += v;
    best = std::max(best, 1.0 - static_cast<double>(n_read) / static_cast<double>(L));
  }
  return best * r.sys.dim;
}

// ------------------------------------------------------------- pipeline

struct PipelineOptions {
  bool chain = true;
  bool tiling_suite = true;
};

struct PipelineRun {
  Resolved resolved;
  nlohmann::json report;
  std::map<std::string, std::string> csv;  // file name -> content
  std::map<std::string, double> seconds;   // stage timings, kept out of the report
  bool pass = false;
};

namespace internal {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

inline std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace internal

inline PipelineRun run_pipeline(const ExperimentConfig& c, PipelineOptions opt = {}) {
  PipelineRun run;
  internal::Stopwatch sw;
  run.resolved = resolve(c, opt.chain);
  const Resolved& r = run.resolved;
  run.seconds["parameters"] = sw.lap();
  const Verification& v = c.verification;
  std::vector<SuiteResult> suites;

  if (opt.tiling_suite) {
    TilingSuite ts = run_tiling_suite(r.marker, r.small, r.tiling, v.tiling_instances,
                                      static_cast<std::int64_t>(v.tiling_window_factor) * r.marker.M1, c.seed + 11);
    for (SuiteResult* s : ts.all()) suites.push_back(*s);
    run.seconds["tiling"] = sw.lap();
  }

  const signal::Separation sep = separation(r.marker, r.small, r.tiling, r.signal);
  suites.push_back(separation_suite(sep, r.signal));

  PlateauSuite ps = run_plateau_suite(r.marker, r.small, r.tiling, r.signal, v.plateau_samples,
                                      v.plateau_window_factor, c.delta, r.factor.delta_prime, c.seed + 13);
  suites.push_back(ps.plateau);
  suites.push_back(ps.profile);
  run.seconds["plateau"] = sw.lap();

  const fibre::ProductFMap F(r.sys, r.factor.n, c.eps, r.factor.m, c.seed + 17);
  std::vector<OrbitWindow> base_points;
  for (int i = 0; i < 4; ++i) base_points.push_back(dynsys::sample_points(r.sys, 1, c.seed + 19 + i)[0]);
  const fibre::OrbitFiberReport fb =
      fibre::verify_fiber_bound(F, base_points, v.fiber_probes, v.fiber_points, c.seed + 23);
  {
    SuiteResult s{"fiber-bound"};
    for (const auto& p : fb.probes) {
      if (p.fiber_size == 0) continue;
      s.check(p.pass, "fiber widim " + std::to_string(p.widim_upper) + " > bound " + fmt(p.bound));
    }
    if (fb.vacuous) s.check(false, "vacuous: every probed fiber was empty");
    s.details = fibre::to_json(fb);
    suites.push_back(s);
  }
  base_points.clear();
  run.seconds["fmap"] = sw.lap();

  const signal::FOracle oracle = [&F](const OrbitWindow& x) { return F(x); };
  GSuite gs = run_g_suite(r.marker, r.sys, r.tiling, r.signal, oracle, v.g_samples, v.g_window,
                          r.factor.delta_prime, c.seed + 29);
  for (const SuiteResult& s : {gs.recovery, gs.recovery_strict, gs.vanishing, gs.sparsity}) suites.push_back(s);
  run.seconds["g"] = sw.lap();

  fibre::ChainSetup setup{r.marker, r.tiling, r.signal, c.eps, c.delta, r.factor.n};
  nlohmann::json chain_json = nullptr;
  if (opt.chain) {
    const fibre::FiberChainReport ch = fibre::fiber_width_chain(setup, F, r.sys, v.chain_fibers, v.chain_per_fiber,
                                                                c.seed + 31);
    SuiteResult s{"fiber-chain"};
    for (const auto& it : ch.items) {
      s.check(it.containment_literal && it.containment_shifted && it.ratio_upper < c.delta,
              "containment(literal) " + std::string(it.containment_literal ? "holds" : "fails") +
                  ", containment(shifted) " + (it.containment_shifted ? "holds" : "fails") + ", ratio " +
                  fmt(it.ratio_upper) + " (free axes " + std::to_string(it.free_axes) + ")");
    }
    s.details = fibre::to_json(ch);
    suites.push_back(s);
    chain_json = fibre::to_json(ch);
    std::ostringstream csv;
    csv << "fiber,fiber_size,free_axes,widim_upper,widim_lower,ratio_upper,containment_literal,containment_shifted\n";
    for (std::size_t i = 0; i < ch.items.size(); ++i) {
      const auto& it = ch.items[i];
      csv << i << ',' << it.fiber_size << ',' << it.free_axes << ',' << it.widim_upper << ',' << it.widim_lower << ','
          << fmt(it.ratio_upper) << ',' << it.containment_literal << ',' << it.containment_shifted << '\n';
    }
    run.csv["fiber_chain.csv"] = csv.str();
    run.seconds["chain"] = sw.lap();
  }

  // Hurewicz comparison.
  HurewiczRecord h;
  {
    const auto samples = dynsys::sample_points(r.small, static_cast<std::size_t>(c.sample_count), c.seed + 37);
    const std::map<int, int> up = widim_series(samples, c.eps, c.max_horizon);
    std::map<int, int> amb;
    for (int n = 1; n <= c.max_horizon; ++n) amb[n] = widim::ambient_widim(r.small, n, c.eps);
    h.mdim_X_upper = widim::mdim_estimate(as_double(up)).last_slope;
    h.mdim_X_lower = widim::mdim_estimate(as_double(amb)).last_slope;
    h.mdim_Y_bound = r.factor.delta_prime;
    h.mdim_Z_bound = ps.z_estimate.inf_ratio;
    h.factor_side = h.mdim_Y_bound + h.mdim_Z_bound;
    h.fiber_claimed = static_cast<double>(F.widim_half()) / (static_cast<double>(r.factor.n) * r.factor.m);
    h.fiber_measured = fiber_free_density(r, F, v.fiber_mdim_samples, v.fiber_mdim_window_factor, c.seed + 41);
    h.verdict_claimed = hurewicz_verdict(c.D, h.mdim_X_lower, h.factor_side, h.fiber_claimed);
    h.verdict = hurewicz_verdict(c.D, h.mdim_X_lower, h.factor_side, h.fiber_measured);
    std::ostringstream csv;
    csv << "n,widim_half,widim_eps_upper,widim_eps_ambient\n";
    for (int n = 1; n <= c.max_horizon; ++n) {
      csv << n << ',' << r.factor.half_series.at(n) << ',' << up.at(n) << ',' << amb.at(n) << '\n';
    }
    run.csv["widim_series.csv"] = csv.str();
  }
  run.seconds["hurewicz"] = sw.lap();

  // Plot-ready traces for z.
  {
    const auto [z, zp] = marker::pick_z_zprime(r.marker, r.sys);
    const std::int64_t span = trace_span(r.marker);
    const std::int64_t pad = r.marker.M1 + 2;
    const auto t = tiling::slice_tiling(marker::marker_sequence(r.marker, z, -span - 8 * r.signal.m - pad,
                                                                span + 8 * r.signal.m + pad),
                                        r.tiling.H, -span - 8 * r.signal.m, span + 8 * r.signal.m);
    std::ostringstream tiles;
    tiles << "label,a,b,a_genuine,b_genuine\n";
    for (const auto& tile : t.cells()) {
      tiles << tile.label << ',' << fmt(tile.a.value()) << ',' << fmt(tile.b.value()) << ',' << tile.a_genuine << ','
            << tile.b_genuine << '\n';
    }
    run.csv["tiling_z.csv"] = tiles.str();
    const signal::FactorImage img = signal::pi_map(t, r.signal, z, oracle, -span, span);
    std::ostringstream trace;
    trace << "k,phi_k,g_k\n";
    for (std::size_t i = 0; i < img.phi_seq.size(); ++i) {
      trace << (img.k0 + static_cast<std::int64_t>(i)) << ',' << fmt(img.phi_seq[i]) << ',' << fmt(img.g_seq[i]) << '\n';
    }
    run.csv["phi_trace_z.csv"] = trace.str();
  }

  std::ostringstream suite_csv;
  suite_csv << "property,pass,diagnostic,checked,violations\n";
  nlohmann::json sj = nlohmann::json::array();
  bool pass = true;
  for (const SuiteResult& s : suites) {
    sj.push_back(to_json(s));
    if (!s.diagnostic) pass = pass && s.pass;
    suite_csv << s.property << ',' << s.pass << ',' << s.diagnostic << ',' << s.checked << ',' << s.violations << '\n';
  }
  run.csv["suites.csv"] = suite_csv.str();
  run.csv["fiber_probes.csv"] = [&] {
    std::ostringstream o;
    o << "probe,fiber_size,widim_upper,bound,pass\n";
    for (std::size_t i = 0; i < fb.probes.size(); ++i) {
      const auto& p = fb.probes[i];
      o << i << ',' << p.fiber_size << ',' << p.widim_upper << ',' << fmt(p.bound) << ',' << p.pass << '\n';
    }
    return o.str();
  }();

  run.pass = pass;
  run.report = {{"schema", kReportSchema},
                {"timestamp", internal::timestamp()},
                {"parameters", parameters_json(r)},
                {"suites", sj},
                {"separation", to_json(sep)},
                {"fmap", fibre::to_json(F)},
                {"fiber_bound", fibre::to_json(fb)},
                {"fiber_chain", chain_json},
                {"estimates", {{"mdim_Z_estimate", ps.z_estimate.inf_ratio},
                               {"mdim_Z_free_series", [&] {
                                  nlohmann::json j = nlohmann::json::object();
                                  for (const auto& [n, w] : ps.free_series) j[std::to_string(n)] = w;
                                  return j;
                                }()},
                               {"mdim_Y_sparsity_bound", r.factor.delta_prime},
                               {"g_max_nonzero_fraction", gs.max_nonzero_fraction},
                               {"plateau_max_free_fraction", ps.max_free_fraction}}},
                {"hurewicz", to_json(h)},
                {"truncations", {{"max_horizon", c.max_horizon},
                                 {"sample_count", c.sample_count},
                                 {"tiling_window", static_cast<std::int64_t>(v.tiling_window_factor) * r.marker.M1},
                                 {"plateau_window", static_cast<std::int64_t>(v.plateau_window_factor) * r.marker.M1},
                                 {"g_window", v.g_window},
                                 {"chain_fibers", opt.chain ? v.chain_fibers : 0}}},
                {"pass", pass}};
  run.seconds["report"] = sw.lap();
  return run;
}

// --------------------------------------------------------------- products

struct ProductRun {
  nlohmann::json report;
  std::map<std::string, std::string> csv;
  bool pass = false;
};

// Factor k (1-based) runs at eps = 1/k and delta / 2^k with reduced
// verification sizes and without the fiber chain.
inline ExperimentConfig product_factor_config(const ExperimentConfig& c, int k) {
  ExperimentConfig f = c;
  f.eps = 1.0 / k;
  f.delta = c.delta / std::pow(2.0, k);
  f.m.reset();
  f.n_horizon.reset();
  f.marker.reset();
  f.tiling_r.reset();
  f.tiling_delta.reset();
  f.tiling_c.reset();
  f.window_radius.reset();
  Verification& v = f.verification;
  v.tiling_instances = std::min(v.tiling_instances, 10);
  v.tiling_window_factor = std::min(v.tiling_window_factor, 20);
  v.plateau_samples = std::min(v.plateau_samples, 10);
  v.plateau_window_factor = std::min(v.plateau_window_factor, 20);
  v.g_samples = std::min(v.g_samples, 50);
  v.fiber_probes = std::min(v.fiber_probes, 16);
  v.fiber_mdim_samples = std::min(v.fiber_mdim_samples, 2);
  v.fiber_mdim_window_factor = std::min(v.fiber_mdim_window_factor, 4);
  return f;
}

inline ProductRun run_products(const ExperimentConfig& c, int count) {
  if (count < 1 || count > 4) throw ConfigError("products: count_factors must lie in [1, 4]");
  ProductRun out;
  nlohmann::json factors = nlohmann::json::array();
  double sum = 0.0;
  bool all_separate = true, pass = true;
  std::ostringstream csv;
  csv << "factor,eps,delta,m,n,M,M1,delta_prime,mdim_Z_estimate,factor_bound,separated,pass\n";
  for (int k = 1; k <= count; ++k) {
    const ExperimentConfig fc = product_factor_config(c, k);
    const PipelineRun run = run_pipeline(fc, {false, true});
    const double yb = run.resolved.factor.delta_prime;
    const double zb = run.report["estimates"]["mdim_Z_estimate"].get<double>();
    const double bound = yb + zb;
    const bool sep = run.report["separation"]["separated"].get<bool>();
    const bool ok = run.pass && bound < fc.delta;
    sum += bound;
    all_separate = all_separate && sep;
    pass = pass && ok;
    factors.push_back({{"k", k},
                       {"eps", fc.eps},
                       {"delta", fc.delta},
                       {"factor_bound", bound},
                       {"factor_bound_below_delta", bound < fc.delta},
                       {"separated", sep},
                       {"suites_pass", run.pass},
                       {"report", run.report}});
    const Resolved& r = run.resolved;
    csv << k << ',' << fmt(fc.eps) << ',' << fmt(fc.delta) << ',' << r.factor.m << ',' << r.factor.n << ','
        << r.marker.M << ',' << r.marker.M1 << ',' << fmt(yb) << ',' << fmt(zb) << ',' << fmt(bound) << ',' << sep
        << ',' << ok << '\n';
  }
  pass = pass && sum < c.delta && all_separate;
  out.csv["products.csv"] = csv.str();
  out.pass = pass;
  out.report = {{"schema", kReportSchema},
                {"timestamp", internal::timestamp()},
                {"count_factors", count},
                {"delta", c.delta},
                {"summed_bound", sum},
                {"summed_bound_below_delta", sum < c.delta},
                {"joint_separation", all_separate},
                {"factors", factors},
                {"pass", pass}};
  return out;
}

// ------------------------------------------------------------------ output

inline std::string report_text(const nlohmann::json& report) { return report.dump(2) + "\n"; }

// The report with its timestamp removed, for rerun comparisons.
inline std::string report_text_without_timestamp(nlohmann::json report) {
  std::function<void(nlohmann::json&)> strip = [&](nlohmann::json& j) {
    if (j.is_object()) {
      j.erase("timestamp");
      for (auto& [k, v] : j.items()) strip(v);
    } else if (j.is_array()) {
      for (auto& v : j) strip(v);
    }
  };
  strip(report);
  return report.dump(2) + "\n";
}

inline void write_outputs(const std::string& dir, const nlohmann::json& report,
                          const std::map<std::string, std::string>& csv) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream o(std::filesystem::path(dir) / "report.json");
    if (!o) throw ConfigError("cannot write to output directory '" + dir + "'");
    o << report_text(report);
  }
  for (const auto& [name, content] : csv) {
    std::ofstream o(std::filesystem::path(dir) / name);
    o << content;
  }
}

}  // namespace meandimlab::pipeline
