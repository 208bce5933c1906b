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

// Property suites over sampled points: tiling geometry, separation, plateau
// structure of Phi, and the structure of g. Each suite counts checks and
// violations and keeps the first witness.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "meandimlab/dynsys.hpp"
#include "meandimlab/errors.hpp"
#include "meandimlab/marker.hpp"
#include "meandimlab/signal.hpp"
#include "meandimlab/tiling.hpp"
#include "meandimlab/widim/orbit.hpp"

namespace meandimlab::pipeline {

using dynsys::OrbitWindow;

struct SuiteResult {
  std::string property;
  bool pass = true;
  bool diagnostic = false;  // reported, but not part of the exit status
  std::int64_t checked = 0;
  std::int64_t violations = 0;
  std::string witness;
  nlohmann::json details = nlohmann::json::object();

  SuiteResult() = default;
  explicit SuiteResult(std::string id, bool diag = false) : property(std::move(id)), diagnostic(diag) {}

  void check(bool ok, const std::string& what) {
    ++checked;
    if (ok) return;
    if (violations++ == 0) witness = what;
    pass = false;
  }
};

inline nlohmann::json to_json(const SuiteResult& s) {
  return {{"property", s.property}, {"pass", s.pass},       {"diagnostic", s.diagnostic},
          {"checked", s.checked},   {"violations", s.violations}, {"witness", s.witness},
          {"details", s.details}};
}

inline std::string fmt(double v) { return nlohmann::json(v).dump(); }

// ---------------------------------------------------------------- tiling

struct TilingSuite {
  SuiteResult locality{"tile-locality"};
  SuiteResult weight{"nonempty-tile-weight"};
  SuiteResult interior{"interior-measure"};
  SuiteResult density{"boundary-density"};
  SuiteResult good{"good-tile"};
  SuiteResult equivariance{"equivariance"};
  SuiteResult coverage{"tiling-coverage"};

  std::vector<SuiteResult*> all() { return {&locality, &weight, &interior, &density, &good, &equivariance, &coverage}; }
};

// One marker instance: a random arc center and a random point. The arc
// radii (and so M, M1) are those of `base`; rotating the arc leaves them fixed.
inline void check_tiling_instance(TilingSuite& suite, const marker::MarkerSpec& base, const dynsys::SystemSpec& sys,
                                  const tiling::TilingParams& tp, std::int64_t window, std::mt19937_64& rng,
                                  double tol = 1e-9) {
  marker::MarkerSpec spec = base;
  spec.arc_center = dynsys::unit_draw(rng);
  const OrbitWindow x = dynsys::constant_point(sys, dynsys::unit_draw(rng));
  const std::int64_t half = window / 2;
  const std::int64_t pad = tp.M1 + 2;
  const marker::MarkerSequence seq = marker::marker_sequence(spec, x, -half - pad, half + pad);
  const tiling::IntervalTiling at_H = tiling::slice_tiling(seq, tp.H, -half, half);
  const tiling::IntervalTiling at_cH = tiling::slice_tiling(seq, tp.cH(), -half, half);
  const std::string where = " (arc center " + fmt(spec.arc_center) + ", circle " + fmt(x.circle()) + ")";

  // Coverage: consecutive cells share endpoints and fill the window.
  {
    const auto& cells = at_H.cells();
    bool ok = !cells.empty() && tiling::diff(cells.front().a, -half) == 0.0 &&
              tiling::diff(cells.back().b, half) == 0.0;
    for (std::size_t i = 1; i < cells.size() && ok; ++i) ok = tiling::diff(cells[i].a, cells[i - 1].b) == 0.0;
    suite.coverage.check(ok, "tiles do not partition the window" + where);
  }

  for (const tiling::Tile& t : at_H.tiles()) {
    if (t.empty) continue;
    const double v = seq.value(t.label);
    suite.weight.check(v > 0.5, "tile " + std::to_string(t.label) + " nonempty with phi " + fmt(v) + where);
    if (!t.complete()) continue;
    const double lo = static_cast<double>(t.label - tp.M1 - 1), hi = static_cast<double>(t.label + tp.M1 + 1);
    suite.locality.check(t.a.value() >= lo - tol && t.b.value() <= hi + tol,
                         "tile " + std::to_string(t.label) + " = [" + fmt(t.a.value()) + ", " + fmt(t.b.value()) +
                             "] leaves its M1 + 1 neighborhood" + where);
    const tiling::Tile* c = at_cH.find(t.label);
    if (c == nullptr || c->empty || c->complete()) {
      const double wc = (c == nullptr || c->empty) ? 0.0 : c->length();
      const double lhs = tiling::interior_measure(t.length(), tp.R);
      suite.interior.check(lhs >= (1.0 - tp.delta) * wc - tol,
                           "tile " + std::to_string(t.label) + ": interior " + fmt(lhs) + " < (1-delta) * " + fmt(wc) +
                               where);
    }
  }
  // Nonempty tiles at cH must also be M1-local for the interior comparison
  // to be meaningful; an H-empty tile with a cH tile compares against 0.
  for (const tiling::Tile& c : at_cH.tiles()) {
    if (c.empty || !c.complete()) continue;
    const tiling::Tile* t = at_H.find(c.label);
    if (t == nullptr || t->empty) {
      suite.interior.check(0.0 >= (1.0 - tp.delta) * c.length() - tol,
                           "tile " + std::to_string(c.label) + " empty at H but of length " + fmt(c.length()) +
                               " at cH" + where);
    }
  }

  const double Rw = static_cast<double>(half) - tp.R - 1.0;
  const double dens = tiling::boundary_density(at_H, tp.R, Rw);
  suite.density.check(dens < tp.delta, "boundary density " + fmt(dens) + where);
  suite.density.details["max"] = std::max(suite.density.details.value("max", 0.0), dens);

  try {
    (void)tiling::good_tile(at_H, at_cH, tp);
    suite.good.check(true, "");
  } catch (const LemmaViolation& e) {
    suite.good.check(false, std::string(e.what()) + where);
  }

  // Equivariance: tiling of T^7 x against the translated tiling of x on a
  // subwindow.
  const std::int64_t k = 7;
  const std::int64_t sub = std::min<std::int64_t>(half - pad - k, 4 * tp.M1);
  // T^k x through the exact rotation residue, not a re-rounded circle value.
  const OrbitWindow xs = x.with_offset(x.offset() + k);
  const marker::MarkerSequence seq_s = marker::marker_sequence(spec, xs, -sub - k - pad, sub - k + pad);
  const tiling::EquivarianceResult eq = tiling::check_equivariance(seq, seq_s, tp.H, k, -sub, sub, tol);
  suite.equivariance.check(eq.ok, eq.mismatch + where);
}

inline TilingSuite run_tiling_suite(const marker::MarkerSpec& base, const dynsys::SystemSpec& sys,
                                    const tiling::TilingParams& tp, int instances, std::int64_t window,
                                    std::uint64_t seed) {
  TilingSuite suite;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < instances; ++i) check_tiling_instance(suite, base, sys, tp, window, rng);
  for (SuiteResult* s : suite.all()) s->details["instances"] = instances;
  suite.density.details["window"] = window;
  return suite;
}

// ------------------------------------------------------------ separation

inline signal::Separation separation(const marker::MarkerSpec& mk, const dynsys::SystemSpec& sys,
                                     const tiling::TilingParams& tp, const signal::SignalParams& sp) {
  const auto [z, zp] = marker::pick_z_zprime(mk, sys);
  const std::int64_t reach = 2 * tp.M1 + 4 + static_cast<std::int64_t>(sp.R);
  const std::int64_t pad = tp.M1 + 2;
  signal::Separation s;
  const auto tz = tiling::slice_tiling(marker::marker_sequence(mk, z, -reach - pad, reach + pad), tp.H, -reach, reach);
  const auto tzp = tiling::slice_tiling(marker::marker_sequence(mk, zp, -reach - pad, reach + pad), tp.H, -reach, reach);
  s.phi_z0 = signal::h_value(tz, sp);
  s.phi_zprime0 = signal::h_value(tzp, sp);
  s.separated = s.phi_z0 != s.phi_zprime0;
  return s;
}

inline SuiteResult separation_suite(const signal::Separation& s, const signal::SignalParams& sp) {
  SuiteResult r{"separation"};
  const double gap_min = 1.0 - signal::gamma(1.0, sp.gamma_variant);
  r.check(s.phi_z0 == 2.0, "Phi(z)_0 = " + fmt(s.phi_z0));
  r.check(s.phi_zprime0 < 2.0, "Phi(z')_0 = " + fmt(s.phi_zprime0));
  r.check(s.phi_z0 - s.phi_zprime0 >= gap_min - 1e-12, "gap " + fmt(s.phi_z0 - s.phi_zprime0));
  r.details = to_json(s);
  r.details["gap"] = s.phi_z0 - s.phi_zprime0;
  r.details["gap_min"] = gap_min;
  return r;
}

// --------------------------------------------------------------- plateau

struct PlateauSuite {
  SuiteResult plateau{"plateau"};
  SuiteResult profile{"profile-bound"};
  std::map<int, double> free_series;  // horizon -> max free count
  double max_free_fraction = 0.0;
  widim::MdimEstimate z_estimate;
};

// Free fraction of Phi over [0, N) for N = window_factor * M1 on `samples`
// random points, plus prefix horizons N/100 and N/10 for the dimension series
// of the Phi-image.
inline PlateauSuite run_plateau_suite(const marker::MarkerSpec& mk, const dynsys::SystemSpec& sys,
                                      const tiling::TilingParams& tp, const signal::SignalParams& sp, int samples,
                                      int window_factor, double delta, double delta_prime, std::uint64_t seed) {
  PlateauSuite out;
  const std::int64_t N = static_cast<std::int64_t>(window_factor) * tp.M1;
  std::vector<std::int64_t> horizons;
  for (std::int64_t h : {N / 100, N / 10, N}) {
    if (h >= 1 && (horizons.empty() || h != horizons.back())) horizons.push_back(h);
  }
  const signal::GammaTable gtab(2 * tp.M1 + 4, sp.gamma_variant);
  const std::int64_t pad_t = static_cast<std::int64_t>(std::ceil(sp.R)) + 2;
  const std::int64_t pad = tp.M1 + 2;
  std::map<std::int64_t, std::int64_t> worst;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < samples; ++i) {
    const OrbitWindow x = dynsys::constant_point(sys, dynsys::unit_draw(rng));
    const auto seq = marker::marker_sequence(mk, x, -pad_t - pad, N + pad_t + pad);
    const auto t = tiling::slice_tiling(seq, tp.H, -pad_t, N + pad_t);
    for (std::int64_t h : horizons) {
      const signal::PlateauReport rep = signal::plateau_report(t, sp, 0, h, gtab);
      worst[h] = std::max(worst[h], rep.free_count);
      if (h == N) {
        out.max_free_fraction = std::max(out.max_free_fraction, rep.free_fraction);
        out.plateau.check(rep.free_fraction < delta, "free fraction " + fmt(rep.free_fraction) + " at circle " +
                                                          fmt(x.circle()));
        out.profile.check(rep.max_excess <= 1e-12 && rep.profile_mismatches == 0,
                          "excess " + fmt(rep.max_excess) + ", mismatches " + std::to_string(rep.profile_mismatches) +
                              " at circle " + fmt(x.circle()));
        out.profile.details["unresolved"] = out.profile.details.value("unresolved", std::int64_t{0}) + rep.unresolved;
      }
    }
  }
  // The Phi-image over N coordinates lies in finitely many pieces of
  // dimension at most the free count, so the series bounds Widim(P_N Z).
  for (const auto& [h, w] : worst) out.free_series[static_cast<int>(std::min<std::int64_t>(h, 2'000'000'000))] = static_cast<double>(w);
  out.z_estimate = widim::mdim_estimate(out.free_series);
  out.plateau.check(out.z_estimate.inf_ratio < delta_prime,
                    "mdim estimate of the Phi-image " + fmt(out.z_estimate.inf_ratio) + " >= delta'");
  out.plateau.details = {{"N", N},
                         {"samples", samples},
                         {"max_free_fraction", out.max_free_fraction},
                         {"delta", delta},
                         {"delta_prime", delta_prime},
                         {"mdim_Z_estimate", out.z_estimate.inf_ratio}};
  return out;
}

// ------------------------------------------------------------- g / I_g

struct GSuite {
  SuiteResult recovery{"window-recovery"};
  SuiteResult recovery_strict{"window-recovery-strict"};
  SuiteResult vanishing{"g-vanishing"};
  SuiteResult sparsity{"g-sparsity"};
  double max_nonzero_fraction = 0.0;
};

// On each sampled x, g over [0, N) against the structure statements:
//  - window recovery when [a, a+m-2] lies in the interior of tile b,
//    a == b mod (m-1) and 1 <= min(d(a), d(a+m-2)) <= 2m (as stated), and
//    the variant asking every block point to be at distance in [1, 2m];
//  - g(T^a x) = 0 whenever dist(a, boundary) >= 3m;
//  - at most delta' N + 1 nonzero entries.
inline GSuite run_g_suite(const marker::MarkerSpec& mk, const dynsys::SystemSpec& sys, const tiling::TilingParams& tp,
                          const signal::SignalParams& sp, const signal::FOracle& F, int samples, std::int64_t N,
                          double delta_prime, std::uint64_t seed) {
  GSuite out;
  out.recovery_strict.diagnostic = true;
  const int m = sp.m;
  const std::int64_t lead = 4 * m + 2;
  const std::int64_t pad = tp.M1 + 2;
  std::mt19937_64 rng(seed);
  std::int64_t admissible = 0, admissible_strict = 0;
  for (int i = 0; i < samples; ++i) {
    const OrbitWindow x = dynsys::sample_points(sys, 1, rng())[0];
    const auto seq = marker::marker_sequence(mk, x, -lead - pad, N + lead + pad);
    const auto t = tiling::slice_tiling(seq, tp.H, -lead, N + lead);
    signal::GEvaluator g(t, sp, x, F);
    std::vector<double> gv(static_cast<std::size_t>(N));
    std::vector<signal::Location> loc(static_cast<std::size_t>(N));
    std::int64_t nonzero = 0;
    for (std::int64_t k = 0; k < N; ++k) {
      loc[static_cast<std::size_t>(k)] = signal::locate(t, k);
      gv[static_cast<std::size_t>(k)] = g(k);
      if (gv[static_cast<std::size_t>(k)] != 0.0) ++nonzero;
      const auto& L = loc[static_cast<std::size_t>(k)];
      if (!L.on_boundary && L.dist >= 3.0 * m) {
        out.vanishing.check(gv[static_cast<std::size_t>(k)] == 0.0,
                            "g(T^" + std::to_string(k) + " x) = " + fmt(gv[static_cast<std::size_t>(k)]) +
                                " at distance " + fmt(L.dist));
      }
    }
    const double bound = delta_prime * static_cast<double>(N) + 1.0;
    out.sparsity.check(static_cast<double>(nonzero) <= bound,
                       std::to_string(nonzero) + " nonzero entries > " + fmt(bound) + " (sample " +
                           std::to_string(i) + ")");
    out.max_nonzero_fraction = std::max(out.max_nonzero_fraction, static_cast<double>(nonzero) / N);

    for (std::int64_t a = 0; a + m - 2 < N; ++a) {
      const auto& La = loc[static_cast<std::size_t>(a)];
      const auto& Le = loc[static_cast<std::size_t>(a + m - 2)];
      if (La.on_boundary || Le.on_boundary || La.label != Le.label) continue;
      std::int64_t r = (a - La.label) % (m - 1);
      if (r != 0) continue;
      const double dmin = std::min(La.dist, Le.dist);
      const bool stated = dmin >= 1.0 && dmin <= 2.0 * m;
      bool strict = true;
      for (std::int64_t s = a; s <= a + m - 2; ++s) {
        const double d = loc[static_cast<std::size_t>(s)].dist;
        strict = strict && d >= 1.0 && d <= 2.0 * m;
      }
      if (!stated && !strict) continue;
      const std::vector<double>& Fa = g.F_at(a);
      bool equal = true;
      std::int64_t bad = -1;
      for (std::int64_t s = a; s <= a + m - 2 && equal; ++s) {
        if (gv[static_cast<std::size_t>(s)] != Fa[static_cast<std::size_t>(s - a)]) {
          equal = false;
          bad = s;
        }
      }
      const std::string what = equal ? "" : "block a = " + std::to_string(a) + " in tile " + std::to_string(La.label) +
                                                ": g(T^" + std::to_string(bad) + " x) at distance " +
                                                fmt(loc[static_cast<std::size_t>(bad)].dist) +
                                                " differs from F(T^a x) (min end distance " + fmt(dmin) + ")";
      if (stated) {
        ++admissible;
        out.recovery.check(equal, what);
      }
      if (strict) {
        ++admissible_strict;
        out.recovery_strict.check(equal, what);
      }
    }
  }
  out.recovery.details = {{"samples", samples}, {"N", N}, {"admissible_blocks", admissible}};
  out.recovery_strict.details = {{"samples", samples}, {"N", N}, {"admissible_blocks", admissible_strict}};
  out.vanishing.details = {{"samples", samples}, {"N", N}};
  out.sparsity.details = {{"samples", samples},
                          {"N", N},
                          {"delta_prime", delta_prime},
                          {"max_nonzero_fraction", out.max_nonzero_fraction}};
  if (admissible == 0) out.recovery.check(false, "no admissible block was sampled");
  return out;
}

// -------------------------------------------------------- subadditivity

struct SubadditivitySuite {
  SuiteResult result{"subadditivity"};
  std::map<int, int> series;
};

inline SubadditivitySuite run_subadditivity(const std::vector<OrbitWindow>& samples, double eps, int max_n) {
  SubadditivitySuite out;
  for (int n = 1; n <= 2 * max_n; ++n) out.series[n] = widim::widim_orbit(samples, n, eps).upper;
  for (int a = 1; a <= max_n; ++a) {
    for (int b = a; b <= max_n; ++b) {
      const int lhs = out.series[a + b], rhs = out.series[a] + out.series[b];
      out.result.check(lhs <= rhs, "W(d_" + std::to_string(a + b) + ") = " + std::to_string(lhs) + " > W(d_" +
                                       std::to_string(a) + ") + W(d_" + std::to_string(b) + ") = " +
                                       std::to_string(rhs));
    }
  }
  nlohmann::json s = nlohmann::json::object();
  for (const auto& [n, w] : out.series) s[std::to_string(n)] = w;
  out.result.details = {{"eps", eps}, {"series", s}, {"samples", samples.size()}};
  return out;
}

}  // namespace meandimlab::pipeline
