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

// Fibers of the factor map pi = (g-sequence, Phi-sequence).
//
// For a point x, the coordinates that pi reads are the circle (through Phi)
// and, through g, the cube coordinates [A + first, A + last] of every coding
// block anchor A that carries a nonzero phase-5 weight. Redrawing any other
// cube coordinate keeps pi fixed, so the pi-fiber of x contains the full
// cube over the eps-effective coordinates that no anchor reads. Those give a
// certified lower bound for Widim_eps(fiber, d_n) by Lebesgue's covering
// lemma; a stratified sample of the same fiber gives the solver's upper
// estimate.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "meandimlab/dynsys.hpp"
#include "meandimlab/errors.hpp"
#include "meandimlab/fibre/product_fmap.hpp"
#include "meandimlab/marker.hpp"
#include "meandimlab/signal.hpp"
#include "meandimlab/tiling.hpp"
#include "meandimlab/widim/orbit.hpp"

namespace meandimlab::fibre {

struct ChainSetup {
  marker::MarkerSpec marker;
  tiling::TilingParams tiling;
  signal::SignalParams signal;
  double eps = 0.25;
  double delta = 0.2;
  int n = 1;
};

// Tilings of one point at H and cH, certified on [-reach, reach].
struct PointTilings {
  tiling::IntervalTiling at_H;
  tiling::IntervalTiling at_cH;
};

inline PointTilings point_tilings(const ChainSetup& s, const OrbitWindow& x, std::int64_t reach) {
  const std::int64_t pad = s.tiling.M1 + 2;
  const marker::MarkerSequence seq = marker::marker_sequence(s.marker, x, -reach - pad, reach + pad);
  return {tiling::slice_tiling(seq, s.tiling.H, -reach, reach),
          tiling::slice_tiling(seq, s.tiling.cH(), -reach, reach)};
}

struct FiberChainItem {
  bool containment_shifted = false;  // F(T^a x') equals the y-block at some a in [-K, K]
  bool containment_literal = false;  // F(x') itself equals some y-block
  std::int64_t witness_a = 0;
  std::size_t fiber_size = 0;
  int free_axes = 0;
  int widim_upper = 0;
  int widim_lower = 0;  // certified for the exact fiber
  double ratio_upper = 0.0;
  double ratio_lower = 0.0;
  bool pi_preserved = true;
  bool pass = false;
};

struct FiberChainReport {
  std::vector<FiberChainItem> items;
  std::int64_t K = 0;
  int containment_literal_failures = 0;
  int containment_shifted_failures = 0;
  int ratio_failures = 0;
  int ratio_lower_failures = 0;
  double max_ratio_upper = 0.0;
  double max_ratio_lower = 0.0;
  double min_ratio_lower = 0.0;
  bool pass() const {
    return !items.empty() && containment_literal_failures == 0 && containment_shifted_failures == 0 &&
           ratio_failures == 0;
  }
};

namespace internal {

// Anchors A whose block [A, A+m-2] carries some t with nonzero phase-5
// weight and block_anchor(label(t), t) == A, restricted to [a_lo, a_hi].
inline std::vector<std::int64_t> live_anchors(const tiling::IntervalTiling& t, int m, std::int64_t a_lo,
                                              std::int64_t a_hi) {
  std::vector<std::int64_t> out;
  for (std::int64_t A = a_lo; A <= a_hi; ++A) {
    for (std::int64_t s = A; s <= A + m - 2; ++s) {
      const signal::Location loc = signal::locate(t, s);
      if (loc.on_boundary || signal::alpha_phase5(loc.dist, m) == 0.0) continue;
      if (signal::block_anchor(loc.label, s, m) == A) {
        out.push_back(A);
        break;
      }
    }
  }
  return out;
}

inline bool same_block(const std::vector<double>& F, const std::vector<double>& y, std::int64_t a,
                       std::int64_t y_lo) {
  for (std::size_t i = 0; i < F.size(); ++i) {
    if (F[i] != y[static_cast<std::size_t>(a - y_lo) + i]) return false;
  }
  return true;
}

}  // namespace internal

// Probes the pi-fiber through x with `per_fiber` stratified redraws of the
// free coordinates.
inline FiberChainItem probe_pi_fiber(const ChainSetup& s, const ProductFMap& F, const OrbitWindow& x,
                                     int per_fiber, std::mt19937_64& rng, int verify_pi_samples = 4) {
  const int m = s.signal.m;
  const std::int64_t K = 2 * s.tiling.M1 + 2;
  const std::int64_t y_lo = -K - m, y_hi = K + m;
  const std::int64_t reach = y_hi + 4 * m + 2;
  const PointTilings pt = point_tilings(s, x, reach);
  const tiling::GoodTile good = tiling::good_tile(pt.at_H, pt.at_cH, s.tiling);

  const signal::FOracle oracle = [&F](const OrbitWindow& p) { return F(p); };
  signal::GEvaluator gx(pt.at_H, s.signal, x, oracle);
  const std::vector<double> y = gx.window(y_lo, y_hi);

  // Effective coordinates at eps and the ones pi reads.
  const int reach_eps = widim::effective_reach(x.spec().decay, s.eps);
  const std::int64_t j_lo = -reach_eps, j_hi = s.n - 1 + reach_eps;
  const std::int64_t f_lo = F.first_coord(), f_hi = F.last_coord();
  std::vector<bool> visible(static_cast<std::size_t>(j_hi - j_lo + 1), false);
  for (std::int64_t A : internal::live_anchors(pt.at_H, m, j_lo - f_hi, j_hi - f_lo)) {
    for (std::int64_t j = std::max(j_lo, A + f_lo); j <= std::min(j_hi, A + f_hi); ++j) {
      visible[static_cast<std::size_t>(j - j_lo)] = true;
    }
  }
  std::vector<std::int64_t> free;
  for (std::int64_t j = j_lo; j <= j_hi; ++j) {
    if (!visible[static_cast<std::size_t>(j - j_lo)]) free.push_back(j);
  }
  const int D = x.spec().dim;

  FiberChainItem item;
  item.free_axes = static_cast<int>(free.size()) * D;
  item.widim_lower = item.free_axes;

  // Latin hypercube over the free axes: every eps/8 bucket gets a sample.
  const int S = std::max(per_fiber, 1);
  std::vector<OrbitWindow> fiber{x};
  std::vector<std::vector<int>> perm(free.size() * static_cast<std::size_t>(D), std::vector<int>(S));
  for (auto& p : perm) {
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), rng);
  }
  const std::int64_t w = x.spec().window_radius;
  for (int k = 0; k < S; ++k) {
    std::vector<double> coords(x.base_coords().begin(), x.base_coords().end());
    for (std::size_t f = 0; f < free.size(); ++f) {
      for (int i = 0; i < D; ++i) {
        const std::int64_t j = free[f] + x.offset();
        if (j < -w || j > w) throw RangeError("probe_pi_fiber: free coordinate outside stored window");
        const int stratum = perm[f * static_cast<std::size_t>(D) + static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        coords[static_cast<std::size_t>((j + w) * D + i)] = (stratum + dynsys::unit_draw(rng)) / S;
      }
    }
    fiber.push_back(OrbitWindow(x.spec(), std::move(coords), x.base_circle()).with_offset(x.offset()));
  }
  item.fiber_size = fiber.size();

  // pi(x') == pi(x) on the window: Phi only reads the circle, which is
  // unchanged, so compare the g-sequences.
  for (int k = 1; k <= std::min(verify_pi_samples, S); ++k) {
    signal::GEvaluator gk(pt.at_H, s.signal, fiber[static_cast<std::size_t>(k)], oracle);
    if (gk.window(y_lo, y_hi) != y) item.pi_preserved = false;
  }

  // Containment. The constructive anchor: first a >= left end of the good
  // tile + 1 with a == label mod (m-1); its whole block sits at distance in
  // [1, 2m] from the boundary, where the phase-5 weight is 1.
  item.containment_shifted = true;
  item.containment_literal = true;
  const std::int64_t start = static_cast<std::int64_t>(std::floor(good.a)) + 1;
  std::int64_t a = signal::block_anchor(good.label, start, m);
  if (a < start) a += m - 1;
  item.witness_a = a;
  for (std::size_t k = 0; k < fiber.size(); ++k) {
    const OrbitWindow& xp = fiber[k];
    const bool shifted = a >= -K && a + m - 2 <= K &&
                         internal::same_block(F(dynsys::apply_shift(xp, a)), y, a, y_lo);
    if (!shifted) item.containment_shifted = false;
    if (k < 2) {
      // The literal display: F(x') itself must match some block.
      const std::vector<double> Fx = F(xp);
      bool any = false;
      for (std::int64_t b = -K; b + m - 2 <= K && !any; ++b) any = internal::same_block(Fx, y, b, y_lo);
      if (!any) item.containment_literal = false;
    }
  }

  item.widim_upper = widim::widim_orbit(fiber, s.n, s.eps).upper;
  item.ratio_upper = static_cast<double>(item.widim_upper) / s.n;
  item.ratio_lower = static_cast<double>(item.widim_lower) / s.n;
  item.pass = item.containment_literal && item.containment_shifted && item.pi_preserved &&
              item.ratio_upper < s.delta;
  return item;
}

inline FiberChainReport fiber_width_chain(const ChainSetup& s, const ProductFMap& F, const dynsys::SystemSpec& spec,
                                          int fibers, int per_fiber, std::uint64_t seed) {
  if (fibers < 1) throw ConfigError("fiber_width_chain: fibers must be positive");
  FiberChainReport rep;
  rep.K = 2 * s.tiling.M1 + 2;
  rep.min_ratio_lower = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  for (int f = 0; f < fibers; ++f) {
    // One point at a time keeps memory flat for large windows.
    const OrbitWindow x = dynsys::sample_points(spec, 1, rng())[0];
    FiberChainItem it = probe_pi_fiber(s, F, x, per_fiber, rng);
    if (!it.pi_preserved) {
      throw ConstructionError("redrawn fiber coordinates changed pi; sample " + std::to_string(f));
    }
    if (!it.containment_literal) ++rep.containment_literal_failures;
    if (!it.containment_shifted) ++rep.containment_shifted_failures;
    if (!(it.ratio_upper < s.delta)) ++rep.ratio_failures;
    if (!(it.ratio_lower < s.delta)) ++rep.ratio_lower_failures;
    rep.max_ratio_upper = std::max(rep.max_ratio_upper, it.ratio_upper);
    rep.max_ratio_lower = std::max(rep.max_ratio_lower, it.ratio_lower);
    rep.min_ratio_lower = std::min(rep.min_ratio_lower, it.ratio_lower);
    rep.items.push_back(std::move(it));
  }
  return rep;
}

inline nlohmann::json to_json(const FiberChainReport& r) {
  return {{"fibers", r.items.size()},
          {"K", r.K},
          {"containment_literal_failures", r.containment_literal_failures},
          {"containment_shifted_failures", r.containment_shifted_failures},
          {"ratio_failures", r.ratio_failures},
          {"ratio_lower_failures", r.ratio_lower_failures},
          {"max_ratio_upper", r.max_ratio_upper},
          {"max_ratio_lower", r.max_ratio_lower},
          {"min_ratio_lower", std::isfinite(r.min_ratio_lower) ? nlohmann::json(r.min_ratio_lower)
                                                                : nlohmann::json(nullptr)},
          {"pass", r.pass()}};
}

}  // namespace meandimlab::fibre
