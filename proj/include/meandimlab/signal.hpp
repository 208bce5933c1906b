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

// Signals read off a tiling: the height profile Phi(x) = (h(T^k x))_k, the
// coded coordinate g(T^t x), and the factor pi(x) = (I_g(x), Phi(x)).
//
// Everything is evaluated at integer times k of the tiling of x, using the
// identity W(T^k x, n - k) = W(x, n) - k: the tile of T^k x containing 0 has
// label n - k and the same distance to the boundary as k has in x's tiling.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "meandimlab/dynsys.hpp"
#include "meandimlab/errors.hpp"
#include "meandimlab/tiling.hpp"

namespace meandimlab::signal {

using tiling::IntervalTiling;
using tiling::Tile;

enum class GammaVariant { kMaxAtZero, kMaxAtInfinity };

inline const char* to_string(GammaVariant v) {
  return v == GammaVariant::kMaxAtZero ? "MAX_AT_ZERO" : "MAX_AT_INFINITY";
}

struct SignalParams {
  double R = 9.0;
  int m = 2;
  GammaVariant gamma_variant = GammaVariant::kMaxAtZero;

  void validate() const {
    if (!(R > 6.0)) throw ConfigError("signal: R must exceed 6");
    if (m < 2) throw ConfigError("signal: m must be at least 2");
  }
};

// MAX_AT_ZERO: 2/(1+e^|t|), even, decreasing in |t|, gamma(0) = 1.
// MAX_AT_INFINITY: 2/(1+e^-|t|), kept for side-by-side diagnostics.
inline double gamma(double t, GammaVariant v = GammaVariant::kMaxAtZero) {
  const double e = std::exp(v == GammaVariant::kMaxAtZero ? std::fabs(t) : -std::fabs(t));
  return 2.0 / (1.0 + e);
}

inline double alpha_phase3(double t, double R) {
  const double top = R / 3.0;
  if (t <= 2.0) return 0.0;
  if (t >= top) return 1.0;
  return (t - 2.0) / (top - 2.0);
}

inline double alpha_phase5(double t, int m) {
  const double mm = static_cast<double>(m);
  if (t <= 0.0) return 0.0;
  if (t < 1.0) return t;
  if (t <= 2.0 * mm) return 1.0;
  if (t < 3.0 * mm) return (3.0 * mm - t) / mm;
  return 0.0;
}

// Position of an integer time inside a tiling.
struct Location {
  std::int64_t label = 0;    // tile whose interior holds k (undefined on the boundary)
  double dist = 0.0;         // distance from k to the tile boundary set
  bool on_boundary = false;  // k is a tile endpoint
  bool exact = true;         // false when the nearest endpoint is a window clip
};

inline Location locate(const IntervalTiling& t, std::int64_t k) {
  if (k < t.lo() || k > t.hi()) {
    throw RangeError("time " + std::to_string(k) + " outside the tiling window");
  }
  const auto& cells = t.cells();
  auto it = std::upper_bound(cells.begin(), cells.end(), k,
                             [](std::int64_t v, const Tile& c) { return tiling::diff(c.a, v) > 0; });
  const Tile* hit = it == cells.begin() ? nullptr : &*std::prev(it);
  if (hit == nullptr || tiling::diff(hit->b, k) < 0) {
    throw RangeError("time " + std::to_string(k) + " not covered by the tiling");
  }
  Location loc;
  loc.label = hit->label;
  const double da = -tiling::diff(hit->a, k);
  const double db = tiling::diff(hit->b, k);
  loc.on_boundary = (da == 0.0 && hit->a_genuine) || (db == 0.0 && hit->b_genuine);
  if (loc.on_boundary) return loc;
  if (da <= db) {
    loc.dist = da;
    loc.exact = hit->a_genuine;
  } else {
    loc.dist = db;
    loc.exact = hit->b_genuine;
  }
  return loc;
}

// gamma at integer offsets, tabulated once per run.
class GammaTable {
 public:
  GammaTable(std::int64_t reach, GammaVariant v) : reach_(reach), v_(v) {
    values_.resize(static_cast<std::size_t>(reach + 1));
    for (std::int64_t i = 0; i <= reach; ++i) values_[i] = gamma(static_cast<double>(i), v);
  }
  double operator()(std::int64_t d) const {
    const std::int64_t a = d < 0 ? -d : d;
    return a <= reach_ ? values_[static_cast<std::size_t>(a)] : gamma(static_cast<double>(a), v_);
  }

 private:
  std::int64_t reach_;
  GammaVariant v_;
  std::vector<double> values_;
};

// h at a location, given gamma of the label offset.
inline double h_from(const Location& loc, double gamma_n, double R) {
  if (loc.on_boundary) return 0.0;
  return std::min(loc.dist, 1.0) + alpha_phase3(loc.dist, R) * gamma_n;
}

// Phi(x)_k = h(T^k x).
inline double phi_at(const IntervalTiling& t, const SignalParams& p, std::int64_t k) {
  const Location loc = locate(t, k);
  if (!loc.exact && loc.dist < p.R / 3.0) {
    throw RangeError("Phi at " + std::to_string(k) + " is not certified by the tiling window");
  }
  return h_from(loc, gamma(static_cast<double>(loc.label - k), p.gamma_variant), p.R);
}

// h(x): Phi at time 0.
inline double h_value(const IntervalTiling& t, const SignalParams& p) { return phi_at(t, p, 0); }

inline std::vector<double> phi_map(const IntervalTiling& t, const SignalParams& p, std::int64_t k_lo,
                                   std::int64_t k_hi) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(k_hi - k_lo + 1));
  for (std::int64_t k = k_lo; k <= k_hi; ++k) out.push_back(phi_at(t, p, k));
  return out;
}

struct PlateauBlock {
  std::int64_t a = 0;
  std::int64_t b = 0;  // inclusive
  std::int64_t label = 0;
};

struct PlateauReport {
  double free_fraction = 1.0;
  std::int64_t free_count = 0;
  std::vector<PlateauBlock> blocks;
  // Largest excess of Phi over its profile bound 1 + gamma(n - k), and the
  // number of times where equality and the R/3 distance test disagree.
  double max_excess = 0.0;
  std::int64_t profile_mismatches = 0;
  // Times closer than R/3 whose strict gap is below the 1e-12 resolution.
  std::int64_t unresolved = 0;
};

inline bool resolvable_gap(double d, double R, double g) {
  return (1.0 - std::min(d, 1.0)) + (1.0 - alpha_phase3(d, R)) * g > 1e-12;
}

// Scans Phi over [k0, k0 + N) tile by tile. Plateau times are those at least
// R/3 inside their tile, where Phi must equal 1 + gamma(n - k) to 1e-12;
// closer times must sit strictly below it whenever the gap is resolvable. The window must
// stay R/3 away from the tiling window: beyond that distance h saturates, so
// a clipped tile still yields exact values.
inline PlateauReport plateau_report(const IntervalTiling& t, const SignalParams& p, std::int64_t k0,
                                    std::int64_t N, const GammaTable& gtab) {
  if (N < 1) throw ConfigError("plateau_report: N must be positive");
  const double third = p.R / 3.0;
  if (static_cast<double>(k0 - t.lo()) < third || static_cast<double>(t.hi() - (k0 + N - 1)) < third) {
    throw RangeError("plateau_report: window not certified by the tiling");
  }
  PlateauReport rep;
  std::int64_t plateau = 0;
  for (const Tile& tile : t.cells()) {
    const auto first = std::max<std::int64_t>(k0, static_cast<std::int64_t>(std::floor(tile.a.value())));
    const auto last = std::min<std::int64_t>(k0 + N - 1, static_cast<std::int64_t>(std::ceil(tile.b.value())));
    for (std::int64_t k = first; k <= last; ++k) {
      const double da = -tiling::diff(tile.a, k), db = tiling::diff(tile.b, k);
      if (!(da > 0.0 && db > 0.0)) continue;  // endpoints carry Phi = 0
      const double d = std::min(da, db);
      const double gk = gtab(tile.label - k);
      const double bound = 1.0 + gk;
      const double v = std::min(d, 1.0) + alpha_phase3(d, p.R) * gk;
      rep.max_excess = std::max(rep.max_excess, v - bound);
      if (d < third) {
        // Strictly below the profile, but the gap (1 - min(d,1)) + (1 - alpha) g
        // drops under 1e-12 once gamma is tiny; such times are unresolved.
        if (resolvable_gap(d, p.R, gk) && bound - v <= 1e-12) ++rep.profile_mismatches;
        if (!resolvable_gap(d, p.R, gk)) ++rep.unresolved;
        continue;
      }
      if (std::fabs(v - bound) > 1e-12) ++rep.profile_mismatches;
      ++plateau;
      if (!rep.blocks.empty() && rep.blocks.back().label == tile.label && rep.blocks.back().b == k - 1) {
        rep.blocks.back().b = k;
      } else {
        rep.blocks.push_back({k, k, tile.label});
      }
    }
  }
  rep.free_count = N - plateau;
  rep.free_fraction = static_cast<double>(rep.free_count) / static_cast<double>(N);
  return rep;
}

// Plateau analysis of an explicit Phi window (phi[i] = Phi_{k0+i}).
inline PlateauReport plateau_report(const std::vector<double>& phi, std::int64_t k0,
                                    const IntervalTiling& t, const SignalParams& p) {
  PlateauReport rep;
  std::int64_t plateau = 0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const std::int64_t k = k0 + static_cast<std::int64_t>(i);
    const Location loc = locate(t, k);
    bool on_profile = false;
    if (!loc.on_boundary) {
      const double bound = 1.0 + gamma(static_cast<double>(loc.label - k), p.gamma_variant);
      rep.max_excess = std::max(rep.max_excess, phi[i] - bound);
      on_profile = loc.dist >= p.R / 3.0;
      if (on_profile && std::fabs(phi[i] - bound) > 1e-12) ++rep.profile_mismatches;
      if (!on_profile) {
        const double gk = bound - 1.0;
        if (!resolvable_gap(loc.dist, p.R, gk)) {
          ++rep.unresolved;
        } else if (bound - phi[i] <= 1e-12) {
          ++rep.profile_mismatches;
        }
      }
    }
    if (on_profile) {
      ++plateau;
      if (!rep.blocks.empty() && rep.blocks.back().label == loc.label && rep.blocks.back().b == k - 1) {
        rep.blocks.back().b = k;
      } else {
        rep.blocks.push_back({k, k, loc.label});
      }
    }
  }
  const auto N = static_cast<std::int64_t>(phi.size());
  rep.free_count = N - plateau;
  rep.free_fraction = N == 0 ? 0.0 : static_cast<double>(rep.free_count) / static_cast<double>(N);
  return rep;
}

// Map X -> [0,1]^{m-1}, indexed by {0, ..., m-2}.
using FOracle = std::function<std::vector<double>(const dynsys::OrbitWindow&)>;

// Anchor A of the coding block used at time t inside tile b:
// A = b mod (m-1) and t in [A, A + m - 2].
inline std::int64_t block_anchor(std::int64_t b, std::int64_t t, int m) {
  const std::int64_t w = m - 1;
  std::int64_t r = (t - b) % w;
  if (r < 0) r += w;
  return t - r;
}

// Evaluates g(T^t x) on integer windows, caching F(T^A x) per anchor.
class GEvaluator {
 public:
  GEvaluator(const IntervalTiling& tiling, SignalParams params, dynsys::OrbitWindow x, FOracle F)
      : tiling_(tiling), params_(params), x_(std::move(x)), F_(std::move(F)) {}

  double operator()(std::int64_t t) {
    const Location loc = locate(tiling_, t);
    if (loc.on_boundary) return 0.0;
    const double w = alpha_phase5(loc.dist, params_.m);
    if (!loc.exact && loc.dist < 3.0 * params_.m) {
      throw RangeError("g at " + std::to_string(t) + " is not certified by the tiling window");
    }
    if (w == 0.0) return 0.0;
    const std::int64_t A = block_anchor(loc.label, t, params_.m);
    return w * F_at(A)[static_cast<std::size_t>(t - A)];
  }

  const std::vector<double>& F_at(std::int64_t A) {
    auto it = cache_.find(A);
    if (it == cache_.end()) {
      std::vector<double> v = F_(dynsys::apply_shift(x_, A));
      if (v.size() != static_cast<std::size_t>(params_.m - 1)) {
        throw ConfigError("F oracle returned " + std::to_string(v.size()) + " coordinates, expected m-1");
      }
      it = cache_.emplace(A, std::move(v)).first;
    }
    return it->second;
  }

  std::vector<double> window(std::int64_t t_lo, std::int64_t t_hi) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(t_hi - t_lo + 1));
    for (std::int64_t t = t_lo; t <= t_hi; ++t) out.push_back((*this)(t));
    return out;
  }

 private:
  const IntervalTiling& tiling_;
  SignalParams params_;
  dynsys::OrbitWindow x_;
  FOracle F_;
  std::map<std::int64_t, std::vector<double>> cache_;
};

inline double g_value(const IntervalTiling& tiling, const FOracle& F, const dynsys::OrbitWindow& x,
                      const SignalParams& p) {
  GEvaluator ev(tiling, p, x, F);
  return ev(0);
}

struct FactorImage {
  std::int64_t k0 = 0;
  std::vector<double> phi_seq;
  std::vector<double> g_seq;
};

inline FactorImage pi_map(const IntervalTiling& tiling, const SignalParams& p, const dynsys::OrbitWindow& x,
                          const FOracle& F, std::int64_t k_lo, std::int64_t k_hi) {
  GEvaluator ev(tiling, p, x, F);
  return {k_lo, phi_map(tiling, p, k_lo, k_hi), ev.window(k_lo, k_hi)};
}

struct Separation {
  double phi_z0 = 0.0;
  double phi_zprime0 = 0.0;
  bool separated = false;
};

inline nlohmann::json to_json(const Separation& s) {
  return {{"phi_z0", s.phi_z0}, {"phi_zprime0", s.phi_zprime0}, {"separated", s.separated}};
}

}  // namespace meandimlab::signal
