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

// Horizontal slices of the Voronoi diagram of the sites (n, 1/phi(T^n x)).
//
// On the line y = -L the squared distance to site (n, h_n) is
// (u - n)^2 + (L + h_n)^2, so a slice is the lower envelope of a family of
// parabolas with a common leading term, i.e. of lines in u with slopes -2n.
// Consecutive envelope sites n < m meet at
//   u(n,m) = (m+n)/2 + (h_m - h_n)(2L + h_m + h_n) / (2(m-n)).
//
// Endpoints are stored as an integer anchor (the left site) plus a double
// offset that only depends on site differences, so translating the sites by
// an integer reproduces every endpoint exactly.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "meandimlab/errors.hpp"
#include "meandimlab/marker.hpp"

namespace meandimlab::tiling {

using marker::MarkerSequence;

struct TilingParams {
  double r = 9.0;
  double delta = 0.2;
  double c = 1.1;
  double R = 9.0;
  std::int64_t M = 0;
  std::int64_t M1 = 0;
  double H = 1.0;

  double cH() const { return c * H; }
};

// max{ 2R(c+1)/(c-1), 2/((1-delta)^-1 - c) }; M must exceed it.
inline double m_lower_bound(double R, double delta, double c) {
  return std::max(2.0 * R * (c + 1.0) / (c - 1.0), 2.0 / (1.0 / (1.0 - delta) - c));
}

// The c in (1, 1/(1-delta)) minimizing m_lower_bound: the first term falls
// and the second rises in c, so bisect on their difference.
inline double choose_c(double r, double delta) {
  const double R = std::max(r, 9.0);
  double lo = 1.0, hi = 1.0 / (1.0 - delta);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = 2.0 * R * (mid + 1.0) / (mid - 1.0);
    const double g = 2.0 / (1.0 / (1.0 - delta) - mid);
    (f > g ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline TilingParams make_tiling_params(double r, double delta, std::optional<double> c,
                                       std::int64_t M, std::int64_t M1) {
  if (!(r > 0.0)) throw ConfigError("tiling: r must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("tiling: delta must lie in (0,1)");
  TilingParams p;
  p.r = r;
  p.delta = delta;
  p.c = c ? *c : choose_c(r, delta);
  p.R = std::max(r, 9.0);
  p.M = M;
  p.M1 = M1;
  p.H = static_cast<double>(M1 + 1) * static_cast<double>(M1 + 1);
  if (!(p.c > 1.0 && p.c < 1.0 / (1.0 - delta))) {
    throw ConfigError("tiling: c = " + std::to_string(p.c) + " outside (1, 1/(1-delta))");
  }
  if (M1 <= M) throw ConfigError("tiling: M1 must exceed M");
  const double bound = m_lower_bound(p.R, delta, p.c);
  if (!(static_cast<double>(M) > bound)) {
    throw ConfigError("tiling: M = " + std::to_string(M) + " does not exceed the required bound " +
                      std::to_string(bound));
  }
  return p;
}

struct Endpoint {
  std::int64_t anchor = 0;
  double offset = 0.0;

  double value() const { return static_cast<double>(anchor) + offset; }
  Endpoint shifted(std::int64_t k) const { return {anchor + k, offset}; }
};

// a - b, evaluated so that a common integer translation cancels exactly.
inline double diff(const Endpoint& a, const Endpoint& b) {
  return (static_cast<double>(a.anchor - b.anchor) + a.offset) - b.offset;
}

inline double diff(const Endpoint& a, std::int64_t k) { return diff(a, Endpoint{k, 0.0}); }

struct Tile {
  std::int64_t label = 0;
  bool empty = true;
  Endpoint a, b;
  // False when the endpoint is a clip against the tiling window.
  bool a_genuine = false;
  bool b_genuine = false;

  double length() const { return empty ? 0.0 : diff(b, a); }
  bool complete() const { return !empty && a_genuine && b_genuine; }
};

class IntervalTiling {
 public:
  IntervalTiling(std::int64_t lo, std::int64_t hi, double level, std::vector<Tile> tiles)
      : lo_(lo), hi_(hi), level_(level), tiles_(std::move(tiles)) {
    for (const Tile& t : tiles_) {
      if (!t.empty) cells_.push_back(t);
    }
  }

  std::int64_t lo() const { return lo_; }
  std::int64_t hi() const { return hi_; }
  double level() const { return level_; }

  // All stored tiles sorted by label; EMPTY entries are support sites that
  // the envelope dominates.
  const std::vector<Tile>& tiles() const { return tiles_; }

  const Tile* find(std::int64_t label) const {
    auto it = std::lower_bound(tiles_.begin(), tiles_.end(), label,
                               [](const Tile& t, std::int64_t v) { return t.label < v; });
    return (it != tiles_.end() && it->label == label) ? &*it : nullptr;
  }

  // Nonempty tiles, in label order, which is also their order along the line.
  const std::vector<Tile>& cells() const { return cells_; }

  // Genuine endpoints inside the window, sorted and deduplicated.
  std::vector<Endpoint> boundary_points() const {
    std::vector<Endpoint> out;
    for (const Tile& t : cells_) {
      if (t.a_genuine) out.push_back(t.a);
      if (t.b_genuine) out.push_back(t.b);
    }
    std::sort(out.begin(), out.end(), [](const Endpoint& x, const Endpoint& y) { return diff(x, y) < 0; });
    out.erase(std::unique(out.begin(), out.end(),
                          [](const Endpoint& x, const Endpoint& y) { return diff(x, y) == 0; }),
              out.end());
    return out;
  }

 private:
  std::int64_t lo_, hi_;
  double level_;
  std::vector<Tile> tiles_;
  std::vector<Tile> cells_;
};

namespace internal {

struct Site {
  std::int64_t n;
  double h;
};

// Bisector of consecutive sites on the slice, as an endpoint anchored at s.
inline Endpoint bisector(const Site& s, const Site& t, double level) {
  const double dn = static_cast<double>(t.n - s.n);
  const double shift = (t.h - s.h) * (2.0 * level + t.h + s.h) / (2.0 * dn);
  return {s.n, 0.5 * dn + shift};
}

}  // namespace internal

// Slice of the Voronoi tiling at y = -level over the integer window [lo, hi].
// The sequence must extend M1 + 1 beyond the window on both sides, since a
// tile lies within M1 + 1 of its site.
inline IntervalTiling slice_tiling(const MarkerSequence& seq, double level, std::int64_t lo,
                                   std::int64_t hi) {
  if (!(level > 0.0)) throw ConfigError("slice_tiling: level must be positive");
  if (hi <= lo) throw RangeError("slice_tiling: empty window");
  const std::int64_t margin = seq.M1() + 1;
  if (seq.lo() > lo - margin || seq.hi() < hi + margin) {
    throw RangeError("slice_tiling: marker window [" + std::to_string(seq.lo()) + ", " +
                     std::to_string(seq.hi()) + "] does not cover [" + std::to_string(lo - margin) +
                     ", " + std::to_string(hi + margin) + "]");
  }

  std::vector<internal::Site> sites;
  for (const auto& [n, v] : seq.support()) {
    if (n < lo - margin || n > hi + margin) continue;
    if (!sites.empty() && n - sites.back().n < seq.M()) {
      throw ConstructionError("marker support not M-separated: times " +
                              std::to_string(sites.back().n) + " and " + std::to_string(n));
    }
    sites.push_back({n, 1.0 / v});
  }

  // Lower envelope; breaks[i] is where stack[i] hands over to stack[i+1].
  std::vector<internal::Site> stack;
  std::vector<Endpoint> breaks;
  for (const auto& s : sites) {
    while (!stack.empty()) {
      const Endpoint b = internal::bisector(stack.back(), s, level);
      if (breaks.empty() || diff(b, breaks.back()) > 0) {
        breaks.push_back(b);
        break;
      }
      stack.pop_back();
      breaks.pop_back();
    }
    stack.push_back(s);
  }

  std::vector<Tile> tiles;
  tiles.reserve(sites.size());
  std::size_t j = 0;
  for (const auto& s : sites) {
    Tile t;
    t.label = s.n;
    if (j < stack.size() && stack[j].n == s.n) {
      Endpoint a{lo, 0.0}, b{hi, 0.0};
      bool ag = false, bg = false;
      if (j > 0 && diff(breaks[j - 1], lo) > 0) {
        a = breaks[j - 1];
        ag = true;
      }
      if (j < breaks.size() && diff(breaks[j], hi) < 0) {
        b = breaks[j];
        bg = true;
      }
      ++j;
      if (diff(b, a) <= 0) continue;  // outside the window
      t.empty = false;
      t.a = a;
      t.b = b;
      t.a_genuine = ag;
      t.b_genuine = bg;
    }
    tiles.push_back(t);
  }
  return IntervalTiling(lo, hi, level, std::move(tiles));
}

using IntervalList = std::vector<std::pair<double, double>>;

inline double measure(const IntervalList& list) {
  double m = 0.0;
  for (const auto& [a, b] : list) m += b - a;
  return m;
}

// Sorts and merges closed intervals.
inline IntervalList merge_intervals(IntervalList in) {
  std::sort(in.begin(), in.end());
  IntervalList out;
  for (const auto& iv : in) {
    if (!out.empty() && iv.first <= out.back().second) {
      out.back().second = std::max(out.back().second, iv.second);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

// [a-rho, a+rho] u [b-rho, b+rho].
inline IntervalList boundary_of_interval(double a, double b, double rho) {
  return merge_intervals({{a - rho, a + rho}, {b - rho, b + rho}});
}

// rho-neighborhood of the tile endpoints, restricted to the window shrunk by
// rho where every endpoint that matters is known.
inline IntervalList boundary_set(const IntervalTiling& tiling, double rho) {
  if (!(rho > 0.0)) throw ConfigError("boundary_set: rho must be positive");
  const double lo = static_cast<double>(tiling.lo()) + rho;
  const double hi = static_cast<double>(tiling.hi()) - rho;
  IntervalList raw;
  for (const Endpoint& e : tiling.boundary_points()) {
    const double a = std::max(e.value() - rho, lo), b = std::min(e.value() + rho, hi);
    if (a < b) raw.emplace_back(a, b);
  }
  return merge_intervals(std::move(raw));
}

inline double boundary_density(const IntervalTiling& tiling, double rho, double R_window) {
  if (rho == 0.0) return 0.0;
  if (!(R_window > 0.0)) throw ConfigError("boundary_density: R_window must be positive");
  if (-R_window < static_cast<double>(tiling.lo()) + rho ||
      R_window > static_cast<double>(tiling.hi()) - rho) {
    throw RangeError("boundary_density: [-R, R] not inside the certified window");
  }
  double m = 0.0;
  for (const auto& [a, b] : boundary_set(tiling, rho)) {
    const double x = std::max(a, -R_window), y = std::min(b, R_window);
    if (x < y) m += y - x;
  }
  return m / (2.0 * R_window);
}

// |[a,b] \ boundary_R([a,b])|.
inline double interior_measure(double length, double R) {
  return std::max(0.0, length - 2.0 * R);
}

struct GoodTile {
  std::int64_t label = 0;
  double a = 0.0;
  double b = 0.0;
};

// Label of the cH-slice tile containing 0 and the matching H-slice tile. When
// 0 is a shared endpoint the longer tile wins, then the smaller label.
inline GoodTile good_tile(const IntervalTiling& at_H, const IntervalTiling& at_cH,
                          const TilingParams& params) {
  const std::int64_t K = 2 * params.M1 + 2;
  for (const IntervalTiling* t : {&at_H, &at_cH}) {
    if (t->lo() > -K || t->hi() < K) throw RangeError("good_tile: window must contain [-K, K]");
  }
  const Tile* best = nullptr;
  for (const Tile& t : at_cH.tiles()) {
    if (t.empty || diff(t.a, 0) > 0 || diff(t.b, 0) < 0) continue;
    if (best == nullptr || t.length() > best->length()) best = &t;
  }
  if (best == nullptr || !(best->length() > 0.0)) {
    throw LemmaViolation("good-tile", "no cH-tile of positive length contains 0");
  }
  const Tile* w = at_H.find(best->label);
  if (w == nullptr || w->empty) {
    throw LemmaViolation("good-tile", "H-slice tile " + std::to_string(best->label) + " is empty");
  }
  GoodTile g{best->label, w->a.value(), w->b.value()};
  if (!w->complete()) {
    throw RangeError("good_tile: H-slice tile " + std::to_string(g.label) + " is clipped by the window");
  }
  if (!(w->length() > 2.0 * params.r)) {
    throw LemmaViolation("good-tile", "tile " + std::to_string(g.label) +
                                          " has no point outside its r-boundary");
  }
  if (g.a < -static_cast<double>(K) || g.b > static_cast<double>(K)) {
    throw LemmaViolation("good-tile", "tile " + std::to_string(g.label) + " leaves [-K, K]");
  }
  return g;
}

struct EquivarianceResult {
  bool ok = true;
  std::string mismatch;
};

// Compares the tiling of `seq_shifted` (the sequence of T^k x) with the
// tiling of `seq` translated by -k and relabeled by -k, on `window` given in
// the coordinates of x.
inline EquivarianceResult check_equivariance(const MarkerSequence& seq, const MarkerSequence& seq_shifted,
                                             double level, std::int64_t k, std::int64_t lo,
                                             std::int64_t hi, double tol = 1e-9) {
  const IntervalTiling base = slice_tiling(seq, level, lo, hi);
  const IntervalTiling moved = slice_tiling(seq_shifted, level, lo - k, hi - k);
  EquivarianceResult res;
  auto fail = [&](const std::string& what) {
    res.ok = false;
    res.mismatch = what;
    return res;
  };
  if (base.tiles().size() != moved.tiles().size()) {
    return fail("tile counts differ: " + std::to_string(base.tiles().size()) + " vs " +
                std::to_string(moved.tiles().size()));
  }
  for (std::size_t i = 0; i < base.tiles().size(); ++i) {
    const Tile& t = base.tiles()[i];
    const Tile& u = moved.tiles()[i];
    const std::string id = "tile " + std::to_string(t.label);
    if (u.label != t.label - k) return fail(id + ": label " + std::to_string(u.label));
    if (u.empty != t.empty) return fail(id + ": emptiness differs");
    if (t.empty) continue;
    const double da = std::fabs(diff(u.a.shifted(k), t.a));
    const double db = std::fabs(diff(u.b.shifted(k), t.b));
    if (da > tol || db > tol) {
      return fail(id + ": endpoint drift " + nlohmann::json(std::max(da, db)).dump() + ", endpoints [" + std::to_string(t.a.value()) + ", " + std::to_string(t.b.value()) +
                  "] vs shifted [" + std::to_string(u.a.value() + static_cast<double>(k)) + ", " +
                  std::to_string(u.b.value() + static_cast<double>(k)) + "]");
    }
  }
  return res;
}

inline nlohmann::json to_json(const TilingParams& p) {
  return {{"r", p.r}, {"delta", p.delta}, {"c", p.c}, {"R", p.R},
          {"M", p.M}, {"M1", p.M1}, {"H", p.H}};
}

}  // namespace meandimlab::tiling
