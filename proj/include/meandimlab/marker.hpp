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

// Marker data on the rotation factor. The open set U is the cylinder over an
// open circle arc A of radius arc_radius, the compact set F the cylinder over
// the closed sub-arc A' of radius inner_radius, and phi a piecewise-linear
// bump that is 1 on A' and vanishes off A.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "meandimlab/dynsys.hpp"
#include "meandimlab/errors.hpp"

namespace meandimlab::marker {

using dynsys::OrbitWindow;
using dynsys::RationalAngle;

struct MarkerSpec {
  double arc_center = 0.0;
  double arc_radius = 0.0;
  double inner_radius = 0.0;
  std::int64_t M = 0;
  std::int64_t M1 = 0;

  void validate_arcs() const {
    if (!(arc_radius > 0.0 && arc_radius < 0.25)) {
      throw ConfigError("arc_radius must lie in (0, 1/4)");
    }
    if (!(inner_radius > 0.0 && inner_radius < arc_radius)) {
      throw ConfigError("inner_radius must lie in (0, arc_radius)");
    }
  }

  bool operator==(const MarkerSpec&) const = default;
};

// Slope of the ramp, i.e. the Lipschitz constant of phi in the circle metric.
inline double phi_lipschitz(const MarkerSpec& spec) {
  return 1.0 / (spec.arc_radius - spec.inner_radius);
}

inline double phi_circle(const MarkerSpec& spec, double c) {
  const double d = dynsys::arcdist(c, spec.arc_center);
  if (d <= spec.inner_radius) return 1.0;
  if (d >= spec.arc_radius) return 0.0;
  return (spec.arc_radius - d) / (spec.arc_radius - spec.inner_radius);
}

inline double phi_eval(const MarkerSpec& spec, const OrbitWindow& x) {
  return phi_circle(spec, x.circle());
}

// First k >= 1 with ||k theta|| <= 2 arc_radius. Exact integer scan.
inline std::int64_t compute_M(const RationalAngle& theta, double arc_radius,
                              std::int64_t search_horizon = 2'000'000'000) {
  const double bound = 2.0 * arc_radius * static_cast<double>(theta.den);
  std::int64_t r = 0;
  for (std::int64_t k = 1; k <= search_horizon; ++k) {
    r += theta.num;
    if (r >= theta.den) r -= theta.den;
    if (static_cast<double>(std::min(r, theta.den - r)) <= bound) return k;
  }
  throw ConfigError("marker return-time search exceeded horizon " +
                    std::to_string(search_horizon) + "; choose a larger arc_radius");
}

// Continued-fraction data of num/den used by the three-distance structure.
struct ThreeGapTable {
  struct Row {
    std::int64_t first_n;  // first N of the row
    std::int64_t last_n;
    std::int64_t max_gap;  // scaled by den
  };
  std::int64_t den = 1;
  std::vector<Row> rows;
};

// For N points {n theta : 0 <= n < N}, the largest of the (at most three)
// gap lengths is constant on consecutive ranges of N read off the
// convergents q_k and the errors eta_k = |q_k num - p_k den|.
inline ThreeGapTable three_gap_table(const RationalAngle& theta) {
  std::vector<std::int64_t> a;
  for (std::int64_t p = theta.num, q = theta.den; q != 0;) {
    a.push_back(p / q);
    const std::int64_t t = p % q;
    p = q;
    q = t;
  }
  // qs[i + 1] = q_i, ps[i + 1] = p_i, starting from q_{-1} = 0, p_{-1} = 1.
  std::vector<std::int64_t> qs{0, 1}, ps{1, a[0]};
  for (std::size_t i = 1; i < a.size(); ++i) {
    qs.push_back(a[i] * qs.back() + qs[qs.size() - 2]);
    ps.push_back(a[i] * ps.back() + ps[ps.size() - 2]);
  }
  auto eta = [&](std::size_t i) {
    const __int128 v = static_cast<__int128>(qs[i]) * theta.num -
                       static_cast<__int128>(ps[i]) * theta.den;
    return static_cast<std::int64_t>(v < 0 ? -v : v);
  };
  ThreeGapTable table;
  table.den = theta.den;
  table.rows.push_back({1, 1, theta.den});
  for (std::size_t k = 0; k + 1 < a.size(); ++k) {
    const std::int64_t qk = qs[k + 1], qkm = qs[k];
    const std::int64_t eta_prev = eta(k), eta_k = eta(k + 1);
    for (std::int64_t r = 1; r <= a[k + 1]; ++r) {
      const std::int64_t start = r * qk + qkm;
      const std::int64_t gap = eta_prev - (r - 1) * eta_k;
      if (table.rows.back().first_n == start) continue;
      table.rows.push_back({start, start + qk - 1, gap});
    }
  }
  return table;
}

// Largest gap (scaled by den) among N orbit points; 0 < N < den.
inline std::int64_t max_gap(const ThreeGapTable& table, std::int64_t N) {
  auto it = std::upper_bound(table.rows.begin(), table.rows.end(), N,
                             [](std::int64_t v, const ThreeGapTable::Row& r) { return v < r.first_n; });
  if (it == table.rows.begin()) throw RangeError("max_gap: N must be positive");
  return std::prev(it)->max_gap;
}

// Smallest N such that every circle point reaches the closed arc of radius
// inner_radius (about any center) within N - 1 forward steps, i.e. the orbit
// points {n theta : n < N} leave no gap longer than 2 inner_radius. A margin
// of 1e-12 absorbs rounding in the floating circle coordinates.
inline std::int64_t first_covering_count(const RationalAngle& theta, double inner_radius) {
  const double limit = (2.0 * inner_radius - 1e-12) * static_cast<double>(theta.den);
  const ThreeGapTable table = three_gap_table(theta);
  for (const auto& row : table.rows) {
    if (static_cast<double>(row.max_gap) <= limit) return row.first_n;
  }
  throw ConfigError("inner_radius too small for the rational rotation");
}

inline std::pair<std::int64_t, std::int64_t> compute_M_M1(const RationalAngle& theta,
                                                          double arc_radius, double inner_radius) {
  MarkerSpec probe{0.0, arc_radius, inner_radius, 0, 0};
  probe.validate_arcs();
  const std::int64_t M = compute_M(theta, arc_radius);
  if (M < 2) throw ConfigError("arc_radius too large: M = 1 but M >= 2 is required");
  const std::int64_t M1 = std::max(first_covering_count(theta, inner_radius), M + 1);
  return {M, M1};
}

inline MarkerSpec make_marker(const RationalAngle& theta, double arc_center, double arc_radius,
                              double inner_radius) {
  const auto [M, M1] = compute_M_M1(theta, arc_radius, inner_radius);
  return {dynsys::wrap_unit(arc_center), arc_radius, inner_radius, M, M1};
}

// Arcs chosen so that M >= min_M: the arc diameter stays just under the
// closest approach ||k theta|| over 1 <= k < min_M.
inline MarkerSpec design_marker(const RationalAngle& theta, std::int64_t min_M,
                                double inner_fraction = 0.5) {
  if (min_M < 2) throw ConfigError("design_marker: min_M must be at least 2");
  double closest = 0.5;
  std::int64_t r = 0;
  for (std::int64_t k = 1; k < min_M; ++k) {
    r += theta.num;
    if (r >= theta.den) r -= theta.den;
    closest = std::min(closest, static_cast<double>(std::min(r, theta.den - r)) /
                                    static_cast<double>(theta.den));
  }
  const double arc = std::min(0.499 * closest, 0.24);
  return make_marker(theta, 0.0, arc, inner_fraction * arc);
}

// phi(T^n x) on an integer window, stored sparsely: only support times.
class MarkerSequence {
 public:
  MarkerSequence(std::int64_t lo, std::int64_t hi, std::int64_t M, std::int64_t M1,
                 std::vector<std::pair<std::int64_t, double>> support)
      : lo_(lo), hi_(hi), M_(M), M1_(M1), support_(std::move(support)) {}

  std::int64_t lo() const { return lo_; }
  std::int64_t hi() const { return hi_; }
  std::int64_t M() const { return M_; }
  std::int64_t M1() const { return M1_; }
  const std::vector<std::pair<std::int64_t, double>>& support() const { return support_; }

  double value(std::int64_t n) const {
    if (n < lo_ || n > hi_) throw RangeError("marker sequence queried outside its window");
    auto it = std::lower_bound(support_.begin(), support_.end(), n,
                               [](const auto& e, std::int64_t v) { return e.first < v; });
    return (it != support_.end() && it->first == n) ? it->second : 0.0;
  }

  // Same sequence re-indexed as for T^k x, restricted to the shifted window.
  MarkerSequence shifted(std::int64_t k) const {
    std::vector<std::pair<std::int64_t, double>> s;
    s.reserve(support_.size());
    for (const auto& [n, v] : support_) s.emplace_back(n - k, v);
    return MarkerSequence(lo_ - k, hi_ - k, M_, M1_, std::move(s));
  }

  MarkerSequence with_value(std::int64_t n, double v) const {
    std::map<std::int64_t, double> m(support_.begin(), support_.end());
    if (v > 0.0) {
      m[n] = v;
    } else {
      m.erase(n);
    }
    return MarkerSequence(lo_, hi_, M_, M1_, {m.begin(), m.end()});
  }

  // Counts of gaps between consecutive support times.
  std::map<std::int64_t, std::int64_t> gap_histogram() const {
    std::map<std::int64_t, std::int64_t> h;
    for (std::size_t i = 1; i < support_.size(); ++i) ++h[support_[i].first - support_[i - 1].first];
    return h;
  }

 private:
  std::int64_t lo_, hi_, M_, M1_;
  std::vector<std::pair<std::int64_t, double>> support_;
};

// Checks M-separation of the support and that every 2 M1 consecutive times
// of the window contain a time with value 1.
inline void check_marker_sequence(const MarkerSequence& seq) {
  const auto& s = seq.support();
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i].first - s[i - 1].first < seq.M()) {
      throw ConstructionError("marker support not M-separated: times " +
                              std::to_string(s[i - 1].first) + " and " + std::to_string(s[i].first));
    }
  }
  std::int64_t last_one = seq.lo() - 1;
  for (const auto& [n, v] : s) {
    if (v != 1.0) continue;
    if (n - last_one > 2 * seq.M1()) {
      throw ConstructionError("no marker time with value 1 between " + std::to_string(last_one) +
                              " and " + std::to_string(n));
    }
    last_one = n;
  }
  if (seq.hi() + 1 - last_one > 2 * seq.M1()) {
    throw ConstructionError("no marker time with value 1 after " + std::to_string(last_one));
  }
}

// phi(T^n x) for lo <= n <= hi. Circle values are produced from the same
// integer residues as OrbitWindow::circle_at, so the two agree bit for bit.
inline MarkerSequence marker_sequence(const MarkerSpec& spec, const OrbitWindow& x, std::int64_t lo,
                                      std::int64_t hi) {
  if (hi < lo) throw RangeError("marker_sequence: empty window");
  const RationalAngle& th = x.spec().theta;
  const std::int64_t q = th.den;
  const double qd = static_cast<double>(q);
  const double base = x.base_circle();
  // Residue whose circle value sits on the arc center; residues farther than
  // `reach` from it (cyclically) are certainly off the arc.
  const double target = dynsys::wrap_unit(spec.arc_center - base) * qd;
  const auto target_r = static_cast<std::int64_t>(std::llround(target)) % q;
  const auto reach = static_cast<std::int64_t>((spec.arc_radius + 1e-9) * qd) + 2;

  std::vector<std::pair<std::int64_t, double>> support;
  std::int64_t r = th.residue(x.offset() + lo);
  for (std::int64_t n = lo;; ++n) {
    std::int64_t dr = r - target_r;
    if (dr < 0) dr = -dr;
    if (dr > q - dr) dr = q - dr;
    if (dr <= reach) {
      const double c = dynsys::wrap_unit(base + static_cast<double>(r) / qd);
      const double v = phi_circle(spec, c);
      if (v > 0.0) support.emplace_back(n, v);
    }
    if (n == hi) break;
    r += th.num;
    if (r >= q) r -= q;
  }
  MarkerSequence seq(lo, hi, spec.M, spec.M1, std::move(support));
  check_marker_sequence(seq);
  return seq;
}

// z sits on the arc center, z' antipodal to it; cube parts fixed at 1/2.
inline std::pair<OrbitWindow, OrbitWindow> pick_z_zprime(const MarkerSpec& spec,
                                                         const dynsys::SystemSpec& system) {
  return {dynsys::constant_point(system, spec.arc_center),
          dynsys::constant_point(system, dynsys::wrap_unit(spec.arc_center + 0.5))};
}

inline nlohmann::json to_json(const MarkerSpec& s) {
  return {{"arc_center", s.arc_center}, {"arc_radius", s.arc_radius},
          {"inner_radius", s.inner_radius}, {"M", s.M}, {"M1", s.M1}};
}

}  // namespace meandimlab::marker
