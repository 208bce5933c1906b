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

// Width dimension of sampled orbit sets under the Bowen metric d_n.
//
// d_n(x, y) = max( sup_j w_j(n) |x_j - y_j|_inf , arcdist(circle) ) with
// w_j(n) = max_{0 <= i < n} decay^|j - i|, since the rotation is an isometry.
// Coordinates with w_j(n) < eps can never separate two points by eps, so
// only the "effective" axes (w_j(n) >= eps, plus the circle) matter.
//
// Upper estimates go through the product hull: each effective axis is solved
// as a 1-D cell space, and Widim of a product under a sup metric is at most
// the sum of the factors' Widim (the product of eps-embeddings into complexes
// is an eps-embedding into the product polyhedron). The ambient value for X
// itself is exact: the same sum from above, and Lebesgue's covering lemma on
// the box of effective axes from below.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "meandimlab/dynsys.hpp"
#include "meandimlab/errors.hpp"
#include "meandimlab/widim/solver.hpp"

namespace meandimlab::widim {

struct OrbitAxis {
  bool circle = false;
  std::int64_t coord = 0;  // cube coordinate (relative to the point)
  int component = 0;
  double weight = 1.0;
};

// Largest d with decay^d >= eps (d >= 0), or -1 when eps > 1.
inline int effective_reach(double decay, double eps) {
  if (eps > 1.0) return -1;
  int d = 0;
  double w = 1.0;
  while (w * decay >= eps) {
    w *= decay;
    ++d;
  }
  return d;
}

inline double bowen_weight(double decay, std::int64_t j, int n) {
  std::int64_t gap = 0;
  if (j < 0) gap = -j;
  if (j > n - 1) gap = j - (n - 1);
  return std::pow(decay, static_cast<double>(gap));
}

inline std::vector<OrbitAxis> effective_axes(const dynsys::SystemSpec& spec, int n, double eps) {
  if (n < 1) throw ConfigError("effective_axes: horizon must be positive");
  std::vector<OrbitAxis> axes;
  const int reach = effective_reach(spec.decay, eps);
  if (reach >= 0) {
    for (std::int64_t j = -reach; j <= n - 1 + reach; ++j) {
      for (int i = 0; i < spec.dim; ++i) axes.push_back({false, j, i, bowen_weight(spec.decay, j, n)});
    }
  }
  if (eps <= 0.5) axes.push_back({true, 0, 0, 1.0});
  return axes;
}

// Widim_eps(X, d_n) for the full system.
inline int ambient_widim(const dynsys::SystemSpec& spec, int n, double eps) {
  return static_cast<int>(effective_axes(spec, n, eps).size());
}

struct OrbitWidim {
  int upper = 0;
  int ambient = 0;
  std::vector<int> per_axis;
  std::vector<OrbitAxis> axes;
};

inline double axis_value(const dynsys::OrbitWindow& x, const OrbitAxis& a) {
  return a.circle ? x.circle() : x.cube(a.coord, a.component);
}

// Widim_eps(S, d_n) upper estimate for a finite sample S, bucketing each
// axis at `resolution` (default eps / 8 in the weighted metric).
inline OrbitWidim widim_orbit(const std::vector<dynsys::OrbitWindow>& samples, int n, double eps,
                              double resolution = 0.0) {
  if (samples.empty()) throw ConfigError("widim_orbit: empty sample set");
  const dynsys::SystemSpec& spec = samples.front().spec();
  if (resolution <= 0.0) resolution = eps / 8.0;
  OrbitWidim out;
  out.ambient = ambient_widim(spec, n, eps);
  out.axes = effective_axes(spec, n, eps);
  for (const OrbitAxis& a : out.axes) {
    const int cells = std::max(1, static_cast<int>(std::ceil(a.weight / resolution - 1e-9)));
    Axis ax{0.0, 1.0, cells, a.weight, a.circle};
    if (!(ax.weight * ax.width() < eps / 4.0)) {
      throw RangeError("widim_orbit: bucket diameter " + std::to_string(ax.weight * ax.width()) +
                       " is not below eps/4");
    }
    std::vector<Index> atoms;
    atoms.reserve(samples.size());
    for (const auto& x : samples) {
      const double v = axis_value(x, a);
      atoms.push_back({std::clamp(static_cast<int>(std::floor(v * cells)), 0, cells - 1)});
    }
    const CellSpace space({ax}, std::move(atoms));
    const SolveResult r = min_multiplicity(space, eps, Mode::kExact, 1'000'000);
    out.per_axis.push_back(r.widim_upper);
    out.upper += r.widim_upper;
  }
  return out;
}

struct MdimEstimate {
  double inf_ratio = 0.0;   // inf_n W(n)/n, an upper bound for the limit
  double last_slope = 0.0;  // W(n_last) - W(n_prev) over the horizon gap
  int horizons = 0;
};

inline MdimEstimate mdim_estimate(const std::map<int, double>& series) {
  if (series.empty()) throw ConfigError("mdim_estimate: empty series");
  MdimEstimate e;
  e.horizons = static_cast<int>(series.size());
  e.inf_ratio = std::numeric_limits<double>::infinity();
  for (const auto& [n, w] : series) {
    if (n < 1) throw ConfigError("mdim_estimate: horizons must be positive");
    e.inf_ratio = std::min(e.inf_ratio, w / n);
  }
  if (series.size() >= 2) {
    auto last = std::prev(series.end());
    auto prev = std::prev(last);
    e.last_slope = (last->second - prev->second) / (last->first - prev->first);
  } else {
    e.last_slope = e.inf_ratio;
  }
  return e;
}

}  // namespace meandimlab::widim
