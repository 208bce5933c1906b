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

// Discretized metric spaces for width-dimension computations.
//
// A CellSpace is a set of closed grid boxes ("atoms") in a product of
// intervals and circles, with the weighted sup metric
//   d(x, y) = max_i weight_i * |x_i - y_i|   (arc distance on circle axes).
// Covers are families of atom sets; an element stands for the union of its
// closed atoms. Under a sup metric the diameter of a set is the largest of
// its per-axis projected diameters, so every diameter below is exact.
//
// Multiplicity of a closed cover is attained at grid vertices: a point of a
// face lies in every element that owns an atom touching that face, and each
// face contains a vertex touched by all of those atoms.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"
#include "meandimlab/errors.hpp"

namespace meandimlab::widim {

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  int cells = 1;
  double weight = 1.0;
  bool periodic = false;

  double width() const { return (hi - lo) / cells; }
  double period() const { return hi - lo; }
};

using Index = std::vector<int>;

class CellSpace {
 public:
  CellSpace() = default;

  CellSpace(std::vector<Axis> axes, std::vector<Index> atoms) : axes_(std::move(axes)) {
    for (const Axis& a : axes_) {
      if (a.cells < 1 || !(a.hi > a.lo) || !(a.weight > 0.0)) throw ConfigError("CellSpace: bad axis");
    }
    std::sort(atoms.begin(), atoms.end());
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
    for (const Index& c : atoms) {
      if (c.size() != axes_.size()) throw ConfigError("CellSpace: atom index has wrong rank");
      for (std::size_t d = 0; d < c.size(); ++d) {
        if (c[d] < 0 || c[d] >= axes_[d].cells) throw ConfigError("CellSpace: atom index out of range");
      }
    }
    atoms_ = std::move(atoms);
    for (std::size_t i = 0; i < atoms_.size(); ++i) lookup_.emplace(key(atoms_[i]), i);
  }

  // Every cell of the product grid.
  static CellSpace grid(std::vector<Axis> axes) {
    std::vector<Index> atoms;
    Index c(axes.size(), 0);
    if (axes.empty()) return CellSpace(std::move(axes), {Index{}});
    while (true) {
      atoms.push_back(c);
      std::size_t d = axes.size();
      while (d > 0) {
        --d;
        if (++c[d] < axes[d].cells) break;
        c[d] = 0;
        if (d == 0) return CellSpace(std::move(axes), std::move(atoms));
      }
    }
  }

  int dim() const { return static_cast<int>(axes_.size()); }
  std::size_t size() const { return atoms_.size(); }
  const std::vector<Axis>& axes() const { return axes_; }
  const Index& atom(std::size_t i) const { return atoms_[i]; }
  const std::vector<Index>& atoms() const { return atoms_; }

  std::int64_t find(const Index& c) const {
    auto it = lookup_.find(key(c));
    return it == lookup_.end() ? -1 : static_cast<std::int64_t>(it->second);
  }

  // Diameter of a single cell along axis d.
  double cell_extent(int d) const {
    const Axis& a = axes_[d];
    const double w = a.width();
    return a.weight * (a.periodic ? std::min(w, 0.5 * a.period()) : w);
  }

  double atom_diameter() const {
    double m = 0.0;
    for (int d = 0; d < dim(); ++d) m = std::max(m, cell_extent(d));
    return m;
  }

  // Diameter of the union of the given cells of axis d.
  double axis_diameter(int d, std::vector<int> cells) const {
    if (cells.empty()) return 0.0;
    const Axis& a = axes_[d];
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    if (!a.periodic) return a.weight * (cells.back() + 1 - cells.front()) * a.width();
    // Maximal runs of consecutive cells, joined across the seam.
    std::vector<std::pair<int, int>> runs;  // [first, count]
    for (int c : cells) {
      if (!runs.empty() && runs.back().first + runs.back().second == c) {
        ++runs.back().second;
      } else {
        runs.emplace_back(c, 1);
      }
    }
    if (runs.size() > 1 && runs.front().first == 0 && runs.back().first + runs.back().second == a.cells) {
      runs.front().first = runs.back().first;
      runs.front().second += runs.back().second;
      runs.pop_back();
    }
    const double P = a.period(), w = a.width();
    double best = 0.0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const double len_i = runs[i].second * w;
      best = std::max(best, std::min(len_i, 0.5 * P));
      for (std::size_t j = i + 1; j < runs.size(); ++j) {
        // Differences y - x over the two arcs form one interval; the arc
        // metric is a tent in the difference with its peak at P/2.
        const double lo = runs[j].first * w - (runs[i].first * w + len_i);
        const double hi = runs[j].first * w + runs[j].second * w - runs[i].first * w;
        auto tent = [P](double u) {
          u = std::fmod(u, P);
          if (u < 0) u += P;
          return std::min(u, P - u);
        };
        double m = std::max(tent(lo), tent(hi));
        const double k = std::ceil((lo - 0.5 * P) / P);
        if (0.5 * P + k * P <= hi) m = 0.5 * P;
        best = std::max(best, m);
      }
    }
    return a.weight * best;
  }

  double diameter(const std::vector<std::size_t>& ids) const {
    if (ids.empty()) return 0.0;
    double m = 0.0;
    std::vector<int> cells;
    cells.reserve(ids.size());
    for (int d = 0; d < dim(); ++d) {
      cells.clear();
      for (std::size_t i : ids) cells.push_back(atoms_[i][d]);
      m = std::max(m, axis_diameter(d, cells));
    }
    return m;
  }

  double space_diameter() const {
    std::vector<std::size_t> all(size());
    for (std::size_t i = 0; i < size(); ++i) all[i] = i;
    return diameter(all);
  }

  std::vector<double> center(std::size_t i) const {
    std::vector<double> p(dim());
    for (int d = 0; d < dim(); ++d) p[d] = axes_[d].lo + (atoms_[i][d] + 0.5) * axes_[d].width();
    return p;
  }

  double point_dist(const std::vector<double>& x, const std::vector<double>& y) const {
    double m = 0.0;
    for (int d = 0; d < dim(); ++d) {
      double u = std::fabs(x[d] - y[d]);
      if (axes_[d].periodic) u = std::min(std::fmod(u, axes_[d].period()), axes_[d].period() - std::fmod(u, axes_[d].period()));
      m = std::max(m, axes_[d].weight * u);
    }
    return m;
  }

  // Grid vertices of the closed atom (periodic coordinates wrapped).
  std::vector<std::int64_t> vertex_keys(std::size_t i) const {
    const int D = dim();
    std::vector<std::int64_t> out;
    out.reserve(std::size_t{1} << D);
    for (int mask = 0; mask < (1 << D); ++mask) {
      std::int64_t k = 0;
      for (int d = 0; d < D; ++d) {
        const Axis& a = axes_[d];
        int v = atoms_[i][d] + ((mask >> d) & 1);
        if (a.periodic && v == a.cells) v = 0;
        k = k * (a.cells + 1) + v;
      }
      out.push_back(k);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  // Atoms sharing at least a vertex with atom i (excluding i).
  std::vector<std::size_t> neighbors(std::size_t i) const {
    const int D = dim();
    std::vector<std::size_t> out;
    Index c(D);
    int total = 1;
    for (int d = 0; d < D; ++d) total *= 3;
    for (int code = 0; code < total; ++code) {
      int t = code;
      bool self = true, valid = true;
      for (int d = 0; d < D; ++d) {
        const int step = t % 3 - 1;
        t /= 3;
        if (step != 0) self = false;
        int v = atoms_[i][d] + step;
        const Axis& a = axes_[d];
        if (a.periodic) {
          v = (v + a.cells) % a.cells;
        } else if (v < 0 || v >= a.cells) {
          valid = false;
        }
        c[d] = v;
      }
      if (self || !valid) continue;
      const std::int64_t j = find(c);
      if (j >= 0 && static_cast<std::size_t>(j) != i) out.push_back(static_cast<std::size_t>(j));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  CellSpace subspace(const std::vector<std::size_t>& ids) const {
    std::vector<Index> atoms;
    atoms.reserve(ids.size());
    for (std::size_t i : ids) atoms.push_back(atoms_[i]);
    return CellSpace(axes_, std::move(atoms));
  }

 private:
  std::int64_t key(const Index& c) const {
    std::int64_t k = 0;
    for (std::size_t d = 0; d < c.size(); ++d) k = k * (axes_[d].cells + 1) + c[d];
    return k;
  }

  std::vector<Axis> axes_;
  std::vector<Index> atoms_;
  std::unordered_map<std::int64_t, std::size_t> lookup_;
};

struct CellCover {
  std::vector<std::vector<std::size_t>> elements;
};

struct CoverStats {
  double mesh = 0.0;
  int multiplicity = 0;
};

// Number of elements meeting at the most crowded grid vertex.
inline int cover_multiplicity(const CellSpace& space, const CellCover& cover) {
  std::unordered_map<std::int64_t, int> count;
  std::unordered_set<std::int64_t> seen;
  int best = 0;
  for (const auto& e : cover.elements) {
    seen.clear();
    for (std::size_t i : e) {
      for (std::int64_t v : space.vertex_keys(i)) seen.insert(v);
    }
    for (std::int64_t v : seen) best = std::max(best, ++count[v]);
  }
  return best;
}

inline CoverStats cover_stats(const CellSpace& space, const CellCover& cover) {
  std::vector<char> hit(space.size(), 0);
  CoverStats s;
  for (const auto& e : cover.elements) {
    for (std::size_t i : e) {
      if (i >= space.size()) throw ConfigError("cover_stats: element refers to a missing atom");
      hit[i] = 1;
    }
    s.mesh = std::max(s.mesh, space.diameter(e));
  }
  std::string missing;
  int n_missing = 0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (hit[i]) continue;
    if (n_missing++ < 8) missing += " " + std::to_string(i);
  }
  if (n_missing > 0) {
    throw ConfigError("cover_stats: " + std::to_string(n_missing) + " uncovered atoms:" + missing);
  }
  s.multiplicity = cover_multiplicity(space, cover);
  return s;
}

// Vertex-connected components, each as a sorted atom list.
inline std::vector<std::vector<std::size_t>> components(const CellSpace& space) {
  std::vector<int> comp(space.size(), -1);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < space.size(); ++s) {
    if (comp[s] >= 0) continue;
    const int id = static_cast<int>(out.size());
    out.emplace_back();
    std::vector<std::size_t> stack{s};
    comp[s] = id;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      out.back().push_back(i);
      for (std::size_t j : space.neighbors(i)) {
        if (comp[j] < 0) {
          comp[j] = id;
          stack.push_back(j);
        }
      }
    }
    std::sort(out.back().begin(), out.back().end());
  }
  return out;
}

inline nlohmann::json to_json(const CellSpace& s) {
  nlohmann::json axes = nlohmann::json::array();
  for (const Axis& a : s.axes()) {
    axes.push_back({{"lo", a.lo}, {"hi", a.hi}, {"cells", a.cells}, {"weight", a.weight},
                    {"periodic", a.periodic}});
  }
  return {{"axes", axes}, {"atoms", s.atoms()}};
}

inline CellSpace cell_space_from_json(const nlohmann::json& j) {
  std::vector<Axis> axes;
  for (const auto& a : j.at("axes")) {
    axes.push_back({a.at("lo").get<double>(), a.at("hi").get<double>(), a.at("cells").get<int>(),
                    a.value("weight", 1.0), a.value("periodic", false)});
  }
  if (!j.contains("atoms")) return CellSpace::grid(std::move(axes));
  return CellSpace(std::move(axes), j.at("atoms").get<std::vector<Index>>());
}

}  // namespace meandimlab::widim
