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

// Nerve of a closed cell cover and the partition-of-unity map into it.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "meandimlab/widim/cell_space.hpp"

namespace meandimlab::widim {

struct NerveComplex {
  std::size_t vertices = 0;
  // Maximal simplices: element sets meeting at a common grid vertex.
  std::vector<std::vector<std::size_t>> simplices;
  int dimension = -1;

  bool contains(std::vector<std::size_t> face) const {
    std::sort(face.begin(), face.end());
    for (const auto& s : simplices) {
      if (std::includes(s.begin(), s.end(), face.begin(), face.end())) return true;
    }
    return false;
  }
};

// Sparse barycentric coordinates: (element, weight) pairs summing to 1.
using Barycentric = std::vector<std::pair<std::size_t, double>>;

struct NerveProjection {
  NerveComplex nerve;
  std::vector<Barycentric> coords;  // per atom
  bool indicator_fallback = false;
};

inline NerveComplex nerve_of(const CellSpace& space, const CellCover& cover) {
  std::unordered_map<std::int64_t, std::vector<std::size_t>> at;
  for (std::size_t e = 0; e < cover.elements.size(); ++e) {
    std::unordered_set<std::int64_t> seen;
    for (std::size_t i : cover.elements[e]) {
      for (std::int64_t v : space.vertex_keys(i)) {
        if (seen.insert(v).second) at[v].push_back(e);
      }
    }
  }
  std::set<std::vector<std::size_t>> faces;
  for (auto& [v, es] : at) {
    std::sort(es.begin(), es.end());
    faces.insert(es);
  }
  NerveComplex n;
  n.vertices = cover.elements.size();
  for (const auto& f : faces) {
    bool maximal = true;
    for (const auto& g : faces) {
      if (g.size() > f.size() && std::includes(g.begin(), g.end(), f.begin(), f.end())) {
        maximal = false;
        break;
      }
    }
    if (maximal) n.simplices.push_back(f);
  }
  for (const auto& s : n.simplices) n.dimension = std::max(n.dimension, static_cast<int>(s.size()) - 1);
  return n;
}

// Each atom is sent to the barycentric point with weights proportional to
// min(1, steps(atom, outside of E) / 2) over the elements E containing it,
// steps counted in the atom adjacency graph. Elements with no atom outside
// their reach (the whole space) count as fully interior.
inline NerveProjection nerve_and_projection(const CellSpace& space, const CellCover& cover) {
  NerveProjection out;
  out.nerve = nerve_of(space, cover);
  out.coords.assign(space.size(), {});
  std::vector<std::vector<std::size_t>> adj(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) adj[i] = space.neighbors(i);

  for (std::size_t e = 0; e < cover.elements.size(); ++e) {
    const auto& elem = cover.elements[e];
    std::unordered_map<std::size_t, int> steps;
    std::queue<std::size_t> q;
    std::unordered_set<std::size_t> inside(elem.begin(), elem.end());
    // Multi-source BFS from the atoms adjacent to the complement.
    for (std::size_t i : elem) {
      bool edge = false;
      for (std::size_t k : adj[i]) edge = edge || !inside.count(k);
      if (edge) {
        steps[i] = 1;
        q.push(i);
      }
    }
    while (!q.empty()) {
      const std::size_t i = q.front();
      q.pop();
      for (std::size_t k : adj[i]) {
        if (inside.count(k) && !steps.count(k)) {
          steps[k] = steps[i] + 1;
          q.push(k);
        }
      }
    }
    for (std::size_t i : elem) {
      auto it = steps.find(i);
      const double w = it == steps.end() ? 1.0 : std::min(1.0, it->second / 2.0);
      out.coords[i].emplace_back(e, w);
    }
  }
  for (auto& c : out.coords) {
    double total = 0.0;
    for (const auto& [e, w] : c) total += w;
    if (!(total > 0.0)) {
      out.indicator_fallback = true;
      for (auto& [e, w] : c) w = 1.0;
      total = static_cast<double>(c.size());
    }
    for (auto& [e, w] : c) w /= total;
  }
  return out;
}

// l1 distance between barycentric points.
inline double nerve_distance(const Barycentric& a, const Barycentric& b) {
  std::map<std::size_t, double> m;
  for (const auto& [e, w] : a) m[e] += w;
  for (const auto& [e, w] : b) m[e] -= w;
  double s = 0.0;
  for (const auto& [e, w] : m) s += std::fabs(w);
  return s;
}

// Largest delta such that nerve distance < delta forces d(x, y) < eps over
// all atom pairs (representative points: atom centers). Infinite when no
// pair is eps apart.
inline double transfer_delta(const CellSpace& space, const NerveProjection& proj, double eps) {
  double delta = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> centers(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) centers[i] = space.center(i);
  for (std::size_t i = 0; i < space.size(); ++i) {
    for (std::size_t j = i + 1; j < space.size(); ++j) {
      if (space.point_dist(centers[i], centers[j]) >= eps) {
        delta = std::min(delta, nerve_distance(proj.coords[i], proj.coords[j]));
      }
    }
  }
  return delta;
}

}  // namespace meandimlab::widim
