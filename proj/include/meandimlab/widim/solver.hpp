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

// Minimal-multiplicity covers of a CellSpace at mesh < eps. The reported
// width dimension is (multiplicity - 1) of the best cover found.
//
// Exact mode searches covers whose elements are atom boxes (a product of
// cell ranges, one per axis, intersected with the space). The search takes
// the first uncovered atom in lexicographic order and branches over the
// boxes containing it whose axis-0 range starts at that atom: any box
// reaching further down on axis 0 can be trimmed there, because everything
// below is covered already and trimming never raises multiplicity. The
// refutations are therefore complete for the box dictionary.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "meandimlab/errors.hpp"
#include "meandimlab/widim/cell_space.hpp"

namespace meandimlab::widim {

enum class Mode { kExact, kGreedy, kLocalSearch };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::kExact:
      return "exact";
    case Mode::kGreedy:
      return "greedy";
    case Mode::kLocalSearch:
      return "local_search";
  }
  return "?";
}

inline Mode mode_from_string(const std::string& s) {
  if (s == "exact") return Mode::kExact;
  if (s == "greedy") return Mode::kGreedy;
  if (s == "local_search") return Mode::kLocalSearch;
  throw ConfigError("unknown solver mode '" + s + "'");
}

struct SolveResult {
  int widim_upper = 0;
  CellCover cover;
  CoverStats stats;
  std::optional<int> certified_lower;
  bool upper_only = false;
  std::int64_t nodes = 0;
  std::string method;
};

namespace internal {

// Largest number of consecutive cells of axis d whose union has diameter < eps.
inline int max_run(const CellSpace& s, int d, double eps) {
  const Axis& a = s.axes()[d];
  int best = 0;
  for (int k = 1; k <= a.cells; ++k) {
    std::vector<int> cells(k);
    for (int i = 0; i < k; ++i) cells[i] = i;
    if (s.axis_diameter(d, cells) < eps) best = k;
  }
  return best;
}

inline bool all_below(const CellSpace& s, const CellCover& c, double eps) {
  for (const auto& e : c.elements) {
    if (!(s.diameter(e) < eps)) return false;
  }
  return true;
}

// Brick covers: along the last axis slabs of `side` cells; along each lower
// axis boxes shifted by an offset that depends on the parity of the box
// indices of the higher axes.
inline CellCover brick_cover(const CellSpace& s, const std::vector<int>& side, const std::vector<int>& shift,
                             const std::vector<std::vector<int>>& twist) {
  const int D = s.dim();
  std::map<std::vector<int>, std::vector<std::size_t>> boxes;
  std::vector<int> j(D);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Index& c = s.atom(i);
    for (int d = D - 1; d >= 0; --d) {
      int off = shift[d];
      for (int e = d + 1; e < D; ++e) off += twist[d][e] * (((j[e] % 2) + 2) % 2);
      const int v = c[d] + off;
      j[d] = v >= 0 ? v / side[d] : -((-v + side[d] - 1) / side[d]);
      if (s.axes()[d].periodic) {
        // Wrap so that a box never straddles the seam with a short stub.
        const int nboxes = std::max(1, (s.axes()[d].cells + side[d] - 1) / side[d]);
        j[d] = ((j[d] % nboxes) + nboxes) % nboxes;
      }
    }
    boxes[j].push_back(i);
  }
  CellCover cover;
  for (auto& [key, atoms] : boxes) cover.elements.push_back(std::move(atoms));
  return cover;
}

// Layers of graph distance from a root, grouped `width` at a time and split
// into connected pieces. Pieces of one group are mutually disjoint and only
// touch pieces of adjacent groups, so the multiplicity is at most 2.
inline std::optional<CellCover> band_cover(const CellSpace& s, double eps) {
  CellCover best;
  bool found = false;
  for (const auto& comp : components(s)) {
    std::unordered_map<std::size_t, int> dist;
    std::queue<std::size_t> q;
    dist[comp.front()] = 0;
    q.push(comp.front());
    // Start from a far atom to make layers transversal.
    std::size_t last = comp.front();
    while (!q.empty()) {
      const std::size_t i = q.front();
      q.pop();
      last = i;
      for (std::size_t k : s.neighbors(i)) {
        if (!dist.count(k)) {
          dist[k] = dist[i] + 1;
          q.push(k);
        }
      }
    }
    dist.clear();
    dist[last] = 0;
    q.push(last);
    int depth = 0;
    while (!q.empty()) {
      const std::size_t i = q.front();
      q.pop();
      depth = std::max(depth, dist[i]);
      for (std::size_t k : s.neighbors(i)) {
        if (!dist.count(k)) {
          dist[k] = dist[i] + 1;
          q.push(k);
        }
      }
    }
    std::optional<CellCover> chosen;
    for (int width = depth + 1; width >= 1; --width) {
      CellCover c;
      const int groups = depth / width + 1;
      for (int g = 0; g < groups; ++g) {
        std::vector<std::size_t> members;
        for (std::size_t i : comp) {
          if (dist[i] / width == g) members.push_back(i);
        }
        if (members.empty()) continue;
        // Split the group into pieces connected within the group.
        std::unordered_map<std::size_t, int> piece;
        for (std::size_t i : members) piece[i] = -1;
        int pid = 0;
        for (std::size_t root : members) {
          if (piece[root] >= 0) continue;
          std::vector<std::size_t> stack{root}, part;
          piece[root] = pid;
          while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            part.push_back(i);
            for (std::size_t k : s.neighbors(i)) {
              auto it = piece.find(k);
              if (it != piece.end() && it->second < 0) {
                it->second = pid;
                stack.push_back(k);
              }
            }
          }
          std::sort(part.begin(), part.end());
          c.elements.push_back(std::move(part));
          ++pid;
        }
      }
      if (all_below(s, c, eps)) {
        chosen = std::move(c);
        break;
      }
    }
    if (!chosen) return std::nullopt;
    for (auto& e : chosen->elements) best.elements.push_back(std::move(e));
    found = true;
  }
  if (!found) return std::nullopt;
  return best;
}

// Merges elements while the union stays below eps and multiplicity does not
// grow; then drops elements whose atoms are covered elsewhere.
inline CellCover local_search(const CellSpace& s, CellCover cover, double eps) {
  int mult = cover_multiplicity(s, cover);
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t a = 0; a < cover.elements.size() && !improved; ++a) {
      for (std::size_t b = a + 1; b < cover.elements.size(); ++b) {
        std::vector<std::size_t> u = cover.elements[a];
        u.insert(u.end(), cover.elements[b].begin(), cover.elements[b].end());
        std::sort(u.begin(), u.end());
        u.erase(std::unique(u.begin(), u.end()), u.end());
        if (!(s.diameter(u) < eps)) continue;
        CellCover trial = cover;
        trial.elements[a] = std::move(u);
        trial.elements.erase(trial.elements.begin() + static_cast<std::ptrdiff_t>(b));
        const int m = cover_multiplicity(s, trial);
        if (m <= mult) {
          cover = std::move(trial);
          mult = m;
          improved = true;
          break;
        }
      }
    }
  }
  std::vector<int> uses(s.size(), 0);
  for (const auto& e : cover.elements) {
    for (std::size_t i : e) ++uses[i];
  }
  for (std::size_t a = cover.elements.size(); a-- > 0;) {
    bool redundant = true;
    for (std::size_t i : cover.elements[a]) redundant = redundant && uses[i] > 1;
    if (!redundant) continue;
    for (std::size_t i : cover.elements[a]) --uses[i];
    cover.elements.erase(cover.elements.begin() + static_cast<std::ptrdiff_t>(a));
  }
  return cover;
}

inline CellCover singleton_cover(const CellSpace& s) {
  CellCover c;
  for (std::size_t i = 0; i < s.size(); ++i) c.elements.push_back({i});
  return c;
}

struct Candidate {
  CellCover cover;
  int mult;
  std::string method;
};

inline Candidate greedy(const CellSpace& s, double eps, std::uint64_t seed) {
  Candidate best{singleton_cover(s), 0, "singletons"};
  best.mult = cover_multiplicity(s, best.cover);
  auto offer = [&](CellCover c, const char* method) {
    if (!all_below(s, c, eps)) return;
    const int m = cover_multiplicity(s, c);
    if (m < best.mult) best = {std::move(c), m, method};
  };

  if (s.space_diameter() < eps) {
    std::vector<std::size_t> all(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) all[i] = i;
    offer(CellCover{{all}}, "whole");
    return best;
  }
  {
    CellCover c;
    c.elements = components(s);
    offer(std::move(c), "components");
    if (best.mult == 1) return best;
  }
  if (auto band = band_cover(s, eps)) offer(std::move(*band), "bands");
  if (best.mult <= 2) return best;

  const int D = s.dim();
  std::vector<int> side(D);
  for (int d = 0; d < D; ++d) side[d] = max_run(s, d, eps);
  // Enumerate parity twists exhaustively for small patterns, then sample.
  std::vector<std::pair<int, int>> pairs;
  for (int d = 0; d < D; ++d) {
    for (int e = d + 1; e < D; ++e) pairs.emplace_back(d, e);
  }
  std::int64_t patterns = 1;
  for (const auto& [d, e] : pairs) {
    patterns *= side[d];
    if (patterns > 4096) break;
  }
  std::mt19937_64 rng(seed);
  const std::int64_t tries = std::min<std::int64_t>(patterns, 4096);
  for (std::int64_t code = 0; code < tries; ++code) {
    std::vector<std::vector<int>> twist(D, std::vector<int>(D, 0));
    std::int64_t t = code;
    for (const auto& [d, e] : pairs) {
      twist[d][e] = patterns <= 4096 ? static_cast<int>(t % side[d]) : static_cast<int>(rng() % side[d]);
      t /= side[d];
    }
    for (int rep = 0; rep < 4; ++rep) {
      std::vector<int> shift(D, 0);
      if (rep > 0) {
        for (int d = 0; d < D; ++d) shift[d] = static_cast<int>(rng() % side[d]);
      }
      offer(brick_cover(s, side, shift, twist), "bricks");
    }
    if (best.mult <= D + 1) break;
  }
  return best;
}

struct ExactSearch {
  const CellSpace& s;
  double eps;
  int target;  // allowed multiplicity
  std::int64_t budget;
  std::int64_t nodes = 0;
  bool exhausted = false;

  std::vector<std::vector<std::vector<std::size_t>>> boxes;     // per atom: element atom lists
  std::vector<std::vector<std::vector<int>>> box_vertices;      // matching dense vertex ids
  std::vector<int> vcount;
  std::vector<int> covered;
  std::vector<std::vector<std::size_t>> chosen;

  ExactSearch(const CellSpace& space, double e, int t, std::int64_t b) : s(space), eps(e), target(t), budget(b) {
    std::unordered_map<std::int64_t, int> dense;
    const int D = s.dim();
    std::vector<int> run(D);
    for (int d = 0; d < D; ++d) run[d] = max_run(s, d, eps);
    boxes.resize(s.size());
    box_vertices.resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Index& c = s.atom(i);
      // Per axis, ranges [lo, lo + len) containing c[d]; axis 0 starts at c[0].
      std::vector<std::vector<std::pair<int, int>>> ranges(D);
      for (int d = 0; d < D; ++d) {
        const Axis& a = s.axes()[d];
        for (int len = 1; len <= run[d]; ++len) {
          for (int lo = c[d] - len + 1; lo <= c[d]; ++lo) {
            if (d == 0 && lo != c[0]) continue;
            if (!a.periodic && (lo < 0 || lo + len > a.cells)) continue;
            ranges[d].emplace_back(lo, len);
          }
        }
      }
      std::vector<std::vector<std::size_t>> found;
      std::vector<std::size_t> pick(D, 0);
      bool any = true;
      for (int d = 0; d < D; ++d) any = any && !ranges[d].empty();
      while (any) {
        std::vector<std::size_t> elem;
        collect(pick, ranges, elem);
        std::sort(elem.begin(), elem.end());
        if (s.diameter(elem) < eps) found.push_back(std::move(elem));
        int d = D - 1;
        while (d >= 0 && ++pick[d] == ranges[d].size()) pick[d--] = 0;
        if (d < 0) break;
      }
      std::sort(found.begin(), found.end());
      found.erase(std::unique(found.begin(), found.end()), found.end());
      // Larger boxes first: they close the search faster.
      std::stable_sort(found.begin(), found.end(), [](const auto& x, const auto& y) { return x.size() > y.size(); });
      for (const auto& elem : found) {
        std::vector<int> verts;
        for (std::size_t k : elem) {
          for (std::int64_t v : s.vertex_keys(k)) {
            auto [it, fresh] = dense.emplace(v, static_cast<int>(dense.size()));
            verts.push_back(it->second);
          }
        }
        std::sort(verts.begin(), verts.end());
        verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
        box_vertices[i].push_back(std::move(verts));
      }
      boxes[i] = std::move(found);
    }
    vcount.assign(dense.size(), 0);
    covered.assign(s.size(), 0);
  }

  void collect(const std::vector<std::size_t>& pick, const std::vector<std::vector<std::pair<int, int>>>& ranges,
               std::vector<std::size_t>& out) const {
    const int D = s.dim();
    Index c(D);
    std::vector<int> step(D, 0);
    while (true) {
      for (int d = 0; d < D; ++d) {
        const Axis& a = s.axes()[d];
        int v = ranges[d][pick[d]].first + step[d];
        if (a.periodic) v = ((v % a.cells) + a.cells) % a.cells;
        c[d] = v;
      }
      const std::int64_t j = s.find(c);
      if (j >= 0) out.push_back(static_cast<std::size_t>(j));
      int d = D - 1;
      while (d >= 0 && ++step[d] == ranges[d][pick[d]].second) step[d--] = 0;
      if (d < 0) break;
    }
  }

  bool dfs(std::size_t from) {
    if (++nodes > budget) {
      exhausted = true;
      return false;
    }
    while (from < s.size() && covered[from] > 0) ++from;
    if (from == s.size()) return true;
    for (std::size_t b = 0; b < boxes[from].size(); ++b) {
      const auto& verts = box_vertices[from][b];
      bool ok = true;
      for (int v : verts) {
        if (vcount[v] + 1 > target) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      for (int v : verts) ++vcount[v];
      for (std::size_t k : boxes[from][b]) ++covered[k];
      chosen.push_back(boxes[from][b]);
      if (dfs(from + 1)) return true;
      chosen.pop_back();
      for (std::size_t k : boxes[from][b]) --covered[k];
      for (int v : verts) --vcount[v];
      if (exhausted) return false;
    }
    return false;
  }
};

}  // namespace internal

inline SolveResult min_multiplicity(const CellSpace& space, double eps, Mode mode,
                                    std::int64_t budget = 5'000'000, std::uint64_t seed = 0) {
  if (space.size() == 0) throw ConfigError("min_multiplicity: empty space");
  if (!(eps > space.atom_diameter())) {
    throw ConfigError("min_multiplicity: eps = " + std::to_string(eps) +
                      " does not exceed the atom diameter " + std::to_string(space.atom_diameter()));
  }
  internal::Candidate best = internal::greedy(space, eps, seed);
  if (mode == Mode::kLocalSearch && best.mult > 1) {
    CellCover improved = internal::local_search(space, best.cover, eps);
    const int m = cover_multiplicity(space, improved);
    if (m <= best.mult) best = {std::move(improved), m, best.method + "+local"};
  }
  SolveResult res;
  res.method = best.method;
  if (mode == Mode::kExact) {
    int lower = 0;
    for (int k = 0; k + 1 < best.mult; ++k) {
      internal::ExactSearch search(space, eps, k + 1, budget - res.nodes);
      const bool found = search.dfs(0);
      res.nodes += search.nodes;
      if (search.exhausted) {
        res.upper_only = true;
        break;
      }
      if (found) {
        best = {CellCover{search.chosen}, cover_multiplicity(space, CellCover{search.chosen}), "exact"};
        break;
      }
      lower = k + 1;
    }
    if (!res.upper_only) res.certified_lower = std::min(lower, best.mult - 1);
  }
  res.cover = std::move(best.cover);
  res.stats = cover_stats(space, res.cover);
  res.widim_upper = res.stats.multiplicity - 1;
  return res;
}

inline nlohmann::json to_json(const SolveResult& r, double eps, Mode mode, std::size_t atoms) {
  nlohmann::json j{{"atoms", atoms},
                   {"eps", eps},
                   {"mode", to_string(mode)},
                   {"widim_upper", r.widim_upper},
                   {"mesh", r.stats.mesh},
                   {"multiplicity", r.stats.multiplicity},
                   {"upper_only", r.upper_only},
                   {"nodes", r.nodes},
                   {"method", r.method}};
  j["certified_lower"] = r.certified_lower ? nlohmann::json(*r.certified_lower) : nlohmann::json(nullptr);
  return j;
}

}  // namespace meandimlab::widim
