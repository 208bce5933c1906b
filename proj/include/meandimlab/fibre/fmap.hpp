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

// Maps F = G o f from a cell space into [0,1]^{m-1}: f is the partition of
// unity map into the nerve of an eps/2 cover, G is linear on nerve simplices
// with vertex images either drawn at random (generic position) or improved
// by local search against the sampled fiber widths.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "meandimlab/dynsys.hpp"
#include "meandimlab/errors.hpp"
#include "meandimlab/widim/cell_space.hpp"
#include "meandimlab/widim/nerve.hpp"
#include "meandimlab/widim/solver.hpp"

namespace meandimlab::fibre {

using widim::CellSpace;

enum class Construction { kLinearOnNerve, kSearchedPL };

inline const char* to_string(Construction c) {
  return c == Construction::kLinearOnNerve ? "LINEAR_ON_NERVE" : "SEARCHED_PL";
}

inline Construction construction_from_string(const std::string& s) {
  if (s == "LINEAR_ON_NERVE" || s == "linear") return Construction::kLinearOnNerve;
  if (s == "SEARCHED_PL" || s == "searched") return Construction::kSearchedPL;
  throw ConfigError("unknown F construction '" + s + "'");
}

struct FMap {
  Construction construction = Construction::kLinearOnNerve;
  widim::NerveProjection projection;
  std::vector<std::vector<double>> vertex_images;  // per nerve vertex, in [0,1]^{m-1}
  std::size_t cover_elements = 0;
  double eps_half = 0.0;
  int n = 1;
  int m = 2;
  int widim_half = 0;  // Widim_{eps/2} of the domain, from the cover used
  double transfer_delta = 0.0;
  bool verified = false;
  int search_steps = 0;

  std::vector<double> at_atom(std::size_t i) const {
    std::vector<double> out(static_cast<std::size_t>(m - 1), 0.0);
    for (const auto& [e, w] : projection.coords.at(i)) {
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += w * vertex_images[e][k];
    }
    return out;
  }

  std::vector<std::vector<double>> image() const {
    std::vector<std::vector<double>> out;
    out.reserve(projection.coords.size());
    for (std::size_t i = 0; i < projection.coords.size(); ++i) out.push_back(at_atom(i));
    return out;
  }
};

struct FiberProbe {
  std::vector<double> p;
  bool pushforward = false;
  std::size_t fiber_size = 0;
  int widim_upper = 0;
  double bound = 0.0;
  bool pass = true;
};

struct FiberReport {
  std::vector<FiberProbe> probes;
  double bound = 0.0;
  double fiber_tol = 0.0;
  double max_ratio = 0.0;
  int violations = 0;
  std::size_t nonempty = 0;
  bool vacuous = false;

  bool pass() const { return !vacuous && violations == 0; }
};

inline double sup_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s = std::max(s, std::fabs(a[k] - b[k]));
  return s;
}

namespace internal {

inline std::vector<std::vector<double>> draw_images(std::size_t count, int m, std::mt19937_64& rng) {
  std::vector<std::vector<double>> img(count, std::vector<double>(static_cast<std::size_t>(m - 1)));
  for (auto& v : img) {
    for (double& c : v) c = dynsys::unit_draw(rng);
  }
  return img;
}

// Probe points are fixed by the seed and the image, so two evaluations of
// the same map agree exactly.
inline std::vector<std::pair<std::vector<double>, bool>> probe_points(
    const std::vector<std::vector<double>>& image, int m, int probe_count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::pair<std::vector<double>, bool>> out;
  for (int k = 0; k < probe_count; ++k) {
    if (k % 2 == 0) {
      std::vector<double> p(static_cast<std::size_t>(m - 1));
      for (double& c : p) c = dynsys::unit_draw(rng);
      out.emplace_back(std::move(p), false);
    } else {
      out.emplace_back(image[static_cast<std::size_t>(rng() % image.size())], true);
    }
  }
  return out;
}

inline FiberReport verify_image(const std::vector<std::vector<double>>& image, const CellSpace& space,
                                double eps, int m, int widim_half, int probe_count, std::uint64_t seed) {
  FiberReport rep;
  rep.bound = static_cast<double>(widim_half) / m;
  rep.fiber_tol = eps / 10.0;
  for (auto& [p, pushed] : probe_points(image, m, probe_count, seed)) {
    FiberProbe pr;
    pr.p = p;
    pr.pushforward = pushed;
    pr.bound = rep.bound;
    std::vector<std::size_t> fiber;
    for (std::size_t i = 0; i < image.size(); ++i) {
      if (sup_dist(image[i], p) <= rep.fiber_tol) fiber.push_back(i);
    }
    pr.fiber_size = fiber.size();
    if (!fiber.empty()) {
      ++rep.nonempty;
      const CellSpace sub = space.subspace(fiber);
      pr.widim_upper = widim::min_multiplicity(sub, eps, widim::Mode::kGreedy).widim_upper;
      pr.pass = pr.widim_upper <= rep.bound + 1e-12;
      const double ratio = rep.bound > 0.0 ? pr.widim_upper / rep.bound
                                           : (pr.widim_upper > 0 ? std::numeric_limits<double>::infinity() : 0.0);
      rep.max_ratio = std::max(rep.max_ratio, ratio);
      if (!pr.pass) ++rep.violations;
    }
    rep.probes.push_back(std::move(pr));
  }
  rep.vacuous = rep.nonempty == 0;
  return rep;
}

// Lexicographic search objective: violations first, then total excess.
inline std::pair<int, double> objective(const FiberReport& r) {
  double excess = 0.0;
  for (const auto& p : r.probes) excess += std::max(0.0, p.widim_upper - p.bound);
  return {r.violations, excess};
}

}  // namespace internal

inline FiberReport verify_fiber_bound(const FMap& F, const CellSpace& space, double eps, int n, int m,
                                      int probe_count, std::uint64_t seed) {
  if (m != F.m) throw ConfigError("verify_fiber_bound: m differs from the map's target dimension");
  if (n != F.n) throw ConfigError("verify_fiber_bound: horizon differs from the map's record");
  if (space.size() != F.projection.coords.size()) throw ConfigError("verify_fiber_bound: domain mismatch");
  if (probe_count < 1) throw ConfigError("verify_fiber_bound: probe_count must be positive");
  return internal::verify_image(F.image(), space, eps, m, F.widim_half, probe_count, seed);
}

// `space` carries the d_n metric already; n is recorded only.
inline FMap build_fmap(const CellSpace& space, double eps, int m, Construction strategy, int budget,
                       std::uint64_t seed, int n = 1, int probe_count = 64) {
  if (m < 2) throw ConfigError("build_fmap: m must be at least 2");
  if (budget < 0) throw ConfigError("build_fmap: budget must be nonnegative");
  FMap F;
  F.construction = strategy;
  F.eps_half = eps / 2.0;
  F.n = n;
  F.m = m;
  const widim::SolveResult cover = widim::min_multiplicity(space, F.eps_half, widim::Mode::kLocalSearch, 0, seed);
  F.widim_half = cover.widim_upper;
  F.cover_elements = cover.cover.elements.size();
  F.projection = widim::nerve_and_projection(space, cover.cover);
  F.transfer_delta = widim::transfer_delta(space, F.projection, eps);

  std::mt19937_64 rng(seed);
  F.vertex_images = internal::draw_images(F.projection.nerve.vertices, m, rng);
  const std::uint64_t probe_seed = seed ^ 0x9e3779b97f4a7c15ULL;
  FiberReport rep = internal::verify_image(F.image(), space, eps, m, F.widim_half, probe_count, probe_seed);
  if (strategy == Construction::kSearchedPL) {
    auto best = internal::objective(rep);
    for (int step = 0; step < budget && best.first > 0; ++step) {
      // Move one vertex met by a violating fiber, or any vertex if none is known.
      std::vector<std::size_t> hot;
      const auto image = F.image();
      for (const auto& pr : rep.probes) {
        if (pr.pass) continue;
        for (std::size_t i = 0; i < image.size(); ++i) {
          if (sup_dist(image[i], pr.p) > rep.fiber_tol) continue;
          for (const auto& [e, w] : F.projection.coords[i]) hot.push_back(e);
        }
      }
      const std::size_t v = hot.empty() ? static_cast<std::size_t>(rng() % F.vertex_images.size())
                                        : hot[static_cast<std::size_t>(rng() % hot.size())];
      const std::vector<double> saved = F.vertex_images[v];
      for (double& c : F.vertex_images[v]) c = dynsys::unit_draw(rng);
      FiberReport trial = internal::verify_image(F.image(), space, eps, m, F.widim_half, probe_count, probe_seed);
      const auto obj = internal::objective(trial);
      F.search_steps = step + 1;
      if (obj <= best) {
        best = obj;
        rep = std::move(trial);
      } else {
        F.vertex_images[v] = saved;
      }
    }
  }
  F.verified = rep.pass();
  return F;
}

// F constant at `value`; the nerve is a single vertex.
inline FMap constant_fmap(const CellSpace& space, double eps, int m, double value = 0.5) {
  if (m < 2) throw ConfigError("constant_fmap: m must be at least 2");
  FMap F;
  F.eps_half = eps / 2.0;
  F.m = m;
  std::vector<std::size_t> all(space.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  widim::CellCover one{{all}};
  F.cover_elements = 1;
  F.projection = widim::nerve_and_projection(space, one);
  F.vertex_images = {std::vector<double>(static_cast<std::size_t>(m - 1), value)};
  F.widim_half = widim::min_multiplicity(space, F.eps_half, widim::Mode::kLocalSearch).widim_upper;
  return F;
}

inline nlohmann::json to_json(const FMap& F) {
  nlohmann::json simplices = nlohmann::json::array();
  for (const auto& s : F.projection.nerve.simplices) simplices.push_back(s);
  return {{"construction", to_string(F.construction)},
          {"nerve", {{"vertices", F.projection.nerve.vertices},
                     {"dimension", F.projection.nerve.dimension},
                     {"simplices", simplices}}},
          {"vertex_images", F.vertex_images},
          {"record", {{"cover_elements", F.cover_elements},
                      {"eps_half", F.eps_half},
                      {"n", F.n},
                      {"m", F.m},
                      {"widim_half", F.widim_half}}},
          {"transfer_delta", std::isfinite(F.transfer_delta) ? nlohmann::json(F.transfer_delta)
                                                              : nlohmann::json(nullptr)},
          {"verified", F.verified},
          {"search_steps", F.search_steps}};
}

inline nlohmann::json to_json(const FiberReport& r) {
  return {{"bound", r.bound},
          {"fiber_tol", r.fiber_tol},
          {"max_ratio", std::isfinite(r.max_ratio) ? nlohmann::json(r.max_ratio) : nlohmann::json("inf")},
          {"violations", r.violations},
          {"nonempty", r.nonempty},
          {"probes", r.probes.size()},
          {"vacuous", r.vacuous},
          {"pass", r.pass()}};
}

// probe,fiber_size,widim_upper,bound,pass
inline std::string fiber_csv(const FiberReport& r) {
  std::string out = "probe,fiber_size,widim_upper,bound,pass\n";
  for (std::size_t k = 0; k < r.probes.size(); ++k) {
    const auto& p = r.probes[k];
    out += std::to_string(k) + "," + std::to_string(p.fiber_size) + "," + std::to_string(p.widim_upper) + "," +
           nlohmann::json(p.bound).dump() + "," + (p.pass ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace meandimlab::fibre
