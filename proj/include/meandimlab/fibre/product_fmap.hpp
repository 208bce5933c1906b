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

// The map F: X -> [0,1]^{m-1} used by the factor pipeline.
//
// Under d_n only the eps/2-effective axes can separate points, and each such
// axis is a 1-D factor whose eps/2 cover has an interval (or cycle) nerve.
// f sends x to those axis values, which parametrize the product of the
// nerves; the circle axis goes through the tent map so that antipodal arcs
// fold together. G is a fixed near-identity linear mixing with rows
// normalized to sum 1, so it maps [0,1]^k into [0,1]^{m-1}. When k = m - 1
// the map G is invertible and fibers can be sampled exactly.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "meandimlab/dynsys.hpp"
#include "meandimlab/errors.hpp"
#include "meandimlab/fibre/fmap.hpp"
#include "meandimlab/widim/orbit.hpp"
#include "meandimlab/widim/solver.hpp"

namespace meandimlab::fibre {

using dynsys::OrbitWindow;

class ProductFMap {
 public:
  ProductFMap(const dynsys::SystemSpec& spec, int n, double eps, int m, std::uint64_t seed, double eta = 0.05)
      : spec_(spec), n_(n), eps_(eps), m_(m), eta_(eta) {
    if (m < 2) throw ConfigError("ProductFMap: m must be at least 2");
    if (n < 1) throw ConfigError("ProductFMap: horizon must be positive");
    if (!(eta >= 0.0 && eta < 0.5)) throw ConfigError("ProductFMap: mixing strength must lie in [0, 0.5)");
    axes_ = widim::effective_axes(spec, n, eps / 2.0);
    if (axes_.empty()) throw ConfigError("ProductFMap: no effective axes at eps/2");
    // Each axis factor: a 1-D cover at eps/2, whose nerve is a path or cycle.
    for (const auto& a : axes_) {
      const int cells = std::max(2, static_cast<int>(std::ceil(16.0 * a.weight / eps)));
      const widim::CellSpace axis = widim::CellSpace::grid({widim::Axis{0.0, 1.0, cells, a.weight, a.circle}});
      const widim::SolveResult r = widim::min_multiplicity(axis, eps / 2.0, widim::Mode::kExact, 200'000);
      axis_widim_.push_back(r.widim_upper);
      widim_half_ += r.widim_upper;
    }
    const std::size_t k = axes_.size();
    const std::size_t L = static_cast<std::size_t>(m - 1);
    B_.assign(L, std::vector<double>(k, 0.0));
    std::mt19937_64 rng(seed);
    for (std::size_t j = 0; j < L; ++j) {
      for (std::size_t i = 0; i < k; ++i) {
        const bool primary = (k >= L) ? (i % L == j) : (i == j % k);
        B_[j][i] = (primary ? 1.0 : 0.0) + eta * dynsys::unit_draw(rng);
      }
      double s = 0.0;
      for (double v : B_[j]) s += v;
      for (double& v : B_[j]) v /= s;
    }
  }

  int n() const { return n_; }
  int m() const { return m_; }
  double eps() const { return eps_; }
  int widim_half() const { return widim_half_; }
  const std::vector<int>& axis_widim() const { return axis_widim_; }
  const std::vector<widim::OrbitAxis>& axes() const { return axes_; }
  const std::vector<std::vector<double>>& mixing() const { return B_; }

  // Coordinates read by F relative to the point: [first_coord, last_coord].
  std::int64_t first_coord() const { return axes_.front().circle ? 0 : axes_.front().coord; }
  std::int64_t last_coord() const {
    std::int64_t hi = 0;
    for (const auto& a : axes_) {
      if (!a.circle) hi = std::max(hi, a.coord);
    }
    return hi;
  }

  std::vector<double> nerve_point(const OrbitWindow& x) const {
    std::vector<double> u;
    u.reserve(axes_.size());
    for (const auto& a : axes_) {
      u.push_back(a.circle ? 2.0 * dynsys::arcdist(x.circle(), 0.0) : x.cube(a.coord, a.component));
    }
    return u;
  }

  std::vector<double> mix(const std::vector<double>& u) const {
    std::vector<double> out(B_.size(), 0.0);
    for (std::size_t j = 0; j < B_.size(); ++j) {
      for (std::size_t i = 0; i < u.size(); ++i) out[j] += B_[j][i] * u[i];
    }
    return out;
  }

  std::vector<double> operator()(const OrbitWindow& x) const { return mix(nerve_point(x)); }

  // Nerve point u with G(u) = q and tail coordinates (beyond the first m-1
  // axes) fixed to `tail`. Empty when the system is singular.
  std::optional<std::vector<double>> solve(const std::vector<double>& q, const std::vector<double>& tail) const {
    const std::size_t k = axes_.size();
    const std::size_t L = B_.size();
    const std::size_t h = std::min(k, L);
    if (tail.size() != k - h) throw ConfigError("ProductFMap::solve: tail length mismatch");
    // Solve the first h rows for the first h axes; the remaining rows (k < L)
    // are checked by the caller.
    std::vector<std::vector<double>> A(h, std::vector<double>(h + 1));
    for (std::size_t j = 0; j < h; ++j) {
      for (std::size_t i = 0; i < h; ++i) A[j][i] = B_[j][i];
      double rhs = q[j];
      for (std::size_t i = h; i < k; ++i) rhs -= B_[j][i] * tail[i - h];
      A[j][h] = rhs;
    }
    for (std::size_t c = 0; c < h; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c + 1; r < h; ++r) {
        if (std::fabs(A[r][c]) > std::fabs(A[piv][c])) piv = r;
      }
      if (std::fabs(A[piv][c]) < 1e-12) return std::nullopt;
      std::swap(A[piv], A[c]);
      for (std::size_t r = 0; r < h; ++r) {
        if (r == c) continue;
        const double f = A[r][c] / A[c][c];
        for (std::size_t i = c; i <= h; ++i) A[r][i] -= f * A[c][i];
      }
    }
    std::vector<double> u(k);
    for (std::size_t j = 0; j < h; ++j) u[j] = A[j][h] / A[j][j];
    for (std::size_t i = h; i < k; ++i) u[i] = tail[i - h];
    return u;
  }

  // A copy of `base` whose effective axes take the values u. The circle axis
  // picks one of the two tent preimages.
  OrbitWindow realize(const OrbitWindow& base, const std::vector<double>& u, bool upper_branch) const {
    const dynsys::SystemSpec& s = base.spec();
    const std::int64_t w = s.window_radius;
    std::vector<double> coords(base.base_coords().begin(), base.base_coords().end());
    double circle = base.circle();
    for (std::size_t i = 0; i < axes_.size(); ++i) {
      const auto& a = axes_[i];
      if (a.circle) {
        circle = upper_branch ? dynsys::wrap_unit(1.0 - u[i] / 2.0) : u[i] / 2.0;
        continue;
      }
      const std::int64_t j = a.coord + base.offset();
      if (j < -w || j > w) throw RangeError("realize: coordinate outside stored window");
      coords[static_cast<std::size_t>((j + w) * s.dim + a.component)] = u[i];
    }
    // Keep circle_at(0) equal to `circle` at the base offset.
    const double base_circle = dynsys::wrap_unit(circle - s.theta.frac(base.offset()));
    return OrbitWindow(s, std::move(coords), base_circle).with_offset(base.offset());
  }

  // Points x' drawn from the thickened fiber {x : |F(x) - q|_inf <= tol};
  // the non-effective data of x' is copied from `base`.
  std::vector<OrbitWindow> fiber_samples(const std::vector<double>& q, double tol, const OrbitWindow& base,
                                         int count, std::mt19937_64& rng, int max_attempts = 0) const {
    if (max_attempts <= 0) max_attempts = 40 * count;
    const std::size_t k = axes_.size();
    const std::size_t h = std::min(k, B_.size());
    std::vector<OrbitWindow> out;
    for (int t = 0; t < max_attempts && static_cast<int>(out.size()) < count; ++t) {
      std::vector<double> target(q);
      for (double& v : target) v = v + tol * (2.0 * dynsys::unit_draw(rng) - 1.0);
      std::vector<double> tail(k - h);
      for (double& v : tail) v = dynsys::unit_draw(rng);
      const auto u = solve(target, tail);
      const bool branch = (rng() & 1U) != 0;
      if (!u) continue;
      bool inside = true;
      for (double v : *u) inside = inside && v >= 0.0 && v <= 1.0;
      if (!inside) continue;
      OrbitWindow x = realize(base, *u, branch);
      if (sup_dist((*this)(x), q) > tol) continue;
      out.push_back(std::move(x));
    }
    return out;
  }

 private:
  dynsys::SystemSpec spec_;
  int n_;
  double eps_;
  int m_;
  double eta_;
  std::vector<widim::OrbitAxis> axes_;
  std::vector<int> axis_widim_;
  int widim_half_ = 0;
  std::vector<std::vector<double>> B_;  // (m-1) x k
};

struct OrbitFiberProbe {
  std::vector<double> q;
  bool pushforward = false;
  std::size_t fiber_size = 0;
  int widim_upper = 0;
  double bound = 0.0;
  bool pass = true;
};

struct OrbitFiberReport {
  std::vector<OrbitFiberProbe> probes;
  double bound = 0.0;
  double fiber_tol = 0.0;
  double max_ratio = 0.0;
  int violations = 0;
  std::size_t nonempty = 0;
  bool vacuous = false;

  bool pass() const { return !vacuous && violations == 0; }
};

// Widim_eps(F^{-1}(q), d_n) against Widim_{eps/2}(X, d_n) / m on sampled
// fibers. Half the probes are uniform, half are images of the given points.
inline OrbitFiberReport verify_fiber_bound(const ProductFMap& F, const std::vector<OrbitWindow>& points,
                                           int probe_count, int per_fiber, std::uint64_t seed) {
  if (points.empty()) throw ConfigError("verify_fiber_bound: no sample points");
  if (probe_count < 1 || per_fiber < 1) throw ConfigError("verify_fiber_bound: counts must be positive");
  OrbitFiberReport rep;
  rep.bound = static_cast<double>(F.widim_half()) / F.m();
  rep.fiber_tol = F.eps() / 10.0;
  std::mt19937_64 rng(seed);
  for (int k = 0; k < probe_count; ++k) {
    OrbitFiberProbe pr;
    pr.bound = rep.bound;
    const OrbitWindow& base = points[static_cast<std::size_t>(rng() % points.size())];
    if (k % 2 == 0) {
      pr.q.resize(static_cast<std::size_t>(F.m() - 1));
      for (double& v : pr.q) v = dynsys::unit_draw(rng);
    } else {
      pr.q = F(base);
      pr.pushforward = true;
    }
    std::vector<OrbitWindow> fiber = F.fiber_samples(pr.q, rep.fiber_tol, base, per_fiber, rng);
    pr.fiber_size = fiber.size();
    if (!fiber.empty()) {
      ++rep.nonempty;
      pr.widim_upper = widim::widim_orbit(fiber, F.n(), F.eps()).upper;
      pr.pass = pr.widim_upper <= rep.bound + 1e-12;
      if (rep.bound > 0.0) rep.max_ratio = std::max(rep.max_ratio, pr.widim_upper / rep.bound);
      if (!pr.pass) ++rep.violations;
    }
    rep.probes.push_back(std::move(pr));
  }
  rep.vacuous = rep.nonempty == 0;
  return rep;
}

inline nlohmann::json to_json(const ProductFMap& F) {
  nlohmann::json axes = nlohmann::json::array();
  for (const auto& a : F.axes()) {
    axes.push_back({{"circle", a.circle}, {"coord", a.coord}, {"component", a.component}, {"weight", a.weight}});
  }
  return {{"construction", "LINEAR_ON_NERVE"},
          {"nerve", "product of per-axis interval and cycle nerves"},
          {"axes", axes},
          {"axis_widim", F.axis_widim()},
          {"mixing", F.mixing()},
          {"record", {{"eps_half", F.eps() / 2.0}, {"n", F.n()}, {"m", F.m()}, {"widim_half", F.widim_half()}}}};
}

inline nlohmann::json to_json(const OrbitFiberReport& r) {
  return {{"bound", r.bound},     {"fiber_tol", r.fiber_tol}, {"max_ratio", r.max_ratio},
          {"violations", r.violations}, {"nonempty", r.nonempty}, {"probes", r.probes.size()},
          {"vacuous", r.vacuous}, {"pass", r.pass()}};
}

}  // namespace meandimlab::fibre
