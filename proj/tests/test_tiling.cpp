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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "meandimlab/dynsys.hpp"
#include "meandimlab/errors.hpp"
#include "meandimlab/marker.hpp"
#include "meandimlab/tiling.hpp"

namespace {

using namespace meandimlab;
using marker::MarkerSequence;
using tiling::IntervalTiling;

MarkerSequence periodic(std::int64_t spacing, std::int64_t half, std::int64_t M1) {
  std::vector<std::pair<std::int64_t, double>> s;
  for (std::int64_t n = -half; n <= half; n += spacing) s.emplace_back(n, 1.0);
  return MarkerSequence(-half, half, spacing, M1, s);
}

// Oracle: Voronoi owner of u on the slice by direct distance comparison.
std::int64_t owner(const MarkerSequence& seq, double level, double u) {
  std::int64_t best = 0;
  double bd = INFINITY;
  for (const auto& [n, v] : seq.support()) {
    const double h = 1.0 / v;
    const double d = (u - n) * (u - n) + (level + h) * (level + h);
    if (d < bd) {
      bd = d;
      best = n;
    }
  }
  return best;
}

TEST(SliceTiling, PeriodicSitesGiveMidpointTiles) {
  const auto seq = periodic(10, 200, 10);
  const IntervalTiling t = tiling::slice_tiling(seq, 1e4, -100, 100);
  const tiling::Tile* w0 = t.find(0);
  ASSERT_NE(w0, nullptr);
  EXPECT_DOUBLE_EQ(w0->a.value(), -5.0);
  EXPECT_DOUBLE_EQ(w0->b.value(), 5.0);
  EXPECT_TRUE(w0->complete());
}

TEST(SliceTiling, TwoSiteBisectorClosedForm) {
  // Sites (0, h = 1) and (10, h = 2) at level 100: u = 5 + (102^2 - 101^2)/20.
  const MarkerSequence seq(-40, 50, 10, 10, {{0, 1.0}, {10, 0.5}});
  const IntervalTiling t = tiling::slice_tiling(seq, 100.0, -28, 38);
  const double expect = 5.0 + (102.0 * 102.0 - 101.0 * 101.0) / 20.0;
  EXPECT_NEAR(expect, 15.15, 1e-12);
  EXPECT_NEAR(t.find(0)->b.value(), expect, 1e-12);
  EXPECT_NEAR(t.find(10)->a.value(), expect, 1e-12);
  // Independent check: equal squared distances at the boundary.
  const double u = t.find(0)->b.value();
  EXPECT_NEAR(u * u + 101.0 * 101.0, (u - 10.0) * (u - 10.0) + 102.0 * 102.0, 1e-9);
}

TEST(SliceTiling, MatchesBruteForceOwner) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<std::pair<std::int64_t, double>> s;
    std::int64_t n = -400;
    while (n < 400) {
      s.emplace_back(n, 0.05 + 0.95 * dynsys::unit_draw(rng));
      n += 20 + static_cast<std::int64_t>(rng() % 40);
    }
    const MarkerSequence seq(-400, 420, 20, 80, s);
    const double level = 50.0 + 500.0 * dynsys::unit_draw(rng);
    const IntervalTiling t = tiling::slice_tiling(seq, level, -300, 300);
    for (double u = -299.75; u < 300; u += 0.5) {
      const std::int64_t o = owner(seq, level, u);
      const tiling::Tile* w = t.find(o);
      ASSERT_NE(w, nullptr);
      ASSERT_FALSE(w->empty) << "owner " << o << " at " << u;
      EXPECT_LE(w->a.value(), u + 1e-9);
      EXPECT_GE(w->b.value(), u - 1e-9);
    }
  }
}

TEST(SliceTiling, WindowPreconditions) {
  const auto seq = periodic(10, 100, 10);
  EXPECT_THROW(tiling::slice_tiling(seq, 0.0, -10, 10), ConfigError);
  EXPECT_THROW(tiling::slice_tiling(seq, 1.0, 10, 10), RangeError);
  EXPECT_THROW(tiling::slice_tiling(seq, 1.0, -95, 95), RangeError);
}

TEST(BoundarySet, WorkedExamples) {
  const auto seq = periodic(10, 200, 10);
  const IntervalTiling t = tiling::slice_tiling(seq, 1e4, -100, 100);
  const auto b = tiling::boundary_set(t, 1.0);
  // Endpoints at 10k + 5, inflated by 1.
  for (const auto& [lo, hi] : b) {
    const double mid = 0.5 * (lo + hi);
    EXPECT_NEAR(std::fmod(mid + 1000.0, 10.0), 5.0, 1e-12);
    EXPECT_NEAR(hi - lo, 2.0, 1e-12);
  }
  EXPECT_NEAR(tiling::boundary_density(t, 1.0, 50.0), 0.2, 1e-12);
  EXPECT_EQ(tiling::boundary_density(t, 0.0, 50.0), 0.0);
  const auto single = tiling::boundary_of_interval(0.0, 10.0, 2.0);
  ASSERT_EQ(single.size(), 2u);
  EXPECT_EQ(single[0], std::make_pair(-2.0, 2.0));
  EXPECT_EQ(single[1], std::make_pair(8.0, 12.0));
  EXPECT_THROW(tiling::boundary_set(t, 0.0), ConfigError);
}

TEST(BoundarySet, ShrinksWithRho) {
  const auto seq = periodic(10, 200, 10);
  const IntervalTiling t = tiling::slice_tiling(seq, 1e4, -100, 100);
  double prev = 1.0;
  for (double rho : {1.0, 0.1, 0.01, 0.001}) {
    const double d = tiling::boundary_density(t, rho, 50.0);
    EXPECT_LT(d, prev);
    prev = d;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(TilingParams, ChooseCMinimizesTheBound) {
  for (double r : {9.0, 20.0, 39.0}) {
    for (double delta : {0.05, 0.1, 0.2}) {
      const double c = tiling::choose_c(r, delta);
      const double R = std::max(r, 9.0);
      const double best = tiling::m_lower_bound(R, delta, c);
      // Grid scan oracle over the open interval (1, 1/(1-delta)).
      const double top = 1.0 / (1.0 - delta);
      for (int i = 1; i < 2000; ++i) {
        const double ci = 1.0 + (top - 1.0) * i / 2000.0;
        EXPECT_LE(best, tiling::m_lower_bound(R, delta, ci) * (1.0 + 1e-9));
      }
    }
  }
}

TEST(TilingParams, RejectsSmallM) {
  EXPECT_THROW(tiling::make_tiling_params(9.0, 0.2, std::nullopt, 50, 100), ConfigError);
  EXPECT_THROW(tiling::make_tiling_params(9.0, 0.2, 2.0, 5000, 9000), ConfigError);
  EXPECT_NO_THROW(tiling::make_tiling_params(9.0, 0.2, std::nullopt, 5000, 9000));
}

// Random marker instances at a desk-scale tiling configuration.
struct Instance {
  marker::MarkerSpec spec;
  tiling::TilingParams tp;
  dynsys::SystemSpec sys;
};

Instance instance() {
  const auto theta = dynsys::RationalAngle::from_double(dynsys::kGoldenTheta);
  Instance in;
  in.sys = dynsys::SystemSpec::make(1, dynsys::kGoldenTheta, 8);
  const double r = 9.0, delta = 0.2;
  const double bound = tiling::m_lower_bound(r, delta, tiling::choose_c(r, delta));
  in.spec = marker::design_marker(theta, static_cast<std::int64_t>(std::ceil(bound)) + 1);
  in.tp = tiling::make_tiling_params(r, delta, std::nullopt, in.spec.M, in.spec.M1);
  return in;
}

TEST(TilingLemmas, RandomInstances) {
  const Instance in = instance();
  std::mt19937_64 rng(3);
  const std::int64_t half = 20 * in.tp.M1, pad = in.tp.M1 + 2;
  for (int i = 0; i < 60; ++i) {
    marker::MarkerSpec spec = in.spec;
    spec.arc_center = dynsys::unit_draw(rng);
    const auto x = dynsys::constant_point(in.sys, dynsys::unit_draw(rng));
    const auto seq = marker::marker_sequence(spec, x, -half - pad, half + pad);
    const IntervalTiling t = tiling::slice_tiling(seq, in.tp.H, -half, half);
    const IntervalTiling tc = tiling::slice_tiling(seq, in.tp.cH(), -half, half);
    for (const tiling::Tile& w : t.cells()) {
      // Locality: the tile lies within M1 + 1 of its site.
      EXPECT_GE(w.a.value(), static_cast<double>(w.label - in.tp.M1 - 1));
      EXPECT_LE(w.b.value(), static_cast<double>(w.label + in.tp.M1 + 1));
      // Nonempty tiles come from heavy sites.
      EXPECT_GT(seq.value(w.label), 0.5);
      // Interior against the cH tile of the same label.
      const tiling::Tile* c = tc.find(w.label);
      if (w.complete() && c != nullptr && !c->empty && c->complete()) {
        EXPECT_GE(tiling::interior_measure(w.length(), in.tp.R), (1.0 - in.tp.delta) * c->length() - 1e-9);
      }
    }
    const double dens = tiling::boundary_density(t, in.tp.R, static_cast<double>(half) - in.tp.R - 1.0);
    EXPECT_LT(dens, in.tp.delta);

    const std::int64_t K = 2 * in.tp.M1 + 2;
    const IntervalTiling at_H = tiling::slice_tiling(seq, in.tp.H, -K - 1, K + 1);
    const IntervalTiling at_cH = tiling::slice_tiling(seq, in.tp.cH(), -K - 1, K + 1);
    const tiling::GoodTile g = tiling::good_tile(at_H, at_cH, in.tp);
    EXPECT_GT(g.b - g.a, 2.0 * in.tp.r);
    EXPECT_GE(g.a, -static_cast<double>(K));
    EXPECT_LE(g.b, static_cast<double>(K));
  }
}

TEST(GoodTile, PeriodicPicksNearestSite) {
  const auto seq = periodic(30, 390, 30);
  tiling::TilingParams tp;
  tp.r = 9.0;
  tp.M = 30;
  tp.M1 = 30;
  tp.H = 1e4;
  tp.c = 1.1;
  const std::int64_t K = 2 * tp.M1 + 2;
  const IntervalTiling at_H = tiling::slice_tiling(seq, tp.H, -K - 1, K + 1);
  const IntervalTiling at_cH = tiling::slice_tiling(seq, tp.cH(), -K - 1, K + 1);
  const tiling::GoodTile g = tiling::good_tile(at_H, at_cH, tp);
  EXPECT_EQ(g.label, 0);
  EXPECT_DOUBLE_EQ(g.a, -15.0);
  EXPECT_DOUBLE_EQ(g.b, 15.0);
  EXPECT_LE(std::abs(g.label), tp.M1 + 1);
}

TEST(Equivariance, ShiftAndCorruption) {
  const Instance in = instance();
  const auto x = dynsys::constant_point(in.sys, 0.123);
  const std::int64_t half = 6 * in.tp.M1, pad = in.tp.M1 + 2, sub = 3 * in.tp.M1;
  const auto seq = marker::marker_sequence(in.spec, x, -half - pad, half + pad);
  EXPECT_TRUE(tiling::check_equivariance(seq, seq, in.tp.H, 0, -sub, sub).ok);
  const std::int64_t k = 7;
  const auto seq_k = marker::marker_sequence(in.spec, x.with_offset(k), -half - pad, half + pad);
  EXPECT_TRUE(tiling::check_equivariance(seq, seq_k, in.tp.H, k, -sub, sub).ok);
  // Halve one support value near the middle: its bisectors move.
  std::int64_t site = 0;
  for (const auto& [n, v] : seq_k.support()) {
    if (n >= 0) {
      site = n;
      break;
    }
  }
  const auto bad = seq_k.with_value(site, seq_k.value(site) * 0.75);
  EXPECT_FALSE(tiling::check_equivariance(seq, bad, in.tp.H, k, -sub, sub).ok);
}

}  // namespace
