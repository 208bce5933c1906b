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
#include "meandimlab/signal.hpp"
#include "meandimlab/tiling.hpp"

namespace {

using namespace meandimlab;
using marker::MarkerSequence;
using tiling::IntervalTiling;

// Equal-weight sites at first + spacing * j.
IntervalTiling periodic_tiling(std::int64_t first, std::int64_t spacing, std::int64_t lo, std::int64_t hi) {
  std::vector<std::pair<std::int64_t, double>> s;
  const std::int64_t margin = spacing + 1;
  for (std::int64_t n = first - spacing * ((first - lo + 2 * margin) / spacing + 1); n <= hi + 2 * margin; n += spacing) {
    s.emplace_back(n, 1.0);
  }
  const MarkerSequence seq(s.front().first, s.back().first, spacing, spacing, s);
  return tiling::slice_tiling(seq, 1e6, lo, hi);
}

TEST(Gamma, Values) {
  EXPECT_EQ(signal::gamma(0.0), 1.0);
  EXPECT_NEAR(signal::gamma(1.0), 2.0 / (1.0 + std::exp(1.0)), 1e-15);
  EXPECT_NEAR(signal::gamma(1.0), 0.537882842739990, 1e-12);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const double t = 20.0 * dynsys::unit_draw(rng);
    EXPECT_EQ(signal::gamma(t), signal::gamma(-t));
    EXPECT_LE(signal::gamma(t + 0.5), signal::gamma(t));
  }
  // The other variant peaks at infinity instead of 0.
  EXPECT_EQ(signal::gamma(0.0, signal::GammaVariant::kMaxAtInfinity), 1.0);
  EXPECT_GT(signal::gamma(3.0, signal::GammaVariant::kMaxAtInfinity), 1.0);
}

TEST(Alpha, PhaseThree) {
  const double R = 30.0;
  EXPECT_EQ(signal::alpha_phase3(1.0, R), 0.0);
  EXPECT_EQ(signal::alpha_phase3(2.0, R), 0.0);
  EXPECT_EQ(signal::alpha_phase3(R / 3.0, R), 1.0);
  EXPECT_DOUBLE_EQ(signal::alpha_phase3((2.0 + R / 3.0) / 2.0, R), 0.5);
  EXPECT_EQ(signal::alpha_phase3(100.0, R), 1.0);
}

TEST(Alpha, PhaseFive) {
  for (int m : {2, 5, 13}) {
    EXPECT_EQ(signal::alpha_phase5(0.0, m), 0.0);
    EXPECT_EQ(signal::alpha_phase5(1.5 * m, m), 1.0);
    EXPECT_EQ(signal::alpha_phase5(1.0, m), 1.0);
    EXPECT_EQ(signal::alpha_phase5(2.0 * m, m), 1.0);
    EXPECT_DOUBLE_EQ(signal::alpha_phase5(2.5 * m, m), 0.5);
    EXPECT_EQ(signal::alpha_phase5(3.0 * m, m), 0.0);
    EXPECT_EQ(signal::alpha_phase5(10.0 * m, m), 0.0);
  }
}

TEST(HValue, EndpointInteriorAndNearBoundary) {
  signal::SignalParams p;
  p.R = 9.0;
  // Sites at odd multiples of 5: 0 is a bisector.
  EXPECT_EQ(signal::h_value(periodic_tiling(5, 10, -60, 60), p), 0.0);
  // Site 0 with tile [-30, 30]: deep inside.
  EXPECT_EQ(signal::h_value(periodic_tiling(0, 60, -200, 200), p), 2.0);
  // Sites -5 and 6: bisector at 0.5.
  EXPECT_DOUBLE_EQ(signal::h_value(periodic_tiling(6, 11, -60, 60), p), 0.5);
}

TEST(BlockAnchor, MatchesDefinition) {
  for (int m : {2, 3, 7}) {
    for (std::int64_t b = -20; b <= 20; b += 3) {
      for (std::int64_t t = -40; t <= 40; ++t) {
        const std::int64_t A = signal::block_anchor(b, t, m);
        EXPECT_EQ(((A - b) % (m - 1) + (m - 1)) % (m - 1), 0);
        EXPECT_LE(A, t);
        EXPECT_LE(t, A + m - 2);
      }
    }
  }
}

TEST(PlateauReport, AllPlateauAndShortTiles) {
  signal::SignalParams p;
  p.R = 9.0;
  const signal::GammaTable gt(100, p.gamma_variant);
  const IntervalTiling wide = periodic_tiling(0, 60, -200, 200);
  const auto deep = signal::plateau_report(wide, p, -27, 55, gt);
  EXPECT_EQ(deep.free_fraction, 0.0);
  EXPECT_EQ(deep.profile_mismatches, 0);
  ASSERT_EQ(deep.blocks.size(), 1u);
  EXPECT_EQ(deep.blocks[0].a, -27);
  EXPECT_EQ(deep.blocks[0].b, 27);
  // Tiles of length 5 < 2R/3 never reach distance R/3.
  const IntervalTiling narrow = periodic_tiling(0, 5, -100, 100);
  const auto none = signal::plateau_report(narrow, p, -50, 100, gt);
  EXPECT_EQ(none.free_fraction, 1.0);
  EXPECT_TRUE(none.blocks.empty());
}

struct Factor {
  dynsys::SystemSpec sys;
  marker::MarkerSpec mk;
  tiling::TilingParams tp;
  signal::SignalParams sp;
};

Factor make_factor(int m = 3) {
  Factor s;
  const auto theta = dynsys::RationalAngle::from_double(dynsys::kGoldenTheta);
  s.sys = dynsys::SystemSpec::make(1, dynsys::kGoldenTheta, 3000);
  const double r = 3.0 * m, delta = 0.2;
  const double R = std::max(r, 9.0);
  const double bound = tiling::m_lower_bound(R, delta, tiling::choose_c(r, delta));
  s.mk = marker::design_marker(theta, static_cast<std::int64_t>(std::ceil(bound)) + 1);
  s.tp = tiling::make_tiling_params(r, delta, std::nullopt, s.mk.M, s.mk.M1);
  s.sp.R = s.tp.R;
  s.sp.m = m;
  return s;
}

IntervalTiling tiling_of(const Factor& s, const dynsys::OrbitWindow& x, std::int64_t half) {
  const std::int64_t pad = s.tp.M1 + 2;
  return tiling::slice_tiling(marker::marker_sequence(s.mk, x, -half - pad, half + pad), s.tp.H, -half, half);
}

TEST(PhiMap, ShiftCovariance) {
  const Factor s = make_factor();
  const auto x = dynsys::sample_points(s.sys, 1, 8)[0];
  const std::int64_t half = 4 * s.tp.M1;
  const IntervalTiling t0 = tiling_of(s, x, half);
  const IntervalTiling t1 = tiling_of(s, x.with_offset(1), half);
  const std::int64_t span = 2 * s.tp.M1;
  const auto p0 = signal::phi_map(t0, s.sp, -span, span + 1);
  const auto p1 = signal::phi_map(t1, s.sp, -span, span);
  for (std::size_t i = 0; i < p1.size(); ++i) EXPECT_EQ(p1[i], p0[i + 1]) << i;
}

TEST(PhiMap, ProfileBoundOnRandomPoints) {
  const Factor s = make_factor();
  const signal::GammaTable gt(1000, s.sp.gamma_variant);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto x = dynsys::sample_points(s.sys, 1, seed)[0];
    const std::int64_t half = 10 * s.tp.M1;
    const IntervalTiling t = tiling_of(s, x, half);
    const std::int64_t N = 16 * s.tp.M1;
    const auto rep = signal::plateau_report(t, s.sp, -N / 2, N, gt);
    EXPECT_LE(rep.max_excess, 1e-12);
    EXPECT_EQ(rep.profile_mismatches, 0);
    EXPECT_LT(rep.free_fraction, s.tp.delta);
    // Same answer through the explicit Phi window.
    const auto phi = signal::phi_map(t, s.sp, -N / 2, N / 2 - 1);
    const auto rep2 = signal::plateau_report(phi, -N / 2, t, s.sp);
    EXPECT_EQ(rep2.free_count, rep.free_count);
    EXPECT_EQ(rep2.profile_mismatches, 0);
  }
}

TEST(Separation, MarkedPointsAreSeparated) {
  const Factor s = make_factor();
  const auto [z, zp] = marker::pick_z_zprime(s.mk, s.sys);
  const std::int64_t half = 3 * s.tp.M1;
  const double hz = signal::h_value(tiling_of(s, z, half), s.sp);
  const double hzp = signal::h_value(tiling_of(s, zp, half), s.sp);
  EXPECT_EQ(hz, 2.0);
  EXPECT_LT(hzp, 2.0);
  EXPECT_GE(hz - hzp, 1.0 - signal::gamma(1.0));
}

// Deterministic F oracle: entry j is a hash-like function of the circle point.
std::vector<double> test_F(const dynsys::OrbitWindow& y, int m) {
  std::vector<double> v(static_cast<std::size_t>(m - 1));
  for (int j = 0; j < m - 1; ++j) v[static_cast<std::size_t>(j)] = std::fmod(y.circle() * (j + 3) + 0.1 * j, 1.0);
  return v;
}

TEST(GValue, StructureOnRandomPoints) {
  const int m = 4;
  const Factor s = make_factor(m);
  const signal::FOracle F = [m](const dynsys::OrbitWindow& y) { return test_F(y, m); };
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto x = dynsys::sample_points(s.sys, 1, seed)[0];
    const std::int64_t half = 3 * s.tp.M1;
    const IntervalTiling t = tiling_of(s, x, half);
    signal::GEvaluator g(t, s.sp, x, F);
    for (std::int64_t k = -2 * s.tp.M1; k <= 2 * s.tp.M1; ++k) {
      const signal::Location loc = signal::locate(t, k);
      const double v = g(k);
      if (loc.on_boundary || loc.dist >= 3.0 * m) {
        EXPECT_EQ(v, 0.0);
        continue;
      }
      if (loc.dist >= 1.0 && loc.dist <= 2.0 * m) {
        const std::int64_t A = signal::block_anchor(loc.label, k, m);
        const auto Fa = test_F(x.with_offset(A), m);
        EXPECT_EQ(v, Fa[static_cast<std::size_t>(k - A)]);
      }
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(GValue, WrongOracleWidthRejected) {
  const Factor s = make_factor(3);
  const auto x = dynsys::sample_points(s.sys, 1, 2)[0];
  const IntervalTiling t = tiling_of(s, x, 3 * s.tp.M1);
  const signal::FOracle bad = [](const dynsys::OrbitWindow&) { return std::vector<double>{0.5}; };
  signal::GEvaluator g(t, s.sp, x, bad);
  bool threw = false;
  for (std::int64_t k = -2 * s.tp.M1; k <= 2 * s.tp.M1 && !threw; ++k) {
    try {
      (void)g(k);
    } catch (const ConfigError&) {
      threw = true;
    }
  }
  EXPECT_TRUE(threw);
}

}  // namespace
