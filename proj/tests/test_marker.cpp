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

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "meandimlab/dynsys.hpp"
#include "meandimlab/errors.hpp"
#include "meandimlab/marker.hpp"

namespace {

using namespace meandimlab;
using dynsys::RationalAngle;

const RationalAngle kGolden = RationalAngle::from_double(dynsys::kGoldenTheta);

// Oracle: first k with arcdist(k theta, 0) <= 2 r in plain floating point.
std::int64_t brute_M(double theta, double r) {
  for (std::int64_t k = 1;; ++k) {
    const double f = std::fmod(static_cast<double>(k) * theta, 1.0);
    if (std::min(f, 1.0 - f) <= 2.0 * r) return k;
  }
}

// Oracle: largest gap among {n theta : n < N}, by sorting.
double brute_max_gap(double theta, std::int64_t N) {
  std::vector<double> p;
  for (std::int64_t n = 0; n < N; ++n) p.push_back(std::fmod(static_cast<double>(n) * theta, 1.0));
  std::sort(p.begin(), p.end());
  double g = 1.0 - p.back() + p.front();
  for (std::size_t i = 1; i < p.size(); ++i) g = std::max(g, p[i] - p[i - 1]);
  return g;
}

// Oracle for M1: every circle point on a grid (spacing h) must hit the arc of
// radius inner - h/2 within N - 1 steps; a point between grid nodes is then
// within h/2 of a node and hits the full arc.
std::int64_t grid_M1(double theta, double inner, int nodes = 4000) {
  const double h = 1.0 / nodes;
  std::int64_t worst = 0;
  for (int i = 0; i < nodes; ++i) {
    const double c = i * h;
    for (std::int64_t n = 0;; ++n) {
      if (dynsys::arcdist(c + std::fmod(static_cast<double>(n) * theta, 1.0), 0.0) <= inner - h / 2) {
        worst = std::max(worst, n + 1);
        break;
      }
    }
  }
  return worst;
}

TEST(ComputeM, GoldenArcOneHundredthIsThirtyFour) {
  // Brute force gives 34 (||34 theta|| = 0.013156 <= 0.02).
  EXPECT_EQ(brute_M(dynsys::kGoldenTheta, 0.01), 34);
  EXPECT_EQ(marker::compute_M(kGolden, 0.01), 34);
  EXPECT_NEAR(kGolden.norm_multiple(34), 0.013156, 1e-6);
}

TEST(ComputeM, AgreesWithBruteForce) {
  for (double r : {0.2, 0.1, 0.05, 0.02, 0.003, 0.0007, 1e-4, 2e-5}) {
    EXPECT_EQ(marker::compute_M(kGolden, r), brute_M(dynsys::kGoldenTheta, r)) << r;
  }
}

TEST(ComputeMM1, WholeCircleArcRejected) {
  EXPECT_THROW(marker::compute_M_M1(kGolden, 0.3, 0.1), ConfigError);
  // Arc radius 0.24 satisfies the arc bound, yet ||theta|| <= 0.48 gives M = 1.
  EXPECT_THROW(marker::compute_M_M1(kGolden, 0.24, 0.1), ConfigError);
}

TEST(ThreeGap, MaxGapMatchesSorting) {
  const auto table = marker::three_gap_table(kGolden);
  for (std::int64_t N = 1; N <= 3000; N += (N < 200 ? 1 : 37)) {
    const double got = static_cast<double>(marker::max_gap(table, N)) / static_cast<double>(kGolden.den);
    EXPECT_NEAR(got, brute_max_gap(kGolden.value(), N), 1e-9) << N;
  }
}

TEST(ComputeMM1, M1AgreesWithGridOracle) {
  for (double inner : {0.05, 0.02, 0.005}) {
    const auto [M, M1] = marker::compute_M_M1(kGolden, 2.0 * inner, inner);
    const std::int64_t grid = grid_M1(dynsys::kGoldenTheta, inner);
    // The grid oracle shrinks the arc by h/2 and so may only overshoot.
    EXPECT_LE(M1, std::max(grid, M + 1)) << inner;
    EXPECT_GT(M1, M);
    // Exactness: one fewer point leaves a gap wider than the arc.
    if (M1 > M + 1) EXPECT_GT(brute_max_gap(dynsys::kGoldenTheta, M1 - 1), 2.0 * inner - 1e-12);
    EXPECT_LE(brute_max_gap(dynsys::kGoldenTheta, M1), 2.0 * inner);
  }
}

TEST(PhiEval, ArcValues) {
  const auto sys = dynsys::SystemSpec::make(1, dynsys::kGoldenTheta, 8);
  const marker::MarkerSpec spec = marker::make_marker(kGolden, 0.3, 0.02, 0.01);
  EXPECT_EQ(marker::phi_eval(spec, dynsys::constant_point(sys, 0.3)), 1.0);
  EXPECT_EQ(marker::phi_eval(spec, dynsys::constant_point(sys, 0.8)), 0.0);
  EXPECT_NEAR(marker::phi_circle(spec, 0.3 + 0.015), 0.5, 1e-12);
  EXPECT_NEAR(marker::phi_circle(spec, 0.3 - 0.015), 0.5, 1e-12);
}

TEST(PickZ, MarkerValues) {
  const auto sys = dynsys::SystemSpec::make(1, dynsys::kGoldenTheta, 8);
  const marker::MarkerSpec spec = marker::make_marker(kGolden, 0.1, 0.02, 0.01);
  const auto [z, zp] = marker::pick_z_zprime(spec, sys);
  EXPECT_EQ(marker::phi_eval(spec, z), 1.0);
  EXPECT_EQ(marker::phi_eval(spec, zp), 0.0);
  EXPECT_GT(dynsys::dist(z, zp), 0.0);
}

TEST(MarkerSequence, AgreesWithPointwiseEvaluation) {
  const auto sys = dynsys::SystemSpec::make(1, dynsys::kGoldenTheta, 8);
  const marker::MarkerSpec spec = marker::make_marker(kGolden, 0.7, 0.01, 0.005);
  const auto x = dynsys::sample_points(sys, 1, 4)[0];
  const auto seq = marker::marker_sequence(spec, x, -500, 500);
  for (std::int64_t n = -500; n <= 500; ++n) {
    EXPECT_EQ(seq.value(n), marker::phi_circle(spec, x.circle_at(n))) << n;
  }
}

TEST(MarkerSequence, ShiftCovariance) {
  const auto sys = dynsys::SystemSpec::make(1, dynsys::kGoldenTheta, 8);
  const marker::MarkerSpec spec = marker::make_marker(kGolden, 0.2, 0.01, 0.005);
  const auto x = dynsys::sample_points(sys, 1, 5)[0];
  const auto s0 = marker::marker_sequence(spec, x, -300, 300);
  const auto s1 = marker::marker_sequence(spec, dynsys::apply_shift(x, 1), -300, 299);
  for (std::int64_t n = -300; n <= 299; ++n) EXPECT_EQ(s1.value(n), s0.value(n + 1));
}

TEST(MarkerSequence, GapsBetweenMAndTwoM1) {
  const auto sys = dynsys::SystemSpec::make(1, dynsys::kGoldenTheta, 8);
  const marker::MarkerSpec base = marker::make_marker(kGolden, 0.0, 0.01, 0.005);
  std::mt19937_64 rng(99);
  for (int i = 0; i < 1000; ++i) {
    marker::MarkerSpec spec = base;
    spec.arc_center = dynsys::unit_draw(rng);
    const auto x = dynsys::constant_point(sys, dynsys::unit_draw(rng));
    const auto seq = marker::marker_sequence(spec, x, 0, 4 * spec.M1);
    for (const auto& [gap, count] : seq.gap_histogram()) {
      ASSERT_GE(gap, spec.M);
      ASSERT_LE(gap, 2 * spec.M1);
    }
  }
}

TEST(DesignMarker, ReachesRequestedSeparation) {
  for (std::int64_t want : {10, 100, 1000, 2000}) {
    const auto spec = marker::design_marker(kGolden, want);
    EXPECT_GE(spec.M, want);
    EXPECT_GT(spec.M1, spec.M);
  }
  EXPECT_THROW(marker::design_marker(kGolden, 1), ConfigError);
}

TEST(MarkerSequence, SeparationViolationDetected) {
  const auto sys = dynsys::SystemSpec::make(1, dynsys::kGoldenTheta, 8);
  const marker::MarkerSpec spec = marker::make_marker(kGolden, 0.0, 0.01, 0.005);
  const auto seq = marker::marker_sequence(spec, dynsys::constant_point(sys, 0.0), 0, 400);
  const auto first = seq.support().front().first;
  EXPECT_THROW(marker::check_marker_sequence(seq.with_value(first + 1, 0.5)), ConstructionError);
}

}  // namespace
