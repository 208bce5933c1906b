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

// Acceptance run: one PASS/FAIL line per criterion. Sizes and tolerances are
// pinned here, not read from the config, so editing a config cannot loosen
// a criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "meandimlab/dynsys.hpp"
#include "meandimlab/pipeline/config.hpp"
#include "meandimlab/pipeline/pipeline.hpp"
#include "meandimlab/pipeline/suites.hpp"
#include "meandimlab/signal.hpp"
#include "meandimlab/widim/cell_space.hpp"
#include "meandimlab/widim/solver.hpp"

#ifndef MEANDIMLAB_CONFIG_DIR
#define MEANDIMLAB_CONFIG_DIR "configs"
#endif

namespace ml = meandimlab;
namespace pl = meandimlab::pipeline;
using nlohmann::json;

namespace {

constexpr double kCalibrationEps = 0.9;
constexpr double kCalibrationSeconds = 60.0;
constexpr double kTilingSeconds = 120.0;
constexpr double kChainSeconds = 600.0;
constexpr int kInstances = 1000;      // tiling instances, plateau and g samples
constexpr int kWindowFactor = 1000;   // windows of 10^3 M1
constexpr int kGWindow = 1000;
constexpr int kChainFibers = 200;
constexpr int kSubadditivityMax = 6;
constexpr double kBracketLo = 0.6, kBracketHi = 1.0;
constexpr double kFactorSideMax = 0.4;

int failures = 0;

void line(int id, const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << " " << name << ": " << detail << std::endl;
  if (!pass) ++failures;
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const json* suite(const json& report, const std::string& id) {
  for (const auto& s : report["suites"]) {
    if (s["property"] == id) return &s;
  }
  return nullptr;
}

std::string suite_summary(const json* s) {
  if (s == nullptr) return "missing";
  std::string out = s->at("property").get<std::string>() + " " + (s->at("pass").get<bool>() ? "ok" : "violated") +
                    " (" + std::to_string(s->at("violations").get<std::int64_t>()) + "/" +
                    std::to_string(s->at("checked").get<std::int64_t>()) + ")";
  if (!s->at("witness").get<std::string>().empty()) out += " first: " + s->at("witness").get<std::string>();
  return out;
}

bool suite_pass(const json* s) { return s != nullptr && s->at("pass").get<bool>(); }

void criterion_widim_calibration() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (int n = 1; n <= 3; ++n) {
    // Exact mode certifies n = 1, 2; the 3-cube is upper-estimated greedily.
    const bool exact = n <= 2;
    const int cells = exact ? 8 : 10;
    const std::vector<ml::widim::Axis> axes(static_cast<std::size_t>(n), ml::widim::Axis{-1.0, 1.0, cells});
    const auto space = ml::widim::CellSpace::grid(axes);
    const auto r = ml::widim::min_multiplicity(space, kCalibrationEps,
                                               exact ? ml::widim::Mode::kExact : ml::widim::Mode::kGreedy);
    ok = ok && r.widim_upper == n;
    if (exact) ok = ok && r.certified_lower && *r.certified_lower == n;
    detail += "n=" + std::to_string(n) + " upper " + std::to_string(r.widim_upper) +
              (r.certified_lower ? " lower " + std::to_string(*r.certified_lower) : std::string()) + "; ";
  }
  const double secs = since(t0);
  line(1, "widim-calibration", ok && secs <= kCalibrationSeconds, detail + pl::fmt(secs) + " s");
}

void criterion_subadditivity(const pl::ExperimentConfig& c) {
  const auto small = pl::small_system(c);
  const auto samples = ml::dynsys::sample_points(small, c.sample_count, c.seed + 101);
  const pl::SubadditivitySuite s = pl::run_subadditivity(samples, c.eps, kSubadditivityMax);
  const json j = pl::to_json(s.result);
  line(7, "subadditivity", s.result.pass, suite_summary(&j) + ", n, m <= " + std::to_string(kSubadditivityMax));
}

}  // namespace

int main() {
  const std::string dir = MEANDIMLAB_CONFIG_DIR;
  pl::ExperimentConfig c = pl::load_config(dir + "/pipeline_d1.json");
  // Pinned acceptance sizes.
  c.verification.tiling_instances = kInstances;
  c.verification.tiling_window_factor = kWindowFactor;
  c.verification.plateau_samples = kInstances;
  c.verification.plateau_window_factor = kWindowFactor;
  c.verification.g_samples = kInstances;
  c.verification.g_window = kGWindow;
  c.verification.chain_fibers = kChainFibers;
  if (c.D != 1 || c.eps != 0.25 || c.delta != 0.2) {
    std::cerr << "pipeline_d1.json must describe D = 1, eps = 0.25, delta = 0.2\n";
    return 2;
  }

  criterion_widim_calibration();

  const pl::PipelineRun run = pl::run_pipeline(c);
  const json& rep = run.report;

  {
    bool ok = true;
    std::string detail;
    for (const char* id : {"tile-locality", "nonempty-tile-weight", "interior-measure", "boundary-density", "good-tile",
                           "equivariance", "tiling-coverage"}) {
      const json* s = suite(rep, id);
      ok = ok && suite_pass(s);
      if (!suite_pass(s)) detail += suite_summary(s) + "; ";
    }
    const double secs = run.seconds.at("tiling");
    if (detail.empty()) detail = "all tiling properties hold; ";
    line(2, "tiling-suite", ok && secs <= kTilingSeconds,
         detail + std::to_string(kInstances) + " instances, window " + std::to_string(kWindowFactor) + " M1, " +
             pl::fmt(secs) + " s");
  }

  {
    const json* s = suite(rep, "separation");
    const json& sep = rep["separation"];
    line(3, "separation", suite_pass(s),
         "Phi(z)_0 = " + sep["phi_z0"].dump() + ", Phi(z')_0 = " + sep["phi_zprime0"].dump() + ", gap min " +
             pl::fmt(1.0 - ml::signal::gamma(1.0, ml::signal::GammaVariant::kMaxAtZero)));
  }

  {
    const json* s = suite(rep, "plateau");
    line(4, "plateau", suite_pass(s),
         suite_summary(s) + "; max free fraction " + rep["estimates"]["plateau_max_free_fraction"].dump() + " vs delta " +
             pl::fmt(c.delta) + ", mdim(Z) estimate " + rep["estimates"]["mdim_Z_estimate"].dump() + " vs delta' " +
             rep["parameters"]["factor"]["delta_prime"].dump());
  }

  {
    bool ok = true;
    std::string detail;
    for (const char* id : {"window-recovery", "g-vanishing", "g-sparsity"}) {
      const json* s = suite(rep, id);
      ok = ok && suite_pass(s);
      detail += suite_summary(s) + "; ";
    }
    detail += suite_summary(suite(rep, "window-recovery-strict")) + " [diagnostic]";
    line(5, "g-structure", ok, detail);
  }

  {
    const json* s = suite(rep, "fiber-chain");
    const double secs = run.seconds.count("chain") ? run.seconds.at("chain") : 0.0;
    const bool enough = s != nullptr && s->at("checked").get<std::int64_t>() >= kChainFibers;
    line(6, "fiber-chain", suite_pass(s) && enough && secs <= kChainSeconds,
         suite_summary(s) + "; " + pl::fmt(secs) + " s");
  }

  criterion_subadditivity(c);

  {
    const json& h = rep["hurewicz"];
    const double up = h["mdim_X_upper"].get<double>(), lo = h["mdim_X_lower"].get<double>();
    const double side = h["factor_side"].get<double>();
    const std::string verdict = h["verdict"].get<std::string>();
    const bool bracket = lo >= kBracketLo && up <= kBracketHi && lo <= up;
    line(8, "hurewicz", bracket && side < kFactorSideMax && verdict == pl::kVerdictViolated,
         "mdim(X) in [" + pl::fmt(lo) + ", " + pl::fmt(up) + "], factor side " + pl::fmt(side) + ", fiber claimed " +
             h["fiber_claimed"].dump() + " (" + h["verdict_claimed"].get<std::string>() + "), fiber measured " +
             h["fiber_measured"].dump() + " -> " + verdict);
  }

  {
    const pl::ExperimentConfig q = pl::load_config(dir + "/quick.json");
    const std::string a = pl::report_text_without_timestamp(pl::run_pipeline(q).report);
    const std::string b = pl::report_text_without_timestamp(pl::run_pipeline(q).report);
    line(9, "determinism", a == b, "quick config, " + std::to_string(a.size()) + " bytes, " +
                                       (a == b ? "identical" : "different"));
  }

  std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAIL") << std::endl;
  return failures == 0 ? 0 : 1;
}
