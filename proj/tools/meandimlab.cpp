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

// meandimlab command line. Exit codes: 0 all suites pass, 1 a property
// failed, 2 configuration error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "meandimlab/dynsys.hpp"
#include "meandimlab/errors.hpp"
#include "meandimlab/fibre/complex.hpp"
#include "meandimlab/fibre/fmap.hpp"
#include "meandimlab/marker.hpp"
#include "meandimlab/pipeline/config.hpp"
#include "meandimlab/pipeline/pipeline.hpp"
#include "meandimlab/signal.hpp"
#include "meandimlab/tiling.hpp"
#include "meandimlab/widim/cell_space.hpp"
#include "meandimlab/widim/solver.hpp"

namespace ml = meandimlab;
namespace pl = meandimlab::pipeline;
using nlohmann::json;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::string> mode;
};

pl::ExperimentConfig load(const Common& c) {
  pl::ExperimentConfig cfg;
  if (!c.config_path.empty()) cfg = pl::load_config(c.config_path);
  if (c.seed) cfg.seed = *c.seed;
  if (c.mode) {
    if (*c.mode != "exact" && *c.mode != "greedy") throw ml::ConfigError("--mode must be exact or greedy");
    cfg.mode = *c.mode;
  }
  if (!c.out.empty()) cfg.out_dir = c.out;
  return cfg;
}

void emit(const std::string& dir, const json& report, const std::map<std::string, std::string>& csv = {}) {
  pl::write_outputs(dir, report, csv);
  std::cout << "wrote " << dir << "/report.json\n";
}

json stamped(json body) {
  body["schema"] = pl::kReportSchema;
  body["timestamp"] = pl::internal::timestamp();
  return body;
}

void print_suites(const json& report) {
  if (!report.contains("suites")) return;
  for (const auto& s : report["suites"]) {
    std::cout << (s["pass"].get<bool>() ? "PASS " : "FAIL ") << s["property"].get<std::string>();
    if (s["diagnostic"].get<bool>()) std::cout << " (diagnostic)";
    std::cout << "  checked=" << s["checked"] << " violations=" << s["violations"];
    if (!s["witness"].get<std::string>().empty()) std::cout << "  witness: " << s["witness"].get<std::string>();
    std::cout << "\n";
  }
}

int cmd_marker(const Common& c) {
  const pl::Resolved r = pl::resolve(load(c), false);
  const ml::marker::ThreeGapTable tg = ml::marker::three_gap_table(r.small.theta);
  const auto [z, zp] = ml::marker::pick_z_zprime(r.marker, r.small);
  const auto seq = ml::marker::marker_sequence(r.marker, z, 0, 20 * r.marker.M1);
  json hist = json::object();
  for (const auto& [gap, count] : seq.gap_histogram()) hist[std::to_string(gap)] = count;
  emit(r.config.out_dir, stamped({{"marker", ml::marker::to_json(r.marker)},
                                  {"m_bound", r.m_bound},
                                  {"three_gap_rows", tg.rows.size()},
                                  {"gap_histogram_z", hist}}));
  return 0;
}

int cmd_tile(const Common& c, std::int64_t half_window) {
  const pl::Resolved r = pl::resolve(load(c), false);
  const std::int64_t half = half_window > 0 ? half_window : 4 * r.marker.M1;
  const auto x = ml::dynsys::sample_points(r.small, 1, r.config.seed)[0];
  const std::int64_t pad = r.marker.M1 + 2;
  const auto seq = ml::marker::marker_sequence(r.marker, x, -half - pad, half + pad);
  const auto t = ml::tiling::slice_tiling(seq, r.tiling.H, -half, half);
  std::ostringstream csv;
  csv << "label,a,b,a_genuine,b_genuine\n";
  for (const auto& tile : t.cells()) {
    csv << tile.label << ',' << pl::fmt(tile.a.value()) << ',' << pl::fmt(tile.b.value()) << ',' << tile.a_genuine
        << ',' << tile.b_genuine << '\n';
  }
  const double dens = ml::tiling::boundary_density(t, r.tiling.R, static_cast<double>(half) - r.tiling.R - 1.0);
  emit(r.config.out_dir,
       stamped({{"tiling", ml::tiling::to_json(r.tiling)}, {"tiles", t.cells().size()}, {"boundary_density", dens}}),
       {{"tiling.csv", csv.str()}});
  return dens < r.tiling.delta ? 0 : 1;
}

int cmd_phi(const Common& c) {
  const pl::Resolved r = pl::resolve(load(c), false);
  const auto sep = pl::separation(r.marker, r.small, r.tiling, r.signal);
  const pl::SuiteResult s = pl::separation_suite(sep, r.signal);
  const auto x = ml::dynsys::sample_points(r.small, 1, r.config.seed)[0];
  const std::int64_t span = 2 * r.marker.M1;
  const std::int64_t lead = static_cast<std::int64_t>(r.signal.R) + 2, pad = r.marker.M1 + 2;
  const auto t = ml::tiling::slice_tiling(ml::marker::marker_sequence(r.marker, x, -span - lead - pad, span + lead + pad),
                                          r.tiling.H, -span - lead, span + lead);
  const auto phi = ml::signal::phi_map(t, r.signal, -span, span);
  const auto plateau = ml::signal::plateau_report(phi, -span, t, r.signal);
  std::ostringstream csv;
  csv << "k,phi_k\n";
  for (std::size_t i = 0; i < phi.size(); ++i) csv << (-span + static_cast<std::int64_t>(i)) << ',' << pl::fmt(phi[i]) << '\n';
  emit(r.config.out_dir,
       stamped({{"separation", ml::signal::to_json(sep)},
                {"suites", json::array({pl::to_json(s)})},
                {"plateau", {{"free_fraction", plateau.free_fraction},
                             {"blocks", plateau.blocks.size()},
                             {"max_excess", plateau.max_excess},
                             {"profile_mismatches", plateau.profile_mismatches}}}}),
       {{"phi_trace.csv", csv.str()}});
  return s.pass ? 0 : 1;
}

int cmd_widim(const Common& c, int cube_dim, int cells, double eps) {
  const pl::ExperimentConfig cfg = load(c);
  if (cube_dim < 1 || cube_dim > 4) throw ml::ConfigError("--cube-dim must lie in [1, 4]");
  if (cells < 1) throw ml::ConfigError("--cells must be positive");
  std::vector<ml::widim::Axis> axes(static_cast<std::size_t>(cube_dim), ml::widim::Axis{-1.0, 1.0, cells});
  const ml::widim::CellSpace space = ml::widim::CellSpace::grid(axes);
  const ml::widim::Mode mode = ml::widim::mode_from_string(cfg.mode);
  const ml::widim::SolveResult res = ml::widim::min_multiplicity(space, eps, mode, 20'000'000, cfg.seed);
  json body = ml::widim::to_json(res, eps, mode, space.size());
  body["instance"] = "cube[-1,1]^" + std::to_string(cube_dim) + " cells " + std::to_string(cells);
  emit(cfg.out_dir, stamped({{"widim", body}}));
  std::cout << body.dump() << "\n";
  return 0;
}

int cmd_fmap(const Common& c, double eps, int budget) {
  const pl::ExperimentConfig cfg = load(c);
  json rows = json::array();
  std::ostringstream csv;
  csv << "complex,m,construction,verified,violations,nonempty,max_ratio\n";
  bool ok = true;
  for (const auto& cx : ml::fibre::calibration_complexes()) {
    for (int m : {2, 3}) {
      auto F = ml::fibre::build_fmap(cx.space, eps, m, ml::fibre::Construction::kLinearOnNerve, 0, cfg.seed);
      auto rep = ml::fibre::verify_fiber_bound(F, cx.space, eps, 1, m, 64, cfg.seed + 1);
      if (!rep.pass()) {
        F = ml::fibre::build_fmap(cx.space, eps, m, ml::fibre::Construction::kSearchedPL, budget, cfg.seed);
        rep = ml::fibre::verify_fiber_bound(F, cx.space, eps, 1, m, 64, cfg.seed + 1);
      }
      ok = ok && rep.pass();
      rows.push_back({{"complex", cx.name}, {"m", m}, {"fmap", ml::fibre::to_json(F)}, {"verification", ml::fibre::to_json(rep)}});
      csv << cx.name << ',' << m << ',' << ml::fibre::to_string(F.construction) << ',' << rep.pass() << ','
          << rep.violations << ',' << rep.nonempty << ',' << pl::fmt(rep.max_ratio) << '\n';
    }
  }
  emit(cfg.out_dir, stamped({{"calibration", rows}, {"eps", eps}, {"pass", ok}}), {{"fmap_calibration.csv", csv.str()}});
  return ok ? 0 : 1;
}

int cmd_pipeline(const Common& c, bool chain) {
  const pl::ExperimentConfig cfg = load(c);
  const pl::PipelineRun run = pl::run_pipeline(cfg, {chain, true});
  pl::write_outputs(cfg.out_dir, run.report, run.csv);
  {
    std::ofstream t(cfg.out_dir + "/timings.csv");
    t << "stage,seconds\n";
    for (const auto& [k, v] : run.seconds) t << k << ',' << v << '\n';
  }
  print_suites(run.report);
  const auto& h = run.report["hurewicz"];
  std::cout << "hurewicz: mdim(X) in [" << h["mdim_X_lower"] << ", " << h["mdim_X_upper"] << "], factor side "
            << h["factor_side"] << ", fiber claimed " << h["fiber_claimed"] << ", fiber measured "
            << h["fiber_measured"] << " -> " << h["verdict"].get<std::string>() << "\n";
  std::cout << "wrote " << cfg.out_dir << "/report.json\n";
  return run.pass ? 0 : 1;
}

int cmd_products(const Common& c, int count) {
  const pl::ExperimentConfig cfg = load(c);
  const pl::ProductRun run = pl::run_products(cfg, count);
  pl::write_outputs(cfg.out_dir, run.report, run.csv);
  std::cout << run.csv.at("products.csv");
  std::cout << "summed bound " << run.report["summed_bound"] << " < delta " << cfg.delta << ": "
            << (run.report["summed_bound_below_delta"].get<bool>() ? "yes" : "no") << "\n";
  return run.pass ? 0 : 1;
}

int cmd_report(const Common& c) {
  const std::string dir = c.out.empty() ? "out" : c.out;
  std::ifstream in(dir + "/report.json");
  if (!in) throw ml::ConfigError("no report.json in '" + dir + "'");
  json report;
  try {
    in >> report;
  } catch (const json::exception& e) {
    throw ml::ConfigError(std::string("report.json is not valid JSON: ") + e.what());
  }
  print_suites(report);
  if (report.contains("hurewicz")) std::cout << "hurewicz: " << report["hurewicz"].dump() << "\n";
  if (report.contains("pass")) return report["pass"].get<bool>() ? 0 : 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"meandimlab: factors of low mean dimension with large fibers"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--config", common.config_path, "experiment config (JSON, schema meandimlab/v1)");
  app.add_option("--seed", common.seed, "override sampling.seed");
  app.add_option("--out", common.out, "output directory");
  app.add_option("--mode", common.mode, "solver mode: exact, greedy or local_search");

  std::int64_t half_window = 0;
  int cube_dim = 2, cells = 8, budget = 400, count = 3;
  double eps = 0.9, fmap_eps = 0.4;
  bool no_chain = false;

  auto* marker_cmd = app.add_subcommand("marker", "marker design: M, M1 and gap statistics");
  auto* tile_cmd = app.add_subcommand("tile", "tiling of a sampled point");
  tile_cmd->add_option("--half-window", half_window, "half width of the tiling window (default 4 M1)");
  auto* phi_cmd = app.add_subcommand("phi", "Phi trace, plateaus and separation");
  auto* widim_cmd = app.add_subcommand("widim", "width dimension of a cube grid model");
  widim_cmd->add_option("--cube-dim", cube_dim, "cube dimension");
  widim_cmd->add_option("--cells", cells, "cells per axis");
  widim_cmd->add_option("--eps", eps, "scale");
  auto* fmap_cmd = app.add_subcommand("fmap", "F maps on the calibration complexes");
  fmap_cmd->add_option("--eps", fmap_eps, "scale");
  fmap_cmd->add_option("--budget", budget, "local search steps for SEARCHED_PL");
  auto* pipeline_cmd = app.add_subcommand("pipeline", "full factor pipeline");
  pipeline_cmd->add_flag("--no-chain", no_chain, "skip the fiber chain");
  auto* products_cmd = app.add_subcommand("products", "finite product of factors");
  products_cmd->add_option("--count", count, "number of factors (at most 4)");
  auto* verify_cmd = app.add_subcommand("verify", "lemma suites without the fiber chain");
  auto* report_cmd = app.add_subcommand("report", "summarize an existing report.json in --out");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (marker_cmd->parsed()) return cmd_marker(common);
    if (tile_cmd->parsed()) return cmd_tile(common, half_window);
    if (phi_cmd->parsed()) return cmd_phi(common);
    if (widim_cmd->parsed()) return cmd_widim(common, cube_dim, cells, eps);
    if (fmap_cmd->parsed()) return cmd_fmap(common, fmap_eps, budget);
    if (pipeline_cmd->parsed()) return cmd_pipeline(common, !no_chain);
    if (products_cmd->parsed()) return cmd_products(common, count);
    if (verify_cmd->parsed()) return cmd_pipeline(common, false);
    if (report_cmd->parsed()) return cmd_report(common);
  } catch (const ml::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const ml::LemmaViolation& e) {
    std::cerr << "property " << e.property() << " failed: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
