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
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"
#include "meandimlab/errors.hpp"
#include "meandimlab/pipeline/config.hpp"
#include "meandimlab/pipeline/pipeline.hpp"

#ifndef MEANDIMLAB_CONFIG_DIR
#define MEANDIMLAB_CONFIG_DIR "configs"
#endif

namespace {

using namespace meandimlab;
using namespace meandimlab::pipeline;
using nlohmann::json;

std::string config_path(const std::string& name) { return std::string(MEANDIMLAB_CONFIG_DIR) + "/" + name; }

json minimal() { return {{"schema", "meandimlab/v1"}}; }

TEST(Config, DefaultsAndAuto) {
  const ExperimentConfig c = config_from_json(minimal());
  EXPECT_EQ(c.eps, 0.25);
  EXPECT_FALSE(c.m.has_value());
  json j = minimal();
  j["factor"] = {{"m", "AUTO"}, {"n_horizon", 4}};
  j["tiling"] = {{"r", 12.0}, {"delta", "AUTO"}};
  const ExperimentConfig d = config_from_json(j);
  EXPECT_FALSE(d.m.has_value());
  EXPECT_EQ(*d.n_horizon, 4);
  EXPECT_EQ(*d.tiling_r, 12.0);
  EXPECT_FALSE(d.tiling_delta.has_value());
}

TEST(Config, Rejections) {
  EXPECT_THROW(config_from_json(json::object()), ConfigError);
  EXPECT_THROW(config_from_json({{"schema", "meandimlab/v0"}}), ConfigError);
  json unknown = minimal();
  unknown["factor"] = {{"epsilon", 0.3}};
  EXPECT_THROW(config_from_json(unknown), ConfigError);
  json top = minimal();
  top["extra"] = 1;
  EXPECT_THROW(config_from_json(top), ConfigError);
  for (double eps : {0.0, -0.1, 1.5}) {
    json j = minimal();
    j["factor"] = {{"eps", eps}};
    EXPECT_THROW(config_from_json(j), ConfigError) << eps;
  }
  json m1 = minimal();
  m1["factor"] = {{"m", 1}};
  EXPECT_THROW(config_from_json(m1), ConfigError);
  json word = minimal();
  word["factor"] = {{"m", "auto"}};
  EXPECT_THROW(config_from_json(word), ConfigError);
  json mode = minimal();
  mode["solver"] = {{"mode", "annealing"}};
  EXPECT_THROW(config_from_json(mode), ConfigError);
  EXPECT_THROW(load_config(config_path("bad_schema.json")), ConfigError);
  EXPECT_THROW(load_config(config_path("missing.json")), ConfigError);
}

TEST(Resolve, QuickConfigParameters) {
  const Resolved r = resolve(load_config(config_path("quick.json")));
  // At eps/2 = 0.125 the reach is 3: n + 6 cube axes plus the circle, and
  // the sampled series fills them all.
  for (const auto& [n, w] : r.factor.half_series) EXPECT_EQ(w, n + 7) << n;
  // The inf of (n + 7) / n over n <= 12 sits at n = 12.
  EXPECT_DOUBLE_EQ(r.factor.mdim_half, 19.0 / 12.0);
  // floor((19/12 + 1) / 0.2) + 1
  EXPECT_EQ(r.factor.m, 13);
  EXPECT_NEAR(r.factor.delta_prime, 0.9 * std::min((19.0 / 12.0 + 1.0) / 26.0, 0.1), 1e-15);
  EXPECT_GT(r.marker.M, static_cast<std::int64_t>(r.m_bound));
  EXPECT_EQ(r.tiling.r, 3.0 * r.factor.m);
  EXPECT_GE(r.sys.window_radius, r.K);
}

TEST(Hurewicz, Verdicts) {
  EXPECT_EQ(hurewicz_verdict(0, 5.0, 0.1, 0.1), kVerdictTrivial);
  EXPECT_EQ(hurewicz_verdict(1, 1.0, 0.0934, 0.1846), kVerdictViolated);
  EXPECT_EQ(hurewicz_verdict(1, 1.0, 0.0934, 0.9875), kVerdictInconclusive);
}

TEST(Report, TimestampStripped) {
  const json a = {{"timestamp", "2026-01-01T00:00:00Z"}, {"x", 1}, {"inner", {{"timestamp", "t"}, {"y", 2}}}};
  const json b = {{"timestamp", "2026-06-01T12:00:00Z"}, {"x", 1}, {"inner", {{"timestamp", "u"}, {"y", 2}}}};
  EXPECT_EQ(report_text_without_timestamp(a), report_text_without_timestamp(b));
  EXPECT_EQ(report_text_without_timestamp(a).find("timestamp"), std::string::npos);
  EXPECT_NE(report_text(a), report_text(b));
}

TEST(Pipeline, QuickRunIsDeterministic) {
  const ExperimentConfig c = load_config(config_path("quick.json"));
  const PipelineRun a = run_pipeline(c);
  const PipelineRun b = run_pipeline(c);
  EXPECT_EQ(report_text_without_timestamp(a.report), report_text_without_timestamp(b.report));
  EXPECT_EQ(a.report["schema"], kReportSchema);
  EXPECT_TRUE(a.report["separation"]["separated"].get<bool>());
}

TEST(Products, SingleFactorAndCountLimits) {
  ExperimentConfig c = load_config(config_path("products.json"));
  const ProductRun p = run_products(c, 1);
  ASSERT_EQ(p.report["factors"].size(), 1u);
  EXPECT_EQ(p.report["factors"][0]["eps"], 1.0);
  EXPECT_LT(p.report["summed_bound"].get<double>(), c.delta);
  EXPECT_TRUE(p.report["joint_separation"].get<bool>());
  EXPECT_THROW(run_products(c, 0), ConfigError);
  EXPECT_THROW(run_products(c, 5), ConfigError);
}

}  // namespace
