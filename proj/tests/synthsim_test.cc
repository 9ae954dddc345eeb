// Copyright 2026 The circlefuse Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "circlefuse/synthsim.h"

#include <gtest/gtest.h>

#include <cmath>

#include "circlefuse/backends.h"
#include "circlefuse/error.h"
#include "circlefuse/evaluation.h"
#include "circlefuse/json_io.h"
#include "oracles.h"

namespace circlefuse {
namespace {

TEST(SynthTest, SameSeedSameOutput) {
  SynthConfig cfg;
  cfg.seed = 7;
  const auto a = generate_ground_truth(cfg);
  const auto b = generate_ground_truth(cfg);
  EXPECT_EQ(serialize_ground_truth(a), serialize_ground_truth(b));
  const auto ma = simulate_model(a, cfg, 2);
  const auto mb = simulate_model(b, cfg, 2);
  EXPECT_EQ(ma.detections, mb.detections);
  cfg.seed = 8;
  EXPECT_NE(serialize_ground_truth(generate_ground_truth(cfg)), serialize_ground_truth(a));
}

TEST(SynthTest, ModelIndexChangesNoiseNotGroundTruth) {
  SynthConfig cfg;
  const auto gt = generate_ground_truth(cfg);
  EXPECT_NE(simulate_model(gt, cfg, 0).detections, simulate_model(gt, cfg, 1).detections);
  EXPECT_EQ(simulate_model(gt, cfg, 0).model_id, "model_1");
  EXPECT_EQ(serialize_ground_truth(generate_ground_truth(cfg)), serialize_ground_truth(gt));
}

TEST(SynthTest, PlantedObjectsAreSeparatedAndInside) {
  SynthConfig cfg;
  cfg.seed = 3;
  cfg.slide = {"s", 5000, 5000};
  cfg.n_objects = 50;
  const auto gt = generate_ground_truth(cfg);
  ASSERT_EQ(gt.circles.size(), 50u);
  for (size_t i = 0; i < gt.circles.size(); ++i) {
    const Circle& c = gt.circles[i].circle;
    EXPECT_GE(c.cx - c.r, 0.0);
    EXPECT_GE(c.cy - c.r, 0.0);
    EXPECT_LE(c.cx + c.r, 5000.0);
    EXPECT_LE(c.cy + c.r, 5000.0);
    EXPECT_GE(c.r, cfg.radius_range[0]);
    EXPECT_LE(c.r, cfg.radius_range[1]);
    for (size_t j = i + 1; j < gt.circles.size(); ++j) {
      EXPECT_LT(ciou(c, gt.circles[j].circle), kMaxGroundTruthCiou);
    }
  }
}

TEST(SynthTest, DegenerateConfigs) {
  SynthConfig cfg;
  cfg.n_objects = 0;
  EXPECT_TRUE(generate_ground_truth(cfg).circles.empty());

  cfg = SynthConfig{};
  cfg.miss_rate = 1.0;
  cfg.fp_rate = 0.0;
  const auto gt = generate_ground_truth(cfg);
  EXPECT_TRUE(simulate_model(gt, cfg, 0).detections.empty());

  cfg = SynthConfig{};
  cfg.miss_rate = 0;
  cfg.fp_rate = 0;
  cfg.center_jitter_sigma = 0;
  cfg.radius_jitter_sigma = 0;
  const auto run = simulate_model(gt, cfg, 0);
  ASSERT_EQ(run.detections.size(), gt.circles.size());
  for (const auto& d : run.detections) {
    double best = 0.0;
    for (const auto& g : gt.circles) best = std::max(best, ciou(d.circle, g.circle));
    EXPECT_EQ(best, 1.0);
  }
}

TEST(SynthTest, OverfullSlideFailsWithHint) {
  SynthConfig cfg;
  cfg.slide = {"s", 300, 300};
  cfg.n_objects = 500;
  try {
    generate_ground_truth(cfg);
    FAIL() << "expected failure";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("lower n_objects"), std::string::npos);
  }
}

TEST(SynthTest, RecallAndPrecisionMatchNoiseModel) {
  // Over 20 seeds x 5 models, recall at cIoU 0.5 should sit at 1 - miss_rate
  // within a binomial tolerance, and precision near 0.85.
  SynthConfig cfg;
  size_t tp = 0, n_gt = 0, n_pred = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    cfg.seed = seed;
    const auto gt = generate_ground_truth(cfg);
    std::vector<Circle> gts;
    for (const auto& g : gt.circles) gts.push_back(g.circle);
    for (int k = 0; k < cfg.n_models; ++k) {
      const auto run = simulate_model(gt, cfg, k);
      std::vector<Circle> preds;
      for (const auto& d : run.detections) preds.push_back(d.circle);
      const auto flags = oracle::greedy_match(preds, gts, 0.5);
      tp += static_cast<size_t>(std::count(flags.begin(), flags.end(), true));
      n_gt += gts.size();
      n_pred += preds.size();
    }
  }
  const double recall = static_cast<double>(tp) / static_cast<double>(n_gt);
  const double p = 1.0 - cfg.miss_rate;
  const double sd = std::sqrt(p * (1 - p) / static_cast<double>(n_gt));
  // Jitter of 4 px on radii >= 30 almost never drops cIoU below 0.5.
  EXPECT_NEAR(recall, p, 4 * sd + 0.005);
  const double precision = static_cast<double>(tp) / static_cast<double>(n_pred);
  EXPECT_NEAR(precision, 0.85, 0.01);
}

TEST(SynthTest, TiledDetectionFileCoversEveryContainingPatch) {
  SynthConfig cfg;
  cfg.slide = {"s", 2000, 1500};
  cfg.n_objects = 40;
  const auto gt = generate_ground_truth(cfg);
  const auto run = simulate_model(gt, cfg, 0);
  const auto patches = generate_patches(cfg.slide, {512, 0.5});
  const auto file = to_detection_file(run, "s", patches);
  size_t placed = 0;
  for (const auto& [id, dets] : file.patches) placed += dets.size();
  size_t expected = 0;
  for (const auto& d : run.detections) {
    const double x = std::clamp(d.circle.cx, 0.0, 1999.0), y = std::clamp(d.circle.cy, 0.0, 1499.0);
    for (const auto& p : patches) expected += contains(p, x, y) ? 1 : 0;
  }
  EXPECT_EQ(placed, expected);
  const std::vector<DetectionFile> files{file};
  const auto back = assemble(files, patches);
  ASSERT_EQ(back.size(), 1u);
  for (const auto& d : back[0].detections) {
    bool found = false;
    for (const auto& o : run.detections) {
      if (std::abs(o.circle.cx - d.circle.cx) < 1e-9 && std::abs(o.circle.cy - d.circle.cy) < 1e-9) found = true;
    }
    EXPECT_TRUE(found);
  }
}

TEST(SynthTest, RejectsInvalidConfig) {
  SynthConfig cfg;
  cfg.miss_rate = 1.5;
  EXPECT_THROW(validate(cfg), Error);
  cfg = SynthConfig{};
  cfg.radius_range = {10, 5};
  EXPECT_THROW(validate(cfg), Error);
  cfg = SynthConfig{};
  cfg.n_models = 0;
  EXPECT_THROW(validate(cfg), Error);
}

}  // namespace
}  // namespace circlefuse
