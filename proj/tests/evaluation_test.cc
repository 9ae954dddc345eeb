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
#include "circlefuse/evaluation.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "circlefuse/error.h"
#include "oracles.h"

namespace circlefuse {
namespace {

ScoredCircle pred(double cx, double cy, double r, double score) {
  return ScoredCircle{{cx, cy, r}, score, kDefaultLabel};
}

TEST(MatchTest, SingleMatchRule) {
  const std::vector<Circle> gts{{0, 0, 10}};
  const std::vector<ScoredCircle> one{pred(0.5, 0, 10, 0.9)};
  EXPECT_EQ(match_at_threshold(one, gts, 0.5), (std::vector<bool>{true}));
  const std::vector<ScoredCircle> two{pred(0.5, 0, 10, 0.9), pred(0, 0.5, 10, 0.8)};
  EXPECT_EQ(match_at_threshold(two, gts, 0.5), (std::vector<bool>{true, false}));
}

TEST(MatchTest, PrefersHigherOverlap) {
  // One prediction overlapping two GTs; it takes the closer one.
  const std::vector<Circle> gts{{0, 0, 10}, {3, 0, 10}};
  const std::vector<ScoredCircle> preds{pred(2.5, 0, 10, 0.9), pred(0, 0, 10, 0.5)};
  const double a = ciou(preds[0].circle, gts[0]), b = ciou(preds[0].circle, gts[1]);
  ASSERT_GT(b, a);
  EXPECT_EQ(match_at_threshold(preds, gts, 0.5), (std::vector<bool>{true, true}));
}

TEST(ApTest, HandComputedValues) {
  const std::vector<double> s1{0.9};
  EXPECT_EQ(average_precision({true}, s1, 1), 1.0);
  EXPECT_NEAR(average_precision({true}, s1, 2), 51.0 / 101.0, 1e-12);
  const std::vector<double> s2{0.9, 0.8};
  EXPECT_EQ(average_precision({false, false}, s2, 3), 0.0);
  EXPECT_EQ(average_precision({}, {}, 0), 1.0);
  EXPECT_EQ(average_precision({false}, s1, 0), 0.0);
  EXPECT_EQ(average_precision({}, {}, 4), 0.0);
  // FP then TP: precision 1/2 at full recall.
  EXPECT_NEAR(average_precision({false, true}, s2, 1), 0.5, 1e-15);
}

TEST(ApTest, MatchesBruteForceInterpolation) {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> len(0, 30), gt(0, 40);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = len(rng);
    std::vector<bool> flags(static_cast<size_t>(n));
    std::vector<double> scores(static_cast<size_t>(n));
    size_t tps = 0;
    for (int i = 0; i < n; ++i) {
      flags[static_cast<size_t>(i)] = coin(rng);
      tps += flags[static_cast<size_t>(i)];
      scores[static_cast<size_t>(i)] = 1.0 - i * 0.01;
    }
    const size_t n_gt = std::max<size_t>(tps, static_cast<size_t>(gt(rng)));
    ASSERT_NEAR(average_precision(flags, scores, n_gt), oracle::interpolated_ap(flags, n_gt), 1e-12);
  }
}

TEST(ApTest, AddingLowestScoredTruePositiveNeverDecreasesAp) {
  std::mt19937_64 rng(43);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<bool> flags;
    std::vector<double> scores;
    size_t tps = 0;
    for (int i = 0; i < 20; ++i) {
      flags.push_back(coin(rng));
      tps += flags.back();
      scores.push_back(1.0 - i * 0.01);
    }
    const size_t n_gt = tps + 3;
    const double before = average_precision(flags, scores, n_gt);
    flags.push_back(true);
    scores.push_back(0.0);
    ASSERT_GE(average_precision(flags, scores, n_gt), before);
  }
}

TEST(MatchTest, GreedyEqualsBruteForce) {
  std::mt19937_64 rng(47);
  std::uniform_int_distribution<int> count(0, 6);
  std::uniform_real_distribution<double> pos(0, 40), rad(8, 20), sc(0, 1);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<ScoredCircle> preds;
    std::vector<Circle> gts;
    for (int i = count(rng); i > 0; --i) preds.push_back(pred(pos(rng), pos(rng), rad(rng), sc(rng)));
    for (int i = count(rng); i > 0; --i) gts.push_back(Circle{pos(rng), pos(rng), rad(rng)});
    std::sort(preds.begin(), preds.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
    std::vector<Circle> circles;
    for (const auto& p : preds) circles.push_back(p.circle);
    for (double t : {0.1, 0.3, 0.5, 0.75}) {
      ASSERT_EQ(match_at_threshold(preds, gts, t), oracle::greedy_match(circles, gts, t));
    }
  }
}

TEST(EvaluateTest, SelfEvaluationIsPerfect) {
  std::vector<LabeledCircle> gts;
  std::vector<ScoredCircle> preds;
  for (int i = 0; i < 20; ++i) {
    gts.push_back(LabeledCircle{{i * 100.0, 50, 30}, kDefaultLabel});
    preds.push_back(pred(i * 100.0, 50, 30, 1.0));
  }
  const auto report = evaluate(preds, gts);
  EXPECT_EQ(report.map_50_95, 1.0);
  EXPECT_EQ(report.ap_50, 1.0);
  EXPECT_EQ(report.ap_75, 1.0);
  EXPECT_EQ(report.average_recall, 1.0);
  EXPECT_EQ(report.n_gt, 20u);
  EXPECT_EQ(report.ap_per_threshold.size(), 10u);
}

TEST(EvaluateTest, EmptyPredictions) {
  const std::vector<LabeledCircle> gts{LabeledCircle{{0, 0, 10}, kDefaultLabel}};
  const auto report = evaluate({}, gts);
  EXPECT_EQ(report.map_50_95, 0.0);
  EXPECT_EQ(report.ap_50, 0.0);
  EXPECT_EQ(report.average_recall, 0.0);
}

TEST(EvaluateTest, ThresholdMonotonicityOnSeparatedObjects) {
  std::mt19937_64 rng(53);
  std::normal_distribution<double> jitter(0, 4);
  std::uniform_real_distribution<double> sc(0, 1), rad(20, 40);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<LabeledCircle> gts;
    std::vector<ScoredCircle> preds;
    for (int i = 0; i < 40; ++i) {
      const Circle g{i * 200.0, (trial % 7) * 10.0, rad(rng)};
      gts.push_back(LabeledCircle{g, kDefaultLabel});
      for (int k = 0; k < 2; ++k) preds.push_back(pred(g.cx + jitter(rng), g.cy + jitter(rng), g.r + jitter(rng), sc(rng)));
    }
    const auto report = evaluate(preds, gts);
    for (size_t i = 1; i < report.ap_per_threshold.size(); ++i) {
      ASSERT_LE(report.ap_per_threshold[i].second, report.ap_per_threshold[i - 1].second);
      ASSERT_LE(report.recall_per_threshold[i].second, report.recall_per_threshold[i - 1].second);
    }
  }
}

TEST(EvaluateTest, LabelsAreEvaluatedPerClass) {
  const std::vector<LabeledCircle> gts{LabeledCircle{{0, 0, 10}, "a"}, LabeledCircle{{100, 0, 10}, "b"}};
  // The "b" prediction sits on the "a" object, so it cannot match.
  const std::vector<ScoredCircle> preds{ScoredCircle{{0, 0, 10}, 0.9, "a"}, ScoredCircle{{0, 0, 10}, 0.8, "b"}};
  const auto report = evaluate(preds, gts);
  EXPECT_NEAR(report.ap_50, 0.5, 1e-12);
  EXPECT_NEAR(report.average_recall, 0.5, 1e-12);
}

TEST(EvaluateTest, WorkerCountDoesNotChangeReport) {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> pos(0, 2000), rad(20, 40), sc(0, 1);
  std::vector<LabeledCircle> gts;
  std::vector<ScoredCircle> preds;
  for (int i = 0; i < 300; ++i) {
    gts.push_back(LabeledCircle{{pos(rng), pos(rng), rad(rng)}, kDefaultLabel});
    preds.push_back(pred(pos(rng), pos(rng), rad(rng), sc(rng)));
  }
  const auto a = evaluate(preds, gts, {}, 1);
  const auto b = evaluate(preds, gts, {}, 4);
  EXPECT_EQ(a.ap_per_threshold, b.ap_per_threshold);
  EXPECT_EQ(a.recall_per_threshold, b.recall_per_threshold);
}

TEST(ThresholdsTest, ParsingAndValidation) {
  const auto def = parse_thresholds("0.5:0.95:0.05");
  ASSERT_EQ(def.size(), 10u);
  EXPECT_EQ(def, default_thresholds());
  EXPECT_EQ(parse_thresholds("0.5,0.75"), (std::vector<double>{0.5, 0.75}));
  EXPECT_THROW(parse_thresholds("0.75,0.5"), Error);
  EXPECT_THROW(parse_thresholds("0:1:0.1"), Error);
  EXPECT_THROW(parse_thresholds("abc"), Error);
  EvalConfig cfg;
  cfg.thresholds = {};
  EXPECT_THROW(validate(cfg), Error);
}

TEST(EvaluateTest, ApAt50ComputedWhenNotInSweep) {
  const std::vector<LabeledCircle> gts{LabeledCircle{{0, 0, 10}, kDefaultLabel}};
  const std::vector<ScoredCircle> preds{pred(0, 0, 10, 0.9)};
  EvalConfig cfg;
  cfg.thresholds = {0.9};
  const auto report = evaluate(preds, gts, cfg);
  EXPECT_EQ(report.ap_50, 1.0);
  EXPECT_EQ(report.ap_75, 1.0);
}

}  // namespace
}  // namespace circlefuse
