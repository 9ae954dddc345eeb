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
#include "circlefuse/suppression.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "circlefuse/error.h"
#include "oracles.h"

namespace circlefuse {
namespace {

Detection det(double cx, double cy, double r, double score, std::string model = "m") {
  return Detection{{cx, cy, r}, score, std::move(model), kDefaultLabel};
}

std::vector<Detection> random_instance(std::mt19937_64& rng, int max_n) {
  std::uniform_int_distribution<int> count(0, max_n);
  std::uniform_real_distribution<double> pos(0, 200), rad(5, 40), sc(0, 1);
  std::uniform_int_distribution<int> coarse(0, 4);
  std::vector<Detection> out;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    // Coarse values make exact ties in score and geometry common.
    const bool tie = coarse(rng) == 0;
    out.push_back(det(tie ? 50.0 * coarse(rng) : pos(rng), pos(rng), tie ? 20.0 : rad(rng),
                      tie ? 0.25 * coarse(rng) : sc(rng), "m" + std::to_string(coarse(rng))));
  }
  return out;
}

TEST(NmsTest, KeepsAandC) {
  const auto kept = nms({det(0, 0, 10, 0.9), det(1, 0, 10, 0.8), det(100, 100, 10, 0.7)}, 0.5);
  ASSERT_GT(ciou(Circle{0, 0, 10}, Circle{1, 0, 10}), 0.5);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].circle, (Circle{0, 0, 10}));
  EXPECT_EQ(kept[1].circle, (Circle{100, 100, 10}));
}

TEST(NmsTest, SuppressesOverlappingLowerScore) {
  const auto kept = nms({det(100, 100, 50, 0.9), det(110, 100, 50, 0.8), det(400, 400, 30, 0.7)}, 0.5);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].score, 0.9);
  EXPECT_EQ(kept[1].score, 0.7);
}

TEST(NmsTest, EmptyAndSingle) {
  EXPECT_TRUE(nms({}, 0.5).empty());
  EXPECT_EQ(nms({det(1, 1, 1, 0.5)}, 0.5).size(), 1u);
}

TEST(NmsTest, ThresholdIsStrict) {
  // Two unit circles one apart have cIoU 0.24301; a threshold equal to the
  // overlap keeps both.
  const double v = ciou(Circle{0, 0, 1}, Circle{1, 0, 1});
  EXPECT_EQ(nms({det(0, 0, 1, 0.9), det(1, 0, 1, 0.8)}, v).size(), 2u);
  EXPECT_EQ(nms({det(0, 0, 1, 0.9), det(1, 0, 1, 0.8)}, v - 1e-9).size(), 1u);
}

TEST(NmsTest, RejectsBadThreshold) {
  EXPECT_THROW(nms({}, 0.0), Error);
  EXPECT_THROW(nms({}, 1.0), Error);
}

TEST(NmsTest, MatchesReferenceAndProperties) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    auto input = random_instance(rng, 50);
    const double t = 0.3 + 0.1 * (trial % 5);
    const auto kept = nms(input, t);
    ASSERT_EQ(kept, oracle::nms(input, t));
    ASSERT_EQ(nms(kept, t), kept);
    for (size_t i = 0; i < kept.size(); ++i) {
      for (size_t j = i + 1; j < kept.size(); ++j) ASSERT_LE(ciou(kept[i].circle, kept[j].circle), t);
    }
    std::shuffle(input.begin(), input.end(), rng);
    ASSERT_EQ(nms(input, t), kept);
  }
}

TEST(SoftNmsTest, GaussianDecayOfOverlappingPair) {
  const Circle a{0, 0, 1}, b{1, 0, 1};
  const auto out = soft_nms({det(0, 0, 1, 0.9), det(1, 0, 1, 0.8)});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].score, 0.9);
  const double v = ciou(a, b);
  EXPECT_NEAR(out[1].score, 0.8 * std::exp(-v * v / 0.5), 1e-15);
}

TEST(SoftNmsTest, IdenticalCirclesDecayByExpMinusTwo) {
  const auto out = soft_nms({det(0, 0, 10, 0.9), det(0, 0, 10, 0.8, "n")});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].score, 0.9);
  EXPECT_NEAR(out[1].score, 0.8 * std::exp(-1.0 / 0.5), 1e-15);
  EXPECT_NEAR(out[1].score, 0.1083, 5e-5);
}

TEST(SoftNmsTest, DisjointScoresUnchanged) {
  const auto out = soft_nms({det(0, 0, 10, 0.9), det(100, 0, 10, 0.8)});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[1].score, 0.8);
}

TEST(SoftNmsTest, DropsBelowFloor) {
  const auto out = soft_nms({det(0, 0, 10, 0.9), det(0, 0, 10, 0.1)});
  // Identical circles decay by exp(-2); 0.1 * 0.135 < 0.05.
  ASSERT_EQ(out.size(), 1u);
  EXPECT_TRUE(soft_nms({det(0, 0, 10, 0.01)}).empty());
}

TEST(SoftNmsTest, ScoresNeverIncreaseAndOrderInvariant) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    auto input = random_instance(rng, 40);
    const auto out = soft_nms(input);
    for (const auto& o : out) {
      bool found = false;
      for (const auto& in : input) {
        if (in.circle == o.circle && in.model_id == o.model_id && o.score <= in.score) found = true;
      }
      ASSERT_TRUE(found);
      ASSERT_GE(o.score, 0.05);
    }
    ASSERT_TRUE(std::is_sorted(out.begin(), out.end(), canonical_less));
    std::shuffle(input.begin(), input.end(), rng);
    ASSERT_EQ(soft_nms(input), out);
  }
}

}  // namespace
}  // namespace circlefuse
