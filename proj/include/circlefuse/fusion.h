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
#ifndef CIRCLEFUSE_FUSION_H_
#define CIRCLEFUSE_FUSION_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "circlefuse/detection.h"

namespace circlefuse {

enum class RetentionPolicy {
  kCountOrScore,   // count >= t_count || score >= t_score
  kCountAndScore,  // count >= t_count && score >= t_score
  kCountOnly,      // count >= t_count
};

const char* to_string(RetentionPolicy policy) noexcept;
RetentionPolicy parse_retention_policy(const std::string& name);

struct WcfConfig {
  double t_match = 0.5;
  int t_count = 2;
  double t_score = 0.9;
  RetentionPolicy retention_policy = RetentionPolicy::kCountOrScore;
};

void validate(const WcfConfig& cfg);

struct FusedDetection {
  Circle circle;
  double score = 0.0;
  // Number of distinct models in `members`. Zero for human-added records.
  int count = 0;
  bool human = false;
  std::string label = kDefaultLabel;
  std::vector<Detection> members;
  std::string category;
  std::string color;
};

struct WcfResult {
  // Every cluster in creation order, before retention.
  std::vector<FusedDetection> clusters;
  // Retained clusters, sorted by score descending.
  std::vector<FusedDetection> retained;
};

// Weighted Circle Fusion over per-model, already NMS-deduplicated runs.
WcfResult run_wcf(std::span<const ModelRun> runs, const WcfConfig& cfg);

// Retained fused detections only.
std::vector<FusedDetection> wcf(std::span<const ModelRun> runs,
                                const WcfConfig& cfg);

bool retained_by_policy(const FusedDetection& fused, const WcfConfig& cfg);

// Consensus colour table, indexed by count - 1; the last entry covers every
// larger count.
struct ColorMap {
  std::vector<std::string> by_count = {"#E6194B", "#F58231", "#FFE119",
                                       "#BFEF45", "#3CB44B"};
  std::string human = "#4363D8";
};

std::string category_name(const FusedDetection& fused);
std::string category_color(const FusedDetection& fused, const ColorMap& colors);

void categorize(std::vector<FusedDetection>& fused, const ColorMap& colors = {});

// "#RRGGBB" -> {r, g, b}.
std::array<int, 3> parse_hex_color(const std::string& hex);
std::string to_hex_color(const std::array<int, 3>& rgb);

}  // namespace circlefuse

#endif  // CIRCLEFUSE_FUSION_H_
