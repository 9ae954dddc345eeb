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
#ifndef CIRCLEFUSE_DETECTION_H_
#define CIRCLEFUSE_DETECTION_H_

#include <span>
#include <string>
#include <vector>

#include "circlefuse/geometry.h"

namespace circlefuse {

inline constexpr const char* kDefaultLabel = "glomerulus";

struct Detection {
  Circle circle;
  double score = 0.0;
  std::string model_id;
  std::string label = kDefaultLabel;

  friend bool operator==(const Detection&, const Detection&) = default;
};

// A ground-truth or reference circle with its class label.
struct LabeledCircle {
  Circle circle;
  std::string label = kDefaultLabel;

  friend bool operator==(const LabeledCircle&, const LabeledCircle&) = default;
};

enum class RunSource { kFile, kRemote, kSynthetic };

const char* to_string(RunSource source) noexcept;

// All detections of one model for one slide, in slide coordinates.
struct ModelRun {
  std::string model_id;
  std::vector<Detection> detections;
  RunSource source = RunSource::kFile;
};

// Total order used everywhere a deterministic ranking is needed: score
// descending, then cx, cy, r ascending, then model_id and label.
bool canonical_less(const Detection& a, const Detection& b) noexcept;

void sort_canonical(std::vector<Detection>& detections);

// Score in [0,1] and a valid circle.
bool is_valid(const Detection& d) noexcept;

// Concatenates every run's detections in canonical order.
std::vector<Detection> pool(std::span<const ModelRun> runs);

}  // namespace circlefuse

#endif  // CIRCLEFUSE_DETECTION_H_
