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
#include "circlefuse/detection.h"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace circlefuse {

const char* to_string(RunSource source) noexcept {
  switch (source) {
    case RunSource::kFile:
      return "file";
    case RunSource::kRemote:
      return "remote";
    case RunSource::kSynthetic:
      return "synthetic";
  }
  return "unknown";
}

bool canonical_less(const Detection& a, const Detection& b) noexcept {
  if (a.score != b.score) return a.score > b.score;
  return std::tie(a.circle.cx, a.circle.cy, a.circle.r, a.model_id, a.label) <
         std::tie(b.circle.cx, b.circle.cy, b.circle.r, b.model_id, b.label);
}

void sort_canonical(std::vector<Detection>& detections) {
  std::sort(detections.begin(), detections.end(), canonical_less);
}

bool is_valid(const Detection& d) noexcept {
  return is_valid(d.circle) && std::isfinite(d.score) && d.score >= 0.0 &&
         d.score <= 1.0;
}

std::vector<Detection> pool(std::span<const ModelRun> runs) {
  std::vector<Detection> pooled;
  size_t total = 0;
  for (const auto& run : runs) total += run.detections.size();
  pooled.reserve(total);
  for (const auto& run : runs) {
    pooled.insert(pooled.end(), run.detections.begin(), run.detections.end());
  }
  sort_canonical(pooled);
  return pooled;
}

}  // namespace circlefuse
