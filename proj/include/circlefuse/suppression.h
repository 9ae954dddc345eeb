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
#ifndef CIRCLEFUSE_SUPPRESSION_H_
#define CIRCLEFUSE_SUPPRESSION_H_

#include <vector>

#include "circlefuse/detection.h"

namespace circlefuse {

inline constexpr double kDefaultNmsCiou = 0.5;

// Greedy circle-NMS. Detections are ranked by the canonical order; a
// detection is dropped when its cIoU with an already kept detection exceeds
// `t_ciou`. Returns the kept records in rank order.
std::vector<Detection> nms(std::vector<Detection> detections,
                           double t_ciou = kDefaultNmsCiou);

struct SoftNmsConfig {
  double sigma = 0.5;
  double score_floor = 0.05;
};

// Gaussian Soft-NMS: s <- s * exp(-ciou^2 / sigma), applied from the current
// top-scoring unprocessed detection. Detections decayed below score_floor
// are removed. Output is sorted by final score descending.
std::vector<Detection> soft_nms(std::vector<Detection> detections,
                                const SoftNmsConfig& cfg = {});

}  // namespace circlefuse

#endif  // CIRCLEFUSE_SUPPRESSION_H_
