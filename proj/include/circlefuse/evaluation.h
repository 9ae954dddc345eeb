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
#ifndef CIRCLEFUSE_EVALUATION_H_
#define CIRCLEFUSE_EVALUATION_H_

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "circlefuse/detection.h"

namespace circlefuse {

// 0.50, 0.55, ..., 0.95.
std::vector<double> default_thresholds();

struct EvalConfig {
  std::vector<double> thresholds = default_thresholds();
  int interpolation_points = 101;
};

void validate(const EvalConfig& cfg);

// Parses "lo:hi:step" (e.g. "0.5:0.95:0.05") or a comma list.
std::vector<double> parse_thresholds(const std::string& text);

struct ScoredCircle {
  Circle circle;
  double score = 0.0;
  std::string label = kDefaultLabel;
};

struct EvalReport {
  // (threshold, AP) in threshold order.
  std::vector<std::pair<double, double>> ap_per_threshold;
  std::vector<std::pair<double, double>> recall_per_threshold;
  double map_50_95 = 0.0;
  double ap_50 = 0.0;
  double ap_75 = 0.0;
  double average_recall = 0.0;
  size_t n_gt = 0;
  size_t n_pred = 0;
};

// Greedy matching of score-ordered predictions against ground truth. Each
// prediction takes the unmatched GT with the highest cIoU >= t (ties go to
// the lower GT index). Flags are returned in prediction order.
std::vector<bool> match_at_threshold(std::span<const ScoredCircle> preds,
                                     std::span<const Circle> gts, double t);

// COCO-style interpolated AP: mean over `interpolation_points` evenly spaced
// recall levels in [0,1] of the best precision reached at recall >= level.
// With n_gt == 0 the AP is 1 for no predictions and 0 otherwise.
double average_precision(const std::vector<bool>& flags,
                         std::span<const double> scores, size_t n_gt,
                         int interpolation_points = 101);

// Predictions are ranked by score (canonical tie-break) before matching.
// Labels are evaluated as separate classes and averaged.
EvalReport evaluate(std::span<const ScoredCircle> preds,
                    std::span<const LabeledCircle> gts,
                    const EvalConfig& cfg = {}, int workers = 1);

}  // namespace circlefuse

#endif  // CIRCLEFUSE_EVALUATION_H_
