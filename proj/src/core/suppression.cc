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

#include <cmath>

#include "circlefuse/error.h"
#include "spatial_grid.h"

namespace circlefuse {

namespace {

double max_radius(const std::vector<Detection>& detections) {
  double r = 0.0;
  for (const auto& d : detections) r = std::max(r, d.circle.r);
  return r;
}

}  // namespace

std::vector<Detection> nms(std::vector<Detection> detections, double t_ciou) {
  if (!(t_ciou > 0.0 && t_ciou < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "nms_ciou must lie in (0,1)");
  }
  sort_canonical(detections);

  // Overlap requires d < r_a + r_b <= 2 * r_max.
  SpatialGrid kept_index(2.0 * max_radius(detections));
  std::vector<Detection> kept;
  for (auto& det : detections) {
    bool suppressed = false;
    kept_index.for_each_near(det.circle.cx, det.circle.cy, [&](size_t k) {
      if (!suppressed && ciou(kept[k].circle, det.circle) > t_ciou) {
        suppressed = true;
      }
    });
    if (suppressed) continue;
    kept_index.insert(kept.size(), det.circle.cx, det.circle.cy);
    kept.push_back(std::move(det));
  }
  return kept;
}

std::vector<Detection> soft_nms(std::vector<Detection> detections,
                                const SoftNmsConfig& cfg) {
  if (!(cfg.sigma > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "soft-nms sigma must be > 0");
  }
  sort_canonical(detections);

  // Only overlapping pairs decay each other, so neighbour lists are fixed.
  SpatialGrid index(2.0 * max_radius(detections));
  for (size_t i = 0; i < detections.size(); ++i) {
    index.insert(i, detections[i].circle.cx, detections[i].circle.cy);
  }

  std::vector<double> score(detections.size());
  std::vector<bool> done(detections.size(), false);
  for (size_t i = 0; i < detections.size(); ++i) {
    score[i] = detections[i].score;
    if (score[i] < cfg.score_floor) done[i] = true;
  }

  std::vector<Detection> out;
  for (;;) {
    size_t top = detections.size();
    for (size_t i = 0; i < detections.size(); ++i) {
      if (done[i]) continue;
      // Ties fall back to canonical rank, which is the index order.
      if (top == detections.size() || score[i] > score[top]) top = i;
    }
    if (top == detections.size()) break;
    done[top] = true;
    Detection picked = detections[top];
    picked.score = score[top];
    index.for_each_near(picked.circle.cx, picked.circle.cy, [&](size_t j) {
      if (done[j]) return;
      const double overlap = ciou(picked.circle, detections[j].circle);
      if (overlap <= 0.0) return;
      score[j] *= std::exp(-(overlap * overlap) / cfg.sigma);
      if (score[j] < cfg.score_floor) done[j] = true;
    });
    out.push_back(std::move(picked));
  }
  sort_canonical(out);
  return out;
}

}  // namespace circlefuse
