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
#ifndef CIRCLEFUSE_SYNTHSIM_H_
#define CIRCLEFUSE_SYNTHSIM_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "circlefuse/backends.h"
#include "circlefuse/detection.h"
#include "circlefuse/tiling.h"

namespace circlefuse {

// Seeded simulator of a K-model detection ensemble around planted circles.
struct SynthConfig {
  uint64_t seed = 0;
  SlideGeometry slide{"synthetic", 8000, 8000};
  int64_t n_objects = 200;
  std::array<double, 2> radius_range{30.0, 60.0};
  int n_models = 5;
  double center_jitter_sigma = 4.0;
  double radius_jitter_sigma = 3.0;
  double miss_rate = 0.15;
  // Expected false positives per model per megapixel of slide area.
  double fp_rate = 0.47;
  std::array<double, 2> tp_score_range{0.5, 1.0};
  std::array<double, 2> fp_score_range{0.3, 0.8};
};

// Planted objects never overlap each other beyond this cIoU.
inline constexpr double kMaxGroundTruthCiou = 0.3;

void validate(const SynthConfig& cfg);

struct GroundTruthSet {
  std::string slide_id;
  std::vector<LabeledCircle> circles;
};

GroundTruthSet generate_ground_truth(const SynthConfig& cfg);

// Model k (0-based) is reported as "model_{k+1}".
std::string synthetic_model_id(int model_index);

ModelRun simulate_model(const GroundTruthSet& gt, const SynthConfig& cfg,
                        int model_index);

// Expresses a slide-level run as a detection file. Each detection is written
// in patch-local coordinates to every patch containing its centre (centres
// outside the slide are clamped for the lookup), so overlapping tiles see
// the same object more than once, as a tiled detector would.
DetectionFile to_detection_file(const ModelRun& run, const std::string& slide_id,
                                std::span<const Patch> patches);

}  // namespace circlefuse

#endif  // CIRCLEFUSE_SYNTHSIM_H_
