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

#include <algorithm>
#include <random>

#include "circlefuse/error.h"
#include "spatial_grid.h"

namespace circlefuse {

namespace {

// Stream tags keep the GT and per-model generators independent.
constexpr uint32_t kGroundTruthStream = 0x67740001u;
constexpr uint32_t kModelStream = 0x6d640001u;
constexpr int64_t kAttemptsPerObject = 20000;

std::mt19937_64 make_rng(uint64_t seed, uint32_t stream, uint32_t index) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    stream, index};
  return std::mt19937_64(seq);
}

double uniform(std::mt19937_64& rng, const std::array<double, 2>& range) {
  if (range[0] == range[1]) return range[0];
  return std::uniform_real_distribution<double>(range[0], range[1])(rng);
}

double gaussian(std::mt19937_64& rng, double sigma) {
  if (sigma <= 0.0) return 0.0;
  return std::normal_distribution<double>(0.0, sigma)(rng);
}

bool ordered_in(const std::array<double, 2>& range, double lo, double hi) {
  return range[0] <= range[1] && range[0] >= lo && range[1] <= hi;
}

}  // namespace

void validate(const SynthConfig& cfg) {
  validate(cfg.slide);
  if (cfg.n_objects < 0) fail(ErrorCode::kInvalidArgument, "n_objects must be >= 0");
  if (cfg.n_models < 1) fail(ErrorCode::kInvalidArgument, "n_models must be >= 1");
  if (!(cfg.radius_range[0] > 0.0) || cfg.radius_range[0] > cfg.radius_range[1]) {
    fail(ErrorCode::kInvalidArgument, "radius_range must be ordered and positive");
  }
  if (cfg.center_jitter_sigma < 0.0 || cfg.radius_jitter_sigma < 0.0) {
    fail(ErrorCode::kInvalidArgument, "jitter sigmas must be >= 0");
  }
  if (!(cfg.miss_rate >= 0.0 && cfg.miss_rate <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "miss_rate must lie in [0,1]");
  }
  if (!(cfg.fp_rate >= 0.0)) fail(ErrorCode::kInvalidArgument, "fp_rate must be >= 0");
  if (!ordered_in(cfg.tp_score_range, 0.0, 1.0) || !ordered_in(cfg.fp_score_range, 0.0, 1.0)) {
    fail(ErrorCode::kInvalidArgument, "score ranges must be ordered subsets of [0,1]");
  }
  const double diameter = 2.0 * cfg.radius_range[1];
  if (cfg.n_objects > 0 && (static_cast<double>(cfg.slide.width) < diameter ||
                            static_cast<double>(cfg.slide.height) < diameter)) {
    fail(ErrorCode::kInvalidArgument, "slide is smaller than the largest planted circle");
  }
}

GroundTruthSet generate_ground_truth(const SynthConfig& cfg) {
  validate(cfg);
  GroundTruthSet gt;
  gt.slide_id = cfg.slide.slide_id;
  if (cfg.n_objects == 0) return gt;

  auto rng = make_rng(cfg.seed, kGroundTruthStream, 0);
  const double w = static_cast<double>(cfg.slide.width);
  const double h = static_cast<double>(cfg.slide.height);
  SpatialGrid index(2.0 * cfg.radius_range[1]);
  gt.circles.reserve(static_cast<size_t>(cfg.n_objects));

  for (int64_t n = 0; n < cfg.n_objects; ++n) {
    bool placed = false;
    for (int64_t attempt = 0; attempt < kAttemptsPerObject && !placed; ++attempt) {
      Circle c;
      c.r = uniform(rng, cfg.radius_range);
      c.cx = uniform(rng, {c.r, w - c.r});
      c.cy = uniform(rng, {c.r, h - c.r});
      bool clear = true;
      index.for_each_near(c.cx, c.cy, [&](size_t k) {
        if (clear && ciou(gt.circles[k].circle, c) >= kMaxGroundTruthCiou) clear = false;
      });
      if (!clear) continue;
      index.insert(gt.circles.size(), c.cx, c.cy);
      gt.circles.push_back(LabeledCircle{c, kDefaultLabel});
      placed = true;
    }
    if (!placed) {
      fail(ErrorCode::kInvalidArgument,
           "could not place ground-truth circle " + std::to_string(n + 1) + " of " +
               std::to_string(cfg.n_objects) + " after " +
               std::to_string(kAttemptsPerObject) +
               " attempts; lower n_objects or enlarge the slide");
    }
  }
  return gt;
}

std::string synthetic_model_id(int model_index) {
  return "model_" + std::to_string(model_index + 1);
}

ModelRun simulate_model(const GroundTruthSet& gt, const SynthConfig& cfg, int model_index) {
  validate(cfg);
  auto rng = make_rng(cfg.seed, kModelStream, static_cast<uint32_t>(model_index));
  ModelRun run;
  run.model_id = synthetic_model_id(model_index);
  run.source = RunSource::kSynthetic;

  std::bernoulli_distribution missed(cfg.miss_rate);
  for (const auto& obj : gt.circles) {
    if (missed(rng)) continue;
    Detection d;
    d.circle.cx = obj.circle.cx + gaussian(rng, cfg.center_jitter_sigma);
    d.circle.cy = obj.circle.cy + gaussian(rng, cfg.center_jitter_sigma);
    d.circle.r = std::max(1.0, obj.circle.r + gaussian(rng, cfg.radius_jitter_sigma));
    d.score = uniform(rng, cfg.tp_score_range);
    d.model_id = run.model_id;
    d.label = obj.label;
    run.detections.push_back(std::move(d));
  }

  const double w = static_cast<double>(cfg.slide.width);
  const double h = static_cast<double>(cfg.slide.height);
  const double mean_fp = cfg.fp_rate * w * h / 1e6;
  const int64_t n_fp =
      mean_fp > 0.0 ? std::poisson_distribution<int64_t>(mean_fp)(rng) : 0;
  for (int64_t i = 0; i < n_fp; ++i) {
    Detection d;
    d.circle.r = uniform(rng, cfg.radius_range);
    d.circle.cx = uniform(rng, {std::min(d.circle.r, w / 2), std::max(w - d.circle.r, w / 2)});
    d.circle.cy = uniform(rng, {std::min(d.circle.r, h / 2), std::max(h - d.circle.r, h / 2)});
    d.score = uniform(rng, cfg.fp_score_range);
    d.model_id = run.model_id;
    run.detections.push_back(std::move(d));
  }
  sort_canonical(run.detections);
  return run;
}

DetectionFile to_detection_file(const ModelRun& run, const std::string& slide_id,
                                std::span<const Patch> patches) {
  DetectionFile file;
  file.model_id = run.model_id;
  file.slide_id = slide_id;
  if (patches.empty()) return file;

  int64_t max_dim = 1, max_x = 0, max_y = 0;
  for (const auto& p : patches) {
    max_dim = std::max({max_dim, p.w, p.h});
    max_x = std::max(max_x, p.x + p.w);
    max_y = std::max(max_y, p.y + p.h);
  }
  // A containing patch has its origin within max_dim of the point.
  SpatialGrid origins(static_cast<double>(max_dim));
  for (size_t i = 0; i < patches.size(); ++i) {
    origins.insert(i, static_cast<double>(patches[i].x), static_cast<double>(patches[i].y));
  }

  std::vector<size_t> hits;
  for (const auto& d : run.detections) {
    const double x = std::clamp(d.circle.cx, 0.0, std::nextafter(static_cast<double>(max_x), 0.0));
    const double y = std::clamp(d.circle.cy, 0.0, std::nextafter(static_cast<double>(max_y), 0.0));
    hits.clear();
    origins.for_each_near(x, y, [&](size_t i) {
      if (contains(patches[i], x, y)) hits.push_back(i);
    });
    std::sort(hits.begin(), hits.end());
    for (size_t i : hits) {
      file.patches[patches[i].patch_id].push_back(
          LocalDetection{from_slide_coords(patches[i], d.circle), d.score, d.label});
    }
  }
  return file;
}

}  // namespace circlefuse
