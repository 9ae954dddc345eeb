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
#include "circlefuse/fusion.h"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <tuple>

#include "circlefuse/error.h"
#include "spatial_grid.h"

namespace circlefuse {

namespace {

struct Cluster {
  std::vector<size_t> members;  // indices into the pooled list
  Circle geometry;
  double score = 0.0;
};

bool has_model(const Cluster& cluster, const std::vector<Detection>& pooled,
               const std::string& model_id) {
  for (size_t m : cluster.members) {
    if (pooled[m].model_id == model_id) return true;
  }
  return false;
}

// Confidence-weighted geometry and unweighted mean score over the members.
void refit(Cluster& cluster, const std::vector<Detection>& pooled) {
  // Means are taken as offsets from the seed, which keeps full precision at
  // slide coordinates in the tens of thousands.
  const Circle& seed = pooled[cluster.members.front()].circle;
  double wsum = 0.0, dx = 0.0, dy = 0.0, dr = 0.0, px = 0.0, py = 0.0, pr = 0.0;
  for (size_t m : cluster.members) {
    const auto& d = pooled[m];
    const double ox = d.circle.cx - seed.cx, oy = d.circle.cy - seed.cy, orr = d.circle.r - seed.r;
    wsum += d.score;
    dx += d.score * ox;
    dy += d.score * oy;
    dr += d.score * orr;
    px += ox;
    py += oy;
    pr += orr;
  }
  const double n = static_cast<double>(cluster.members.size());
  if (wsum > 0.0) {
    cluster.geometry = Circle{seed.cx + dx / wsum, seed.cy + dy / wsum, seed.r + dr / wsum};
  } else {
    // All-zero scores: fall back to the plain mean.
    cluster.geometry = Circle{seed.cx + px / n, seed.cy + py / n, seed.r + pr / n};
  }
  double ssum = 0.0;
  for (size_t m : cluster.members) ssum += pooled[m].score;
  cluster.score = ssum / n;
}

bool fused_less(const FusedDetection& a, const FusedDetection& b) {
  if (a.score != b.score) return a.score > b.score;
  return std::tie(a.circle.cx, a.circle.cy, a.circle.r) <
         std::tie(b.circle.cx, b.circle.cy, b.circle.r);
}

}  // namespace

const char* to_string(RetentionPolicy policy) noexcept {
  switch (policy) {
    case RetentionPolicy::kCountOrScore:
      return "count_or_score";
    case RetentionPolicy::kCountAndScore:
      return "count_and_score";
    case RetentionPolicy::kCountOnly:
      return "count_only";
  }
  return "unknown";
}

RetentionPolicy parse_retention_policy(const std::string& name) {
  if (name == "count_or_score") return RetentionPolicy::kCountOrScore;
  if (name == "count_and_score") return RetentionPolicy::kCountAndScore;
  if (name == "count_only") return RetentionPolicy::kCountOnly;
  fail(ErrorCode::kInvalidArgument, "unknown retention policy '" + name + "'");
}

void validate(const WcfConfig& cfg) {
  if (!(cfg.t_match > 0.0 && cfg.t_match < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "t_match must lie in (0,1)");
  }
  if (cfg.t_count < 1) fail(ErrorCode::kInvalidArgument, "t_count must be >= 1");
  if (!(cfg.t_score >= 0.0 && cfg.t_score <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "t_score must lie in [0,1]");
  }
}

bool retained_by_policy(const FusedDetection& fused, const WcfConfig& cfg) {
  const bool count_ok = fused.count >= cfg.t_count;
  const bool score_ok = fused.score >= cfg.t_score;
  switch (cfg.retention_policy) {
    case RetentionPolicy::kCountOrScore:
      return count_ok || score_ok;
    case RetentionPolicy::kCountAndScore:
      return count_ok && score_ok;
    case RetentionPolicy::kCountOnly:
      return count_ok;
  }
  return false;
}

WcfResult run_wcf(std::span<const ModelRun> runs, const WcfConfig& cfg) {
  validate(cfg);
  if (runs.empty()) fail(ErrorCode::kInvalidArgument, "wcf needs at least one model run");

  const std::vector<Detection> pooled = pool(runs);
  double r_max = 0.0;
  for (const auto& d : pooled) r_max = std::max(r_max, d.circle.r);

  // Fused radii never exceed r_max, so a cell of 2*r_max bounds any overlap.
  SpatialGrid index(2.0 * r_max);
  std::vector<Cluster> clusters;

  for (size_t i = 0; i < pooled.size(); ++i) {
    const Detection& det = pooled[i];
    size_t best = clusters.size();
    double best_ciou = -1.0;
    index.for_each_near(det.circle.cx, det.circle.cy, [&](size_t c) {
      const double v = ciou(clusters[c].geometry, det.circle);
      if (v > best_ciou || (v == best_ciou && c < best)) {
        best_ciou = v;
        best = c;
      }
    });
    if (best < clusters.size() && best_ciou >= cfg.t_match &&
        !has_model(clusters[best], pooled, det.model_id)) {
      Cluster& cluster = clusters[best];
      index.erase(best, cluster.geometry.cx, cluster.geometry.cy);
      cluster.members.push_back(i);
      refit(cluster, pooled);
      index.insert(best, cluster.geometry.cx, cluster.geometry.cy);
    } else {
      Cluster cluster;
      cluster.members.push_back(i);
      refit(cluster, pooled);
      index.insert(clusters.size(), cluster.geometry.cx, cluster.geometry.cy);
      clusters.push_back(std::move(cluster));
    }
  }

  WcfResult result;
  result.clusters.reserve(clusters.size());
  for (const auto& cluster : clusters) {
    FusedDetection fused;
    fused.circle = cluster.geometry;
    fused.score = cluster.score;
    fused.members.reserve(cluster.members.size());
    for (size_t m : cluster.members) fused.members.push_back(pooled[m]);
    // Members come from distinct models by construction.
    fused.count = static_cast<int>(cluster.members.size());
    fused.label = pooled[cluster.members.front()].label;
    fused.category = category_name(fused);
    result.clusters.push_back(std::move(fused));
  }
  for (const auto& fused : result.clusters) {
    if (retained_by_policy(fused, cfg)) result.retained.push_back(fused);
  }
  std::stable_sort(result.retained.begin(), result.retained.end(), fused_less);
  return result;
}

std::vector<FusedDetection> wcf(std::span<const ModelRun> runs,
                                const WcfConfig& cfg) {
  return run_wcf(runs, cfg).retained;
}

std::string category_name(const FusedDetection& fused) {
  if (fused.human) return "human";
  return "consensus_" + std::to_string(fused.count);
}

std::string category_color(const FusedDetection& fused, const ColorMap& colors) {
  if (fused.human || colors.by_count.empty()) return colors.human;
  const size_t idx = std::clamp<size_t>(static_cast<size_t>(std::max(fused.count, 1)) - 1,
                                        0, colors.by_count.size() - 1);
  return colors.by_count[idx];
}

void categorize(std::vector<FusedDetection>& fused, const ColorMap& colors) {
  for (auto& f : fused) {
    f.category = category_name(f);
    f.color = category_color(f, colors);
  }
}

std::array<int, 3> parse_hex_color(const std::string& hex) {
  unsigned r = 0, g = 0, b = 0;
  if (hex.size() != 7 || hex[0] != '#' ||
      std::sscanf(hex.c_str() + 1, "%02x%02x%02x", &r, &g, &b) != 3) {
    fail(ErrorCode::kInvalidArgument, "bad colour '" + hex + "', expected #RRGGBB");
  }
  return {static_cast<int>(r), static_cast<int>(g), static_cast<int>(b)};
}

std::string to_hex_color(const std::array<int, 3>& rgb) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02X%02X%02X", rgb[0] & 0xff, rgb[1] & 0xff,
                rgb[2] & 0xff);
  return buf;
}

}  // namespace circlefuse
