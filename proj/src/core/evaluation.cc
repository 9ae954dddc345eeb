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
#include "circlefuse/evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <sstream>

#include "circlefuse/error.h"
#include "circlefuse/parallel.h"
#include "spatial_grid.h"

namespace circlefuse {

namespace {

// For every prediction, the GTs it overlaps, by cIoU descending then GT index.
using CandidateTable = std::vector<std::vector<std::pair<size_t, double>>>;

CandidateTable build_candidates(std::span<const Circle> preds,
                                std::span<const Circle> gts) {
  double r_gt = 0.0, r_pred = 0.0;
  for (const auto& g : gts) r_gt = std::max(r_gt, g.r);
  for (const auto& p : preds) r_pred = std::max(r_pred, p.r);
  SpatialGrid index(r_gt + r_pred);
  for (size_t g = 0; g < gts.size(); ++g) index.insert(g, gts[g].cx, gts[g].cy);

  CandidateTable table(preds.size());
  for (size_t p = 0; p < preds.size(); ++p) {
    auto& row = table[p];
    index.for_each_near(preds[p].cx, preds[p].cy, [&](size_t g) {
      const double v = ciou(preds[p], gts[g]);
      if (v > 0.0) row.emplace_back(g, v);
    });
    std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
  }
  return table;
}

std::vector<bool> match_with(const CandidateTable& table, size_t n_gt, double t,
                             size_t* matched_gt) {
  std::vector<bool> gt_taken(n_gt, false);
  std::vector<bool> flags(table.size(), false);
  size_t matched = 0;
  for (size_t p = 0; p < table.size(); ++p) {
    for (const auto& [g, v] : table[p]) {
      if (v < t) break;
      if (gt_taken[g]) continue;
      gt_taken[g] = true;
      flags[p] = true;
      ++matched;
      break;
    }
  }
  if (matched_gt != nullptr) *matched_gt = matched;
  return flags;
}

bool scored_less(const ScoredCircle& a, const ScoredCircle& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.circle.cx != b.circle.cx) return a.circle.cx < b.circle.cx;
  if (a.circle.cy != b.circle.cy) return a.circle.cy < b.circle.cy;
  return a.circle.r < b.circle.r;
}

double lookup_or_nan(const std::vector<std::pair<double, double>>& values,
                     double threshold) {
  for (const auto& [t, v] : values) {
    if (std::abs(t - threshold) < 1e-9) return v;
  }
  return std::nan("");
}

struct ClassData {
  std::vector<ScoredCircle> preds;
  std::vector<Circle> gts;
};

}  // namespace

std::vector<double> default_thresholds() {
  std::vector<double> t;
  for (int k = 50; k <= 95; k += 5) t.push_back(k / 100.0);
  return t;
}

void validate(const EvalConfig& cfg) {
  if (cfg.thresholds.empty()) {
    fail(ErrorCode::kInvalidArgument, "at least one cIoU threshold is required");
  }
  for (size_t i = 0; i < cfg.thresholds.size(); ++i) {
    const double t = cfg.thresholds[i];
    if (!(t > 0.0 && t <= 1.0)) {
      fail(ErrorCode::kInvalidArgument, "cIoU thresholds must lie in (0,1]");
    }
    if (i > 0 && !(t > cfg.thresholds[i - 1])) {
      fail(ErrorCode::kInvalidArgument, "cIoU thresholds must be strictly increasing");
    }
  }
  if (cfg.interpolation_points < 2) {
    fail(ErrorCode::kInvalidArgument, "interpolation_points must be >= 2");
  }
}

std::vector<double> parse_thresholds(const std::string& text) {
  auto to_double = [&](const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end == nullptr || *end != '\0') {
      fail(ErrorCode::kInvalidArgument, "bad threshold value '" + s + "' in '" + text + "'");
    }
    return v;
  };
  std::vector<std::string> parts;
  const char sep = text.find(':') != std::string::npos ? ':' : ',';
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, sep);) parts.push_back(item);

  std::vector<double> out;
  if (sep == ':') {
    if (parts.size() != 3) {
      fail(ErrorCode::kInvalidArgument, "threshold range must be lo:hi:step, got '" + text + "'");
    }
    const double lo = to_double(parts[0]);
    const double hi = to_double(parts[1]);
    const double step = to_double(parts[2]);
    if (!(step > 0.0) || hi < lo) {
      fail(ErrorCode::kInvalidArgument, "empty threshold range '" + text + "'");
    }
    const auto n = static_cast<long>(std::llround((hi - lo) / step));
    for (long k = 0; k <= n; ++k) {
      // Snap to 1e-10 so 0.5 + 9*0.05 prints and compares as 0.95.
      out.push_back(std::round((lo + step * static_cast<double>(k)) * 1e10) / 1e10);
    }
  } else {
    for (const auto& p : parts) out.push_back(to_double(p));
  }
  EvalConfig check;
  check.thresholds = out;
  validate(check);
  return out;
}

std::vector<bool> match_at_threshold(std::span<const ScoredCircle> preds,
                                     std::span<const Circle> gts, double t) {
  std::vector<Circle> pred_circles;
  pred_circles.reserve(preds.size());
  for (const auto& p : preds) pred_circles.push_back(p.circle);
  return match_with(build_candidates(pred_circles, gts), gts.size(), t, nullptr);
}

double average_precision(const std::vector<bool>& flags,
                         std::span<const double> scores, size_t n_gt,
                         int interpolation_points) {
  if (flags.size() != scores.size()) {
    fail(ErrorCode::kInvalidArgument, "flags and scores differ in length");
  }
  if (interpolation_points < 2) {
    fail(ErrorCode::kInvalidArgument, "interpolation_points must be >= 2");
  }
  if (n_gt == 0) return flags.empty() ? 1.0 : 0.0;
  if (flags.empty()) return 0.0;

  std::vector<size_t> order(flags.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  std::vector<double> recall(order.size());
  std::vector<double> precision(order.size());
  size_t tp = 0;
  for (size_t i = 0; i < order.size(); ++i) {
    if (flags[order[i]]) ++tp;
    recall[i] = static_cast<double>(tp) / static_cast<double>(n_gt);
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  for (size_t i = precision.size() - 1; i > 0; --i) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }

  const int levels = interpolation_points;
  double sum = 0.0;
  for (int k = 0; k < levels; ++k) {
    const double level = static_cast<double>(k) / static_cast<double>(levels - 1);
    auto it = std::lower_bound(recall.begin(), recall.end(), level);
    if (it == recall.end()) break;
    sum += precision[static_cast<size_t>(it - recall.begin())];
  }
  return sum / static_cast<double>(levels);
}

namespace {

// Threshold sweep without ap_50 / ap_75.
EvalReport sweep(std::span<const ScoredCircle> preds,
                 std::span<const LabeledCircle> gts, const EvalConfig& cfg,
                 int workers) {

  std::map<std::string, ClassData> classes;
  for (const auto& p : preds) classes[p.label].preds.push_back(p);
  for (const auto& g : gts) classes[g.label].gts.push_back(g.circle);

  struct ClassEval {
    CandidateTable table;
    std::vector<double> scores;
    size_t n_gt = 0;
  };
  std::vector<ClassEval> evals;
  for (auto& [label, data] : classes) {
    std::sort(data.preds.begin(), data.preds.end(), scored_less);
    std::vector<Circle> circles;
    ClassEval ce;
    for (const auto& p : data.preds) {
      circles.push_back(p.circle);
      ce.scores.push_back(p.score);
    }
    ce.table = build_candidates(circles, data.gts);
    ce.n_gt = data.gts.size();
    evals.push_back(std::move(ce));
  }
  // A dataset with neither predictions nor GT still evaluates as one empty class.
  if (evals.empty()) evals.emplace_back();

  const auto& thresholds = cfg.thresholds;
  std::vector<double> ap(thresholds.size(), 0.0);
  std::vector<double> recall(thresholds.size(), 0.0);
  parallel_for(thresholds.size(), workers, [&](size_t ti) {
    double ap_sum = 0.0, recall_sum = 0.0;
    size_t recall_classes = 0;
    bool any_pred = false;
    for (const auto& ce : evals) {
      size_t matched = 0;
      const auto flags = match_with(ce.table, ce.n_gt, thresholds[ti], &matched);
      ap_sum += average_precision(flags, ce.scores, ce.n_gt,
                                  cfg.interpolation_points);
      any_pred = any_pred || !ce.scores.empty();
      if (ce.n_gt > 0) {
        recall_sum += static_cast<double>(matched) / static_cast<double>(ce.n_gt);
        ++recall_classes;
      }
    }
    ap[ti] = ap_sum / static_cast<double>(evals.size());
    recall[ti] = recall_classes > 0 ? recall_sum / static_cast<double>(recall_classes)
                                    : (any_pred ? 0.0 : 1.0);
  });

  EvalReport report;
  report.n_gt = gts.size();
  report.n_pred = preds.size();
  double ap_sum = 0.0, recall_sum = 0.0;
  for (size_t i = 0; i < thresholds.size(); ++i) {
    report.ap_per_threshold.emplace_back(thresholds[i], ap[i]);
    report.recall_per_threshold.emplace_back(thresholds[i], recall[i]);
    ap_sum += ap[i];
    recall_sum += recall[i];
  }
  report.map_50_95 = ap_sum / static_cast<double>(thresholds.size());
  report.average_recall = recall_sum / static_cast<double>(thresholds.size());
  return report;
}

}  // namespace

EvalReport evaluate(std::span<const ScoredCircle> preds,
                    std::span<const LabeledCircle> gts, const EvalConfig& cfg,
                    int workers) {
  validate(cfg);
  EvalReport report = sweep(preds, gts, cfg, workers);
  auto ap_at = [&](double t) {
    double v = lookup_or_nan(report.ap_per_threshold, t);
    if (std::isnan(v)) {
      EvalConfig single = cfg;
      single.thresholds = {t};
      v = sweep(preds, gts, single, 1).map_50_95;
    }
    return v;
  };
  report.ap_50 = ap_at(0.5);
  report.ap_75 = ap_at(0.75);
  return report;
}

}  // namespace circlefuse
