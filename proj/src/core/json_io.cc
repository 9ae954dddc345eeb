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
#include "circlefuse/json_io.h"

#include <cstdio>
#include <iomanip>
#include <sstream>

#include "circlefuse/error.h"
#include "json_util.h"

namespace circlefuse {

namespace ju = jsonutil;
using nlohmann::json;

namespace {

std::array<double, 2> range_or(const json& j, const char* key, std::array<double, 2> base) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return base;
  if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
    fail(ErrorCode::kInvalidArgument, std::string("config field '") + key + "' must be [lo, hi]");
  }
  return {(*it)[0].get<double>(), (*it)[1].get<double>()};
}

}  // namespace

std::string threshold_key(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", t);
  return buf;
}

json fused_to_json(const FusedDocument& doc) {
  json fused = json::array();
  for (const auto& f : doc.fused) {
    json members = json::array();
    for (const auto& m : f.members) {
      members.push_back(json{{"model_id", m.model_id}, {"cx", m.circle.cx}, {"cy", m.circle.cy},
                             {"r", m.circle.r}, {"score", m.score}, {"label", m.label}});
    }
    json item{{"cx", f.circle.cx},   {"cy", f.circle.cy},           {"r", f.circle.r},
              {"score", f.score},    {"count", f.count},            {"category", f.category},
              {"color", f.color},    {"label", f.label},            {"members", std::move(members)}};
    if (f.human) item["human"] = true;
    fused.push_back(std::move(item));
  }
  return json{{"schema", kFusedSchema}, {"slide_id", doc.slide_id}, {"fused", std::move(fused)}};
}

FusedDocument fused_from_json(const json& doc) {
  ju::expect_schema(doc, kFusedSchema, "fused file");
  FusedDocument out;
  out.slide_id = ju::string(doc, "slide_id", "fused file");
  const json& arr = ju::array(doc, "fused", "fused file");
  for (size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "fused[" + std::to_string(i) + "]";
    const json& item = arr[i];
    FusedDetection f;
    f.circle = Circle{ju::number(item, "cx", path), ju::number(item, "cy", path),
                      ju::number(item, "r", path)};
    f.score = ju::number(item, "score", path);
    f.count = static_cast<int>(ju::number(item, "count", path));
    f.human = ju::value_or<bool>(item, "human", false);
    f.label = ju::optional_string(item, "label", path, kDefaultLabel);
    if (!is_valid(f.circle)) fail(ErrorCode::kValidation, path + ": invalid circle");
    if (f.score < 0.0 || f.score > 1.0) fail(ErrorCode::kValidation, path + ": score outside [0,1]");
    if (item.contains("members")) {
      const json& members = ju::array(item, "members", path);
      for (size_t k = 0; k < members.size(); ++k) {
        const std::string mpath = path + ".members[" + std::to_string(k) + "]";
        Detection m;
        m.model_id = ju::string(members[k], "model_id", mpath);
        m.circle = Circle{ju::number(members[k], "cx", mpath), ju::number(members[k], "cy", mpath),
                          ju::number(members[k], "r", mpath)};
        m.score = ju::number(members[k], "score", mpath);
        m.label = ju::optional_string(members[k], "label", mpath, kDefaultLabel);
        f.members.push_back(std::move(m));
      }
    }
    f.category = ju::optional_string(item, "category", path, category_name(f));
    f.color = ju::optional_string(item, "color", path, "");
    out.fused.push_back(std::move(f));
  }
  return out;
}

std::string serialize_fused(const FusedDocument& doc) { return fused_to_json(doc).dump(1) + "\n"; }

FusedDocument parse_fused(const std::string& text) {
  return fused_from_json(ju::parse(text, "fused file"));
}

json ground_truth_to_json(const GroundTruthSet& gt) {
  json circles = json::array();
  for (const auto& c : gt.circles) {
    circles.push_back(json{{"cx", c.circle.cx}, {"cy", c.circle.cy}, {"r", c.circle.r},
                           {"label", c.label}});
  }
  return json{{"schema", kGroundTruthSchema}, {"slide_id", gt.slide_id},
              {"circles", std::move(circles)}};
}

GroundTruthSet ground_truth_from_json(const json& doc) {
  ju::expect_schema(doc, kGroundTruthSchema, "ground-truth file");
  GroundTruthSet gt;
  gt.slide_id = ju::string(doc, "slide_id", "ground-truth file");
  const json& arr = ju::array(doc, "circles", "ground-truth file");
  for (size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "circles[" + std::to_string(i) + "]";
    LabeledCircle c;
    c.circle = Circle{ju::number(arr[i], "cx", path), ju::number(arr[i], "cy", path),
                      ju::number(arr[i], "r", path)};
    c.label = ju::optional_string(arr[i], "label", path, kDefaultLabel);
    if (!is_valid(c.circle)) fail(ErrorCode::kValidation, path + ": radius must be > 0");
    gt.circles.push_back(std::move(c));
  }
  return gt;
}

std::string serialize_ground_truth(const GroundTruthSet& gt) {
  return ground_truth_to_json(gt).dump(1) + "\n";
}

GroundTruthSet parse_ground_truth(const std::string& text) {
  return ground_truth_from_json(ju::parse(text, "ground-truth file"));
}

json patches_to_json(const std::vector<Patch>& patches) {
  json arr = json::array();
  for (const auto& p : patches) {
    arr.push_back(json{{"patch_id", p.patch_id}, {"x", p.x}, {"y", p.y}, {"w", p.w}, {"h", p.h}});
  }
  return arr;
}

std::vector<Patch> patches_from_json(const json& doc) {
  if (!doc.is_array()) fail(ErrorCode::kParse, "patch list: expected a JSON array");
  std::vector<Patch> out;
  out.reserve(doc.size());
  for (size_t i = 0; i < doc.size(); ++i) {
    const std::string path = "patches[" + std::to_string(i) + "]";
    Patch p;
    p.patch_id = ju::string(doc[i], "patch_id", path);
    p.x = static_cast<int64_t>(ju::number(doc[i], "x", path));
    p.y = static_cast<int64_t>(ju::number(doc[i], "y", path));
    p.w = static_cast<int64_t>(ju::number(doc[i], "w", path));
    p.h = static_cast<int64_t>(ju::number(doc[i], "h", path));
    if (p.w < 1 || p.h < 1) fail(ErrorCode::kValidation, path + ": empty patch");
    out.push_back(std::move(p));
  }
  return out;
}

json report_to_json(const EvalReport& report) {
  json per = json::object();
  for (const auto& [t, ap] : report.ap_per_threshold) per[threshold_key(t)] = ap;
  json rec = json::object();
  for (const auto& [t, r] : report.recall_per_threshold) rec[threshold_key(t)] = r;
  return json{{"ap_per_threshold", std::move(per)},
              {"recall_per_threshold", std::move(rec)},
              {"map_50_95", report.map_50_95},
              {"ap_50", report.ap_50},
              {"ap_75", report.ap_75},
              {"average_recall", report.average_recall},
              {"n_gt", report.n_gt},
              {"n_pred", report.n_pred}};
}

std::string report_to_table(const EvalReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "threshold        AP    recall\n";
  for (size_t i = 0; i < report.ap_per_threshold.size(); ++i) {
    out << std::setw(9) << threshold_key(report.ap_per_threshold[i].first) << "  "
        << std::setw(8) << report.ap_per_threshold[i].second << "  " << std::setw(8)
        << report.recall_per_threshold[i].second << "\n";
  }
  out << "mAP(all thresholds) " << report.map_50_95 << "\n"
      << "AP@0.50             " << report.ap_50 << "\n"
      << "AP@0.75             " << report.ap_75 << "\n"
      << "average recall      " << report.average_recall << "\n"
      << "ground truth        " << report.n_gt << "\n"
      << "predictions         " << report.n_pred << "\n";
  return out.str();
}

TilingConfig tiling_config_from_json(const json& j, TilingConfig base) {
  base.patch_size = ju::value_or<int64_t>(j, "patch_size", base.patch_size);
  base.overlap_fraction = ju::value_or<double>(j, "overlap_fraction", base.overlap_fraction);
  return base;
}

WcfConfig wcf_config_from_json(const json& j, WcfConfig base) {
  base.t_match = ju::value_or<double>(j, "t_match", base.t_match);
  base.t_count = ju::value_or<int>(j, "t_count", base.t_count);
  base.t_score = ju::value_or<double>(j, "t_score", base.t_score);
  if (j.is_object() && j.contains("retention_policy")) {
    base.retention_policy =
        parse_retention_policy(ju::value_or<std::string>(j, "retention_policy", ""));
  }
  return base;
}

EvalConfig eval_config_from_json(const json& j, EvalConfig base) {
  if (j.is_object() && j.contains("thresholds")) {
    const json& t = j.at("thresholds");
    if (t.is_string()) {
      base.thresholds = parse_thresholds(t.get<std::string>());
    } else {
      base.thresholds = ju::value_or<std::vector<double>>(j, "thresholds", base.thresholds);
    }
  }
  base.interpolation_points =
      ju::value_or<int>(j, "interpolation_points", base.interpolation_points);
  return base;
}

SynthConfig synth_config_from_json(const json& j, SynthConfig base) {
  if (!j.is_object()) return base;
  base.seed = ju::value_or<uint64_t>(j, "seed", base.seed);
  if (j.contains("slide")) {
    const json& s = j.at("slide");
    base.slide.slide_id = ju::value_or<std::string>(s, "slide_id", base.slide.slide_id);
    base.slide.width = ju::value_or<int64_t>(s, "width", base.slide.width);
    base.slide.height = ju::value_or<int64_t>(s, "height", base.slide.height);
  }
  base.n_objects = ju::value_or<int64_t>(j, "n_objects", base.n_objects);
  base.radius_range = range_or(j, "radius_range", base.radius_range);
  base.n_models = ju::value_or<int>(j, "n_models", base.n_models);
  base.center_jitter_sigma = ju::value_or<double>(j, "center_jitter_sigma", base.center_jitter_sigma);
  base.radius_jitter_sigma = ju::value_or<double>(j, "radius_jitter_sigma", base.radius_jitter_sigma);
  base.miss_rate = ju::value_or<double>(j, "miss_rate", base.miss_rate);
  base.fp_rate = ju::value_or<double>(j, "fp_rate", base.fp_rate);
  base.tp_score_range = range_or(j, "tp_score_range", base.tp_score_range);
  base.fp_score_range = range_or(j, "fp_score_range", base.fp_score_range);
  return base;
}

ColorMap color_map_from_json(const json& j, ColorMap base) {
  if (!j.is_object()) return base;
  if (j.contains("by_count")) {
    base.by_count = ju::value_or<std::vector<std::string>>(j, "by_count", base.by_count);
    for (const auto& c : base.by_count) parse_hex_color(c);
  }
  base.human = ju::value_or<std::string>(j, "human", base.human);
  parse_hex_color(base.human);
  return base;
}

json to_json(const TilingConfig& cfg) {
  return json{{"patch_size", cfg.patch_size}, {"overlap_fraction", cfg.overlap_fraction}};
}

json to_json(const WcfConfig& cfg) {
  return json{{"t_match", cfg.t_match},
              {"t_count", cfg.t_count},
              {"t_score", cfg.t_score},
              {"retention_policy", to_string(cfg.retention_policy)}};
}

json to_json(const EvalConfig& cfg) {
  return json{{"thresholds", cfg.thresholds}, {"interpolation_points", cfg.interpolation_points}};
}

json to_json(const SynthConfig& cfg) {
  return json{{"seed", cfg.seed},
              {"slide",
               {{"slide_id", cfg.slide.slide_id},
                {"width", cfg.slide.width},
                {"height", cfg.slide.height}}},
              {"n_objects", cfg.n_objects},
              {"radius_range", cfg.radius_range},
              {"n_models", cfg.n_models},
              {"center_jitter_sigma", cfg.center_jitter_sigma},
              {"radius_jitter_sigma", cfg.radius_jitter_sigma},
              {"miss_rate", cfg.miss_rate},
              {"fp_rate", cfg.fp_rate},
              {"tp_score_range", cfg.tp_score_range},
              {"fp_score_range", cfg.fp_score_range}};
}

}  // namespace circlefuse
