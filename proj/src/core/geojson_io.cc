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
#include "circlefuse/geojson_io.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "circlefuse/error.h"
#include "json_util.h"

namespace circlefuse {

namespace ju = jsonutil;
using nlohmann::json;

namespace {

constexpr const char* kCrsNote =
    "coordinates are level-0 slide pixels with y increasing downward";

json color_triple(const std::string& hex) {
  const auto rgb = parse_hex_color(hex);
  return json::array({rgb[0], rgb[1], rgb[2]});
}

FusedDetection fit_ring(const json& ring, const std::string& path) {
  if (!ring.is_array() || ring.size() < 3) {
    fail(ErrorCode::kValidation, path + ": polygon ring needs at least 3 positions");
  }
  std::vector<std::array<double, 2>> pts;
  for (const auto& pos : ring) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
      fail(ErrorCode::kValidation, path + ": malformed position");
    }
    pts.push_back({pos[0].get<double>(), pos[1].get<double>()});
  }
  if (pts.size() > 1 && pts.front() == pts.back()) pts.pop_back();
  double sx = 0.0, sy = 0.0;
  for (const auto& p : pts) {
    sx += p[0];
    sy += p[1];
  }
  const double n = static_cast<double>(pts.size());
  const double cx = sx / n, cy = sy / n;
  double rsum = 0.0;
  for (const auto& p : pts) rsum += std::hypot(p[0] - cx, p[1] - cy);

  FusedDetection f;
  f.circle = Circle{cx, cy, rsum / n};
  if (!is_valid(f.circle)) fail(ErrorCode::kValidation, path + ": degenerate ring");
  f.score = 1.0;
  f.human = true;
  f.count = 0;
  return f;
}

FusedDetection from_block(const json& block, const std::string& path) {
  FusedDetection f;
  f.circle = Circle{ju::number(block, "cx", path), ju::number(block, "cy", path),
                    ju::number(block, "radius", path)};
  if (!is_valid(f.circle)) fail(ErrorCode::kValidation, path + ": invalid circle");
  f.score = ju::number(block, "score", path);
  const json& count = ju::member(block, "count", path);
  if (count.is_string() && count.get<std::string>() == "human") {
    f.human = true;
    f.count = 0;
  } else if (count.is_number_integer()) {
    f.count = count.get<int>();
  } else {
    fail(ErrorCode::kValidation, path + ".count: expected an integer or \"human\"");
  }
  f.label = ju::optional_string(block, "label", path, kDefaultLabel);
  if (block.contains("members")) {
    const json& members = ju::array(block, "members", path);
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
  return f;
}

}  // namespace

std::vector<std::array<double, 2>> circle_ring(const Circle& c, int vertices) {
  std::vector<std::array<double, 2>> ring;
  ring.reserve(static_cast<size_t>(vertices) + 1);
  for (int k = 0; k < vertices; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / vertices;
    ring.push_back({c.cx + c.r * std::cos(theta), c.cy + c.r * std::sin(theta)});
  }
  ring.push_back(ring.front());
  return ring;
}

json export_geojson(std::span<const FusedDetection> fused, const std::string& slide_id,
                    std::span<const json> extras) {
  if (!extras.empty() && extras.size() != fused.size()) {
    fail(ErrorCode::kInvalidArgument, "geojson extras do not align with detections");
  }
  const ColorMap defaults;
  json features = json::array();
  for (size_t i = 0; i < fused.size(); ++i) {
    const auto& f = fused[i];
    json ring = json::array();
    for (const auto& p : circle_ring(f.circle)) ring.push_back(json::array({p[0], p[1]}));

    json models = json::array();
    json members = json::array();
    for (const auto& m : f.members) {
      models.push_back(m.model_id);
      members.push_back(json{{"model_id", m.model_id}, {"cx", m.circle.cx}, {"cy", m.circle.cy},
                             {"r", m.circle.r}, {"score", m.score}, {"label", m.label}});
    }
    json block{{"cx", f.circle.cx},
               {"cy", f.circle.cy},
               {"radius", f.circle.r},
               {"score", f.score},
               {"count", f.human ? json("human") : json(f.count)},
               {"label", f.label},
               {"models", std::move(models)},
               {"members", std::move(members)}};
    if (!extras.empty() && extras[i].is_object()) {
      for (const auto& [k, v] : extras[i].items()) block[k] = v;
    }
    const std::string color = f.color.empty() ? category_color(f, defaults) : f.color;
    features.push_back(json{
        {"type", "Feature"},
        {"geometry", {{"type", "Polygon"}, {"coordinates", json::array({std::move(ring)})}}},
        {"properties",
         {{"objectType", "annotation"},
          {"classification", {{"name", category_name(f)}, {"color", color_triple(color)}}},
          {"circlefuse", std::move(block)}}}});
  }
  return json{{"type", "FeatureCollection"},
              {"crs_note", kCrsNote},
              {"slide_id", slide_id},
              {"features", std::move(features)}};
}

GeoJsonImport import_geojson(const json& doc) {
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection") {
    fail(ErrorCode::kParse, "geojson: expected a FeatureCollection object");
  }
  const json& features = ju::array(doc, "features", "geojson");
  GeoJsonImport out;
  out.slide_id = doc.value("slide_id", "");
  static const std::vector<std::string> kKnown = {"cx", "cy", "radius", "score", "count",
                                                  "label", "models", "members"};
  for (size_t i = 0; i < features.size(); ++i) {
    const std::string path = "features[" + std::to_string(i) + "]";
    try {
      const json& feature = features[i];
      const json& geometry = ju::member(feature, "geometry", path);
      const std::string type = ju::string(geometry, "type", path + ".geometry");
      if (type != "Polygon") {
        fail(ErrorCode::kValidation, path + ": geometry type '" + type + "' is not a Polygon");
      }
      const json& coords = ju::array(geometry, "coordinates", path + ".geometry");
      if (coords.empty()) fail(ErrorCode::kValidation, path + ": polygon has no rings");

      const json props = feature.value("properties", json::object());
      FusedDetection f;
      json extra = json::object();
      if (props.is_object() && props.contains("circlefuse")) {
        const json& block = props.at("circlefuse");
        f = from_block(block, path + ".properties.circlefuse");
        for (const auto& [k, v] : block.items()) {
          if (std::find(kKnown.begin(), kKnown.end(), k) == kKnown.end()) extra[k] = v;
        }
      } else {
        f = fit_ring(coords[0], path);
      }
      f.category = category_name(f);
      if (props.is_object() && props.contains("classification")) {
        const json& cls = props.at("classification");
        const json color = cls.value("color", json());
        if (color.is_array() && color.size() == 3) {
          f.color = to_hex_color({color[0].get<int>(), color[1].get<int>(), color[2].get<int>()});
        }
      }
      if (f.color.empty()) f.color = category_color(f, ColorMap{});
      out.fused.push_back(std::move(f));
      out.extras.push_back(std::move(extra));
    } catch (const Error& e) {
      out.errors.push_back(e.what());
    } catch (const json::exception& e) {
      out.errors.push_back(path + ": " + e.what());
    }
  }
  return out;
}

}  // namespace circlefuse
