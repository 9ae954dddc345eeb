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
#ifndef CIRCLEFUSE_GEOJSON_IO_H_
#define CIRCLEFUSE_GEOJSON_IO_H_

#include <span>
#include <string>
#include <vector>

#include "circlefuse/fusion.h"
#include "json.hpp"

namespace circlefuse {

inline constexpr int kPolygonVertices = 64;

// Closed counter-clockwise ring of kPolygonVertices + 1 points (first point
// repeated last) approximating the circle.
std::vector<std::array<double, 2>> circle_ring(const Circle& c,
                                               int vertices = kPolygonVertices);

// FeatureCollection with one Polygon feature per fused detection. The exact
// circle parameters travel in properties.circlefuse so re-import is
// lossless. `extras`, when non-empty, must align with `fused`; each object is
// merged into that feature's circlefuse block.
nlohmann::json export_geojson(std::span<const FusedDetection> fused,
                              const std::string& slide_id,
                              std::span<const nlohmann::json> extras = {});

struct GeoJsonImport {
  std::string slide_id;
  std::vector<FusedDetection> fused;
  // Unknown keys of each imported feature's circlefuse block, aligned with
  // `fused` (empty object when none).
  std::vector<nlohmann::json> extras;
  // Feature-level problems; the offending features are skipped.
  std::vector<std::string> errors;
};

// Throws kParse when the document is not a FeatureCollection. Features
// without a circlefuse block are fitted from their ring and tagged human.
GeoJsonImport import_geojson(const nlohmann::json& doc);

}  // namespace circlefuse

#endif  // CIRCLEFUSE_GEOJSON_IO_H_
