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
#ifndef CIRCLEFUSE_JSON_IO_H_
#define CIRCLEFUSE_JSON_IO_H_

#include <string>
#include <vector>

#include "circlefuse/evaluation.h"
#include "circlefuse/fusion.h"
#include "circlefuse/synthsim.h"
#include "circlefuse/tiling.h"
#include "json.hpp"

namespace circlefuse {

inline constexpr const char* kFusedSchema = "circlefuse-fused/1";
inline constexpr const char* kGroundTruthSchema = "circlefuse-gt/1";

struct FusedDocument {
  std::string slide_id;
  std::vector<FusedDetection> fused;
};

nlohmann::json fused_to_json(const FusedDocument& doc);
FusedDocument fused_from_json(const nlohmann::json& doc);
std::string serialize_fused(const FusedDocument& doc);
FusedDocument parse_fused(const std::string& text);

nlohmann::json ground_truth_to_json(const GroundTruthSet& gt);
GroundTruthSet ground_truth_from_json(const nlohmann::json& doc);
std::string serialize_ground_truth(const GroundTruthSet& gt);
GroundTruthSet parse_ground_truth(const std::string& text);

nlohmann::json patches_to_json(const std::vector<Patch>& patches);
std::vector<Patch> patches_from_json(const nlohmann::json& doc);

nlohmann::json report_to_json(const EvalReport& report);
// Fixed-width text table of the report.
std::string report_to_table(const EvalReport& report);

// Config readers take a (possibly partial) object and fill the rest from
// defaults. Unknown keys are ignored.
TilingConfig tiling_config_from_json(const nlohmann::json& j, TilingConfig base = {});
WcfConfig wcf_config_from_json(const nlohmann::json& j, WcfConfig base = {});
EvalConfig eval_config_from_json(const nlohmann::json& j, EvalConfig base = {});
SynthConfig synth_config_from_json(const nlohmann::json& j, SynthConfig base = {});
ColorMap color_map_from_json(const nlohmann::json& j, ColorMap base = {});

nlohmann::json to_json(const TilingConfig& cfg);
nlohmann::json to_json(const WcfConfig& cfg);
nlohmann::json to_json(const EvalConfig& cfg);
nlohmann::json to_json(const SynthConfig& cfg);

// Threshold keys as written in reports, e.g. "0.5", "0.55".
std::string threshold_key(double t);

}  // namespace circlefuse

#endif  // CIRCLEFUSE_JSON_IO_H_
