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
#ifndef CIRCLEFUSE_PIPELINE_H_
#define CIRCLEFUSE_PIPELINE_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "circlefuse/backends.h"
#include "circlefuse/fusion.h"
#include "circlefuse/json_io.h"
#include "circlefuse/synthsim.h"
#include "circlefuse/tiling.h"
#include "json.hpp"

namespace circlefuse {

enum class BackendKind { kFile, kRemote, kSynthetic };

const char* to_string(BackendKind kind) noexcept;
BackendKind parse_backend_kind(const std::string& name);

struct RemoteModel {
  std::string model_id;
  RemoteConfig remote;
};

struct BackendConfig {
  BackendKind kind = BackendKind::kFile;
  std::vector<std::filesystem::path> detection_files;
  std::vector<RemoteModel> remote_models;
  SynthConfig synth;
};

struct PipelineConfig {
  // Required for the remote backend; otherwise inferred when absent.
  std::optional<SlideGeometry> slide;
  TilingConfig tiling;
  // An explicit patch list (e.g. from `tile`) replaces the generated grid.
  std::optional<std::vector<Patch>> patches;
  std::optional<std::filesystem::path> patches_path;
  BackendConfig backend;
  double nms_ciou = 0.5;
  WcfConfig wcf;
  ColorMap colors;
  int workers = 1;
};

// Validates every config block; throws kInvalidArgument before any work.
void validate(const PipelineConfig& cfg);

struct PipelineResult {
  FusedDocument fused;
  nlohmann::json geojson;
  nlohmann::json manifest;
  std::vector<PatchFailure> failures;
  // Planted objects when the synthetic backend was used.
  std::optional<GroundTruthSet> ground_truth;
};

// tile -> ingest -> assemble -> per-model NMS -> WCF -> categorize -> export.
PipelineResult run_pipeline(const PipelineConfig& cfg);

// Writes whichever outputs have a non-empty path. The manifest records the
// digests of the files written.
void write_outputs(PipelineResult& result, const std::filesystem::path& fused_path,
                   const std::filesystem::path& geojson_path,
                   const std::filesystem::path& manifest_path);

// Builds a PipelineConfig from a JSON object (the CLI's --config file).
PipelineConfig pipeline_config_from_json(const nlohmann::json& j, PipelineConfig base = {});
nlohmann::json to_json(const PipelineConfig& cfg);

}  // namespace circlefuse

#endif  // CIRCLEFUSE_PIPELINE_H_
