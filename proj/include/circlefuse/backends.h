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
#ifndef CIRCLEFUSE_BACKENDS_H_
#define CIRCLEFUSE_BACKENDS_H_

#include <chrono>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "circlefuse/detection.h"
#include "circlefuse/tiling.h"

namespace circlefuse {

inline constexpr const char* kDetectionSchema = "circlefuse-detections/1";

// A detection in the local frame of the patch it was reported for.
struct LocalDetection {
  Circle circle;
  double score = 0.0;
  std::string label = kDefaultLabel;

  friend bool operator==(const LocalDetection&, const LocalDetection&) = default;
};

// One model's patch-keyed detections for one slide.
struct DetectionFile {
  std::string model_id;
  std::string slide_id;
  std::map<std::string, std::vector<LocalDetection>> patches;
};

DetectionFile parse_detection_file(const std::string& text);
DetectionFile load_detection_file(const std::filesystem::path& path);
std::string serialize_detection_file(const DetectionFile& file);

// Translates every detection to slide space and groups the result by model.
// Files sharing a model_id are merged. Runs come back ordered by model_id,
// each sorted canonically. Throws kNotFound for an unknown patch_id.
std::vector<ModelRun> assemble(std::span<const DetectionFile> files,
                               std::span<const Patch> patches,
                               RunSource source = RunSource::kFile);

struct RemoteConfig {
  std::string endpoint;  // e.g. "http://127.0.0.1:9000"
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{100};
  double backoff_multiplier = 2.0;
  std::chrono::milliseconds timeout{30000};
};

// POSTs one patch to {endpoint}/infer and parses the patch-local
// detections. Transport errors and 5xx responses are retried with
// exponential backoff; exhausting the attempts throws kBackend naming the
// patch. A non-conforming body throws kValidation.
std::vector<LocalDetection> infer_remote(const RemoteConfig& cfg,
                                         const std::string& slide_id,
                                         const Patch& patch);

struct PatchFailure {
  std::string model_id;
  std::string patch_id;
  std::string reason;
};

struct RemoteRun {
  DetectionFile file;
  std::vector<PatchFailure> failures;
};

// Runs infer_remote over every patch with up to `workers` concurrent
// requests. Failed patches are reported, not fatal.
RemoteRun infer_remote_all(const RemoteConfig& cfg, const std::string& model_id,
                           const std::string& slide_id,
                           std::span<const Patch> patches, int workers);

// Parses the `detections` array of a remote response body.
std::vector<LocalDetection> parse_remote_response(const std::string& body);

}  // namespace circlefuse

#endif  // CIRCLEFUSE_BACKENDS_H_
