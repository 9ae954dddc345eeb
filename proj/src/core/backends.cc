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
#include "circlefuse/backends.h"

#include <thread>
#include <unordered_map>

#include "circlefuse/error.h"
#include "circlefuse/io.h"
#include "circlefuse/parallel.h"
#include "httplib.h"
#include "json_util.h"

namespace circlefuse {

namespace ju = jsonutil;
using nlohmann::json;

namespace {

LocalDetection parse_local(const json& rec, const std::string& path) {
  if (!rec.is_object()) fail(ErrorCode::kParse, path + ": expected an object");
  LocalDetection d;
  d.circle.cx = ju::number(rec, "cx", path);
  d.circle.cy = ju::number(rec, "cy", path);
  d.circle.r = ju::number(rec, "r", path);
  d.score = ju::number(rec, "score", path);
  d.label = ju::optional_string(rec, "label", path, kDefaultLabel);
  if (d.score < 0.0 || d.score > 1.0) {
    fail(ErrorCode::kValidation,
         path + ": score " + json(d.score).dump() + " outside [0,1]");
  }
  if (!(d.circle.r > 0.0)) {
    fail(ErrorCode::kValidation,
         path + ": radius " + json(d.circle.r).dump() + " must be > 0");
  }
  return d;
}

std::vector<LocalDetection> parse_local_array(const json& arr, const std::string& path) {
  std::vector<LocalDetection> out;
  out.reserve(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) {
    out.push_back(parse_local(arr[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

json local_to_json(const LocalDetection& d) {
  return json{{"cx", d.circle.cx}, {"cy", d.circle.cy}, {"r", d.circle.r},
              {"score", d.score}, {"label", d.label}};
}

// "http://host:port/prefix" -> {"http://host:port", "/prefix"}.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  const auto scheme = endpoint.find("://");
  const auto start = scheme == std::string::npos ? 0 : scheme + 3;
  const auto slash = endpoint.find('/', start);
  if (slash == std::string::npos) return {endpoint, ""};
  std::string prefix = endpoint.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {endpoint.substr(0, slash), prefix};
}

}  // namespace

DetectionFile parse_detection_file(const std::string& text) {
  const json doc = ju::parse(text, "detection file");
  ju::expect_schema(doc, kDetectionSchema, "detection file");
  DetectionFile file;
  file.model_id = ju::string(doc, "model_id", "detection file");
  file.slide_id = ju::string(doc, "slide_id", "detection file");
  const json& patches = ju::array(doc, "patches", "detection file");
  for (size_t p = 0; p < patches.size(); ++p) {
    const std::string path = "patches[" + std::to_string(p) + "]";
    const std::string patch_id = ju::string(patches[p], "patch_id", path);
    auto dets = parse_local_array(ju::array(patches[p], "detections", path),
                                  path + ".detections");
    auto& slot = file.patches[patch_id];
    slot.insert(slot.end(), dets.begin(), dets.end());
  }
  return file;
}

DetectionFile load_detection_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_detection_file(text);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string serialize_detection_file(const DetectionFile& file) {
  json patches = json::array();
  for (const auto& [patch_id, dets] : file.patches) {
    json arr = json::array();
    for (const auto& d : dets) arr.push_back(local_to_json(d));
    patches.push_back(json{{"patch_id", patch_id}, {"detections", std::move(arr)}});
  }
  json doc{{"schema", kDetectionSchema},
           {"model_id", file.model_id},
           {"slide_id", file.slide_id},
           {"patches", std::move(patches)}};
  return doc.dump(1) + "\n";
}

std::vector<ModelRun> assemble(std::span<const DetectionFile> files,
                               std::span<const Patch> patches, RunSource source) {
  std::unordered_map<std::string, const Patch*> by_id;
  by_id.reserve(patches.size());
  for (const auto& p : patches) by_id.emplace(p.patch_id, &p);

  std::map<std::string, ModelRun> runs;
  for (const auto& file : files) {
    ModelRun& run = runs[file.model_id];
    run.model_id = file.model_id;
    run.source = source;
    for (const auto& [patch_id, dets] : file.patches) {
      auto it = by_id.find(patch_id);
      if (it == by_id.end()) {
        fail(ErrorCode::kNotFound, "model '" + file.model_id +
                                       "' references unknown patch_id '" + patch_id + "'");
      }
      for (const auto& d : dets) {
        run.detections.push_back(
            Detection{to_slide_coords(*it->second, d.circle), d.score, file.model_id, d.label});
      }
    }
  }
  std::vector<ModelRun> out;
  out.reserve(runs.size());
  for (auto& [id, run] : runs) {
    sort_canonical(run.detections);
    out.push_back(std::move(run));
  }
  return out;
}

std::vector<LocalDetection> parse_remote_response(const std::string& body) {
  const json doc = ju::parse(body, "inference response");
  return parse_local_array(ju::array(doc, "detections", "response"), "response.detections");
}

std::vector<LocalDetection> infer_remote(const RemoteConfig& cfg,
                                         const std::string& slide_id,
                                         const Patch& patch) {
  if (cfg.endpoint.empty()) fail(ErrorCode::kInvalidArgument, "remote endpoint is empty");
  const auto [base, prefix] = split_endpoint(cfg.endpoint);
  httplib::Client client(base);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());

  const json body{{"slide_id", slide_id},
                  {"patch", {{"x", patch.x}, {"y", patch.y}, {"w", patch.w}, {"h", patch.h}}}};
  const std::string payload = body.dump();

  auto backoff = cfg.initial_backoff;
  std::string last_error = "no attempt made";
  const int attempts = std::max(1, cfg.max_attempts);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    auto res = client.Post(prefix + "/infer", payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
    } else if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
    } else if (res->status != 200) {
      fail(ErrorCode::kBackend, "patch " + patch.patch_id + ": HTTP " +
                                    std::to_string(res->status) + " (not retried)");
    } else {
      try {
        return parse_remote_response(res->body);
      } catch (const Error& e) {
        throw Error(ErrorCode::kValidation, "patch " + patch.patch_id + ": " + e.what());
      }
    }
    if (attempt < attempts) {
      std::this_thread::sleep_for(backoff);
      backoff = std::chrono::milliseconds(static_cast<int64_t>(
          static_cast<double>(backoff.count()) * cfg.backoff_multiplier));
    }
  }
  fail(ErrorCode::kBackend, "patch " + patch.patch_id + ": giving up after " +
                                std::to_string(attempts) + " attempts (" + last_error + ")");
}

RemoteRun infer_remote_all(const RemoteConfig& cfg, const std::string& model_id,
                           const std::string& slide_id, std::span<const Patch> patches,
                           int workers) {
  std::vector<std::vector<LocalDetection>> results(patches.size());
  std::vector<std::string> errors(patches.size());
  parallel_for(patches.size(), workers, [&](size_t i) {
    try {
      results[i] = infer_remote(cfg, slide_id, patches[i]);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  RemoteRun run;
  run.file.model_id = model_id;
  run.file.slide_id = slide_id;
  for (size_t i = 0; i < patches.size(); ++i) {
    if (!errors[i].empty()) {
      run.failures.push_back(PatchFailure{model_id, patches[i].patch_id, errors[i]});
      continue;
    }
    run.file.patches[patches[i].patch_id] = std::move(results[i]);
  }
  return run;
}

}  // namespace circlefuse
