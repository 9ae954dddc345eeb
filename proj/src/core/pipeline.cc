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
#include "circlefuse/pipeline.h"

#include <chrono>

#include "circlefuse/error.h"
#include "circlefuse/geojson_io.h"
#include "circlefuse/io.h"
#include "circlefuse/parallel.h"
#include "circlefuse/suppression.h"
#include "json_util.h"

namespace circlefuse {

namespace ju = jsonutil;
using nlohmann::json;

namespace {

class StageTimer {
 public:
  explicit StageTimer(json& timings) : timings_(timings) {}

  template <typename Fn>
  auto run(const char* stage, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    struct Record {
      json& t;
      const char* s;
      std::chrono::steady_clock::time_point start;
      ~Record() {
        t[s] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                   .count();
      }
    } record{timings_, stage, start};
    return fn();
  }

 private:
  json& timings_;
};

size_t count_records(const DetectionFile& file) {
  size_t n = 0;
  for (const auto& [id, dets] : file.patches) n += dets.size();
  return n;
}

SlideGeometry infer_slide(const std::string& slide_id, const std::vector<Patch>& patches) {
  SlideGeometry slide{slide_id, 1, 1};
  for (const auto& p : patches) {
    slide.width = std::max(slide.width, p.x + p.w);
    slide.height = std::max(slide.height, p.y + p.h);
  }
  return slide;
}

}  // namespace

const char* to_string(BackendKind kind) noexcept {
  switch (kind) {
    case BackendKind::kFile:
      return "file";
    case BackendKind::kRemote:
      return "remote";
    case BackendKind::kSynthetic:
      return "synthetic";
  }
  return "unknown";
}

BackendKind parse_backend_kind(const std::string& name) {
  if (name == "file") return BackendKind::kFile;
  if (name == "remote") return BackendKind::kRemote;
  if (name == "synthetic") return BackendKind::kSynthetic;
  fail(ErrorCode::kInvalidArgument, "unknown backend '" + name + "'");
}

void validate(const PipelineConfig& cfg) {
  if (cfg.slide) validate(*cfg.slide);
  const bool explicit_patches = cfg.patches.has_value() || cfg.patches_path.has_value();
  if (!explicit_patches) validate(cfg.tiling);
  if (!(cfg.nms_ciou > 0.0 && cfg.nms_ciou < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "nms_ciou must lie in (0,1)");
  }
  validate(cfg.wcf);
  if (cfg.workers < 1) fail(ErrorCode::kInvalidArgument, "workers must be >= 1");
  switch (cfg.backend.kind) {
    case BackendKind::kFile:
      if (cfg.backend.detection_files.empty()) {
        fail(ErrorCode::kInvalidArgument, "file backend needs at least one detection file");
      }
      if (!explicit_patches && !cfg.slide) {
        fail(ErrorCode::kInvalidArgument, "file backend needs a patch list or slide dimensions");
      }
      break;
    case BackendKind::kRemote:
      if (cfg.backend.remote_models.empty()) {
        fail(ErrorCode::kInvalidArgument, "remote backend needs at least one model endpoint");
      }
      if (!cfg.slide) fail(ErrorCode::kInvalidArgument, "remote backend needs slide dimensions");
      break;
    case BackendKind::kSynthetic:
      validate(cfg.backend.synth);
      break;
  }
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  validate(cfg);
  PipelineResult result;
  json timings = json::object();
  StageTimer timer(timings);
  json inputs = json::array();

  std::optional<SlideGeometry> slide = cfg.slide;
  if (cfg.backend.kind == BackendKind::kSynthetic) slide = cfg.backend.synth.slide;

  // Tiling.
  std::vector<Patch> patches = timer.run("tile", [&] {
    if (cfg.patches) return *cfg.patches;
    if (cfg.patches_path) {
      return patches_from_json(ju::parse(read_text_file(*cfg.patches_path), "patch list"));
    }
    return generate_patches(*slide, cfg.tiling);
  });
  if (cfg.patches_path) {
    inputs.push_back(json{{"path", cfg.patches_path->string()},
                          {"sha256", sha256_hex(read_text_file(*cfg.patches_path))}});
  }

  // Ingestion.
  std::vector<DetectionFile> files;
  RunSource source = RunSource::kFile;
  timer.run("ingest", [&] {
    switch (cfg.backend.kind) {
      case BackendKind::kFile: {
        const auto& paths = cfg.backend.detection_files;
        files.resize(paths.size());
        std::vector<std::string> digests(paths.size());
        parallel_for(paths.size(), cfg.workers, [&](size_t i) {
          const std::string text = read_text_file(paths[i]);
          digests[i] = sha256_hex(text);
          try {
            files[i] = parse_detection_file(text);
          } catch (const Error& e) {
            throw Error(e.code(), paths[i].string() + ": " + e.what());
          }
        });
        for (size_t i = 0; i < paths.size(); ++i) {
          inputs.push_back(json{{"path", paths[i].string()}, {"sha256", digests[i]}});
        }
        break;
      }
      case BackendKind::kRemote: {
        source = RunSource::kRemote;
        for (const auto& model : cfg.backend.remote_models) {
          RemoteRun run = infer_remote_all(model.remote, model.model_id, slide->slide_id,
                                           patches, cfg.workers);
          result.failures.insert(result.failures.end(), run.failures.begin(),
                                 run.failures.end());
          files.push_back(std::move(run.file));
          inputs.push_back(json{{"endpoint", model.remote.endpoint}, {"model_id", model.model_id}});
        }
        break;
      }
      case BackendKind::kSynthetic: {
        source = RunSource::kSynthetic;
        const SynthConfig& synth = cfg.backend.synth;
        result.ground_truth = generate_ground_truth(synth);
        files.resize(static_cast<size_t>(synth.n_models));
        parallel_for(files.size(), cfg.workers, [&](size_t k) {
          const ModelRun run = simulate_model(*result.ground_truth, synth, static_cast<int>(k));
          files[k] = to_detection_file(run, synth.slide.slide_id, patches);
        });
        inputs.push_back(json{{"synth_config", to_json(synth)},
                              {"sha256", sha256_hex(to_json(synth).dump())}});
        break;
      }
    }
  });

  std::string slide_id = slide ? slide->slide_id : std::string();
  if (slide_id.empty() && !files.empty()) slide_id = files.front().slide_id;
  if (!slide) slide = infer_slide(slide_id, patches);

  size_t detections_in = 0;
  for (const auto& f : files) detections_in += count_records(f);

  std::vector<ModelRun> runs = timer.run("assemble", [&] { return assemble(files, patches, source); });
  size_t after_assembly = 0;
  for (const auto& r : runs) after_assembly += r.detections.size();

  json per_model = json::object();
  std::vector<ModelRun> deduped(runs.size());
  timer.run("nms", [&] {
    parallel_for(runs.size(), cfg.workers, [&](size_t i) {
      deduped[i].model_id = runs[i].model_id;
      deduped[i].source = runs[i].source;
      deduped[i].detections = nms(runs[i].detections, cfg.nms_ciou);
    });
  });
  size_t after_nms = 0;
  for (size_t i = 0; i < runs.size(); ++i) {
    after_nms += deduped[i].detections.size();
    per_model[runs[i].model_id] = json{{"assembled", runs[i].detections.size()},
                                       {"after_nms", deduped[i].detections.size()}};
  }

  WcfResult fused = timer.run("fuse", [&] {
    if (deduped.empty()) return WcfResult{};
    return run_wcf(deduped, cfg.wcf);
  });
  timer.run("categorize", [&] { categorize(fused.retained, cfg.colors); });

  result.fused.slide_id = slide_id;
  result.fused.fused = std::move(fused.retained);
  result.geojson = timer.run("export", [&] {
    return export_geojson(result.fused.fused, slide_id);
  });

  json failures = json::array();
  for (const auto& f : result.failures) {
    failures.push_back(json{{"model_id", f.model_id}, {"patch_id", f.patch_id}, {"reason", f.reason}});
  }
  result.manifest = json{
      {"schema", "circlefuse-manifest/1"},
      {"slide", {{"slide_id", slide_id}, {"width", slide->width}, {"height", slide->height}}},
      {"config", to_json(cfg)},
      {"inputs", std::move(inputs)},
      {"counts",
       {{"patches", patches.size()},
        {"models", runs.size()},
        {"detections_in", detections_in},
        {"detections_after_assembly", after_assembly},
        {"detections_after_nms", after_nms},
        {"clusters_formed", fused.clusters.size()},
        {"fused_retained", result.fused.fused.size()},
        {"failed_patches", result.failures.size()},
        {"per_model", std::move(per_model)}}},
      {"failures", std::move(failures)},
      {"timings_ms", std::move(timings)}};
  return result;
}

void write_outputs(PipelineResult& result, const std::filesystem::path& fused_path,
                   const std::filesystem::path& geojson_path,
                   const std::filesystem::path& manifest_path) {
  json outputs = json::object();
  if (!fused_path.empty()) {
    const std::string text = serialize_fused(result.fused);
    write_text_file(fused_path, text);
    outputs["fused"] = json{{"path", fused_path.string()}, {"sha256", sha256_hex(text)}};
  }
  if (!geojson_path.empty()) {
    const std::string text = result.geojson.dump(1) + "\n";
    write_text_file(geojson_path, text);
    outputs["geojson"] = json{{"path", geojson_path.string()}, {"sha256", sha256_hex(text)}};
  }
  result.manifest["outputs"] = std::move(outputs);
  if (!manifest_path.empty()) write_text_file(manifest_path, result.manifest.dump(2) + "\n");
}

PipelineConfig pipeline_config_from_json(const json& j, PipelineConfig base) {
  if (!j.is_object()) return base;
  if (j.contains("slide")) {
    const json& s = j.at("slide");
    SlideGeometry slide = base.slide.value_or(SlideGeometry{});
    slide.slide_id = ju::value_or<std::string>(s, "slide_id", slide.slide_id);
    slide.width = ju::value_or<int64_t>(s, "width", slide.width);
    slide.height = ju::value_or<int64_t>(s, "height", slide.height);
    base.slide = slide;
  }
  if (j.contains("tiling")) base.tiling = tiling_config_from_json(j.at("tiling"), base.tiling);
  if (j.contains("patches_path")) {
    base.patches_path = ju::value_or<std::string>(j, "patches_path", "");
  }
  base.nms_ciou = ju::value_or<double>(j, "nms_ciou", base.nms_ciou);
  if (j.contains("wcf")) base.wcf = wcf_config_from_json(j.at("wcf"), base.wcf);
  if (j.contains("colors")) base.colors = color_map_from_json(j.at("colors"), base.colors);
  base.workers = ju::value_or<int>(j, "workers", base.workers);
  if (j.contains("backend")) {
    const json& b = j.at("backend");
    if (b.contains("kind")) base.backend.kind = parse_backend_kind(ju::value_or<std::string>(b, "kind", ""));
    if (b.contains("detection_files")) {
      base.backend.detection_files.clear();
      for (const auto& p : ju::value_or<std::vector<std::string>>(b, "detection_files", {})) {
        base.backend.detection_files.emplace_back(p);
      }
    }
    if (b.contains("remote")) {
      base.backend.remote_models.clear();
      for (const auto& m : b.at("remote")) {
        RemoteModel rm;
        rm.model_id = ju::value_or<std::string>(m, "model_id", "");
        rm.remote.endpoint = ju::value_or<std::string>(m, "endpoint", "");
        rm.remote.max_attempts = ju::value_or<int>(m, "max_attempts", rm.remote.max_attempts);
        rm.remote.initial_backoff = std::chrono::milliseconds(
            ju::value_or<int64_t>(m, "initial_backoff_ms", rm.remote.initial_backoff.count()));
        rm.remote.timeout = std::chrono::milliseconds(
            ju::value_or<int64_t>(m, "timeout_ms", rm.remote.timeout.count()));
        if (rm.model_id.empty() || rm.remote.endpoint.empty()) {
          fail(ErrorCode::kInvalidArgument, "remote models need model_id and endpoint");
        }
        base.backend.remote_models.push_back(std::move(rm));
      }
    }
    if (b.contains("synth")) base.backend.synth = synth_config_from_json(b.at("synth"), base.backend.synth);
  }
  return base;
}

json to_json(const PipelineConfig& cfg) {
  json backend{{"kind", to_string(cfg.backend.kind)}};
  switch (cfg.backend.kind) {
    case BackendKind::kFile: {
      json files = json::array();
      for (const auto& p : cfg.backend.detection_files) files.push_back(p.string());
      backend["detection_files"] = std::move(files);
      break;
    }
    case BackendKind::kRemote: {
      json models = json::array();
      for (const auto& m : cfg.backend.remote_models) {
        models.push_back(json{{"model_id", m.model_id},
                              {"endpoint", m.remote.endpoint},
                              {"max_attempts", m.remote.max_attempts},
                              {"initial_backoff_ms", m.remote.initial_backoff.count()},
                              {"timeout_ms", m.remote.timeout.count()}});
      }
      backend["remote"] = std::move(models);
      break;
    }
    case BackendKind::kSynthetic:
      backend["synth"] = to_json(cfg.backend.synth);
      break;
  }
  json out{{"tiling", to_json(cfg.tiling)},
           {"nms_ciou", cfg.nms_ciou},
           {"wcf", to_json(cfg.wcf)},
           {"colors", {{"by_count", cfg.colors.by_count}, {"human", cfg.colors.human}}},
           {"workers", cfg.workers},
           {"backend", std::move(backend)}};
  if (cfg.slide) {
    out["slide"] = json{{"slide_id", cfg.slide->slide_id},
                        {"width", cfg.slide->width},
                        {"height", cfg.slide->height}};
  }
  if (cfg.patches_path) out["patches_path"] = cfg.patches_path->string();
  return out;
}

}  // namespace circlefuse
