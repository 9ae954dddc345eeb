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
#include "circlefuse.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "circlefuse/bench.h"
#include "circlefuse/error.h"
#include "circlefuse/evaluation.h"
#include "circlefuse/geojson_io.h"
#include "circlefuse/geometry.h"
#include "circlefuse/io.h"
#include "circlefuse/json_io.h"
#include "circlefuse/pipeline.h"
#include "circlefuse/review.h"
#include "circlefuse/synthsim.h"
#include "circlefuse/tiling.h"
#include "json.hpp"

using nlohmann::json;
namespace cf = circlefuse;

struct cf_pipeline {
  cf::PipelineConfig config;
  std::optional<cf::PipelineResult> last;
};

struct cf_review_server {
  std::shared_ptr<cf::ReviewService> service;
  std::unique_ptr<cf::ReviewServer> server;
};

namespace {

thread_local std::string g_last_error;

cf_status to_status(cf::ErrorCode code) {
  switch (code) {
    case cf::ErrorCode::kInvalidArgument:
      return CF_ERR_INVALID_ARGUMENT;
    case cf::ErrorCode::kParse:
      return CF_ERR_PARSE;
    case cf::ErrorCode::kValidation:
      return CF_ERR_VALIDATION;
    case cf::ErrorCode::kNotFound:
      return CF_ERR_NOT_FOUND;
    case cf::ErrorCode::kIo:
      return CF_ERR_IO;
    case cf::ErrorCode::kBackend:
      return CF_ERR_BACKEND;
    case cf::ErrorCode::kConflict:
      return CF_ERR_CONFLICT;
    case cf::ErrorCode::kInternal:
      return CF_ERR_INTERNAL;
  }
  return CF_ERR_INTERNAL;
}

// Runs fn, translating exceptions into a status and the thread's last error.
template <typename Fn>
cf_status guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return CF_OK;
  } catch (const cf::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const json::parse_error& e) {
    g_last_error = e.what();
    return CF_ERR_PARSE;
  } catch (const json::exception& e) {
    g_last_error = e.what();
    return CF_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CF_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CF_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return CF_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void require(const void* p, const char* name) {
  if (p == nullptr) cf::fail(cf::ErrorCode::kInvalidArgument, std::string(name) + " is NULL");
}

json parse_optional(const char* text, const char* what) {
  if (text == nullptr || *text == '\0') return json::object();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    cf::fail(cf::ErrorCode::kParse, std::string(what) + ": " + e.what());
  }
}

cf::Circle to_circle(const cf_circle* c) { return cf::Circle{c->cx, c->cy, c->r}; }

std::vector<cf::ScoredCircle> load_predictions(const std::string& path) {
  const json doc = json::parse(cf::read_text_file(path));
  std::vector<cf::FusedDetection> fused;
  if (doc.is_object() && doc.value("type", "") == "FeatureCollection") {
    auto imported = cf::import_geojson(doc);
    if (!imported.errors.empty()) {
      cf::fail(cf::ErrorCode::kValidation, path + ": " + imported.errors.front());
    }
    fused = std::move(imported.fused);
  } else {
    fused = cf::fused_from_json(doc).fused;
  }
  std::vector<cf::ScoredCircle> preds;
  preds.reserve(fused.size());
  for (const auto& f : fused) preds.push_back(cf::ScoredCircle{f.circle, f.score, f.label});
  return preds;
}

}  // namespace

extern "C" {

const char* cf_version(void) { return "0.1.0"; }

const char* cf_status_name(cf_status status) {
  switch (status) {
    case CF_OK:
      return "ok";
    case CF_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case CF_ERR_PARSE:
      return "parse error";
    case CF_ERR_VALIDATION:
      return "validation error";
    case CF_ERR_NOT_FOUND:
      return "not found";
    case CF_ERR_IO:
      return "i/o error";
    case CF_ERR_BACKEND:
      return "backend error";
    case CF_ERR_CONFLICT:
      return "conflict";
    case CF_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

const char* cf_last_error(void) { return g_last_error.c_str(); }

void cf_string_free(char* s) { std::free(s); }

cf_status cf_intersection_area(const cf_circle* a, const cf_circle* b, double* out) {
  return guard([&] {
    require(a, "a");
    require(b, "b");
    require(out, "out");
    if (!cf::is_valid(to_circle(a)) || !cf::is_valid(to_circle(b))) {
      cf::fail(cf::ErrorCode::kInvalidArgument, "circles need finite centres and r > 0");
    }
    *out = cf::intersection_area(to_circle(a), to_circle(b));
  });
}

cf_status cf_ciou(const cf_circle* a, const cf_circle* b, double* out) {
  return guard([&] {
    require(a, "a");
    require(b, "b");
    require(out, "out");
    if (!cf::is_valid(to_circle(a)) || !cf::is_valid(to_circle(b))) {
      cf::fail(cf::ErrorCode::kInvalidArgument, "circles need finite centres and r > 0");
    }
    *out = cf::ciou(to_circle(a), to_circle(b));
  });
}

cf_status cf_tile(const char* slide_id, int64_t width, int64_t height, const char* tiling_json,
                  char** out_patches_json) {
  return guard([&] {
    require(out_patches_json, "out_patches_json");
    const cf::SlideGeometry slide{slide_id != nullptr ? slide_id : "", width, height};
    const auto tiling = cf::tiling_config_from_json(parse_optional(tiling_json, "tiling"));
    const auto patches = cf::generate_patches(slide, tiling);
    *out_patches_json = dup_string(cf::patches_to_json(patches).dump(1) + "\n");
  });
}

cf_status cf_simulate(const char* synth_config_json, const char* out_dir, int tiled,
                      const char* tiling_json, char** out_summary_json) {
  return guard([&] {
    require(out_dir, "out_dir");
    const json cfg_json = parse_optional(synth_config_json, "synth config");
    const auto synth = cf::synth_config_from_json(
        cfg_json.contains("synth") ? cfg_json.at("synth") : cfg_json);
    cf::validate(synth);
    const std::filesystem::path dir(out_dir);

    std::vector<cf::Patch> patches;
    if (tiled != 0) {
      patches = cf::generate_patches(synth.slide,
                                     cf::tiling_config_from_json(parse_optional(tiling_json, "tiling")));
    } else {
      patches.push_back(cf::Patch{cf::make_patch_id(0, 0, 0, 0), 0, 0, synth.slide.width,
                                  synth.slide.height});
    }

    const auto gt = cf::generate_ground_truth(synth);
    cf::write_text_file(dir / "gt.json", cf::serialize_ground_truth(gt));
    cf::write_text_file(dir / "patches.json", cf::patches_to_json(patches).dump(1) + "\n");
    json models = json::array();
    for (int k = 0; k < synth.n_models; ++k) {
      const auto run = cf::simulate_model(gt, synth, k);
      const auto path = dir / (run.model_id + ".detections.json");
      cf::write_text_file(path, cf::serialize_detection_file(
                                    cf::to_detection_file(run, synth.slide.slide_id, patches)));
      models.push_back(json{{"model_id", run.model_id},
                            {"path", path.string()},
                            {"detections", run.detections.size()}});
    }
    if (out_summary_json != nullptr) {
      const json summary{{"gt", (dir / "gt.json").string()},
                         {"patches", (dir / "patches.json").string()},
                         {"n_gt", gt.circles.size()},
                         {"n_patches", patches.size()},
                         {"models", std::move(models)},
                         {"synth", cf::to_json(synth)}};
      *out_summary_json = dup_string(summary.dump(2) + "\n");
    }
  });
}

cf_status cf_pipeline_create(const char* config_json, cf_pipeline** out) {
  return guard([&] {
    require(out, "out");
    *out = nullptr;
    auto p = std::make_unique<cf_pipeline>();
    p->config = cf::pipeline_config_from_json(parse_optional(config_json, "pipeline config"));
    cf::validate(p->config);
    *out = p.release();
  });
}

cf_status cf_pipeline_run(cf_pipeline* pipeline, const char* fused_path, const char* geojson_path,
                          const char* manifest_path) {
  return guard([&] {
    require(pipeline, "pipeline");
    pipeline->last.reset();
    cf::PipelineResult result = cf::run_pipeline(pipeline->config);
    cf::write_outputs(result, fused_path != nullptr ? fused_path : "",
                      geojson_path != nullptr ? geojson_path : "",
                      manifest_path != nullptr ? manifest_path : "");
    pipeline->last = std::move(result);
  });
}

cf_status cf_pipeline_manifest(const cf_pipeline* pipeline, char** out_json) {
  return guard([&] {
    require(pipeline, "pipeline");
    require(out_json, "out_json");
    if (!pipeline->last) cf::fail(cf::ErrorCode::kInvalidArgument, "pipeline has not run yet");
    *out_json = dup_string(pipeline->last->manifest.dump(2) + "\n");
  });
}

cf_status cf_pipeline_fused(const cf_pipeline* pipeline, char** out_json) {
  return guard([&] {
    require(pipeline, "pipeline");
    require(out_json, "out_json");
    if (!pipeline->last) cf::fail(cf::ErrorCode::kInvalidArgument, "pipeline has not run yet");
    *out_json = dup_string(cf::serialize_fused(pipeline->last->fused));
  });
}

void cf_pipeline_destroy(cf_pipeline* pipeline) { delete pipeline; }

cf_status cf_evaluate_files(const char* pred_path, const char* gt_path,
                            const char* eval_config_json, char** out_report_json,
                            char** out_table) {
  return guard([&] {
    require(pred_path, "pred_path");
    require(gt_path, "gt_path");
    require(out_report_json, "out_report_json");
    const json cfg_json = parse_optional(eval_config_json, "eval config");
    const auto cfg = cf::eval_config_from_json(cfg_json);
    const int workers = cfg_json.value("workers", 1);
    const auto preds = load_predictions(pred_path);
    const auto gt = cf::parse_ground_truth(cf::read_text_file(gt_path));
    const auto report = cf::evaluate(preds, gt.circles, cfg, workers);
    *out_report_json = dup_string(cf::report_to_json(report).dump(2) + "\n");
    if (out_table != nullptr) *out_table = dup_string(cf::report_to_table(report));
  });
}

cf_status cf_bench(const char* bench_config_json, char** out_table_markdown,
                   char** out_results_json) {
  return guard([&] {
    require(out_table_markdown, "out_table_markdown");
    const auto cfg = cf::bench_config_from_json(parse_optional(bench_config_json, "bench config"));
    const auto result = cf::run_bench(cfg);
    *out_table_markdown = dup_string(cf::bench_table_markdown(result));
    if (out_results_json != nullptr) {
      *out_results_json = dup_string(cf::bench_to_json(result).dump(2) + "\n");
    }
  });
}

cf_status cf_review_server_create(const char* options_json, cf_review_server** out) {
  return guard([&] {
    require(out, "out");
    *out = nullptr;
    const json j = parse_optional(options_json, "review options");
    cf::ReviewOptions opts;
    opts.input_path = j.value("input", "");
    opts.export_path = j.value("export", "");
    if (opts.input_path.empty()) cf::fail(cf::ErrorCode::kInvalidArgument, "review input path is required");
    if (j.contains("image") && j.at("image").is_string()) {
      opts.image_path = j.at("image").get<std::string>();
    }
    opts.image_downsample = j.value("downsample", 1.0);
    if (j.contains("width") && j.at("width").is_number_integer()) opts.slide_width = j.at("width").get<int64_t>();
    if (j.contains("height") && j.at("height").is_number_integer()) {
      opts.slide_height = j.at("height").get<int64_t>();
    }
    opts.token = j.value("token", "");
    if (j.contains("colors")) opts.colors = cf::color_map_from_json(j.at("colors"));
    auto handle = std::make_unique<cf_review_server>();
    handle->service = std::make_shared<cf::ReviewService>(opts);
    handle->server = std::make_unique<cf::ReviewServer>(handle->service);
    *out = handle.release();
  });
}

cf_status cf_review_server_bind(cf_review_server* server, const char* host, int port,
                                int* out_port) {
  return guard([&] {
    require(server, "server");
    const int bound = server->server->bind(host != nullptr ? host : "127.0.0.1", port);
    if (out_port != nullptr) *out_port = bound;
  });
}

cf_status cf_review_server_serve(cf_review_server* server) {
  return guard([&] {
    require(server, "server");
    server->server->serve();
  });
}

cf_status cf_review_server_stop(cf_review_server* server) {
  return guard([&] {
    require(server, "server");
    server->server->stop();
    if (!server->service->options().export_path.empty()) {
      server->service->export_state(false);
    }
  });
}

void cf_review_server_destroy(cf_review_server* server) { delete server; }

}  // extern "C"
