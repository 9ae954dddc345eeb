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
/* C interface to the circlefuse detection post-processing engine.
 *
 * Every fallible call returns a cf_status. On failure a description of the
 * most recent error on the calling thread is available from
 * cf_last_error(). Strings returned through char** out-parameters are owned
 * by the caller and must be released with cf_string_free(). Opaque handles
 * are released with their matching _destroy function; passing NULL to any
 * _destroy or _free function is a no-op.
 */
#ifndef CIRCLEFUSE_H_
#define CIRCLEFUSE_H_

#include <stdint.h>

#if defined(_WIN32)
#  if defined(CIRCLEFUSE_BUILDING_LIBRARY)
#    define CF_API __declspec(dllexport)
#  else
#    define CF_API __declspec(dllimport)
#  endif
#else
#  define CF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cf_status {
  CF_OK = 0,
  CF_ERR_INVALID_ARGUMENT = 1,
  CF_ERR_PARSE = 2,
  CF_ERR_VALIDATION = 3,
  CF_ERR_NOT_FOUND = 4,
  CF_ERR_IO = 5,
  CF_ERR_BACKEND = 6,
  CF_ERR_CONFLICT = 7,
  CF_ERR_INTERNAL = 8
} cf_status;

typedef struct cf_circle {
  double cx;
  double cy;
  double r;
} cf_circle;

CF_API const char* cf_version(void);
CF_API const char* cf_status_name(cf_status status);
/* Message of the last failed call on this thread ("" if none). */
CF_API const char* cf_last_error(void);
CF_API void cf_string_free(char* s);

/* ---- geometry ---- */
CF_API cf_status cf_intersection_area(const cf_circle* a, const cf_circle* b, double* out);
CF_API cf_status cf_ciou(const cf_circle* a, const cf_circle* b, double* out);

/* ---- tiling ----
 * tiling_json may be NULL or a JSON object {"patch_size":..,"overlap_fraction":..}.
 * Writes the patch list as a JSON array. */
CF_API cf_status cf_tile(const char* slide_id, int64_t width, int64_t height,
                         const char* tiling_json, char** out_patches_json);

/* ---- synthetic ensembles ----
 * Writes gt.json, patches.json and model_<k>.detections.json into out_dir.
 * When tiled is non-zero the detections are split across the patch grid of
 * tiling_json; otherwise a single whole-slide patch "0_0_0_0" is used. */
CF_API cf_status cf_simulate(const char* synth_config_json, const char* out_dir, int tiled,
                             const char* tiling_json, char** out_summary_json);

/* ---- end-to-end pipeline ---- */
typedef struct cf_pipeline cf_pipeline;

/* config_json: see README ("Pipeline configuration"). */
CF_API cf_status cf_pipeline_create(const char* config_json, cf_pipeline** out);
/* Runs every stage. Output paths may be NULL to skip that file. */
CF_API cf_status cf_pipeline_run(cf_pipeline* pipeline, const char* fused_path,
                                 const char* geojson_path, const char* manifest_path);
/* Manifest of the last run as JSON. */
CF_API cf_status cf_pipeline_manifest(const cf_pipeline* pipeline, char** out_json);
/* Fused document of the last run as JSON. */
CF_API cf_status cf_pipeline_fused(const cf_pipeline* pipeline, char** out_json);
CF_API void cf_pipeline_destroy(cf_pipeline* pipeline);

/* ---- evaluation ----
 * pred_path: fused JSON or GeoJSON. gt_path: ground-truth
 * JSON. eval_config_json may be NULL. out_table may be NULL. */
CF_API cf_status cf_evaluate_files(const char* pred_path, const char* gt_path,
                                   const char* eval_config_json, char** out_report_json,
                                   char** out_table);

/* ---- benchmark ----
 * Runs the synthetic method comparison. out_results_json may be NULL. */
CF_API cf_status cf_bench(const char* bench_config_json, char** out_table_markdown,
                          char** out_results_json);

/* ---- review service ---- */
typedef struct cf_review_server cf_review_server;

/* options_json: {"input": path, "export": path, "image": path?,
 * "downsample": num?, "width": int?, "height": int?, "token": str?} */
CF_API cf_status cf_review_server_create(const char* options_json, cf_review_server** out);
/* Binds host:port (port 0 picks a free port) and reports the bound port. */
CF_API cf_status cf_review_server_bind(cf_review_server* server, const char* host, int port,
                                       int* out_port);
/* Blocks serving requests until cf_review_server_stop() is called. */
CF_API cf_status cf_review_server_serve(cf_review_server* server);
/* Stops serving and persists the current state (GeoJSON + edit log). */
CF_API cf_status cf_review_server_stop(cf_review_server* server);
CF_API void cf_review_server_destroy(cf_review_server* server);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* CIRCLEFUSE_H_ */
