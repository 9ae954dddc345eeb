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
// circlefuse command-line tool. Every subcommand goes through the C API.

#include <pthread.h>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "circlefuse.h"
#include "json.hpp"

using nlohmann::json;

namespace {

class CliError : public std::runtime_error {
 public:
  CliError(cf_status status, const std::string& msg) : std::runtime_error(msg), status_(status) {}
  cf_status status() const { return status_; }

 private:
  cf_status status_;
};

void check(cf_status status, const char* what) {
  if (status != CF_OK) {
    throw CliError(status, std::string(what) + ": " + cf_status_name(status) + ": " + cf_last_error());
  }
}

// Owns a string returned by the library.
struct CfString {
  char* p = nullptr;
  ~CfString() { cf_string_free(p); }
  std::string str() const { return p != nullptr ? std::string(p) : std::string(); }
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw CliError(CF_ERR_IO, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    json j = json::parse(ss.str());
    if (!j.is_object()) throw CliError(CF_ERR_PARSE, path + ": config must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw CliError(CF_ERR_PARSE, path + ": " + e.what());
  }
}

void write_file(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  const std::filesystem::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(target.parent_path(), ec);
  }
  std::ofstream out(target, std::ios::binary);
  if (!out) throw CliError(CF_ERR_IO, "cannot write " + path);
  out << text;
}

template <typename T>
void set_if(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

int exit_code(cf_status status) {
  switch (status) {
    case CF_ERR_INVALID_ARGUMENT:
      return 2;
    case CF_ERR_PARSE:
    case CF_ERR_VALIDATION:
      return 3;
    case CF_ERR_NOT_FOUND:
    case CF_ERR_IO:
      return 4;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"circlefuse: circle detection fusion for whole-slide images"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cf_version()));

  // tile
  auto* tile = app.add_subcommand("tile", "Write the patch grid for a slide");
  std::string tile_config, tile_out, tile_slide;
  std::optional<int64_t> tile_w, tile_h, tile_patch;
  std::optional<double> tile_overlap;
  tile->add_option("--config", tile_config, "JSON config with slide and tiling");
  tile->add_option("--slide-id", tile_slide, "Slide identifier");
  tile->add_option("--width", tile_w, "Slide width in pixels");
  tile->add_option("--height", tile_h, "Slide height in pixels");
  tile->add_option("--patch", tile_patch, "Patch edge length");
  tile->add_option("--overlap", tile_overlap, "Overlap fraction in [0,1)");
  tile->add_option("-o,--output", tile_out, "Output patches.json (stdout if omitted)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate synthetic ground truth and model detections");
  std::string sim_config, sim_out;
  std::optional<uint64_t> sim_seed;
  bool sim_tiled = false;
  std::optional<int64_t> sim_patch;
  std::optional<double> sim_overlap;
  sim->add_option("--config", sim_config, "Synthetic generator config (JSON)");
  sim->add_option("--seed", sim_seed, "Override the seed");
  sim->add_flag("--tiled", sim_tiled, "Split detections over the patch grid");
  sim->add_option("--patch", sim_patch, "Patch edge length when tiled");
  sim->add_option("--overlap", sim_overlap, "Overlap fraction when tiled");
  sim->add_option("-o,--output", sim_out, "Output directory")->required();

  // fuse
  auto* fuse = app.add_subcommand("fuse", "Run the full pipeline: assemble, NMS, WCF, export");
  std::string fuse_config, fuse_patches, fuse_out, fuse_geojson, fuse_manifest, fuse_retention;
  std::vector<std::string> fuse_detections;
  std::optional<double> fuse_nms, fuse_tmatch, fuse_tscore;
  std::optional<int> fuse_tcount, fuse_workers;
  fuse->add_option("--config", fuse_config, "Pipeline config (JSON)");
  fuse->add_option("--patches", fuse_patches, "Patch list from `tile`");
  fuse->add_option("--detections", fuse_detections, "Per-model detection files");
  fuse->add_option("--nms-ciou", fuse_nms, "Per-model NMS cIoU threshold");
  fuse->add_option("--t-match", fuse_tmatch, "WCF cluster match threshold");
  fuse->add_option("--t-count", fuse_tcount, "WCF retention count threshold");
  fuse->add_option("--t-score", fuse_tscore, "WCF retention score threshold");
  fuse->add_option("--retention", fuse_retention, "count_or_score, count_and_score or count_only");
  fuse->add_option("--workers", fuse_workers, "Worker threads");
  fuse->add_option("-o,--output", fuse_out, "Fused JSON output");
  fuse->add_option("--geojson", fuse_geojson, "GeoJSON output");
  fuse->add_option("--manifest", fuse_manifest, "Run manifest output");

  // eval
  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  std::string eval_config, eval_pred, eval_gt, eval_out, eval_thresholds;
  std::optional<int> eval_workers;
  eval->add_option("--config", eval_config, "Evaluation config (JSON)");
  eval->add_option("--pred", eval_pred, "Fused JSON or GeoJSON predictions")->required();
  eval->add_option("--gt", eval_gt, "Ground-truth JSON")->required();
  eval->add_option("--thresholds", eval_thresholds, "lo:hi:step or a comma separated list");
  eval->add_option("--workers", eval_workers, "Worker threads");
  eval->add_option("-o,--output", eval_out, "Report JSON output");

  // bench
  auto* bench = app.add_subcommand("bench", "Run the multi-seed synthetic comparison");
  std::string bench_config, bench_out, bench_json;
  std::optional<int> bench_seeds, bench_workers;
  bench->add_option("--config", bench_config, "Benchmark config (JSON)");
  bench->add_option("--seeds", bench_seeds, "Number of seeds");
  bench->add_option("--workers", bench_workers, "Worker threads");
  bench->add_option("-o,--output", bench_out, "Markdown table output (stdout if omitted)");
  bench->add_option("--json", bench_json, "Per-seed results as JSON");

  // serve
  auto* serve = app.add_subcommand("serve", "Serve a fused set for review");
  std::string serve_config, serve_fused, serve_geojson, serve_image, serve_host = "127.0.0.1",
                                                                      serve_token;
  std::optional<double> serve_downsample;
  std::optional<int64_t> serve_w, serve_h;
  int serve_port = 8080;
  serve->add_option("--config", serve_config, "Review options (JSON)");
  serve->add_option("--fused", serve_fused, "Fused JSON or GeoJSON to review");
  serve->add_option("--geojson", serve_geojson, "Where reviewed GeoJSON is exported");
  serve->add_option("--image", serve_image, "Optional background image");
  serve->add_option("--downsample", serve_downsample, "Slide pixels per image pixel");
  serve->add_option("--width", serve_w, "Slide width (defaults to the detection extent)");
  serve->add_option("--height", serve_h, "Slide height");
  serve->add_option("--host", serve_host, "Bind address");
  serve->add_option("--port", serve_port, "Port, 0 picks a free one");
  serve->add_option("--token", serve_token, "Require this bearer token on edit and export requests");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*tile) {
      json cfg = load_config(tile_config);
      json slide = cfg.value("slide", json::object());
      json tiling = cfg.value("tiling", json::object());
      if (!tile_slide.empty()) slide["slide_id"] = tile_slide;
      set_if(slide, "width", tile_w);
      set_if(slide, "height", tile_h);
      set_if(tiling, "patch_size", tile_patch);
      set_if(tiling, "overlap_fraction", tile_overlap);
      if (!slide.contains("width") || !slide.contains("height")) {
        throw CliError(CF_ERR_INVALID_ARGUMENT, "tile: --width and --height are required");
      }
      CfString out;
      check(cf_tile(slide.value("slide_id", "").c_str(), slide.at("width").get<int64_t>(),
                    slide.at("height").get<int64_t>(), tiling.dump().c_str(), &out.p),
            "tile");
      write_file(tile_out, out.str());
    } else if (*sim) {
      json cfg = load_config(sim_config);
      json synth = cfg.contains("synth") ? cfg.at("synth") : cfg;
      set_if(synth, "seed", sim_seed);
      json tiling = cfg.value("tiling", json::object());
      set_if(tiling, "patch_size", sim_patch);
      set_if(tiling, "overlap_fraction", sim_overlap);
      CfString summary;
      check(cf_simulate(synth.dump().c_str(), sim_out.c_str(), sim_tiled ? 1 : 0,
                        tiling.dump().c_str(), &summary.p),
            "simulate");
      std::cout << summary.str();
    } else if (*fuse) {
      json cfg = load_config(fuse_config);
      if (!fuse_patches.empty()) cfg["patches_path"] = fuse_patches;
      if (!fuse_detections.empty()) {
        cfg["backend"]["kind"] = "file";
        cfg["backend"]["detection_files"] = fuse_detections;
      }
      set_if(cfg, "nms_ciou", fuse_nms);
      set_if(cfg, "workers", fuse_workers);
      json wcf = cfg.value("wcf", json::object());
      set_if(wcf, "t_match", fuse_tmatch);
      set_if(wcf, "t_count", fuse_tcount);
      set_if(wcf, "t_score", fuse_tscore);
      if (!fuse_retention.empty()) wcf["retention_policy"] = fuse_retention;
      cfg["wcf"] = wcf;
      if (fuse_out.empty() && fuse_geojson.empty()) {
        throw CliError(CF_ERR_INVALID_ARGUMENT, "fuse: give -o and/or --geojson");
      }
      cf_pipeline* p = nullptr;
      check(cf_pipeline_create(cfg.dump().c_str(), &p), "fuse");
      std::unique_ptr<cf_pipeline, void (*)(cf_pipeline*)> guard(p, cf_pipeline_destroy);
      check(cf_pipeline_run(p, fuse_out.empty() ? nullptr : fuse_out.c_str(),
                            fuse_geojson.empty() ? nullptr : fuse_geojson.c_str(),
                            fuse_manifest.empty() ? nullptr : fuse_manifest.c_str()),
            "fuse");
      CfString manifest;
      check(cf_pipeline_manifest(p, &manifest.p), "fuse");
      const json m = json::parse(manifest.str());
      const json& counts = m.at("counts");
      std::cout << "detections in      " << counts.at("detections_in") << "\n"
                << "after NMS          " << counts.at("detections_after_nms") << "\n"
                << "clusters formed    " << counts.at("clusters_formed") << "\n"
                << "fused retained     " << counts.at("fused_retained") << "\n";
      if (counts.at("failed_patches").get<int64_t>() > 0) {
        std::cerr << "warning: " << counts.at("failed_patches") << " patches failed, see manifest\n";
      }
    } else if (*eval) {
      json cfg = load_config(eval_config);
      if (!eval_thresholds.empty()) cfg["thresholds"] = eval_thresholds;
      set_if(cfg, "workers", eval_workers);
      CfString report, table;
      check(cf_evaluate_files(eval_pred.c_str(), eval_gt.c_str(), cfg.dump().c_str(), &report.p,
                              &table.p),
            "eval");
      if (!eval_out.empty()) write_file(eval_out, report.str());
      std::cout << table.str();
    } else if (*bench) {
      json cfg = load_config(bench_config);
      set_if(cfg, "seeds", bench_seeds);
      set_if(cfg, "workers", bench_workers);
      CfString table, results;
      check(cf_bench(cfg.dump().c_str(), &table.p, bench_json.empty() ? nullptr : &results.p),
            "bench");
      write_file(bench_out, table.str());
      if (!bench_json.empty()) write_file(bench_json, results.str());
    } else if (*serve) {
      json cfg = load_config(serve_config);
      if (!serve_fused.empty()) cfg["input"] = serve_fused;
      if (!serve_geojson.empty()) cfg["export"] = serve_geojson;
      if (!serve_image.empty()) cfg["image"] = serve_image;
      if (!serve_token.empty()) cfg["token"] = serve_token;
      set_if(cfg, "downsample", serve_downsample);
      set_if(cfg, "width", serve_w);
      set_if(cfg, "height", serve_h);

      // Block the stop signals before any thread exists so sigwait sees them.
      sigset_t signals;
      sigemptyset(&signals);
      sigaddset(&signals, SIGINT);
      sigaddset(&signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &signals, nullptr);

      cf_review_server* server = nullptr;
      check(cf_review_server_create(cfg.dump().c_str(), &server), "serve");
      std::unique_ptr<cf_review_server, void (*)(cf_review_server*)> guard(
          server, cf_review_server_destroy);
      int port = 0;
      check(cf_review_server_bind(server, serve_host.c_str(), serve_port, &port), "serve");
      std::cout << "listening on http://" << serve_host << ":" << port << std::endl;

      std::thread waiter([server, signals] {
        int sig = 0;
        sigwait(&signals, &sig);
        cf_review_server_stop(server);
      });
      const cf_status served = cf_review_server_serve(server);
      // serve() only returns after stop(); wake the waiter if it is still blocked.
      pthread_kill(waiter.native_handle(), SIGTERM);
      waiter.join();
      check(served, "serve");
    }
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.status());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
