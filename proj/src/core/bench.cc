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
#include "circlefuse/bench.h"

#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "circlefuse/error.h"
#include "circlefuse/json_io.h"
#include "circlefuse/parallel.h"
#include "json_util.h"

namespace circlefuse {

namespace ju = jsonutil;
using nlohmann::json;

namespace {

template <typename Fn>
double mean_of(const std::vector<EvalReport>& reports, Fn&& field) {
  if (reports.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : reports) s += field(r);
  return s / static_cast<double>(reports.size());
}

std::vector<ScoredCircle> to_scored(const std::vector<Detection>& dets) {
  std::vector<ScoredCircle> out;
  out.reserve(dets.size());
  for (const auto& d : dets) out.push_back(ScoredCircle{d.circle, d.score, d.label});
  return out;
}

std::vector<ScoredCircle> to_scored(const std::vector<FusedDetection>& fused) {
  std::vector<ScoredCircle> out;
  out.reserve(fused.size());
  for (const auto& f : fused) out.push_back(ScoredCircle{f.circle, f.score, f.label});
  return out;
}

// Per-seed arithmetic mean of the single-model reports.
EvalReport average_reports(const std::vector<EvalReport>& reports) {
  EvalReport avg = reports.front();
  const double n = static_cast<double>(reports.size());
  for (size_t t = 0; t < avg.ap_per_threshold.size(); ++t) {
    double ap = 0.0, rec = 0.0;
    for (const auto& r : reports) {
      ap += r.ap_per_threshold[t].second;
      rec += r.recall_per_threshold[t].second;
    }
    avg.ap_per_threshold[t].second = ap / n;
    avg.recall_per_threshold[t].second = rec / n;
  }
  avg.map_50_95 = mean_of(reports, [](const EvalReport& r) { return r.map_50_95; });
  avg.ap_50 = mean_of(reports, [](const EvalReport& r) { return r.ap_50; });
  avg.ap_75 = mean_of(reports, [](const EvalReport& r) { return r.ap_75; });
  avg.average_recall = mean_of(reports, [](const EvalReport& r) { return r.average_recall; });
  size_t n_pred = 0;
  for (const auto& r : reports) n_pred += r.n_pred;
  avg.n_pred = n_pred / reports.size();
  return avg;
}

}  // namespace

double MethodScores::mean_map() const {
  return mean_of(per_seed, [](const EvalReport& r) { return r.map_50_95; });
}
double MethodScores::mean_ap50() const {
  return mean_of(per_seed, [](const EvalReport& r) { return r.ap_50; });
}
double MethodScores::mean_ap75() const {
  return mean_of(per_seed, [](const EvalReport& r) { return r.ap_75; });
}
double MethodScores::mean_recall() const {
  return mean_of(per_seed, [](const EvalReport& r) { return r.average_recall; });
}
std::vector<double> MethodScores::maps() const {
  std::vector<double> out;
  for (const auto& r : per_seed) out.push_back(r.map_50_95);
  return out;
}

BenchResult run_bench(const BenchConfig& cfg) {
  validate(cfg.synth);
  validate(cfg.wcf);
  validate(cfg.eval);
  if (cfg.n_seeds < 1) fail(ErrorCode::kInvalidArgument, "bench needs at least one seed");

  BenchResult result;
  const int k_models = cfg.synth.n_models;
  for (int k = 0; k < k_models; ++k) result.methods.push_back(synthetic_model_id(k));
  for (const char* m : {kMethodModelAvg, kMethodNmsPool, kMethodSoftNmsPool, kMethodWcf}) {
    result.methods.emplace_back(m);
  }
  for (int i = 0; i < cfg.n_seeds; ++i) result.seeds.push_back(cfg.synth.seed + static_cast<uint64_t>(i));

  // per_seed[seed][method]
  std::vector<std::map<std::string, EvalReport>> per_seed(result.seeds.size());
  parallel_for(result.seeds.size(), cfg.workers, [&](size_t s) {
    SynthConfig synth = cfg.synth;
    synth.seed = result.seeds[s];
    const GroundTruthSet gt = generate_ground_truth(synth);
    auto& out = per_seed[s];

    std::vector<ModelRun> deduped;
    std::vector<EvalReport> singles;
    for (int k = 0; k < k_models; ++k) {
      ModelRun run = simulate_model(gt, synth, k);
      run.detections = nms(std::move(run.detections), cfg.nms_ciou);
      singles.push_back(evaluate(to_scored(run.detections), gt.circles, cfg.eval));
      out[run.model_id] = singles.back();
      deduped.push_back(std::move(run));
    }
    out[kMethodModelAvg] = average_reports(singles);

    const std::vector<Detection> pooled = pool(deduped);
    out[kMethodNmsPool] = evaluate(to_scored(nms(pooled, cfg.nms_ciou)), gt.circles, cfg.eval);
    out[kMethodSoftNmsPool] =
        evaluate(to_scored(soft_nms(pooled, cfg.soft_nms)), gt.circles, cfg.eval);
    out[kMethodWcf] = evaluate(to_scored(wcf(deduped, cfg.wcf)), gt.circles, cfg.eval);
  });

  for (const auto& method : result.methods) {
    auto& scores = result.scores[method];
    for (auto& seed_reports : per_seed) scores.per_seed.push_back(seed_reports.at(method));
  }
  return result;
}

double sign_test_greater(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) fail(ErrorCode::kInvalidArgument, "sign test needs paired samples");
  int n = 0, wins = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) continue;
    ++n;
    if (a[i] > b[i]) ++wins;
  }
  if (n == 0) return 1.0;
  // Sum of C(n,i) / 2^n in log space.
  double p = 0.0;
  for (int i = wins; i <= n; ++i) {
    p += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) -
                  n * std::log(2.0));
  }
  return std::min(1.0, p);
}

std::string bench_table_markdown(const BenchResult& result) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  out << "| Method | mAP(0.5:0.95) | mAP(@0.5) | mAP(@0.75) | Average Recall(0.5:0.95) |\n"
      << "|---|---|---|---|---|\n";
  for (const auto& method : result.methods) {
    const auto& s = result.scores.at(method);
    out << "| " << method << " | " << s.mean_map() << " | " << s.mean_ap50() << " | "
        << s.mean_ap75() << " | " << s.mean_recall() << " |\n";
  }
  out << "\nMeans over " << result.seeds.size() << " seeds.\n\n";
  out << "| Paired one-sided sign test on mAP(0.5:0.95) | wins | p-value |\n"
      << "|---|---|---|\n";
  auto row = [&](const char* a, const char* b) {
    const auto va = result.scores.at(a).maps();
    const auto vb = result.scores.at(b).maps();
    int wins = 0;
    for (size_t i = 0; i < va.size(); ++i) wins += va[i] > vb[i] ? 1 : 0;
    out << "| " << a << " > " << b << " | " << wins << "/" << va.size() << " | "
        << std::scientific << std::setprecision(2) << sign_test_greater(va, vb) << std::fixed
        << std::setprecision(3) << " |\n";
  };
  row(kMethodWcf, kMethodNmsPool);
  row(kMethodWcf, kMethodModelAvg);
  row(kMethodNmsPool, kMethodSoftNmsPool);
  return out.str();
}

json bench_to_json(const BenchResult& result) {
  json methods = json::object();
  for (const auto& method : result.methods) {
    const auto& s = result.scores.at(method);
    json seeds = json::array();
    for (const auto& r : s.per_seed) seeds.push_back(report_to_json(r));
    methods[method] = json{{"mean_map_50_95", s.mean_map()},
                           {"mean_ap_50", s.mean_ap50()},
                           {"mean_ap_75", s.mean_ap75()},
                           {"mean_average_recall", s.mean_recall()},
                           {"per_seed", std::move(seeds)}};
  }
  return json{{"seeds", result.seeds}, {"order", result.methods}, {"methods", std::move(methods)}};
}

BenchConfig bench_config_from_json(const json& j, BenchConfig base) {
  if (!j.is_object()) return base;
  base.synth = synth_config_from_json(j.contains("synth") ? j.at("synth") : j, base.synth);
  base.n_seeds = ju::value_or<int>(j, "seeds", base.n_seeds);
  base.nms_ciou = ju::value_or<double>(j, "nms_ciou", base.nms_ciou);
  if (j.contains("soft_nms")) {
    base.soft_nms.sigma = ju::value_or<double>(j.at("soft_nms"), "sigma", base.soft_nms.sigma);
    base.soft_nms.score_floor =
        ju::value_or<double>(j.at("soft_nms"), "score_floor", base.soft_nms.score_floor);
  }
  if (j.contains("wcf")) base.wcf = wcf_config_from_json(j.at("wcf"), base.wcf);
  if (j.contains("eval")) base.eval = eval_config_from_json(j.at("eval"), base.eval);
  base.workers = ju::value_or<int>(j, "workers", base.workers);
  return base;
}

}  // namespace circlefuse
