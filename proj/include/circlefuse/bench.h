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
#ifndef CIRCLEFUSE_BENCH_H_
#define CIRCLEFUSE_BENCH_H_

#include <map>
#include <string>
#include <vector>

#include "circlefuse/evaluation.h"
#include "circlefuse/fusion.h"
#include "circlefuse/suppression.h"
#include "circlefuse/synthsim.h"
#include "json.hpp"

namespace circlefuse {

// Compares single models, pooled NMS, pooled Soft-NMS and WCF on seeded
// synthetic ensembles. Seed i uses synth.seed + i.
struct BenchConfig {
  SynthConfig synth;
  int n_seeds = 20;
  double nms_ciou = 0.5;
  SoftNmsConfig soft_nms;
  WcfConfig wcf;
  EvalConfig eval;
  int workers = 1;
};

inline constexpr const char* kMethodModelAvg = "model avg.";
inline constexpr const char* kMethodNmsPool = "nms-pool";
inline constexpr const char* kMethodSoftNmsPool = "soft-nms-pool";
inline constexpr const char* kMethodWcf = "wcf";

struct MethodScores {
  std::vector<EvalReport> per_seed;

  double mean_map() const;
  double mean_ap50() const;
  double mean_ap75() const;
  double mean_recall() const;
  std::vector<double> maps() const;
};

struct BenchResult {
  std::vector<uint64_t> seeds;
  // Row order of the comparison table.
  std::vector<std::string> methods;
  std::map<std::string, MethodScores> scores;
};

BenchResult run_bench(const BenchConfig& cfg);

// P(X >= wins) for X ~ Binomial(n, 1/2), where n counts the untied pairs
// and wins counts pairs with a > b. Returns 1 when every pair ties.
double sign_test_greater(const std::vector<double>& a, const std::vector<double>& b);

// Markdown table of per-method means plus the paired sign tests.
std::string bench_table_markdown(const BenchResult& result);
nlohmann::json bench_to_json(const BenchResult& result);

BenchConfig bench_config_from_json(const nlohmann::json& j, BenchConfig base = {});

}  // namespace circlefuse

#endif  // CIRCLEFUSE_BENCH_H_
