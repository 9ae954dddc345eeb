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

#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <random>
#include <thread>

#include "circlefuse/error.h"
#include "circlefuse/tiling.h"
#include "httplib.h"
#include "json.hpp"

namespace circlefuse {
namespace {

using nlohmann::json;

std::string detection_text(const std::string& model, const json& patches) {
  return json{{"schema", kDetectionSchema},
              {"model_id", model},
              {"slide_id", "s1"},
              {"patches", patches}}
      .dump();
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInternal;
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(DetectionFileTest, ParsesAndRoundTrips) {
  const auto text = detection_text(
      "m1", json::array({{{"patch_id", "0_0_0_0"},
                          {"detections", json::array({{{"cx", 10}, {"cy", 20}, {"r", 5}, {"score", 0.7}},
                                                      {{"cx", 1.5},
                                                       {"cy", 2.5},
                                                       {"r", 3},
                                                       {"score", 0.2},
                                                       {"label", "other"}}})}}}));
  const DetectionFile file = parse_detection_file(text);
  EXPECT_EQ(file.model_id, "m1");
  EXPECT_EQ(file.slide_id, "s1");
  ASSERT_EQ(file.patches.at("0_0_0_0").size(), 2u);
  EXPECT_EQ(file.patches.at("0_0_0_0")[0].label, kDefaultLabel);
  EXPECT_EQ(file.patches.at("0_0_0_0")[1].label, "other");

  const DetectionFile again = parse_detection_file(serialize_detection_file(file));
  EXPECT_EQ(again.patches, file.patches);
  EXPECT_EQ(again.model_id, file.model_id);
}

TEST(DetectionFileTest, ScoreOutOfRangeIsValidationError) {
  const auto text = detection_text(
      "m1", json::array({{{"patch_id", "0_0_0_0"},
                          {"detections", json::array({{{"cx", 1}, {"cy", 1}, {"r", 2}, {"score", 0.5}},
                                                      {{"cx", 1}, {"cy", 1}, {"r", 2}, {"score", 1.3}}})}}}));
  EXPECT_EQ(code_of([&] { parse_detection_file(text); }), ErrorCode::kValidation);
  EXPECT_NE(message_of([&] { parse_detection_file(text); }).find("patches[0].detections[1]"),
            std::string::npos);
}

TEST(DetectionFileTest, MalformedInputs) {
  EXPECT_EQ(code_of([] { parse_detection_file("{not json"); }), ErrorCode::kParse);
  EXPECT_EQ(code_of([] { parse_detection_file(R"({"schema":"other/1"})"); }), ErrorCode::kParse);
  const auto bad_radius = detection_text(
      "m", json::array({{{"patch_id", "p"},
                         {"detections", json::array({{{"cx", 1}, {"cy", 1}, {"r", 0}, {"score", 0.5}}})}}}));
  EXPECT_EQ(code_of([&] { parse_detection_file(bad_radius); }), ErrorCode::kValidation);
  const auto missing = detection_text(
      "m", json::array({{{"patch_id", "p"}, {"detections", json::array({{{"cx", 1}, {"r", 2}, {"score", 0.5}}})}}}));
  EXPECT_EQ(code_of([&] { parse_detection_file(missing); }), ErrorCode::kParse);
}

TEST(AssembleTest, TranslatesPatchLocalCoordinates) {
  const auto patches = generate_patches({"s1", 1024, 1024}, {512, 0.5});
  DetectionFile file{"m1", "s1", {}};
  file.patches["1_1_256_256"] = {LocalDetection{{10, 20, 5}, 0.8, kDefaultLabel}};
  file.patches["0_0_0_0"] = {LocalDetection{{1, 2, 3}, 0.4, kDefaultLabel}};
  const std::vector<DetectionFile> files{file};
  const auto runs = assemble(files, patches);
  ASSERT_EQ(runs.size(), 1u);
  ASSERT_EQ(runs[0].detections.size(), 2u);
  EXPECT_EQ(runs[0].detections[0].circle, (Circle{266, 276, 5}));
  EXPECT_EQ(runs[0].detections[0].model_id, "m1");
  EXPECT_EQ(runs[0].detections[1].circle, (Circle{1, 2, 3}));
}

TEST(AssembleTest, UnknownPatchIsNotFound) {
  const auto patches = generate_patches({"s1", 1024, 1024}, {512, 0.5});
  DetectionFile file{"m1", "s1", {}};
  file.patches["9_9_999_999"] = {LocalDetection{{1, 1, 1}, 0.5, kDefaultLabel}};
  const std::vector<DetectionFile> files{file};
  EXPECT_EQ(code_of([&] { assemble(files, patches); }), ErrorCode::kNotFound);
}

TEST(AssembleTest, IndependentOfInputOrder) {
  const auto patches = generate_patches({"s1", 2048, 2048}, {512, 0.5});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 500), sc(0, 1);
  std::vector<DetectionFile> files;
  for (int m = 0; m < 3; ++m) {
    DetectionFile f{"m" + std::to_string(m), "s1", {}};
    for (const auto& p : patches) {
      if (sc(rng) < 0.5) continue;
      for (int k = 0; k < 3; ++k) {
        f.patches[p.patch_id].push_back(LocalDetection{{u(rng), u(rng), 5 + u(rng) / 20}, sc(rng), kDefaultLabel});
      }
    }
    files.push_back(f);
  }
  const auto expected = assemble(files, patches);
  auto shuffled_patches = patches;
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(files.begin(), files.end(), rng);
    std::shuffle(shuffled_patches.begin(), shuffled_patches.end(), rng);
    const auto got = assemble(files, shuffled_patches);
    ASSERT_EQ(got.size(), expected.size());
    for (size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].model_id, expected[i].model_id);
      EXPECT_EQ(got[i].detections, expected[i].detections);
    }
  }
}

class StubServer {
 public:
  template <typename Handler>
  explicit StubServer(Handler handler) {
    server_.Post("/v1/infer", handler);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

RemoteConfig fast_config(const std::string& endpoint) {
  RemoteConfig cfg;
  cfg.endpoint = endpoint;
  cfg.initial_backoff = std::chrono::milliseconds(1);
  cfg.timeout = std::chrono::milliseconds(2000);
  return cfg;
}

TEST(RemoteTest, ReturnsPatchLocalDetections) {
  std::atomic<int> calls{0};
  StubServer stub([&](const httplib::Request& req, httplib::Response& res) {
    ++calls;
    const json body = json::parse(req.body);
    EXPECT_EQ(body.at("slide_id"), "s1");
    EXPECT_EQ(body.at("patch").at("w"), 512);
    res.set_content(R"({"detections":[{"cx":5,"cy":6,"r":7,"score":0.9}]})", "application/json");
  });
  const Patch patch{"1_0_256_0", 256, 0, 512, 512};
  const auto dets = infer_remote(fast_config(stub.endpoint()), "s1", patch);
  ASSERT_EQ(dets.size(), 1u);
  EXPECT_EQ(dets[0].circle, (Circle{5, 6, 7}));
  EXPECT_EQ(calls.load(), 1);
}

TEST(RemoteTest, RetriesServerErrorsThenGivesUp) {
  std::atomic<int> calls{0};
  StubServer stub([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 500;
  });
  const Patch patch{"0_0_0_0", 0, 0, 512, 512};
  const std::string msg = message_of([&] { infer_remote(fast_config(stub.endpoint()), "s1", patch); });
  EXPECT_NE(msg.find("patch 0_0_0_0"), std::string::npos) << msg;
  EXPECT_NE(msg.find("3 attempts"), std::string::npos) << msg;
  EXPECT_EQ(calls.load(), 3);
}

TEST(RemoteTest, RecoversAfterTransientFailure) {
  std::atomic<int> calls{0};
  StubServer stub([&](const httplib::Request&, httplib::Response& res) {
    if (++calls < 3) {
      res.status = 503;
      return;
    }
    res.set_content(R"({"detections":[]})", "application/json");
  });
  const Patch patch{"0_0_0_0", 0, 0, 512, 512};
  EXPECT_TRUE(infer_remote(fast_config(stub.endpoint()), "s1", patch).empty());
  EXPECT_EQ(calls.load(), 3);
}

TEST(RemoteTest, ClientErrorsAreNotRetried) {
  std::atomic<int> calls{0};
  StubServer stub([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 422;
  });
  const Patch patch{"0_0_0_0", 0, 0, 512, 512};
  EXPECT_EQ(code_of([&] { infer_remote(fast_config(stub.endpoint()), "s1", patch); }), ErrorCode::kBackend);
  EXPECT_EQ(calls.load(), 1);
}

TEST(RemoteTest, MalformedResponseIsValidationError) {
  StubServer stub([&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"detections":[{"cx":1,"cy":1,"r":1,"score":7}]})", "application/json");
  });
  const Patch patch{"0_0_0_0", 0, 0, 512, 512};
  EXPECT_EQ(code_of([&] { infer_remote(fast_config(stub.endpoint()), "s1", patch); }), ErrorCode::kValidation);
}

TEST(RemoteTest, FailedPatchesAreRecordedNotFatal) {
  StubServer stub([&](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    if (body.at("patch").at("x") == 256 && body.at("patch").at("y") == 256) {
      res.status = 500;
      return;
    }
    res.set_content(R"({"detections":[{"cx":100,"cy":100,"r":10,"score":0.8}]})", "application/json");
  });
  const auto patches = generate_patches({"s1", 1024, 1024}, {512, 0.5});
  const auto run = infer_remote_all(fast_config(stub.endpoint()), "remote_a", "s1", patches, 4);
  ASSERT_EQ(run.failures.size(), 1u);
  EXPECT_EQ(run.failures[0].patch_id, "1_1_256_256");
  EXPECT_EQ(run.failures[0].model_id, "remote_a");
  EXPECT_EQ(run.file.patches.size(), 8u);
}

}  // namespace
}  // namespace circlefuse
