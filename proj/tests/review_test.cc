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
#include "circlefuse/review.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <thread>

#include "circlefuse/error.h"
#include "circlefuse/geojson_io.h"
#include "circlefuse/io.h"
#include "circlefuse/json_io.h"
#include "httplib.h"

namespace circlefuse {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// 45 fused detections: 40 with all five models, 3 with two, 2 with one.
FusedDocument fixture() {
  FusedDocument doc{"fixture", {}};
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> sc(0.3, 0.95);
  auto add = [&](int count, int i) {
    FusedDetection f;
    f.circle = Circle{100.0 + 150.0 * (doc.fused.size() % 9), 100.0 + 150.0 * (doc.fused.size() / 9), 40.0 + i};
    f.score = count == 1 ? 0.9 + 0.01 * i : sc(rng);
    for (int m = 0; m < count; ++m) f.members.push_back(Detection{f.circle, f.score, "model_" + std::to_string(m + 1), kDefaultLabel});
    f.count = count;
    doc.fused.push_back(f);
  };
  for (int i = 0; i < 40; ++i) add(5, i);
  for (int i = 0; i < 3; ++i) add(2, i);
  for (int i = 0; i < 2; ++i) add(1, i);
  categorize(doc.fused);
  return doc;
}

class ReviewTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("circlefuse_review_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir_);
    write_text_file(dir_ / "fused.json", serialize_fused(fixture()));
    options_.input_path = dir_ / "fused.json";
    options_.export_path = dir_ / "reviewed.geojson";
    service_ = std::make_shared<ReviewService>(options_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string id_with_count(int count) const {
    const ReviewState state = service_->snapshot();
    for (const auto& r : state.records()) {
      if (r.detection.count == count) return r.id;
    }
    return "";
  }

  fs::path dir_;
  ReviewOptions options_;
  std::shared_ptr<ReviewService> service_;
};

TEST_F(ReviewTest, SlideInfoCounts) {
  const json info = service_->slide_info();
  EXPECT_EQ(info.at("slide_id"), "fixture");
  EXPECT_EQ(info.at("total"), 45);
  EXPECT_EQ(info.at("counts"), (json{{"consensus_1", 2}, {"consensus_2", 3}, {"consensus_5", 40}}));
  EXPECT_EQ(info.at("image").at("available"), false);
}

TEST_F(ReviewTest, LowConsensusQueue) {
  const json queue = service_->detections({{"max_count", "2"}}).at("detections");
  ASSERT_EQ(queue.size(), 5u);
  for (size_t i = 1; i < queue.size(); ++i) {
    const int c0 = queue[i - 1].at("count"), c1 = queue[i].at("count");
    EXPECT_LE(c0, c1);
    if (c0 == c1) EXPECT_LE(queue[i - 1].at("score").get<double>(), queue[i].at("score").get<double>());
  }
  EXPECT_EQ(queue[0].at("count"), 1);
  EXPECT_EQ(queue[0].at("status"), "pending");
  EXPECT_EQ(service_->detections({{"min_count", "5"}}).at("detections").size(), 40u);
  EXPECT_EQ(service_->detections({{"min_score", "0.9"}, {"max_count", "1"}}).at("detections").size(), 2u);
  EXPECT_EQ(service_->detections({}).at("detections").size(), 45u);
}

TEST_F(ReviewTest, MalformedFilterNamesField) {
  try {
    service_->detections({{"min_count", "two"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
    EXPECT_EQ(std::string(e.what()).rfind("min_count", 0), 0u);
  }
}

TEST_F(ReviewTest, EditsUpdateStateAndReplay) {
  const std::string weak = id_with_count(1);
  const std::string pair = id_with_count(2);
  const std::string strong = id_with_count(5);
  EXPECT_EQ(service_->apply({{"op", "reject"}, {"target_id", weak}, {"actor", "r1"}}).at("status"), "rejected");
  EXPECT_EQ(service_->slide_info().at("counts").at("consensus_1"), 1);
  EXPECT_EQ(service_->apply({{"op", "accept"}, {"target_id", strong}}).at("status"), "accepted");
  const json moved = service_->apply({{"op", "move"}, {"target_id", pair}, {"payload", {{"dx", 3}, {"dy", -2}}}});
  EXPECT_EQ(moved.at("status"), "edited");
  const json resized = service_->apply({{"op", "resize"}, {"target_id", pair}, {"payload", {{"new_r", 12.5}}}, {"revision", 1}});
  EXPECT_EQ(resized.at("r"), 12.5);
  EXPECT_EQ(resized.at("revision"), 2);
  const json added = service_->apply({{"op", "add"}, {"payload", {{"cx", 5000}, {"cy", 5000}, {"r", 30}}}});
  EXPECT_EQ(added.at("status"), "human_added");
  EXPECT_EQ(added.at("category"), "human");
  EXPECT_EQ(service_->detection(added.at("id")), added);
  EXPECT_EQ(service_->apply({{"op", "relabel"}, {"target_id", strong}, {"payload", {{"label", "sclerotic"}}}}).at("label"),
            "sclerotic");

  const auto log = service_->edit_log();
  ASSERT_EQ(log.size(), 6u);
  for (const auto& op : log) EXPECT_FALSE(op.timestamp.empty());
  const ReviewState replayed = replay(service_->initial_state(), log);
  EXPECT_TRUE(same_state(replayed, service_->snapshot()));

  // Replaying the serialized log gives the same result.
  const auto parsed = edit_log_from_json(json::parse(edit_log_to_json(log).dump()));
  EXPECT_TRUE(same_state(replay(service_->initial_state(), parsed), service_->snapshot()));
}

TEST_F(ReviewTest, RejectedEditsLeaveStateUntouched) {
  const std::string pair = id_with_count(2);
  auto code = [&](const json& body) {
    try {
      service_->apply(body);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInternal;
  };
  EXPECT_EQ(code({{"op", "accept"}, {"target_id", "f999"}}), ErrorCode::kNotFound);
  EXPECT_EQ(code({{"op", "resize"}, {"target_id", pair}, {"payload", {{"new_r", -1}}}}), ErrorCode::kValidation);
  EXPECT_EQ(code({{"op", "add"}, {"payload", {{"cx", 1}, {"cy", 1}}}}), ErrorCode::kValidation);
  EXPECT_EQ(code({{"op", "explode"}, {"target_id", pair}}), ErrorCode::kValidation);
  EXPECT_EQ(code({{"op", "accept"}, {"target_id", pair}, {"revision", 3}}), ErrorCode::kConflict);
  EXPECT_TRUE(service_->edit_log().empty());
  EXPECT_TRUE(same_state(service_->snapshot(), service_->initial_state()));
}

TEST_F(ReviewTest, ExportAfterRejection) {
  service_->apply({{"op", "reject"}, {"target_id", id_with_count(1)}});
  const json out = service_->export_state(false);
  EXPECT_EQ(out.at("features"), 44);
  const json geo = json::parse(read_text_file(options_.export_path));
  EXPECT_EQ(geo.at("features").size(), 44u);
  EXPECT_TRUE(fs::exists(edit_log_path_for(options_.export_path)));
  EXPECT_EQ(service_->export_state(true).at("features"), 45);

  // Reloading the exported GeoJSON restores review statuses.
  const ReviewState reloaded = load_review_state(options_.export_path, {});
  size_t rejected = 0;
  for (const auto& r : reloaded.records()) rejected += r.status == ReviewStatus::kRejected;
  EXPECT_EQ(rejected, 1u);
}

class ReviewHttpTest : public ReviewTest {
 protected:
  void SetUp() override {
    ReviewTest::SetUp();
    server_ = std::make_unique<ReviewServer>(service_);
    port_ = server_->bind("127.0.0.1", 0);
    thread_ = std::thread([this] { server_->serve(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    for (int i = 0; i < 200 && !server_->running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  void TearDown() override {
    server_->stop();
    thread_.join();
    ReviewTest::TearDown();
  }

  std::unique_ptr<ReviewServer> server_;
  int port_ = 0;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

TEST_F(ReviewHttpTest, ReadEndpoints) {
  auto res = client_->Get("/api/slide");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body).at("counts").at("consensus_5"), 40);

  res = client_->Get("/api/detections?max_count=2");
  ASSERT_TRUE(res);
  EXPECT_EQ(json::parse(res->body).at("detections").size(), 5u);

  res = client_->Get("/api/detections?min_score=abc");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(json::parse(res->body).at("field"), "min_score");

  res = client_->Get("/api/detections/f0");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  res = client_->Get("/api/detections/nope");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  res = client_->Get("/api/image");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
}

TEST_F(ReviewHttpTest, EditRoundTrips) {
  const std::string weak = id_with_count(1);
  for (const json& body : {json{{"op", "accept"}, {"target_id", "f0"}},
                           json{{"op", "reject"}, {"target_id", weak}},
                           json{{"op", "move"}, {"target_id", "f1"}, {"payload", {{"dx", 1}, {"dy", 1}}}},
                           json{{"op", "resize"}, {"target_id", "f2"}, {"payload", {{"new_r", 20}}}},
                           json{{"op", "add"}, {"payload", {{"cx", 10}, {"cy", 10}, {"r", 5}}}}}) {
    auto res = client_->Post("/api/edits", body.dump(), "application/json");
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200) << res->body;
    const json rec = json::parse(res->body);
    // The returned record equals a fresh GET.
    auto fresh = client_->Get("/api/detections/" + rec.at("id").get<std::string>());
    ASSERT_TRUE(fresh);
    EXPECT_EQ(json::parse(fresh->body), rec);
  }
  auto res = client_->Post("/api/edits", R"({"op":"accept","target_id":"f0","revision":0})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 409);
  res = client_->Post("/api/edits", "{oops", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  res = client_->Post("/api/edits", R"({"op":"resize","target_id":"f0","payload":{"new_r":0}})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(json::parse(res->body).at("field"), "payload.new_r");

  res = client_->Post("/api/export", "", "application/json");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200) << res->body;
  EXPECT_EQ(json::parse(res->body).at("features"), 45);  // 45 - 1 rejected + 1 added

  res = client_->Get("/api/edits");
  ASSERT_TRUE(res);
  EXPECT_EQ(json::parse(res->body).at("ops").size(), 5u);
}

TEST_F(ReviewHttpTest, TokenGuardsMutations) {
  server_->stop();
  thread_.join();
  options_.token = "secret";
  service_ = std::make_shared<ReviewService>(options_);
  server_ = std::make_unique<ReviewServer>(service_);
  port_ = server_->bind("127.0.0.1", 0);
  thread_ = std::thread([this] { server_->serve(); });
  client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  for (int i = 0; i < 200 && !server_->running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));

  auto res = client_->Post("/api/edits", R"({"op":"accept","target_id":"f0"})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 401);
  httplib::Headers headers{{"Authorization", "Bearer secret"}};
  res = client_->Post("/api/edits", headers, R"({"op":"accept","target_id":"f0"})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  res = client_->Get("/api/slide");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
}

}  // namespace
}  // namespace circlefuse
