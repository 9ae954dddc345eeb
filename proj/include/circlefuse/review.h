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
#ifndef CIRCLEFUSE_REVIEW_H_
#define CIRCLEFUSE_REVIEW_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "circlefuse/fusion.h"
#include "json.hpp"

namespace circlefuse {

inline constexpr const char* kEditLogSchema = "circlefuse-edits/1";

enum class ReviewStatus { kPending, kAccepted, kRejected, kEdited, kHumanAdded };

const char* to_string(ReviewStatus status) noexcept;
ReviewStatus parse_review_status(const std::string& name);

struct ReviewRecord {
  std::string id;
  FusedDetection detection;
  ReviewStatus status = ReviewStatus::kPending;
  // Incremented by every mutation of this record.
  int64_t revision = 0;
};

enum class EditKind { kAccept, kReject, kMove, kResize, kAdd, kRelabel };

const char* to_string(EditKind kind) noexcept;

struct EditOp {
  EditKind op = EditKind::kAccept;
  std::string target_id;  // empty for add
  double dx = 0.0;        // move
  double dy = 0.0;        // move
  double new_r = 0.0;     // resize
  Circle circle;          // add
  std::string label;      // relabel, optionally add
  std::string actor;
  std::string timestamp;  // UTC, ISO-8601
  // Revision the client last saw; a mismatch is a conflict.
  std::optional<int64_t> revision;
  // Id of the record the op produced or changed, filled in when applied.
  std::string result_id;
};

// Throws kValidation naming the offending field.
EditOp edit_op_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EditOp& op);

nlohmann::json edit_log_to_json(std::span<const EditOp> ops);
std::vector<EditOp> edit_log_from_json(const nlohmann::json& doc);

std::string utc_timestamp_now();

// Review session state. Initial records get ids "f<N>" in load order and
// human additions get "h<N>" in creation order, so replaying the same op
// sequence always reproduces the same state.
class ReviewState {
 public:
  ReviewState(std::string slide_id, std::vector<FusedDetection> fused, ColorMap colors = {});

  // Applies the op or throws (kNotFound, kValidation, kConflict) leaving the
  // state untouched. Returns the affected record.
  const ReviewRecord& apply(EditOp& op);

  const std::string& slide_id() const { return slide_id_; }
  const std::vector<ReviewRecord>& records() const { return records_; }
  const ReviewRecord* find(const std::string& id) const;

  // Category name -> count over records that are not rejected.
  std::map<std::string, int64_t> category_counts() const;
  std::map<std::string, int64_t> status_counts() const;

  nlohmann::json export_geojson(bool include_rejected) const;

  // Sets the status of a freshly loaded record without counting as an edit.
  void restore_status(size_t index, ReviewStatus status);

 private:
  ReviewRecord* find_mutable(const std::string& id);

  std::string slide_id_;
  ColorMap colors_;
  std::vector<ReviewRecord> records_;
  int64_t next_human_ = 0;
};

ReviewState replay(const ReviewState& initial, std::span<const EditOp> ops);

// Field-by-field equality of two states (geometry compared exactly).
bool same_state(const ReviewState& a, const ReviewState& b);

nlohmann::json record_to_json(const ReviewRecord& record);

struct ReviewOptions {
  // Fused JSON or GeoJSON to review.
  std::filesystem::path input_path;
  // GeoJSON destination for /api/export; the edit log goes next to it.
  std::filesystem::path export_path;
  std::optional<std::filesystem::path> image_path;
  double image_downsample = 1.0;
  std::optional<int64_t> slide_width;
  std::optional<int64_t> slide_height;
  // When set, mutating requests must carry "Authorization: Bearer <token>".
  std::string token;
  ColorMap colors;
};

std::filesystem::path edit_log_path_for(const std::filesystem::path& export_path);

// Thread-safe review session: concurrent readers, one writer at a time.
class ReviewService {
 public:
  explicit ReviewService(ReviewOptions options);
  ReviewService(ReviewOptions options, ReviewState initial);

  nlohmann::json slide_info() const;
  // Filters: min_count, max_count, min_score, status. Throws kInvalidArgument
  // naming the malformed field.
  nlohmann::json detections(const std::map<std::string, std::string>& query) const;
  nlohmann::json detection(const std::string& id) const;
  nlohmann::json apply(const nlohmann::json& body);
  // Writes the GeoJSON and edit log; returns their paths.
  nlohmann::json export_state(bool include_rejected);

  std::vector<EditOp> edit_log() const;
  ReviewState snapshot() const;
  ReviewState initial_state() const;
  const ReviewOptions& options() const { return options_; }

 private:
  ReviewOptions options_;
  ReviewState initial_;
  ReviewState state_;
  std::vector<EditOp> log_;
  mutable std::shared_mutex mu_;
};

ReviewState load_review_state(const std::filesystem::path& path, const ColorMap& colors);

// HTTP front end for a ReviewService.
class ReviewServer {
 public:
  explicit ReviewServer(std::shared_ptr<ReviewService> service);
  ~ReviewServer();
  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;

  // Binds to the port (0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  // Serves until stop(); requires bind().
  void serve();
  void stop();
  bool running() const;

  ReviewService& service() { return *service_; }

 private:
  struct Impl;
  std::shared_ptr<ReviewService> service_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace circlefuse

#endif  // CIRCLEFUSE_REVIEW_H_
