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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <mutex>

#include "circlefuse/error.h"
#include "circlefuse/geojson_io.h"
#include "circlefuse/io.h"
#include "circlefuse/json_io.h"
#include "json_util.h"

namespace circlefuse {

namespace ju = jsonutil;
using nlohmann::json;

namespace {

EditKind parse_edit_kind(const std::string& name) {
  if (name == "accept") return EditKind::kAccept;
  if (name == "reject") return EditKind::kReject;
  if (name == "move") return EditKind::kMove;
  if (name == "resize") return EditKind::kResize;
  if (name == "add") return EditKind::kAdd;
  if (name == "relabel") return EditKind::kRelabel;
  fail(ErrorCode::kValidation, "op: unknown edit op '" + name + "'");
}

double payload_number(const json& payload, const char* key) {
  if (!payload.is_object() || !payload.contains(key)) {
    fail(ErrorCode::kValidation, std::string("payload.") + key + ": missing field");
  }
  const json& v = payload.at(key);
  if (!v.is_number() || !std::isfinite(v.get<double>())) {
    fail(ErrorCode::kValidation, std::string("payload.") + key + ": expected a finite number");
  }
  return v.get<double>();
}

// Every filter value must parse completely.
double parse_filter(const std::string& field, const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end == nullptr || *end != '\0' || !std::isfinite(v)) {
    fail(ErrorCode::kInvalidArgument, field + ": malformed filter value '" + text + "'");
  }
  return v;
}

}  // namespace

const char* to_string(ReviewStatus status) noexcept {
  switch (status) {
    case ReviewStatus::kPending:
      return "pending";
    case ReviewStatus::kAccepted:
      return "accepted";
    case ReviewStatus::kRejected:
      return "rejected";
    case ReviewStatus::kEdited:
      return "edited";
    case ReviewStatus::kHumanAdded:
      return "human_added";
  }
  return "unknown";
}

ReviewStatus parse_review_status(const std::string& name) {
  for (auto s : {ReviewStatus::kPending, ReviewStatus::kAccepted, ReviewStatus::kRejected,
                 ReviewStatus::kEdited, ReviewStatus::kHumanAdded}) {
    if (name == to_string(s)) return s;
  }
  fail(ErrorCode::kInvalidArgument, "status: unknown review status '" + name + "'");
}

const char* to_string(EditKind kind) noexcept {
  switch (kind) {
    case EditKind::kAccept:
      return "accept";
    case EditKind::kReject:
      return "reject";
    case EditKind::kMove:
      return "move";
    case EditKind::kResize:
      return "resize";
    case EditKind::kAdd:
      return "add";
    case EditKind::kRelabel:
      return "relabel";
  }
  return "unknown";
}

std::string utc_timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  const size_t n = std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", &tm);
  std::snprintf(buf + n, sizeof(buf) - n, ".%03dZ", static_cast<int>(ms));
  return buf;
}

EditOp edit_op_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::kValidation, "edit: expected a JSON object");
  EditOp op;
  if (!j.contains("op") || !j.at("op").is_string()) {
    fail(ErrorCode::kValidation, "op: missing or not a string");
  }
  op.op = parse_edit_kind(j.at("op").get<std::string>());
  const json payload = j.value("payload", json::object());
  if (!payload.is_object()) fail(ErrorCode::kValidation, "payload: expected an object");

  if (op.op != EditKind::kAdd) {
    if (!j.contains("target_id") || !j.at("target_id").is_string()) {
      fail(ErrorCode::kValidation, "target_id: required for " + std::string(to_string(op.op)));
    }
    op.target_id = j.at("target_id").get<std::string>();
  }
  switch (op.op) {
    case EditKind::kMove:
      op.dx = payload_number(payload, "dx");
      op.dy = payload_number(payload, "dy");
      break;
    case EditKind::kResize:
      op.new_r = payload_number(payload, "new_r");
      if (!(op.new_r > 0.0)) fail(ErrorCode::kValidation, "payload.new_r: must be > 0");
      break;
    case EditKind::kAdd:
      op.circle = Circle{payload_number(payload, "cx"), payload_number(payload, "cy"),
                         payload_number(payload, "r")};
      if (!is_valid(op.circle)) fail(ErrorCode::kValidation, "payload.r: must be > 0");
      if (payload.contains("label")) op.label = ju::value_or<std::string>(payload, "label", "");
      break;
    case EditKind::kRelabel:
      if (!payload.contains("label") || !payload.at("label").is_string() ||
          payload.at("label").get<std::string>().empty()) {
        fail(ErrorCode::kValidation, "payload.label: expected a non-empty string");
      }
      op.label = payload.at("label").get<std::string>();
      break;
    case EditKind::kAccept:
    case EditKind::kReject:
      break;
  }
  op.actor = j.contains("actor") && j.at("actor").is_string() ? j.at("actor").get<std::string>() : "";
  op.timestamp =
      j.contains("timestamp") && j.at("timestamp").is_string() ? j.at("timestamp").get<std::string>() : "";
  if (j.contains("revision") && !j.at("revision").is_null()) {
    if (!j.at("revision").is_number_integer()) {
      fail(ErrorCode::kValidation, "revision: expected an integer");
    }
    op.revision = j.at("revision").get<int64_t>();
  }
  op.result_id = j.contains("result_id") && j.at("result_id").is_string()
                     ? j.at("result_id").get<std::string>()
                     : "";
  return op;
}

json to_json(const EditOp& op) {
  json payload = json::object();
  switch (op.op) {
    case EditKind::kMove:
      payload = json{{"dx", op.dx}, {"dy", op.dy}};
      break;
    case EditKind::kResize:
      payload = json{{"new_r", op.new_r}};
      break;
    case EditKind::kAdd:
      payload = json{{"cx", op.circle.cx}, {"cy", op.circle.cy}, {"r", op.circle.r}};
      if (!op.label.empty()) payload["label"] = op.label;
      break;
    case EditKind::kRelabel:
      payload = json{{"label", op.label}};
      break;
    case EditKind::kAccept:
    case EditKind::kReject:
      break;
  }
  json j{{"op", to_string(op.op)}, {"payload", std::move(payload)}, {"actor", op.actor},
         {"timestamp", op.timestamp}};
  if (op.op != EditKind::kAdd) j["target_id"] = op.target_id;
  if (op.revision) j["revision"] = *op.revision;
  if (!op.result_id.empty()) j["result_id"] = op.result_id;
  return j;
}

json edit_log_to_json(std::span<const EditOp> ops) {
  json arr = json::array();
  for (const auto& op : ops) arr.push_back(to_json(op));
  return json{{"schema", kEditLogSchema}, {"ops", std::move(arr)}};
}

std::vector<EditOp> edit_log_from_json(const json& doc) {
  ju::expect_schema(doc, kEditLogSchema, "edit log");
  std::vector<EditOp> ops;
  for (const auto& j : ju::array(doc, "ops", "edit log")) ops.push_back(edit_op_from_json(j));
  return ops;
}

ReviewState::ReviewState(std::string slide_id, std::vector<FusedDetection> fused, ColorMap colors)
    : slide_id_(std::move(slide_id)), colors_(std::move(colors)) {
  records_.reserve(fused.size());
  for (size_t i = 0; i < fused.size(); ++i) {
    ReviewRecord rec;
    rec.id = "f" + std::to_string(i);
    rec.detection = std::move(fused[i]);
    rec.detection.category = category_name(rec.detection);
    if (rec.detection.color.empty()) rec.detection.color = category_color(rec.detection, colors_);
    rec.status = rec.detection.human ? ReviewStatus::kHumanAdded : ReviewStatus::kPending;
    records_.push_back(std::move(rec));
  }
}

void ReviewState::restore_status(size_t index, ReviewStatus status) {
  records_.at(index).status = status;
}

const ReviewRecord* ReviewState::find(const std::string& id) const {
  for (const auto& r : records_) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

ReviewRecord* ReviewState::find_mutable(const std::string& id) {
  return const_cast<ReviewRecord*>(static_cast<const ReviewState*>(this)->find(id));
}

const ReviewRecord& ReviewState::apply(EditOp& op) {
  if (op.op == EditKind::kAdd) {
    if (!is_valid(op.circle)) fail(ErrorCode::kValidation, "payload.r: must be > 0");
    ReviewRecord rec;
    rec.id = "h" + std::to_string(next_human_);
    rec.detection.circle = op.circle;
    rec.detection.score = 1.0;
    rec.detection.human = true;
    rec.detection.count = 0;
    if (!op.label.empty()) rec.detection.label = op.label;
    rec.detection.category = category_name(rec.detection);
    rec.detection.color = category_color(rec.detection, colors_);
    rec.status = ReviewStatus::kHumanAdded;
    ++next_human_;
    op.result_id = rec.id;
    records_.push_back(std::move(rec));
    return records_.back();
  }

  ReviewRecord* rec = find_mutable(op.target_id);
  if (rec == nullptr) fail(ErrorCode::kNotFound, "target_id: no detection '" + op.target_id + "'");
  if (op.revision && *op.revision != rec->revision) {
    fail(ErrorCode::kConflict, "revision: detection '" + op.target_id + "' is at revision " +
                                   std::to_string(rec->revision) + ", edit was based on " +
                                   std::to_string(*op.revision));
  }
  const bool human = rec->status == ReviewStatus::kHumanAdded;
  const ReviewStatus edited = human ? ReviewStatus::kHumanAdded : ReviewStatus::kEdited;
  switch (op.op) {
    case EditKind::kAccept:
      rec->status = ReviewStatus::kAccepted;
      break;
    case EditKind::kReject:
      rec->status = ReviewStatus::kRejected;
      break;
    case EditKind::kMove:
      rec->detection.circle.cx += op.dx;
      rec->detection.circle.cy += op.dy;
      rec->status = edited;
      break;
    case EditKind::kResize:
      if (!(op.new_r > 0.0)) fail(ErrorCode::kValidation, "payload.new_r: must be > 0");
      rec->detection.circle.r = op.new_r;
      rec->status = edited;
      break;
    case EditKind::kRelabel:
      if (op.label.empty()) fail(ErrorCode::kValidation, "payload.label: must not be empty");
      rec->detection.label = op.label;
      rec->status = edited;
      break;
    case EditKind::kAdd:
      break;
  }
  ++rec->revision;
  op.result_id = rec->id;
  return *rec;
}

std::map<std::string, int64_t> ReviewState::category_counts() const {
  std::map<std::string, int64_t> counts;
  for (const auto& r : records_) {
    if (r.status == ReviewStatus::kRejected) continue;
    ++counts[r.detection.category];
  }
  return counts;
}

std::map<std::string, int64_t> ReviewState::status_counts() const {
  std::map<std::string, int64_t> counts;
  for (const auto& r : records_) ++counts[to_string(r.status)];
  return counts;
}

json ReviewState::export_geojson(bool include_rejected) const {
  std::vector<FusedDetection> fused;
  std::vector<json> extras;
  for (const auto& r : records_) {
    if (!include_rejected && r.status == ReviewStatus::kRejected) continue;
    fused.push_back(r.detection);
    extras.push_back(json{{"review_id", r.id}, {"review_status", to_string(r.status)}});
  }
  return circlefuse::export_geojson(fused, slide_id_, extras);
}

ReviewState replay(const ReviewState& initial, std::span<const EditOp> ops) {
  ReviewState state = initial;
  for (EditOp op : ops) state.apply(op);
  return state;
}

bool same_state(const ReviewState& a, const ReviewState& b) {
  if (a.slide_id() != b.slide_id() || a.records().size() != b.records().size()) return false;
  for (size_t i = 0; i < a.records().size(); ++i) {
    const auto& x = a.records()[i];
    const auto& y = b.records()[i];
    if (x.id != y.id || x.status != y.status || x.revision != y.revision ||
        !(x.detection.circle == y.detection.circle) || x.detection.score != y.detection.score ||
        x.detection.count != y.detection.count || x.detection.human != y.detection.human ||
        x.detection.label != y.detection.label || x.detection.category != y.detection.category ||
        x.detection.members != y.detection.members) {
      return false;
    }
  }
  return true;
}

json record_to_json(const ReviewRecord& record) {
  const auto& d = record.detection;
  json models = json::array();
  for (const auto& m : d.members) models.push_back(m.model_id);
  return json{{"id", record.id},
              {"cx", d.circle.cx},
              {"cy", d.circle.cy},
              {"r", d.circle.r},
              {"score", d.score},
              {"count", d.human ? json("human") : json(d.count)},
              {"category", d.category},
              {"color", d.color},
              {"label", d.label},
              {"models", std::move(models)},
              {"status", to_string(record.status)},
              {"revision", record.revision}};
}

std::filesystem::path edit_log_path_for(const std::filesystem::path& export_path) {
  auto p = export_path;
  p.replace_extension(".edits.json");
  return p;
}

ReviewState load_review_state(const std::filesystem::path& path, const ColorMap& colors) {
  const json doc = ju::parse(read_text_file(path), path.string());
  if (doc.is_object() && doc.value("type", "") == "FeatureCollection") {
    GeoJsonImport imported = import_geojson(doc);
    if (!imported.errors.empty()) {
      fail(ErrorCode::kValidation, path.string() + ": " + imported.errors.front());
    }
    ReviewState state(imported.slide_id, imported.fused, colors);
    for (size_t i = 0; i < imported.extras.size(); ++i) {
      const auto& extra = imported.extras[i];
      if (extra.contains("review_status") && extra.at("review_status").is_string()) {
        state.restore_status(i, parse_review_status(extra.at("review_status").get<std::string>()));
      }
    }
    return state;
  }
  FusedDocument fused = fused_from_json(doc);
  return ReviewState(fused.slide_id, std::move(fused.fused), colors);
}

ReviewService::ReviewService(ReviewOptions options)
    : ReviewService(options, load_review_state(options.input_path, options.colors)) {}

ReviewService::ReviewService(ReviewOptions options, ReviewState initial)
    : options_(std::move(options)), initial_(initial), state_(std::move(initial)) {}

json ReviewService::slide_info() const {
  std::shared_lock lock(mu_);
  json counts = json::object();
  for (const auto& [k, v] : state_.category_counts()) counts[k] = v;
  json statuses = json::object();
  for (const auto& [k, v] : state_.status_counts()) statuses[k] = v;
  const bool has_image = options_.image_path && std::filesystem::exists(*options_.image_path);
  // Without explicit dimensions, report the extent of the detections.
  int64_t width = 0, height = 0;
  for (const auto& r : state_.records()) {
    const Circle& c = r.detection.circle;
    width = std::max(width, static_cast<int64_t>(std::ceil(c.cx + c.r)));
    height = std::max(height, static_cast<int64_t>(std::ceil(c.cy + c.r)));
  }
  json info{{"slide_id", state_.slide_id()},
            {"width", options_.slide_width.value_or(width)},
            {"height", options_.slide_height.value_or(height)},
            {"total", state_.records().size()},
            {"counts", std::move(counts)},
            {"status_counts", std::move(statuses)},
            {"image", {{"available", has_image}, {"downsample", options_.image_downsample}}},
            {"edits", log_.size()}};
  return info;
}

json ReviewService::detections(const std::map<std::string, std::string>& query) const {
  std::optional<double> min_count, max_count, min_score;
  std::optional<ReviewStatus> status;
  for (const auto& [key, value] : query) {
    if (key == "min_count") {
      min_count = parse_filter(key, value);
    } else if (key == "max_count") {
      max_count = parse_filter(key, value);
    } else if (key == "min_score") {
      min_score = parse_filter(key, value);
    } else if (key == "status") {
      status = parse_review_status(value);
    }
  }
  std::shared_lock lock(mu_);
  std::vector<const ReviewRecord*> picked;
  for (const auto& r : state_.records()) {
    const auto& d = r.detection;
    if ((min_count || max_count) && d.human) continue;
    if (min_count && d.count < *min_count) continue;
    if (max_count && d.count > *max_count) continue;
    if (min_score && d.score < *min_score) continue;
    if (status && r.status != *status) continue;
    picked.push_back(&r);
  }
  // Review queue order: weakest consensus first, then lowest score; human
  // additions go last.
  std::stable_sort(picked.begin(), picked.end(), [](const ReviewRecord* a, const ReviewRecord* b) {
    const auto& da = a->detection;
    const auto& db = b->detection;
    if (da.human != db.human) return db.human;
    if (da.count != db.count) return da.count < db.count;
    return da.score < db.score;
  });
  json out = json::array();
  for (const ReviewRecord* r : picked) out.push_back(record_to_json(*r));
  return json{{"detections", std::move(out)}};
}

json ReviewService::detection(const std::string& id) const {
  std::shared_lock lock(mu_);
  const ReviewRecord* rec = state_.find(id);
  if (rec == nullptr) fail(ErrorCode::kNotFound, "no detection '" + id + "'");
  return record_to_json(*rec);
}

json ReviewService::apply(const json& body) {
  EditOp op = edit_op_from_json(body);
  if (op.timestamp.empty()) op.timestamp = utc_timestamp_now();
  std::unique_lock lock(mu_);
  // ReviewState::apply only mutates after every check has passed.
  const ReviewRecord& rec = state_.apply(op);
  log_.push_back(op);
  return record_to_json(rec);
}

json ReviewService::export_state(bool include_rejected) {
  std::unique_lock lock(mu_);
  if (options_.export_path.empty()) fail(ErrorCode::kIo, "no export path configured");
  const json geo = state_.export_geojson(include_rejected);
  const auto log_path = edit_log_path_for(options_.export_path);
  write_text_file(options_.export_path, geo.dump(1) + "\n");
  write_text_file(log_path, edit_log_to_json(log_).dump(1) + "\n");
  return json{{"path", options_.export_path.string()},
              {"edit_log", log_path.string()},
              {"features", geo.at("features").size()}};
}

std::vector<EditOp> ReviewService::edit_log() const {
  std::shared_lock lock(mu_);
  return log_;
}

ReviewState ReviewService::snapshot() const {
  std::shared_lock lock(mu_);
  return state_;
}

ReviewState ReviewService::initial_state() const { return initial_; }

}  // namespace circlefuse
