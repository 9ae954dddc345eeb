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
#include <atomic>
#include <fstream>
#include <sstream>

#include "circlefuse/error.h"
#include "circlefuse/io.h"
#include "circlefuse/review.h"
#include "httplib.h"

namespace circlefuse {

using nlohmann::json;

namespace {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParse:
    case ErrorCode::kValidation:
      return 400;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kConflict:
      return 409;
    case ErrorCode::kIo:
    case ErrorCode::kBackend:
    case ErrorCode::kInternal:
      return 500;
  }
  return 500;
}

// Leading "field:" of an error message, if any.
std::string error_field(const std::string& message) {
  const auto colon = message.find(':');
  if (colon == std::string::npos) return "";
  const std::string head = message.substr(0, colon);
  if (head.find(' ') != std::string::npos) return "";
  return head;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  json body{{"error", message}};
  const std::string field = error_field(message);
  if (!field.empty()) body["field"] = field;
  send_json(res, status, body);
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    send_error(res, http_status(e.code()), e.what());
  } catch (const json::exception& e) {
    send_error(res, 400, e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

std::string image_content_type(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  return "application/octet-stream";
}

}  // namespace

struct ReviewServer::Impl {
  httplib::Server http;
  std::atomic<bool> bound{false};
};

ReviewServer::ReviewServer(std::shared_ptr<ReviewService> service)
    : service_(std::move(service)), impl_(std::make_unique<Impl>()) {
  auto& http = impl_->http;
  ReviewService* svc = service_.get();

  auto authorized = [svc](const httplib::Request& req, httplib::Response& res) {
    const std::string& token = svc->options().token;
    if (token.empty()) return true;
    if (req.get_header_value("Authorization") == "Bearer " + token) return true;
    send_error(res, 401, "missing or wrong bearer token");
    return false;
  };

  http.Get("/api/slide", [svc](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, svc->slide_info()); });
  });

  http.Get("/api/detections", [svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::map<std::string, std::string> query;
      for (const auto& [k, v] : req.params) query[k] = v;
      send_json(res, 200, svc->detections(query));
    });
  });

  http.Get(R"(/api/detections/([A-Za-z0-9_\-]+))",
           [svc](const httplib::Request& req, httplib::Response& res) {
             guarded(res, [&] { send_json(res, 200, svc->detection(req.matches[1])); });
           });

  http.Post("/api/edits", [svc, authorized](const httplib::Request& req, httplib::Response& res) {
    if (!authorized(req, res)) return;
    guarded(res, [&] {
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::parse_error& e) {
        fail(ErrorCode::kValidation, std::string("body: malformed JSON: ") + e.what());
      }
      send_json(res, 200, svc->apply(body));
    });
  });

  http.Post("/api/export", [svc, authorized](const httplib::Request& req, httplib::Response& res) {
    if (!authorized(req, res)) return;
    guarded(res, [&] {
      bool include_rejected = req.get_param_value("include_rejected") == "true";
      if (!req.body.empty()) {
        const json body = json::parse(req.body, nullptr, false);
        if (body.is_object() && body.contains("include_rejected")) {
          include_rejected = body.at("include_rejected").get<bool>();
        }
      }
      send_json(res, 200, svc->export_state(include_rejected));
    });
  });

  http.Get("/api/image", [svc](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      const auto& path = svc->options().image_path;
      if (!path || !std::filesystem::exists(*path)) {
        fail(ErrorCode::kNotFound, "no background image configured");
      }
      res.status = 200;
      res.set_content(read_text_file(*path), image_content_type(*path));
    });
  });

  http.Get("/api/edits", [svc](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, edit_log_to_json(svc->edit_log())); });
  });

  http.Get("/", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200,
              json{{"service", "circlefuse-review"},
                   {"endpoints",
                    {"GET /api/slide", "GET /api/detections", "GET /api/detections/{id}",
                     "POST /api/edits", "POST /api/export", "GET /api/image", "GET /api/edits"}}});
  });
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind(const std::string& host, int port) {
  int bound = -1;
  if (port == 0) {
    bound = impl_->http.bind_to_any_port(host);
  } else {
    bound = impl_->http.bind_to_port(host, port) ? port : -1;
  }
  if (bound < 0) {
    fail(ErrorCode::kIo, "cannot bind review server to " + host + ":" + std::to_string(port));
  }
  impl_->bound = true;
  return bound;
}

void ReviewServer::serve() {
  if (!impl_->bound) fail(ErrorCode::kInvalidArgument, "review server is not bound");
  if (!impl_->http.listen_after_bind()) {
    if (impl_->bound) fail(ErrorCode::kIo, "review server stopped unexpectedly");
  }
}

void ReviewServer::stop() {
  impl_->bound = false;
  impl_->http.stop();
}

bool ReviewServer::running() const { return impl_->http.is_running(); }

}  // namespace circlefuse
