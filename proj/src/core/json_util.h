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
#ifndef CIRCLEFUSE_JSON_UTIL_H_
#define CIRCLEFUSE_JSON_UTIL_H_

#include <cmath>
#include <string>

#include "circlefuse/error.h"
#include "json.hpp"

namespace circlefuse::jsonutil {

using nlohmann::json;

// Parses text, reporting syntax errors with a 1-based line number.
inline json parse(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const size_t upto = std::min(text.size(), static_cast<size_t>(e.byte));
    size_t line = 1;
    for (size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') ++line;
    }
    fail(ErrorCode::kParse, what + ": malformed JSON at line " +
                                std::to_string(line) + ": " + e.what());
  }
}

inline const json& member(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) fail(ErrorCode::kParse, path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(ErrorCode::kParse, path + "." + key + ": missing field");
  return *it;
}

inline double number(const json& obj, const char* key, const std::string& path) {
  const json& v = member(obj, key, path);
  if (!v.is_number()) fail(ErrorCode::kParse, path + "." + key + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(ErrorCode::kValidation, path + "." + key + ": not finite");
  return d;
}

inline std::string string(const json& obj, const char* key, const std::string& path) {
  const json& v = member(obj, key, path);
  if (!v.is_string()) fail(ErrorCode::kParse, path + "." + key + ": expected a string");
  return v.get<std::string>();
}

inline const json& array(const json& obj, const char* key, const std::string& path) {
  const json& v = member(obj, key, path);
  if (!v.is_array()) fail(ErrorCode::kParse, path + "." + key + ": expected an array");
  return v;
}

inline std::string optional_string(const json& obj, const char* key,
                                   const std::string& path, const std::string& fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_string()) fail(ErrorCode::kParse, path + "." + key + ": expected a string");
  return it->get<std::string>();
}

template <typename T>
T value_or(const json& obj, const char* key, T fallback) {
  if (!obj.is_object()) return fallback;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::kInvalidArgument, std::string("config field '") + key + "' has the wrong type");
  }
}

inline void expect_schema(const json& doc, const char* schema, const std::string& what) {
  const std::string got = string(doc, "schema", what);
  if (got != schema) {
    fail(ErrorCode::kParse, what + ".schema: expected '" + schema + "', got '" + got + "'");
  }
}

}  // namespace circlefuse::jsonutil

#endif  // CIRCLEFUSE_JSON_UTIL_H_
