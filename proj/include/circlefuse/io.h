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
#ifndef CIRCLEFUSE_IO_H_
#define CIRCLEFUSE_IO_H_

#include <filesystem>
#include <string>

namespace circlefuse {

// Whole-file helpers; failures throw kIo naming the path.
std::string read_text_file(const std::filesystem::path& path);

// Writes via a sibling temp file and rename, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(const std::string& bytes);

}  // namespace circlefuse

#endif  // CIRCLEFUSE_IO_H_
