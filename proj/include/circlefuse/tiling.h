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
#ifndef CIRCLEFUSE_TILING_H_
#define CIRCLEFUSE_TILING_H_

#include <cstdint>
#include <string>
#include <vector>

#include "circlefuse/geometry.h"

namespace circlefuse {

struct SlideGeometry {
  std::string slide_id;
  int64_t width = 0;
  int64_t height = 0;
};

struct TilingConfig {
  int64_t patch_size = 512;
  // Linear overlap between neighbouring patches along each axis.
  double overlap_fraction = 0.5;
};

// An axis-aligned tile of slide space. patch_id is "col_row_x_y".
struct Patch {
  std::string patch_id;
  int64_t x = 0;
  int64_t y = 0;
  int64_t w = 0;
  int64_t h = 0;

  friend bool operator==(const Patch&, const Patch&) = default;
};

void validate(const SlideGeometry& slide);
void validate(const TilingConfig& cfg);

// round(patch_size * (1 - overlap_fraction)); throws when it would be 0.
int64_t tiling_stride(const TilingConfig& cfg);

// Start offsets along one axis of length `dim`. The last start is clamped
// flush to the far edge.
std::vector<int64_t> axis_starts(int64_t dim, const TilingConfig& cfg);

// Row-major patch grid covering every pixel of the slide.
std::vector<Patch> generate_patches(const SlideGeometry& slide,
                                    const TilingConfig& cfg);

std::string make_patch_id(int64_t col, int64_t row, int64_t x, int64_t y);

Circle to_slide_coords(const Patch& patch, const Circle& local) noexcept;
Circle from_slide_coords(const Patch& patch, const Circle& slide) noexcept;

// Half-open containment test in slide coordinates.
bool contains(const Patch& patch, double x, double y) noexcept;

}  // namespace circlefuse

#endif  // CIRCLEFUSE_TILING_H_
