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
#include "circlefuse/tiling.h"

#include <cmath>

#include "circlefuse/error.h"

namespace circlefuse {

void validate(const SlideGeometry& slide) {
  if (slide.width < 1 || slide.height < 1) {
    fail(ErrorCode::kInvalidArgument,
         "slide dimensions must be >= 1, got " + std::to_string(slide.width) +
             "x" + std::to_string(slide.height));
  }
}

void validate(const TilingConfig& cfg) {
  if (cfg.patch_size < 1) {
    fail(ErrorCode::kInvalidArgument, "patch_size must be >= 1");
  }
  if (!(cfg.overlap_fraction > 0.0 && cfg.overlap_fraction < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "overlap_fraction must lie in (0,1)");
  }
  tiling_stride(cfg);
}

int64_t tiling_stride(const TilingConfig& cfg) {
  const auto stride = static_cast<int64_t>(
      std::llround(static_cast<double>(cfg.patch_size) * (1.0 - cfg.overlap_fraction)));
  if (stride < 1) {
    fail(ErrorCode::kInvalidArgument,
         "patch_size " + std::to_string(cfg.patch_size) + " with overlap " +
             std::to_string(cfg.overlap_fraction) + " yields a zero stride");
  }
  return stride;
}

std::vector<int64_t> axis_starts(int64_t dim, const TilingConfig& cfg) {
  const int64_t stride = tiling_stride(cfg);
  if (dim <= cfg.patch_size) return {0};
  std::vector<int64_t> starts;
  int64_t s = 0;
  for (; s + cfg.patch_size < dim; s += stride) starts.push_back(s);
  const int64_t last = dim - cfg.patch_size;
  if (starts.empty() || starts.back() != last) starts.push_back(last);
  return starts;
}

std::string make_patch_id(int64_t col, int64_t row, int64_t x, int64_t y) {
  return std::to_string(col) + "_" + std::to_string(row) + "_" +
         std::to_string(x) + "_" + std::to_string(y);
}

std::vector<Patch> generate_patches(const SlideGeometry& slide,
                                    const TilingConfig& cfg) {
  validate(slide);
  validate(cfg);
  const auto xs = axis_starts(slide.width, cfg);
  const auto ys = axis_starts(slide.height, cfg);
  const int64_t w = std::min(cfg.patch_size, slide.width);
  const int64_t h = std::min(cfg.patch_size, slide.height);

  std::vector<Patch> patches;
  patches.reserve(xs.size() * ys.size());
  for (size_t row = 0; row < ys.size(); ++row) {
    for (size_t col = 0; col < xs.size(); ++col) {
      patches.push_back(Patch{make_patch_id(static_cast<int64_t>(col),
                                            static_cast<int64_t>(row), xs[col],
                                            ys[row]),
                              xs[col], ys[row], w, h});
    }
  }
  return patches;
}

Circle to_slide_coords(const Patch& patch, const Circle& local) noexcept {
  return Circle{local.cx + static_cast<double>(patch.x),
                local.cy + static_cast<double>(patch.y), local.r};
}

Circle from_slide_coords(const Patch& patch, const Circle& slide) noexcept {
  return Circle{slide.cx - static_cast<double>(patch.x),
                slide.cy - static_cast<double>(patch.y), slide.r};
}

bool contains(const Patch& patch, double x, double y) noexcept {
  return x >= static_cast<double>(patch.x) &&
         x < static_cast<double>(patch.x + patch.w) &&
         y >= static_cast<double>(patch.y) &&
         y < static_cast<double>(patch.y + patch.h);
}

}  // namespace circlefuse
