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
#ifndef CIRCLEFUSE_GEOMETRY_H_
#define CIRCLEFUSE_GEOMETRY_H_

#include <numbers>

namespace circlefuse {

// A circle in level-0 slide pixel coordinates.
struct Circle {
  double cx = 0.0;
  double cy = 0.0;
  double r = 1.0;

  friend bool operator==(const Circle&, const Circle&) = default;
};

// r > 0 and all fields finite.
bool is_valid(const Circle& c) noexcept;

inline double circle_area(const Circle& c) noexcept {
  return std::numbers::pi * c.r * c.r;
}

// Exact area of the lens shared by two circles. Handles the disjoint and
// containment cases before the inverse-cosine branch.
double intersection_area(const Circle& a, const Circle& b) noexcept;

// Circle intersection-over-union. Symmetric bit-for-bit in its arguments.
double ciou(const Circle& a, const Circle& b) noexcept;

// True when the two circles have a non-empty overlap region (d < ra + rb).
bool overlaps(const Circle& a, const Circle& b) noexcept;

}  // namespace circlefuse

#endif  // CIRCLEFUSE_GEOMETRY_H_
