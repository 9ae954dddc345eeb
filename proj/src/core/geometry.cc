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
#include "circlefuse/geometry.h"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace circlefuse {

namespace {

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

// Orders the pair so the floating-point evaluation does not depend on
// argument order.
bool ordered_before(const Circle& a, const Circle& b) {
  return std::tie(a.r, a.cx, a.cy) < std::tie(b.r, b.cx, b.cy);
}

double lens_area(const Circle& a, const Circle& b) {
  const double d = std::hypot(b.cx - a.cx, b.cy - a.cy);
  if (d >= a.r + b.r) return 0.0;
  if (d <= std::abs(a.r - b.r)) {
    const double rmin = std::min(a.r, b.r);
    return std::numbers::pi * rmin * rmin;
  }
  const double ra2 = a.r * a.r;
  const double rb2 = b.r * b.r;
  const double d2 = d * d;
  const double alpha = std::acos(clamp_unit((d2 + ra2 - rb2) / (2.0 * d * a.r)));
  const double beta = std::acos(clamp_unit((d2 + rb2 - ra2) / (2.0 * d * b.r)));
  const double kite = (-d + a.r + b.r) * (d + a.r - b.r) * (d - a.r + b.r) *
                      (d + a.r + b.r);
  const double area = ra2 * alpha + rb2 * beta - 0.5 * std::sqrt(std::max(0.0, kite));
  return std::max(0.0, area);
}

}  // namespace

bool is_valid(const Circle& c) noexcept {
  return std::isfinite(c.cx) && std::isfinite(c.cy) && std::isfinite(c.r) &&
         c.r > 0.0;
}

double intersection_area(const Circle& a, const Circle& b) noexcept {
  return ordered_before(b, a) ? lens_area(b, a) : lens_area(a, b);
}

double ciou(const Circle& a, const Circle& b) noexcept {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = circle_area(a) + circle_area(b) - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

bool overlaps(const Circle& a, const Circle& b) noexcept {
  return std::hypot(b.cx - a.cx, b.cy - a.cy) < a.r + b.r;
}

}  // namespace circlefuse
