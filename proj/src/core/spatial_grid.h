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
#ifndef CIRCLEFUSE_SPATIAL_GRID_H_
#define CIRCLEFUSE_SPATIAL_GRID_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace circlefuse {

// Uniform bucket grid over the plane. A query visits every item whose
// bucket is adjacent to the query point's bucket, so callers must choose
// cell_size >= the largest interaction distance they care about.
class SpatialGrid {
 public:
  explicit SpatialGrid(double cell_size)
      : cell_size_(cell_size > 0.0 && std::isfinite(cell_size) ? cell_size : 1.0) {}

  void insert(size_t id, double x, double y) { cells_[key(x, y)].push_back(id); }

  void erase(size_t id, double x, double y) {
    auto it = cells_.find(key(x, y));
    if (it == cells_.end()) return;
    auto& bucket = it->second;
    bucket.erase(std::remove(bucket.begin(), bucket.end(), id), bucket.end());
  }

  template <typename Fn>
  void for_each_near(double x, double y, Fn&& fn) const {
    const int64_t ix = index(x);
    const int64_t iy = index(y);
    for (int64_t dy = -1; dy <= 1; ++dy) {
      for (int64_t dx = -1; dx <= 1; ++dx) {
        auto it = cells_.find(pack(ix + dx, iy + dy));
        if (it == cells_.end()) continue;
        for (size_t id : it->second) fn(id);
      }
    }
  }

 private:
  int64_t index(double v) const {
    return static_cast<int64_t>(std::floor(v / cell_size_));
  }
  static uint64_t pack(int64_t ix, int64_t iy) {
    return (static_cast<uint64_t>(ix) << 32) ^
           (static_cast<uint64_t>(iy) & 0xffffffffULL);
  }
  uint64_t key(double x, double y) const { return pack(index(x), index(y)); }

  double cell_size_;
  std::unordered_map<uint64_t, std::vector<size_t>> cells_;
};

}  // namespace circlefuse

#endif  // CIRCLEFUSE_SPATIAL_GRID_H_
