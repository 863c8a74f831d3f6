// Copyright 2026 The fcdcnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace fcdcnn {

enum class Resolution { Full, Half, Quarter };

/// Row-major H x W disparity field. Invalid pixels hold kInvalid; any
/// negative or non-finite value is treated as invalid.
struct DisparityMap {
  static constexpr float kInvalid = -1.0f;

  int width = 0;
  int height = 0;
  std::vector<float> values;
  Resolution resolution = Resolution::Full;

  DisparityMap() = default;
  DisparityMap(int w, int h, float fill = kInvalid)
      : width(w), height(h), values(std::size_t(w) * h, fill) {}

  static bool is_valid(float v) { return std::isfinite(v) && v >= 0.0f; }

  std::size_t size() const { return values.size(); }
  float& at(int x, int y) { return values[std::size_t(y) * width + x]; }
  float at(int x, int y) const { return values[std::size_t(y) * width + x]; }
  bool valid(int x, int y) const { return is_valid(at(x, y)); }
  bool same_size(const DisparityMap& other) const {
    return width == other.width && height == other.height;
  }

  std::size_t invalid_count() const {
    std::size_t n = 0;
    for (float v : values) n += is_valid(v) ? 0 : 1;
    return n;
  }
};

}  // namespace fcdcnn
