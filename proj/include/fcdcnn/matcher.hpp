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

#include <filesystem>
#include <span>
#include <vector>

#include "fcdcnn/disparity.hpp"
#include "fcdcnn/image.hpp"
#include "fcdcnn/network.hpp"

namespace fcdcnn {

enum class Direction { LeftReference, RightReference };

/// D x H x W similarity scores in (d, y, x) order. Candidates that fall
/// outside the other image hold kOutOfRange.
struct CostVolume {
  static constexpr float kOutOfRange = -1.0f;

  int max_disparity = 0;
  int height = 0;
  int width = 0;
  Direction direction = Direction::LeftReference;
  std::vector<float> values;

  std::size_t plane() const { return std::size_t(height) * width; }
  std::span<float> slice(int d) { return {values.data() + d * plane(), plane()}; }
  std::span<const float> slice(int d) const { return {values.data() + d * plane(), plane()}; }
  float at(int d, int y, int x) const { return values[d * plane() + std::size_t(y) * width + x]; }
};

/// Left reference: score(d, y, x) = sim(F_L(x, y), F_R(x - d, y)).
/// Right reference: score(d, y, x) = sim(F_R(x, y), F_L(x + d, y)).
/// Features are (1, C, H, W); throws ConfigError when D < 1 or D > W.
CostVolume build_cost_volume(const Tensor& feat_left, const Tensor& feat_right, int max_disparity,
                             Direction direction);

/// Spatial 5x5 median of every disparity slice.
CostVolume median_filter_volume(const CostVolume& volume);

struct GuidedFilterParams {
  int radius = 8;
  double eta = 10.0;  // in squared 0..255 guide units
};

/// Classical guided filter on every slice, guided by a 0..255 grayscale
/// image of the reference view; the result is clamped to [-1, 1].
CostVolume guided_filter_volume(const CostVolume& volume, const Image& guide,
                                GuidedFilterParams params = {});

DisparityMap winner_takes_all(const CostVolume& volume);

struct MatchResult {
  DisparityMap left;   // left-referenced WTA
  DisparityMap right;  // right-referenced WTA
  CostVolume left_volume;
  CostVolume right_volume;
};

/// Features for both views are computed once; both directional volumes are
/// built from them, optionally median- then guided-filtered, and reduced by
/// WTA.
MatchResult match_pair(const Image& left, const Image& right, const NetworkWeights& weights,
                       int max_disparity, bool with_filtering,
                       GuidedFilterParams guided = {});

/// Cost-volume dump: "FCCV" | u32 D | u32 H | u32 W | f32 values (d, y, x),
/// little-endian. The direction is not stored; readers get LeftReference.
void save_cost_volume(const CostVolume& volume, const std::filesystem::path& path);
CostVolume load_cost_volume(const std::filesystem::path& path);

}  // namespace fcdcnn
