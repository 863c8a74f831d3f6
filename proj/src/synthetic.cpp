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


#include "fcdcnn/synthetic.hpp"

#include <random>

#include "fcdcnn/errors.hpp"

namespace fcdcnn {

namespace {

std::vector<float> box_blur_rows(const std::vector<float>& src, int width, int height, int r) {
  std::vector<float> out(src.size());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double sum = 0.0;
      int n = 0;
      for (int k = std::max(0, x - r); k <= std::min(width - 1, x + r); ++k, ++n) {
        sum += src[std::size_t(y) * width + k];
      }
      out[std::size_t(y) * width + x] = static_cast<float>(sum / n);
    }
  }
  return out;
}

std::vector<float> transpose(const std::vector<float>& src, int width, int height) {
  std::vector<float> out(src.size());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) out[std::size_t(x) * height + y] = src[std::size_t(y) * width + x];
  }
  return out;
}

}  // namespace

StereoPair make_shifted_texture_pair(int width, int height, int disparity, std::uint64_t seed,
                                     int smoothing) {
  if (width < 1 || height < 1) throw ConfigError("synthetic pair needs a positive size");
  if (disparity < 0 || disparity >= width) throw ConfigError("synthetic disparity outside [0, width)");
  if (smoothing < 0) throw ConfigError("smoothing radius must be non-negative");

  // shared texture, d columns wider than the output so the right view is a crop
  const int tw = width + disparity;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> noise(0.0f, 255.0f);
  std::vector<float> texture(std::size_t(tw) * height);
  for (float& v : texture) v = noise(rng);
  if (smoothing > 0) {
    texture = box_blur_rows(texture, tw, height, smoothing);
    texture = transpose(box_blur_rows(transpose(texture, tw, height), height, tw, smoothing), height, tw);
  }

  StereoPair pair;
  pair.id = "shift" + std::to_string(disparity) + "_" + std::to_string(seed);
  pair.style = DatasetStyle::Synthetic;
  pair.left = Image(width, height);
  pair.right = Image(width, height);
  DisparityMap gt(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      pair.left.at(x, y) = texture[std::size_t(y) * tw + x];
      pair.right.at(x, y) = texture[std::size_t(y) * tw + x + disparity];
      gt.at(x, y) = x - disparity >= 0 ? static_cast<float>(disparity) : DisparityMap::kInvalid;
    }
  }
  pair.gt_left = std::move(gt);
  return pair;
}

}  // namespace fcdcnn
