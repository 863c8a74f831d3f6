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


#include "fcdcnn/matcher.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "fcdcnn/errors.hpp"
#include "fcdcnn/execution.hpp"

namespace fcdcnn {

namespace {

bool serial_mode() { return execution_mode() == ExecutionMode::Serial; }

void require_features(const Tensor& t, const char* which) {
  if (t.rank() != 4 || t.dim(0) != 1) {
    throw ShapeError(std::string(which) + " features must be (1, C, H, W), got " +
                     Tensor::shape_string(t.shape()));
  }
}

}  // namespace

CostVolume build_cost_volume(const Tensor& feat_left, const Tensor& feat_right, int max_disparity,
                             Direction direction) {
  require_features(feat_left, "left");
  require_features(feat_right, "right");
  if (feat_left.shape() != feat_right.shape()) {
    throw ShapeError("left and right features differ in shape: " +
                     Tensor::shape_string(feat_left.shape()) + " vs " +
                     Tensor::shape_string(feat_right.shape()));
  }
  const int channels = feat_left.dim(1);
  const int height = feat_left.dim(2);
  const int width = feat_left.dim(3);
  if (max_disparity < 1 || max_disparity > width) {
    throw ConfigError("max disparity " + std::to_string(max_disparity) + " outside [1, " +
                      std::to_string(width) + "]");
  }
  CostVolume volume;
  volume.max_disparity = max_disparity;
  volume.height = height;
  volume.width = width;
  volume.direction = direction;
  volume.values.resize(std::size_t(max_disparity) * height * width);

  const bool left_ref = direction == Direction::LeftReference;
  const Tensor& reference = left_ref ? feat_left : feat_right;
  const Tensor& other = left_ref ? feat_right : feat_left;
  const int step = left_ref ? -1 : 1;
  if (serial_mode()) {
    kernels::serial::cost_volume(reference.data(), other.data(), channels, height, width,
                                 max_disparity, step, volume.values);
  } else {
    kernels::parallel::cost_volume(reference.data(), other.data(), channels, height, width,
                                   max_disparity, step, volume.values);
  }
  return volume;
}

CostVolume median_filter_volume(const CostVolume& volume) {
  CostVolume out = volume;
  const bool serial = serial_mode();
  for (int d = 0; d < volume.max_disparity; ++d) {
    if (serial) {
      kernels::serial::median5x5(volume.slice(d), volume.height, volume.width, out.slice(d));
    } else {
      kernels::parallel::median5x5(volume.slice(d), volume.height, volume.width, out.slice(d));
    }
  }
  return out;
}

CostVolume guided_filter_volume(const CostVolume& volume, const Image& guide,
                                GuidedFilterParams params) {
  if (guide.channels != 1 || guide.width != volume.width || guide.height != volume.height) {
    throw ShapeError("guide image must be single-channel and match the volume's " +
                     std::to_string(volume.width) + "x" + std::to_string(volume.height) + " slices");
  }
  CostVolume out = volume;
  const bool serial = serial_mode();
  for (int d = 0; d < volume.max_disparity; ++d) {
    auto dst = out.slice(d);
    if (serial) {
      kernels::serial::guided_filter(volume.slice(d), guide.pixels, volume.height, volume.width,
                                     params.radius, params.eta, dst);
    } else {
      kernels::parallel::guided_filter(volume.slice(d), guide.pixels, volume.height, volume.width,
                                       params.radius, params.eta, dst);
    }
    for (float& v : dst) v = std::clamp(v, -1.0f, 1.0f);
  }
  return out;
}

DisparityMap winner_takes_all(const CostVolume& volume) {
  DisparityMap map(volume.width, volume.height, 0.0f);
  if (serial_mode()) {
    kernels::serial::winner_takes_all(volume.values, volume.max_disparity, volume.height,
                                      volume.width, map.values);
  } else {
    kernels::parallel::winner_takes_all(volume.values, volume.max_disparity, volume.height,
                                        volume.width, map.values);
  }
  return map;
}

MatchResult match_pair(const Image& left, const Image& right, const NetworkWeights& weights,
                       int max_disparity, bool with_filtering, GuidedFilterParams guided) {
  if (!left.same_size(right)) {
    throw ShapeError("stereo pair images differ in size");
  }
  const Image left_gray = to_grayscale(left);
  const Image right_gray = to_grayscale(right);
  const Tensor feat_left = extract_features(to_tensor(standardize(left_gray)), weights);
  const Tensor feat_right = extract_features(to_tensor(standardize(right_gray)), weights);

  MatchResult result;
  result.left_volume = build_cost_volume(feat_left, feat_right, max_disparity, Direction::LeftReference);
  result.right_volume = build_cost_volume(feat_left, feat_right, max_disparity, Direction::RightReference);
  if (with_filtering) {
    result.left_volume = guided_filter_volume(median_filter_volume(result.left_volume), left_gray, guided);
    result.right_volume = guided_filter_volume(median_filter_volume(result.right_volume), right_gray, guided);
  }
  result.left = winner_takes_all(result.left_volume);
  result.right = winner_takes_all(result.right_volume);
  return result;
}

namespace {
constexpr char kVolumeMagic[4] = {'F', 'C', 'C', 'V'};

void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>(v >> (8 * i));
  os.write(b, 4);
}

std::uint32_t get_u32(const std::vector<char>& bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  return v;
}
}  // namespace

void save_cost_volume(const CostVolume& volume, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
  os.write(kVolumeMagic, 4);
  put_u32(os, static_cast<std::uint32_t>(volume.max_disparity));
  put_u32(os, static_cast<std::uint32_t>(volume.height));
  put_u32(os, static_cast<std::uint32_t>(volume.width));
  for (float f : volume.values) {
    std::uint32_t v;
    std::memcpy(&v, &f, 4);
    put_u32(os, v);
  }
  if (!os) throw ConfigError("failed writing " + path.string());
}

CostVolume load_cost_volume(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open cost volume " + path.string());
  const std::vector<char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kVolumeMagic, 4) != 0) {
    throw FormatError("cost volume has bad magic at byte offset 0 (expected \"FCCV\")");
  }
  if (bytes.size() < 16) throw FormatError("cost volume header truncated at byte offset " + std::to_string(bytes.size()));
  CostVolume volume;
  volume.max_disparity = static_cast<int>(get_u32(bytes, 4));
  volume.height = static_cast<int>(get_u32(bytes, 8));
  volume.width = static_cast<int>(get_u32(bytes, 12));
  const std::size_t count = std::size_t(volume.max_disparity) * volume.height * volume.width;
  if (bytes.size() != 16 + 4 * count) {
    throw FormatError("cost volume payload has " + std::to_string(bytes.size() - 16) +
                      " bytes at byte offset 16, expected " + std::to_string(4 * count));
  }
  volume.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t v = get_u32(bytes, 16 + 4 * i);
    std::memcpy(&volume.values[i], &v, 4);
  }
  return volume;
}

}  // namespace fcdcnn
