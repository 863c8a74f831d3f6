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

#include <cstddef>
#include <vector>

#include "fcdcnn/tensor.hpp"

namespace fcdcnn {

/// Interleaved 8-bit-range image (values nominally 0..255) with 1 or 3
/// channels.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> pixels;

  Image() = default;
  Image(int w, int h, int c = 1, float fill = 0.0f)
      : width(w), height(h), channels(c), pixels(std::size_t(w) * h * c, fill) {}

  std::size_t pixel_count() const { return std::size_t(width) * height; }
  float& at(int x, int y, int c = 0) { return pixels[(std::size_t(y) * width + x) * channels + c]; }
  float at(int x, int y, int c = 0) const {
    return pixels[(std::size_t(y) * width + x) * channels + c];
  }
  bool same_size(const Image& other) const {
    return width == other.width && height == other.height;
  }
};

/// Luminance 0.299 R + 0.587 G + 0.114 B; single-channel input is copied.
Image to_grayscale(const Image& image);

/// Per-image standardisation to zero mean and unit variance. A constant
/// image becomes all zeros.
Image standardize(const Image& gray);

/// Wraps a single-channel image as a (1, 1, H, W) tensor.
Tensor to_tensor(const Image& gray);

/// Grayscale conversion followed by standardisation: the network input.
inline Tensor network_input(const Image& image) { return to_tensor(standardize(to_grayscale(image))); }

}  // namespace fcdcnn
