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


#include "fcdcnn/image.hpp"

#include <cmath>

#include "fcdcnn/errors.hpp"

namespace fcdcnn {

Image to_grayscale(const Image& image) {
  if (image.channels == 1) return image;
  if (image.channels < 3) {
    throw FormatError("cannot convert a " + std::to_string(image.channels) + "-channel image to grayscale");
  }
  Image gray(image.width, image.height, 1);
  for (std::size_t i = 0; i < gray.pixel_count(); ++i) {
    const float* p = image.pixels.data() + i * image.channels;
    gray.pixels[i] = 0.299f * p[0] + 0.587f * p[1] + 0.114f * p[2];
  }
  return gray;
}

Image standardize(const Image& gray) {
  if (gray.channels != 1) throw ConfigError("standardize expects a single-channel image");
  Image out = gray;
  const std::size_t n = gray.pixel_count();
  if (n == 0) return out;
  double sum = 0.0;
  for (float v : gray.pixels) sum += v;
  const double mean = sum / n;
  double sq = 0.0;
  for (float v : gray.pixels) sq += (v - mean) * (v - mean);
  const double stddev = std::sqrt(sq / n);
  const double scale = stddev > 1e-12 ? 1.0 / stddev : 0.0;
  for (std::size_t i = 0; i < n; ++i) out.pixels[i] = static_cast<float>((gray.pixels[i] - mean) * scale);
  return out;
}

Tensor to_tensor(const Image& gray) {
  if (gray.channels != 1) throw ConfigError("to_tensor expects a single-channel image");
  return Tensor({1, 1, gray.height, gray.width}, gray.pixels);
}

}  // namespace fcdcnn
