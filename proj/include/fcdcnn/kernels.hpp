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

#include <cstdint>
#include <span>

namespace fcdcnn {

/// Border handling for 3x3 convolutions. `Reflect1` mirrors one pixel
/// (index -1 maps to 1) and preserves the spatial size; `Valid` drops the
/// one-pixel rim and shrinks each spatial dimension by two.
enum class PadMode { Reflect1, Valid };

/// Mirror an arbitrary index into [0, n) without repeating the edge sample.
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

struct ConvGeometry {
  int batch = 1;
  int in_channels = 1;
  int out_channels = 1;
  int height = 1;  // input height
  int width = 1;   // input width
  PadMode pad = PadMode::Reflect1;

  int out_height() const { return pad == PadMode::Reflect1 ? height : height - 2; }
  int out_width() const { return pad == PadMode::Reflect1 ? width : width - 2; }
  std::int64_t input_size() const {
    return std::int64_t{batch} * in_channels * height * width;
  }
  std::int64_t output_size() const {
    return std::int64_t{batch} * out_channels * out_height() * out_width();
  }
  std::int64_t kernel_size() const { return std::int64_t{out_channels} * in_channels * 9; }
};

// Every kernel exists twice: `serial` is the straightforward reference kept
// for testing and benchmarking, `parallel` is the OpenMP implementation used
// by default. Both take raw row-major buffers; callers validate shapes.
//
// Conventions shared by both namespaces:
//  * conv2d_forward overwrites `out`; the backward kernels accumulate.
//  * cost_volume writes D*H*W values in (d, y, x) order. For pixel x of the
//    reference view the candidate in the other view is x + step * d; step is
//    -1 for a left-referenced volume and +1 for a right-referenced one.
//    Out-of-image candidates receive -1 and zero-norm vectors score 0.
//  * box_mean averages over the in-bounds part of the (2r+1)^2 window.
//  * median5x5 mirrors borders with reflect_index.
//  * winner_takes_all breaks ties toward the smallest disparity.

#define FCDCNN_DECLARE_KERNELS                                                              \
  void conv2d_forward(const ConvGeometry& g, std::span<const float> input,                  \
                      std::span<const float> kernel, std::span<const float> bias,           \
                      std::span<float> out);                                                \
  void conv2d_backward_input(const ConvGeometry& g, std::span<const float> grad_out,        \
                             std::span<const float> kernel, std::span<float> grad_in);      \
  void conv2d_backward_params(const ConvGeometry& g, std::span<const float> input,          \
                              std::span<const float> grad_out,                              \
                              std::span<float> grad_kernel, std::span<float> grad_bias);    \
  void cost_volume(std::span<const float> reference, std::span<const float> other,          \
                   int channels, int height, int width, int max_disparity, int step,        \
                   std::span<float> out);                                                   \
  void median5x5(std::span<const float> slice, int height, int width, std::span<float> out); \
  void box_mean(std::span<const float> values, int height, int width, int radius,           \
                std::span<double> out);                                                     \
  void guided_filter(std::span<const float> slice, std::span<const float> guide,            \
                     int height, int width, int radius, double eta, std::span<float> out);  \
  void winner_takes_all(std::span<const float> volume, int max_disparity, int height,       \
                        int width, std::span<float> out);

namespace kernels::serial {
FCDCNN_DECLARE_KERNELS
}  // namespace kernels::serial

namespace kernels::parallel {
FCDCNN_DECLARE_KERNELS
}  // namespace kernels::parallel

#undef FCDCNN_DECLARE_KERNELS

}  // namespace fcdcnn
