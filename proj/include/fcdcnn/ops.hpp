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

#include <span>
#include <vector>

#include "fcdcnn/kernels.hpp"
#include "fcdcnn/tensor.hpp"

namespace fcdcnn {

/// One 3x3 convolution: kernel (out, in, 3, 3) and bias (out).
struct ConvLayerParams {
  Tensor kernel;
  Tensor bias;

  int in_channels() const { return kernel.dim(1); }
  int out_channels() const { return kernel.dim(0); }
};

/// 3x3 convolution of a (B, C, H, W) tensor. Throws ConfigError on channel
/// or kernel-size mismatch and ShapeError on empty or too-small inputs.
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              PadMode pad = PadMode::Reflect1);
inline Tensor conv2d(const Tensor& input, const ConvLayerParams& params,
                     PadMode pad = PadMode::Reflect1) {
  return conv2d(input, params.kernel, params.bias, pad);
}

Tensor tanh_activation(const Tensor& input);

/// Stacks (B, C_i, H, W) tensors along the channel axis in list order.
Tensor concat_channels(std::span<const Tensor* const> inputs);
Tensor concat_channels(std::initializer_list<const Tensor*> inputs);

/// Central (height, width) window of a 4-D tensor. Sizes must share parity
/// with the input so the window is exactly centred.
Tensor crop_center(const Tensor& input, int height, int width);

/// Cosine similarity along the channel axis: (B, C, H, W) x2 -> (B, 1, H, W).
/// Positions where either vector has norm below 1e-8 score 0.
Tensor cosine_similarity(const Tensor& a, const Tensor& b);
float cosine_similarity(std::span<const float> a, std::span<const float> b);

/// max(0, margin + s_neg - s_pos).
inline float hinge_loss(float s_pos, float s_neg, float margin = 0.2f) {
  const float z = margin + s_neg - s_pos;
  return z < 0.0f ? 0.0f : z;  // NaN propagates
}

inline constexpr double kMinNorm = 1e-8;

}  // namespace fcdcnn
