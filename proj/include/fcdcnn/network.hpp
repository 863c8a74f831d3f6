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
#include <filesystem>
#include <vector>

#include "fcdcnn/autograd.hpp"
#include "fcdcnn/ops.hpp"

namespace fcdcnn {

enum class Activation { Tanh };

struct NetworkConfig {
  int num_layers = 5;
  int feature_maps = 64;
  int kernel_size = 3;
  Activation activation = Activation::Tanh;

  /// Throws ConfigError unless 2 <= num_layers <= 8, feature_maps == 64 and
  /// kernel_size == 3.
  void validate() const;

  /// Layer 0 sees the grayscale image; layer i >= 1 sees the concatenated
  /// outputs of layers 0..i-1 (the raw image is not re-fed).
  int input_channels(int layer) const { return layer == 0 ? 1 : feature_maps * layer; }

  /// Side length of the input window that determines one output pixel.
  int receptive_field() const { return 2 * num_layers + 1; }
};

struct NetworkWeights {
  NetworkConfig config;
  std::vector<ConvLayerParams> layers;

  void zero_grad();
  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
};

/// Uniform(-b, b) kernels with b = sqrt(1 / (in_channels * 9)), zero biases.
NetworkWeights init_weights(const NetworkConfig& config, std::uint64_t seed);

std::int64_t count_parameters(const NetworkConfig& config);
std::int64_t count_parameters(const NetworkWeights& weights);

/// Runs the dense extractor on a (B, 1, H, W) normalised image and returns
/// the last layer's (B, 64, H, W) TanH output. PadMode::Valid computes only
/// the receptive-field core, see record_features.
Tensor extract_features(const Tensor& image, const NetworkWeights& weights,
                        PadMode pad = PadMode::Reflect1);

/// Tape handles for every kernel and bias of a network.
struct NetworkVars {
  std::vector<Var> kernels;
  std::vector<Var> biases;
};

NetworkVars record_parameters(Tape& tape, NetworkWeights& weights);

/// Records the extractor on a tape. With PadMode::Valid every layer drops
/// its one-pixel rim and earlier outputs are centre-cropped before
/// concatenation, which yields the receptive-field core only; for inputs at
/// least receptive_field() wide its centre equals the padded result.
Var record_features(Tape& tape, const NetworkConfig& config, const NetworkVars& vars, Var image,
                    PadMode pad = PadMode::Reflect1);

/// Binary weights file, little-endian:
///   "FCDC" | u32 version (1) | u32 num_layers |
///   per layer: u32 in, u32 out, u32 kernel (3), f32 kernel[out][in][3][3],
///              f32 bias[out] |
///   u32 CRC-32 of every byte after the magic.
void save_weights(const NetworkWeights& weights, const std::filesystem::path& path);
NetworkWeights load_weights(const std::filesystem::path& path);

std::vector<std::uint8_t> serialize_weights(const NetworkWeights& weights);
NetworkWeights deserialize_weights(const std::vector<std::uint8_t>& bytes);

inline constexpr std::uint32_t kWeightsFormatVersion = 1;

}  // namespace fcdcnn
