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


#include "fcdcnn/network.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include "fcdcnn/errors.hpp"

namespace fcdcnn {

void NetworkConfig::validate() const {
  if (num_layers < 2 || num_layers > 8) {
    throw ConfigError("num_layers must be in [2, 8], got " + std::to_string(num_layers));
  }
  if (feature_maps != 64) {
    throw ConfigError("feature_maps must be 64, got " + std::to_string(feature_maps));
  }
  if (kernel_size != 3) {
    throw ConfigError("kernel_size must be 3, got " + std::to_string(kernel_size));
  }
}

void NetworkWeights::zero_grad() {
  for (Tensor* t : tensors()) t->zero_grad();
}

std::vector<Tensor*> NetworkWeights::tensors() {
  std::vector<Tensor*> out;
  for (auto& layer : layers) {
    out.push_back(&layer.kernel);
    out.push_back(&layer.bias);
  }
  return out;
}

std::vector<const Tensor*> NetworkWeights::tensors() const {
  std::vector<const Tensor*> out;
  for (const auto& layer : layers) {
    out.push_back(&layer.kernel);
    out.push_back(&layer.bias);
  }
  return out;
}

NetworkWeights init_weights(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  NetworkWeights weights;
  weights.config = config;
  for (int i = 0; i < config.num_layers; ++i) {
    const int in = config.input_channels(i);
    const int out = config.feature_maps;
    const float bound = static_cast<float>(std::sqrt(1.0 / (in * 9.0)));
    std::uniform_real_distribution<float> dist(-bound, bound);
    ConvLayerParams layer{Tensor({out, in, 3, 3}), Tensor({out}, 0.0f)};
    for (float& v : layer.kernel.data()) v = dist(rng);
    weights.layers.push_back(std::move(layer));
  }
  return weights;
}

std::int64_t count_parameters(const NetworkConfig& config) {
  std::int64_t total = 0;
  const std::int64_t k2 = std::int64_t{config.kernel_size} * config.kernel_size;
  for (int i = 0; i < config.num_layers; ++i) {
    total += k2 * config.input_channels(i) * config.feature_maps + config.feature_maps;
  }
  return total;
}

std::int64_t count_parameters(const NetworkWeights& weights) {
  std::int64_t total = 0;
  for (const auto& layer : weights.layers) {
    total += static_cast<std::int64_t>(layer.kernel.size() + layer.bias.size());
  }
  return total;
}

Tensor extract_features(const Tensor& image, const NetworkWeights& weights, PadMode pad) {
  if (image.rank() != 4 || image.dim(1) != 1) {
    throw ConfigError("extract_features expects a (B, 1, H, W) image, got " +
                      Tensor::shape_string(image.shape()));
  }
  const auto& layers = weights.layers;
  if (layers.empty()) throw ConfigError("network has no layers");

  std::vector<Tensor> outputs;
  outputs.reserve(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const int expected = weights.config.input_channels(static_cast<int>(i));
    if (layers[i].in_channels() != expected) {
      throw ConfigError("layer " + std::to_string(i) + " expects " +
                        std::to_string(layers[i].in_channels()) + " input channels but dense "
                        "connectivity supplies " + std::to_string(expected));
    }
    if (i == 0) {
      outputs.push_back(tanh_activation(conv2d(image, layers[i], pad)));
      continue;
    }
    const int h = outputs.back().dim(2);
    const int w = outputs.back().dim(3);
    for (Tensor& t : outputs) {
      if (t.dim(2) != h || t.dim(3) != w) t = crop_center(t, h, w);
    }
    std::vector<const Tensor*> previous;
    for (const Tensor& t : outputs) previous.push_back(&t);
    outputs.push_back(tanh_activation(conv2d(concat_channels(previous), layers[i], pad)));
  }
  return std::move(outputs.back());
}

NetworkVars record_parameters(Tape& tape, NetworkWeights& weights) {
  NetworkVars vars;
  for (auto& layer : weights.layers) {
    vars.kernels.push_back(tape.parameter(layer.kernel));
    vars.biases.push_back(tape.parameter(layer.bias));
  }
  return vars;
}

Var record_features(Tape& tape, const NetworkConfig& config, const NetworkVars& vars, Var image,
                    PadMode pad) {
  std::vector<Var> outputs;
  for (std::size_t i = 0; i < vars.kernels.size(); ++i) {
    Var input = image;
    if (i > 0) {
      const Tensor& latest = tape.value(outputs.back());
      std::vector<Var> parts;
      for (Var v : outputs) {
        const Tensor& t = tape.value(v);
        parts.push_back(t.dim(2) == latest.dim(2) && t.dim(3) == latest.dim(3)
                            ? v
                            : tape.crop_center(v, latest.dim(2), latest.dim(3)));
      }
      input = parts.size() == 1 ? parts.front() : tape.concat_channels(parts);
    }
    const int channels = tape.value(input).dim(1);
    if (channels != config.input_channels(static_cast<int>(i))) {
      throw ConfigError("layer " + std::to_string(i) + " receives " + std::to_string(channels) +
                        " channels");
    }
    outputs.push_back(tape.tanh(tape.conv2d(input, vars.kernels[i], vars.biases[i], pad)));
  }
  return outputs.back();
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, float f) {
  std::uint32_t v;
  std::memcpy(&v, &f, sizeof v);
  put_u32(out, v);
}

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }

  std::uint32_t u32(const std::string& what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += 4;
    return v;
  }

  void f32s(std::span<float> dst, const std::string& what) {
    need(dst.size() * 4, what);
    for (float& f : dst) {
      std::uint32_t v = 0;
      for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_ + i]} << (8 * i);
      std::memcpy(&f, &v, sizeof f);
      pos_ += 4;
    }
  }

 private:
  void need(std::size_t n, const std::string& what) {
    if (bytes_.size() - pos_ < n) {
      throw FormatError("weights file truncated at byte offset " + std::to_string(pos_) +
                        " while reading " + what);
    }
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t n) {
  return static_cast<std::uint32_t>(::crc32(::crc32(0L, Z_NULL, 0), data, static_cast<uInt>(n)));
}

constexpr char kMagic[4] = {'F', 'C', 'D', 'C'};

}  // namespace

std::vector<std::uint8_t> serialize_weights(const NetworkWeights& weights) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kWeightsFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(weights.layers.size()));
  for (const auto& layer : weights.layers) {
    put_u32(out, static_cast<std::uint32_t>(layer.in_channels()));
    put_u32(out, static_cast<std::uint32_t>(layer.out_channels()));
    put_u32(out, static_cast<std::uint32_t>(layer.kernel.dim(2)));
    for (float v : layer.kernel.data()) put_f32(out, v);
    for (float v : layer.bias.data()) put_f32(out, v);
  }
  put_u32(out, crc32_of(out.data() + 4, out.size() - 4));
  return out;
}

NetworkWeights deserialize_weights(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("weights file has bad magic at byte offset 0 (expected \"FCDC\")");
  }
  ByteReader reader(bytes);
  reader.u32("magic");
  const std::size_t version_offset = reader.offset();
  const std::uint32_t version = reader.u32("format version");
  if (version != kWeightsFormatVersion) {
    throw FormatError("unsupported weights format version " + std::to_string(version) +
                      " at byte offset " + std::to_string(version_offset));
  }
  const std::size_t count_offset = reader.offset();
  const std::uint32_t num_layers = reader.u32("layer count");

  NetworkWeights weights;
  weights.config.num_layers = static_cast<int>(num_layers);
  if (num_layers < 2 || num_layers > 8) {
    throw FormatError("invalid layer count " + std::to_string(num_layers) + " at byte offset " +
                      std::to_string(count_offset));
  }
  for (std::uint32_t i = 0; i < num_layers; ++i) {
    const std::string tag = "layer " + std::to_string(i);
    const std::size_t header_offset = reader.offset();
    const std::uint32_t in = reader.u32(tag + " header");
    const std::uint32_t out = reader.u32(tag + " header");
    const std::uint32_t k = reader.u32(tag + " header");
    if (k != 3 || out != 64 || in != static_cast<std::uint32_t>(weights.config.input_channels(i))) {
      throw FormatError(tag + " header at byte offset " + std::to_string(header_offset) +
                        " declares in=" + std::to_string(in) + " out=" + std::to_string(out) +
                        " kernel=" + std::to_string(k) + ", inconsistent with the dense layout");
    }
    ConvLayerParams layer{Tensor({int(out), int(in), 3, 3}), Tensor({int(out)})};
    reader.f32s(layer.kernel.data(), tag + " kernel");
    reader.f32s(layer.bias.data(), tag + " bias");
    weights.layers.push_back(std::move(layer));
  }
  const std::size_t crc_offset = reader.offset();
  const std::uint32_t stored = reader.u32("checksum");
  const std::uint32_t actual = crc32_of(bytes.data() + 4, crc_offset - 4);
  if (stored != actual) {
    throw FormatError("weights checksum mismatch at byte offset " + std::to_string(crc_offset));
  }
  if (reader.offset() != bytes.size()) {
    throw FormatError("trailing bytes after checksum at byte offset " + std::to_string(reader.offset()));
  }
  return weights;
}

void save_weights(const NetworkWeights& weights, const std::filesystem::path& path) {
  const auto bytes = serialize_weights(weights);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw ConfigError("cannot open " + path.string() + " for writing");
  file.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw ConfigError("failed writing " + path.string());
}

NetworkWeights load_weights(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot open weights file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  return deserialize_weights(bytes);
}

}  // namespace fcdcnn
