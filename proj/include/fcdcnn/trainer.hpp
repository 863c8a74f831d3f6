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
#include <functional>
#include <map>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fcdcnn/disparity.hpp"
#include "fcdcnn/image.hpp"
#include "fcdcnn/network.hpp"

namespace fcdcnn {

struct TrainConfig {
  double learning_rate = 6e-6;
  int batch_size = 800;
  float margin = 0.2f;
  int patch_size = 11;
  int iterations = 1000;
  std::uint64_t seed = 0;
  // Share of samples whose right patches come from a lighting/exposure
  // variant of the right image, when the pair has variants.
  double variant_fraction = 0.10;
  // Samples per forward/backward graph; gradients accumulate across chunks.
  int chunk_size = 64;
  int checkpoint_every = 0;  // 0 disables checkpoints
  std::filesystem::path checkpoint_path;
  std::string dataset_id;

  void validate() const;
};

/// A rectified training pair: standardised grayscale images and left
/// ground truth.
struct TrainingPair {
  std::string id;
  Image left;
  Image right;
  DisparityMap gt;
  std::vector<Image> right_variants;
};

/// Converts raw images (any channel count, 0..255) to network input form.
TrainingPair make_training_pair(const Image& left, const Image& right, const DisparityMap& gt,
                                std::string id = {}, std::span<const Image> right_variants = {});

struct TrainingSample {
  std::vector<float> anchor;
  std::vector<float> positive;
  std::vector<float> negative;
  // Audit fields: anchor at (x, y) in the left image, positive at (x - d, y)
  // and negative at (x - d + negative_offset, y) in the right image.
  int pair_index = 0;
  int x = 0;
  int y = 0;
  int disparity = 0;
  int negative_offset = 0;
  int variant = -1;  // index into right_variants, -1 for the plain right image
};

/// Draws anchor/positive/negative triples uniformly over valid ground-truth
/// positions of a set of pairs (with replacement). Disparities are rounded to
/// the nearest integer; negative offsets are uniform over {-6..-2, 2..6}.
class PatchSampler {
 public:
  static constexpr int kMaxAttempts = 10000;
  static constexpr int kMinOffset = 2;
  static constexpr int kMaxOffset = 6;

  PatchSampler(std::vector<TrainingPair> pairs, int patch_size, double variant_fraction = 0.0);

  /// Throws DegenerateInputError when no in-bounds triple is found within
  /// kMaxAttempts draws.
  TrainingSample sample(std::mt19937_64& rng) const;

  /// `count` samples; sample i uses its own generator seeded from
  /// (seed, i), so the result is independent of the thread count.
  std::vector<TrainingSample> batch(std::uint64_t seed, int count) const;

  int patch_size() const { return patch_size_; }
  const std::vector<TrainingPair>& pairs() const { return pairs_; }

 private:
  std::vector<TrainingPair> pairs_;
  std::vector<std::vector<std::uint32_t>> valid_positions_;
  std::vector<double> pair_weights_;
  int patch_size_;
  double variant_fraction_;
};

TrainingSample sample_training_example(const TrainingPair& pair, int patch_size,
                                       std::mt19937_64& rng);

/// Similarities of the anchor's centre feature vector with the positive and
/// negative centre vectors, each patch run through extract_features.
std::pair<float, float> forward_sample(const TrainingSample& sample, const NetworkWeights& weights);

struct AdamParams {
  double learning_rate = 6e-6;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::int64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

/// Bias-corrected Adam update for one coordinate at step t >= 1; updates the
/// moments and returns the amount to subtract from the parameter.
double adam_update(double grad, double& m, double& v, std::int64_t t, const AdamParams& params);

/// Applies one Adam step using the gradients stored on the weight tensors.
void adam_step(NetworkWeights& weights, AdamState& state, const AdamParams& params);

/// Accumulates (into the weights' grad buffers) the gradient of the batch
/// mean hinge loss and returns that loss.
double accumulate_batch_gradients(NetworkWeights& weights, std::span<const TrainingSample> batch,
                                  float margin, int chunk_size);

/// Mean of (s_pos - s_neg) over `count` fresh samples.
double evaluate_margin(const NetworkWeights& weights, const PatchSampler& sampler, int count,
                       std::uint64_t seed);

struct TrainResult {
  NetworkWeights weights;
  std::vector<double> loss_curve;
  AdamState optimizer;
};

using TrainProgress = std::function<void(int iteration, double loss)>;

/// Throws DegenerateInputError naming the iteration and batch seed when the
/// loss becomes non-finite.
TrainResult train(const PatchSampler& sampler, const TrainConfig& config, NetworkWeights initial,
                  const TrainProgress& progress = {});

/// Writes the weights file plus a "<path>.meta" key=value sidecar.
void write_checkpoint(const NetworkWeights& weights, const std::filesystem::path& path,
                      const std::map<std::string, std::string>& metadata);

std::uint64_t batch_seed(std::uint64_t seed, std::uint64_t iteration);

}  // namespace fcdcnn
