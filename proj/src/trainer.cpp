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


#include "fcdcnn/trainer.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "fcdcnn/errors.hpp"

namespace fcdcnn {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be finite and non-negative");
  }
  if (batch_size < 1) throw ConfigError("batch size must be positive");
  if (!(margin > 0.0f)) throw ConfigError("margin must be positive");
  if (patch_size < 3 || patch_size % 2 == 0) throw ConfigError("patch size must be odd and >= 3");
  if (iterations < 0) throw ConfigError("iterations must be non-negative");
  if (!(variant_fraction >= 0.0 && variant_fraction <= 1.0)) {
    throw ConfigError("variant fraction must lie in [0, 1]");
  }
  if (chunk_size < 1) throw ConfigError("chunk size must be positive");
  if (checkpoint_every < 0) throw ConfigError("checkpoint interval must be non-negative");
  if (checkpoint_every > 0 && checkpoint_path.empty()) {
    throw ConfigError("checkpoints requested without a checkpoint path");
  }
}

TrainingPair make_training_pair(const Image& left, const Image& right, const DisparityMap& gt,
                                std::string id, std::span<const Image> right_variants) {
  if (!left.same_size(right)) throw ShapeError("training pair images differ in size");
  if (gt.width != left.width || gt.height != left.height) {
    throw ShapeError("ground truth does not match the left image size");
  }
  TrainingPair pair;
  pair.id = std::move(id);
  pair.left = standardize(to_grayscale(left));
  pair.right = standardize(to_grayscale(right));
  pair.gt = gt;
  for (const Image& v : right_variants) {
    if (!v.same_size(right)) throw ShapeError("right variant differs in size");
    pair.right_variants.push_back(standardize(to_grayscale(v)));
  }
  return pair;
}

namespace {

std::vector<float> crop_patch(const Image& image, int cx, int cy, int size) {
  const int r = size / 2;
  std::vector<float> patch(std::size_t(size) * size);
  for (int y = 0; y < size; ++y) {
    const float* row = image.pixels.data() + std::size_t(cy - r + y) * image.width + (cx - r);
    std::copy(row, row + size, patch.begin() + std::size_t(y) * size);
  }
  return patch;
}

bool inside(int cx, int cy, int r, int width, int height) {
  return cx - r >= 0 && cx + r < width && cy - r >= 0 && cy + r < height;
}

}  // namespace

PatchSampler::PatchSampler(std::vector<TrainingPair> pairs, int patch_size, double variant_fraction)
    : pairs_(std::move(pairs)), patch_size_(patch_size), variant_fraction_(variant_fraction) {
  if (patch_size < 3 || patch_size % 2 == 0) throw ConfigError("patch size must be odd and >= 3");
  const int r = patch_size / 2;
  for (const auto& pair : pairs_) {
    std::vector<std::uint32_t> positions;
    for (int y = 0; y < pair.gt.height; ++y) {
      for (int x = 0; x < pair.gt.width; ++x) {
        if (!pair.gt.valid(x, y) || !inside(x, y, r, pair.left.width, pair.left.height)) continue;
        const int d = static_cast<int>(std::lround(pair.gt.at(x, y)));
        if (!inside(x - d, y, r, pair.right.width, pair.right.height)) continue;
        positions.push_back(static_cast<std::uint32_t>(std::size_t(y) * pair.gt.width + x));
      }
    }
    pair_weights_.push_back(static_cast<double>(positions.size()));
    valid_positions_.push_back(std::move(positions));
  }
}

TrainingSample PatchSampler::sample(std::mt19937_64& rng) const {
  double total = 0.0;
  for (double w : pair_weights_) total += w;
  if (total == 0.0) {
    throw DegenerateInputError("sampling exhausted: no valid ground-truth position admits in-bounds patches");
  }
  std::discrete_distribution<int> pick_pair(pair_weights_.begin(), pair_weights_.end());
  std::uniform_int_distribution<int> magnitude(kMinOffset, kMaxOffset);
  std::bernoulli_distribution positive_sign(0.5);
  std::bernoulli_distribution use_variant(variant_fraction_);
  const int r = patch_size_ / 2;

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const int p = pick_pair(rng);
    const auto& positions = valid_positions_[p];
    std::uniform_int_distribution<std::size_t> pick(0, positions.size() - 1);
    const std::uint32_t index = positions[pick(rng)];
    const TrainingPair& pair = pairs_[p];
    const int x = static_cast<int>(index % pair.gt.width);
    const int y = static_cast<int>(index / pair.gt.width);
    const int d = static_cast<int>(std::lround(pair.gt.at(x, y)));
    const int offset = positive_sign(rng) ? magnitude(rng) : -magnitude(rng);
    if (!inside(x - d + offset, y, r, pair.right.width, pair.right.height)) continue;

    TrainingSample s;
    s.pair_index = p;
    s.x = x;
    s.y = y;
    s.disparity = d;
    s.negative_offset = offset;
    const bool variant = !pair.right_variants.empty() && use_variant(rng);
    if (variant) {
      std::uniform_int_distribution<int> which(0, static_cast<int>(pair.right_variants.size()) - 1);
      s.variant = which(rng);
    }
    const Image& right = variant ? pair.right_variants[s.variant] : pair.right;
    s.anchor = crop_patch(pair.left, x, y, patch_size_);
    s.positive = crop_patch(right, x - d, y, patch_size_);
    s.negative = crop_patch(right, x - d + offset, y, patch_size_);
    return s;
  }
  throw DegenerateInputError("sampling exhausted after " + std::to_string(kMaxAttempts) +
                             " attempts without an in-bounds negative patch");
}

std::vector<TrainingSample> PatchSampler::batch(std::uint64_t seed, int count) const {
  std::vector<TrainingSample> out(count);
  bool failed = false;
  std::string failure;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < count; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(seq);
    try {
      out[i] = sample(rng);
    } catch (const DegenerateInputError& e) {
#pragma omp critical
      {
        failed = true;
        failure = e.what();
      }
    }
  }
  if (failed) throw DegenerateInputError(failure);
  return out;
}

TrainingSample sample_training_example(const TrainingPair& pair, int patch_size,
                                       std::mt19937_64& rng) {
  return PatchSampler({pair}, patch_size).sample(rng);
}

namespace {

std::vector<float> centre_vector(const Tensor& features) {
  const int c = features.dim(1);
  const int cy = features.dim(2) / 2;
  const int cx = features.dim(3) / 2;
  std::vector<float> v(c);
  for (int k = 0; k < c; ++k) v[k] = features.at(0, k, cy, cx);
  return v;
}

PadMode training_pad(const NetworkConfig& config, int patch_size) {
  return patch_size >= config.receptive_field() ? PadMode::Valid : PadMode::Reflect1;
}

Tensor stack_patches(std::span<const TrainingSample> samples, int patch_size,
                     std::vector<float> TrainingSample::*member) {
  const std::size_t area = std::size_t(patch_size) * patch_size;
  Tensor t({static_cast<int>(samples.size()), 1, patch_size, patch_size});
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& patch = samples[i].*member;
    if (patch.size() != area) throw ShapeError("training patch has the wrong size");
    std::copy(patch.begin(), patch.end(), t.data().begin() + i * area);
  }
  return t;
}

int patch_side(const TrainingSample& s) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(s.anchor.size()))));
  if (side * side != static_cast<int>(s.anchor.size()) || side % 2 == 0) {
    throw ShapeError("training patches must be square with odd side");
  }
  return side;
}

}  // namespace

std::pair<float, float> forward_sample(const TrainingSample& sample, const NetworkWeights& weights) {
  const int side = patch_side(sample);
  auto centre = [&](const std::vector<float>& patch) {
    return centre_vector(extract_features(Tensor({1, 1, side, side}, patch), weights));
  };
  const auto a = centre(sample.anchor);
  const auto p = centre(sample.positive);
  const auto n = centre(sample.negative);
  return {cosine_similarity(a, p), cosine_similarity(a, n)};
}

double adam_update(double grad, double& m, double& v, std::int64_t t, const AdamParams& params) {
  m = params.beta1 * m + (1.0 - params.beta1) * grad;
  v = params.beta2 * v + (1.0 - params.beta2) * grad * grad;
  const double m_hat = m / (1.0 - std::pow(params.beta1, static_cast<double>(t)));
  const double v_hat = v / (1.0 - std::pow(params.beta2, static_cast<double>(t)));
  return params.learning_rate * m_hat / (std::sqrt(v_hat) + params.epsilon);
}

void adam_step(NetworkWeights& weights, AdamState& state, const AdamParams& params) {
  auto tensors = weights.tensors();
  if (state.first_moment.size() != tensors.size()) {
    state.first_moment.clear();
    state.second_moment.clear();
    for (const Tensor* t : tensors) {
      state.first_moment.emplace_back(t->size(), 0.0);
      state.second_moment.emplace_back(t->size(), 0.0);
    }
  }
  ++state.step;
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    Tensor& t = *tensors[k];
    if (!t.has_grad()) continue;
    auto grad = t.grad();
    auto data = t.data();
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double delta = adam_update(grad[i], m[i], v[i], state.step, params);
      data[i] = static_cast<float>(data[i] - delta);
    }
  }
}

double accumulate_batch_gradients(NetworkWeights& weights, std::span<const TrainingSample> batch,
                                  float margin, int chunk_size) {
  if (batch.empty()) throw ConfigError("empty training batch");
  const int side = patch_side(batch.front());
  const PadMode pad = training_pad(weights.config, side);
  const float scale = 1.0f / static_cast<float>(batch.size());
  double loss = 0.0;
  for (std::size_t begin = 0; begin < batch.size(); begin += chunk_size) {
    const auto chunk = batch.subspan(begin, std::min<std::size_t>(chunk_size, batch.size() - begin));
    Tape tape;
    const NetworkVars vars = record_parameters(tape, weights);
    auto centre = [&](std::vector<float> TrainingSample::*member) {
      const Var image = tape.constant(stack_patches(chunk, side, member));
      const Var features = record_features(tape, weights.config, vars, image, pad);
      return tape.crop_center(features, 1, 1);
    };
    const Var anchor = centre(&TrainingSample::anchor);
    const Var positive = centre(&TrainingSample::positive);
    const Var negative = centre(&TrainingSample::negative);
    const Var s_pos = tape.cosine_similarity(anchor, positive);
    const Var s_neg = tape.cosine_similarity(anchor, negative);
    const Var total = tape.sum(tape.hinge_loss(s_pos, s_neg, margin), scale);
    tape.backward(total);
    loss += tape.value(total)[0];
  }
  return loss;
}

double evaluate_margin(const NetworkWeights& weights, const PatchSampler& sampler, int count,
                       std::uint64_t seed) {
  if (count < 1) throw ConfigError("margin evaluation needs at least one sample");
  const auto samples = sampler.batch(seed, count);
  const int side = sampler.patch_size();
  const PadMode pad = training_pad(weights.config, side);
  constexpr std::size_t kChunk = 256;
  double total = 0.0;
  const std::span<const TrainingSample> all(samples);
  for (std::size_t begin = 0; begin < all.size(); begin += kChunk) {
    const auto chunk = all.subspan(begin, std::min(kChunk, all.size() - begin));
    auto centre = [&](std::vector<float> TrainingSample::*member) {
      return crop_center(extract_features(stack_patches(chunk, side, member), weights, pad), 1, 1);
    };
    const Tensor a = centre(&TrainingSample::anchor);
    const Tensor sp = cosine_similarity(a, centre(&TrainingSample::positive));
    const Tensor sn = cosine_similarity(a, centre(&TrainingSample::negative));
    for (std::size_t i = 0; i < chunk.size(); ++i) total += double(sp[i]) - sn[i];
  }
  return total / count;
}

std::uint64_t batch_seed(std::uint64_t seed, std::uint64_t iteration) {
  // splitmix64 finaliser over the combined key
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (iteration + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void write_checkpoint(const NetworkWeights& weights, const std::filesystem::path& path,
                      const std::map<std::string, std::string>& metadata) {
  save_weights(weights, path);
  std::filesystem::path meta = path;
  meta += ".meta";
  std::ofstream os(meta, std::ios::trunc);
  if (!os) throw ConfigError("cannot write checkpoint metadata " + meta.string());
  for (const auto& [key, value] : metadata) os << key << '=' << value << '\n';
  if (!os) throw ConfigError("failed writing checkpoint metadata " + meta.string());
}

namespace {
std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}
}  // namespace

TrainResult train(const PatchSampler& sampler, const TrainConfig& config, NetworkWeights initial,
                  const TrainProgress& progress) {
  config.validate();
  if (sampler.patch_size() != config.patch_size) {
    throw ConfigError("sampler patch size " + std::to_string(sampler.patch_size()) +
                      " differs from configured " + std::to_string(config.patch_size));
  }
  TrainResult result;
  result.weights = std::move(initial);
  const AdamParams adam{config.learning_rate};
  for (int it = 0; it < config.iterations; ++it) {
    const std::uint64_t seed = batch_seed(config.seed, static_cast<std::uint64_t>(it));
    const auto samples = sampler.batch(seed, config.batch_size);
    result.weights.zero_grad();
    const double loss = accumulate_batch_gradients(result.weights, samples, config.margin, config.chunk_size);
    if (!std::isfinite(loss)) {
      throw DegenerateInputError("non-finite training loss at iteration " + std::to_string(it) +
                                 " (batch seed " + std::to_string(seed) + ")");
    }
    adam_step(result.weights, result.optimizer, adam);
    result.loss_curve.push_back(loss);
    if (progress) progress(it, loss);
    if (config.checkpoint_every > 0 && (it + 1) % config.checkpoint_every == 0) {
      write_checkpoint(result.weights, config.checkpoint_path,
                       {{"iteration", std::to_string(it + 1)},
                        {"lr", format_double(adam.learning_rate)},
                        {"beta1", format_double(adam.beta1)},
                        {"beta2", format_double(adam.beta2)},
                        {"epsilon", format_double(adam.epsilon)},
                        {"seed", std::to_string(config.seed)},
                        {"dataset", config.dataset_id},
                        {"loss", format_double(loss)},
                        {"init", "uniform-fan-in"}});
    }
  }
  return result;
}

}  // namespace fcdcnn
