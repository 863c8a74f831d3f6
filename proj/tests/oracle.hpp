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


// Independent double-precision reference implementations used by the tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fcdcnn/network.hpp"
#include "fcdcnn/trainer.hpp"

namespace fcdcnn::oracle {

inline int mirror(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
  return i;
}

// Planar C x H x W image in double.
struct Planes {
  int c = 0, h = 0, w = 0;
  std::vector<double> v;
  double& at(int k, int y, int x) { return v[(std::size_t(k) * h + y) * w + x]; }
  double at(int k, int y, int x) const { return v[(std::size_t(k) * h + y) * w + x]; }
};

// 3x3 convolution straight from the definition, accumulated tap by tap.
inline Planes conv3x3(const Planes& in, const std::vector<double>& kernel,
                      const std::vector<double>& bias, int out_channels, bool reflect) {
  Planes out;
  out.c = out_channels;
  out.h = reflect ? in.h : in.h - 2;
  out.w = reflect ? in.w : in.w - 2;
  const std::size_t plane = std::size_t(out.h) * out.w;
  out.v.assign(std::size_t(out.c) * plane, 0.0);
  const int shift = reflect ? 0 : 1;
  // source offset within an input plane, per tap and output pixel
  std::vector<std::size_t> source(9 * plane);
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      const int tap = (dy + 1) * 3 + (dx + 1);
      for (int y = 0; y < out.h; ++y) {
        for (int x = 0; x < out.w; ++x) {
          const int sy = reflect ? mirror(y + dy, in.h) : y + shift + dy;
          const int sx = reflect ? mirror(x + dx, in.w) : x + shift + dx;
          source[tap * plane + std::size_t(y) * out.w + x] = std::size_t(sy) * in.w + sx;
        }
      }
    }
  }
  const std::size_t in_plane = std::size_t(in.h) * in.w;
  for (int o = 0; o < out.c; ++o) {
    double* dst = out.v.data() + o * plane;
    for (std::size_t i = 0; i < plane; ++i) dst[i] = bias[o];
    for (int k = 0; k < in.c; ++k) {
      const double* src = in.v.data() + k * in_plane;
      for (int tap = 0; tap < 9; ++tap) {
        const double wk = kernel[(std::size_t(o) * in.c + k) * 9 + tap];
        const std::size_t* idx = source.data() + tap * plane;
        for (std::size_t i = 0; i < plane; ++i) dst[i] += wk * src[idx[i]];
      }
    }
  }
  return out;
}

struct DoubleWeights {
  int feature_maps = 0;
  std::vector<std::vector<double>> kernels;
  std::vector<std::vector<double>> biases;
};

inline DoubleWeights to_double(const NetworkWeights& w) {
  DoubleWeights d;
  d.feature_maps = w.config.feature_maps;
  for (const auto& layer : w.layers) {
    d.kernels.emplace_back(layer.kernel.data().begin(), layer.kernel.data().end());
    d.biases.emplace_back(layer.bias.data().begin(), layer.bias.data().end());
  }
  return d;
}

// Dense network on a single-channel image with reflect padding; returns all
// output channels of the last layer.
inline Planes features(const std::vector<float>& image, int h, int w, const DoubleWeights& net) {
  Planes input{1, h, w, std::vector<double>(image.begin(), image.end())};
  std::vector<Planes> outputs;
  Planes current = input;
  for (std::size_t l = 0; l < net.kernels.size(); ++l) {
    Planes out = conv3x3(current, net.kernels[l], net.biases[l], net.feature_maps, true);
    for (double& v : out.v) v = std::tanh(v);
    outputs.push_back(out);
    Planes cat{int(outputs.size()) * net.feature_maps, h, w, {}};
    for (const auto& o : outputs) cat.v.insert(cat.v.end(), o.v.begin(), o.v.end());
    current = std::move(cat);
  }
  return outputs.back();
}

inline std::vector<double> centre(const Planes& p) {
  std::vector<double> v(p.c);
  for (int k = 0; k < p.c; ++k) v[k] = p.at(k, p.h / 2, p.w / 2);
  return v;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  const double na = std::sqrt(aa), nb = std::sqrt(bb);
  if (na < 1e-8 || nb < 1e-8) return 0.0;
  return ab / (na * nb);
}

inline std::pair<double, double> similarities(const TrainingSample& s, int patch, const DoubleWeights& net) {
  const auto a = centre(features(s.anchor, patch, patch, net));
  const auto p = centre(features(s.positive, patch, patch, net));
  const auto n = centre(features(s.negative, patch, patch, net));
  return {cosine(a, p), cosine(a, n)};
}

// Mean hinge loss over the batch.
inline double batch_loss(const std::vector<TrainingSample>& batch, int patch, const DoubleWeights& net,
                         double margin) {
  double total = 0.0;
  for (const auto& s : batch) {
    const auto [sp, sn] = similarities(s, patch, net);
    total += std::max(0.0, margin + sn - sp);
  }
  return total / double(batch.size());
}

// Median of the 5x5 reflect-padded neighbourhood by full sort.
inline std::vector<float> median5x5(const std::vector<float>& slice, int h, int w) {
  std::vector<float> out(slice.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::vector<float> n;
      for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx) n.push_back(slice[std::size_t(mirror(y + dy, h)) * w + mirror(x + dx, w)]);
      std::sort(n.begin(), n.end());
      out[std::size_t(y) * w + x] = n[12];
    }
  }
  return out;
}

// Mean over the in-bounds part of the (2r+1)^2 window.
inline std::vector<double> box_mean(const std::vector<double>& v, int h, int w, int r) {
  std::vector<double> out(v.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0;
      int n = 0;
      for (int yy = std::max(0, y - r); yy <= std::min(h - 1, y + r); ++yy)
        for (int xx = std::max(0, x - r); xx <= std::min(w - 1, x + r); ++xx, ++n) s += v[std::size_t(yy) * w + xx];
      out[std::size_t(y) * w + x] = s / n;
    }
  }
  return out;
}

}  // namespace fcdcnn::oracle
