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


#include "fcdcnn/ops.hpp"

#include <algorithm>
#include <cmath>

#include "fcdcnn/errors.hpp"
#include "fcdcnn/execution.hpp"

namespace fcdcnn {

namespace {

void require_rank4(const Tensor& t, const char* what) {
  if (t.rank() != 4) {
    throw ShapeError(std::string(what) + " expects a 4-D tensor, got shape " +
                     Tensor::shape_string(t.shape()));
  }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, PadMode pad) {
  require_rank4(input, "conv2d");
  if (kernel.rank() != 4 || kernel.dim(2) != 3 || kernel.dim(3) != 3) {
    throw ConfigError("conv2d kernel must have shape (out, in, 3, 3), got " +
                      Tensor::shape_string(kernel.shape()));
  }
  if (input.dim(1) != kernel.dim(1)) {
    throw ConfigError("conv2d channel mismatch: input has " + std::to_string(input.dim(1)) +
                      " channels, kernel expects " + std::to_string(kernel.dim(1)));
  }
  if (bias.rank() != 1 || bias.dim(0) != kernel.dim(0)) {
    throw ConfigError("conv2d bias length does not match output channels");
  }
  ConvGeometry g{input.dim(0), input.dim(1), kernel.dim(0), input.dim(2), input.dim(3), pad};
  const int min_size = pad == PadMode::Valid ? 3 : 1;
  if (g.height < min_size || g.width < min_size) {
    throw ShapeError("conv2d spatial size " + std::to_string(g.height) + "x" +
                     std::to_string(g.width) + " is too small");
  }
  Tensor out({g.batch, g.out_channels, g.out_height(), g.out_width()});
  if (execution_mode() == ExecutionMode::Serial) {
    kernels::serial::conv2d_forward(g, input.data(), kernel.data(), bias.data(), out.data());
  } else {
    kernels::parallel::conv2d_forward(g, input.data(), kernel.data(), bias.data(), out.data());
  }
  return out;
}

Tensor tanh_activation(const Tensor& input) {
  Tensor out(input.shape());
  auto src = input.data();
  auto dst = out.data();
  const std::int64_t n = static_cast<std::int64_t>(src.size());
#pragma omp parallel for schedule(static) if (n > 65536)
  for (std::int64_t i = 0; i < n; ++i) dst[i] = std::tanh(src[i]);
  return out;
}

Tensor concat_channels(std::span<const Tensor* const> inputs) {
  if (inputs.empty()) throw ShapeError("concat_channels needs at least one input");
  const Tensor& first = *inputs.front();
  require_rank4(first, "concat_channels");
  int channels = 0;
  for (const Tensor* t : inputs) {
    require_rank4(*t, "concat_channels");
    if (t->dim(0) != first.dim(0) || t->dim(2) != first.dim(2) || t->dim(3) != first.dim(3)) {
      throw ShapeError("concat_channels batch/spatial mismatch: " +
                       Tensor::shape_string(first.shape()) + " vs " +
                       Tensor::shape_string(t->shape()));
    }
    channels += t->dim(1);
  }
  if (inputs.size() == 1) return first;
  const int batch = first.dim(0);
  const std::size_t plane = std::size_t(first.dim(2)) * first.dim(3);
  Tensor out({batch, channels, first.dim(2), first.dim(3)});
  float* dst = out.data().data();
  for (int b = 0; b < batch; ++b) {
    for (const Tensor* t : inputs) {
      const std::size_t chunk = std::size_t(t->dim(1)) * plane;
      const float* src = t->data().data() + b * chunk;
      dst = std::copy(src, src + chunk, dst);
    }
  }
  return out;
}

Tensor concat_channels(std::initializer_list<const Tensor*> inputs) {
  return concat_channels(std::span<const Tensor* const>(inputs.begin(), inputs.size()));
}

Tensor crop_center(const Tensor& input, int height, int width) {
  require_rank4(input, "crop_center");
  const int dy = input.dim(2) - height;
  const int dx = input.dim(3) - width;
  if (height < 1 || width < 1 || dy < 0 || dx < 0 || dy % 2 != 0 || dx % 2 != 0) {
    throw ShapeError("cannot centre-crop " + Tensor::shape_string(input.shape()) + " to " +
                     std::to_string(height) + "x" + std::to_string(width));
  }
  if (dy == 0 && dx == 0) return input;
  Tensor out({input.dim(0), input.dim(1), height, width});
  const int y0 = dy / 2;
  const int x0 = dx / 2;
  for (int b = 0; b < input.dim(0); ++b) {
    for (int c = 0; c < input.dim(1); ++c) {
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) out.at(b, c, y, x) = input.at(b, c, y + y0, x + x0);
      }
    }
  }
  return out;
}

float cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw ShapeError("cosine_similarity length mismatch");
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += double(a[i]) * b[i];
    na += double(a[i]) * a[i];
    nb += double(b[i]) * b[i];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na < kMinNorm || nb < kMinNorm) return 0.0f;
  return static_cast<float>(std::clamp(dot / (na * nb), -1.0, 1.0));
}

Tensor cosine_similarity(const Tensor& a, const Tensor& b) {
  require_rank4(a, "cosine_similarity");
  if (a.shape() != b.shape()) {
    throw ShapeError("cosine_similarity shape mismatch: " + Tensor::shape_string(a.shape()) +
                     " vs " + Tensor::shape_string(b.shape()));
  }
  const int batch = a.dim(0);
  const int channels = a.dim(1);
  const std::size_t plane = std::size_t(a.dim(2)) * a.dim(3);
  Tensor out({batch, 1, a.dim(2), a.dim(3)});
  for (int n = 0; n < batch; ++n) {
    const float* pa = a.data().data() + n * channels * plane;
    const float* pb = b.data().data() + n * channels * plane;
    for (std::size_t p = 0; p < plane; ++p) {
      double dot = 0.0;
      double na = 0.0;
      double nb = 0.0;
      for (int c = 0; c < channels; ++c) {
        const double va = pa[c * plane + p];
        const double vb = pb[c * plane + p];
        dot += va * vb;
        na += va * va;
        nb += vb * vb;
      }
      na = std::sqrt(na);
      nb = std::sqrt(nb);
      out[n * plane + p] =
          (na < kMinNorm || nb < kMinNorm)
              ? 0.0f
              : static_cast<float>(std::clamp(dot / (na * nb), -1.0, 1.0));
    }
  }
  return out;
}

}  // namespace fcdcnn
