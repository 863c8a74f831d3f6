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


// OpenMP kernels. Convolutions are lowered to blocked im2col + GEMM; the
// filters use integral images. Work is split statically so results do not
// depend on scheduling for a fixed thread count.

#include <omp.h>

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "fcdcnn/kernels.hpp"

namespace fcdcnn::kernels::parallel {

namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using MatrixMap = Eigen::Map<RowMatrix>;

constexpr int kBlockColumns = 2048;

// Column bookkeeping for one im2col block. For column j and tap t,
// tap_offset[t * count + j] addresses channel 0 of the source pixel;
// out_offset[j] addresses channel 0 of the output pixel.
struct ColumnBlock {
  std::int64_t begin = 0;
  int count = 0;
  std::vector<std::int64_t> tap_offset;
  std::vector<std::int64_t> out_offset;

  void build(const ConvGeometry& g, std::int64_t first, int n) {
    begin = first;
    count = n;
    tap_offset.resize(std::size_t(9) * n);
    out_offset.resize(n);
    const int oh = g.out_height();
    const int ow = g.out_width();
    const std::int64_t plane = std::int64_t{oh} * ow;
    const std::int64_t in_image = std::int64_t{g.in_channels} * g.height * g.width;
    const std::int64_t out_image = std::int64_t{g.out_channels} * plane;
    for (int j = 0; j < n; ++j) {
      const std::int64_t global = first + j;
      const std::int64_t b = global / plane;
      const std::int64_t p = global % plane;
      const int oy = static_cast<int>(p / ow);
      const int ox = static_cast<int>(p % ow);
      out_offset[j] = b * out_image + p;
      for (int ky = 0; ky < 3; ++ky) {
        const int sy = g.pad == PadMode::Reflect1 ? reflect_index(oy + ky - 1, g.height) : oy + ky;
        for (int kx = 0; kx < 3; ++kx) {
          const int sx = g.pad == PadMode::Reflect1 ? reflect_index(ox + kx - 1, g.width) : ox + kx;
          tap_offset[std::size_t(ky * 3 + kx) * n + j] = b * in_image + std::int64_t{sy} * g.width + sx;
        }
      }
    }
  }

  void im2col(const ConvGeometry& g, const float* input, float* cols) const {
    const std::int64_t hw = std::int64_t{g.height} * g.width;
    for (int c = 0; c < g.in_channels; ++c) {
      const float* base = input + c * hw;
      for (int t = 0; t < 9; ++t) {
        float* row = cols + (std::size_t(c) * 9 + t) * count;
        const std::int64_t* off = tap_offset.data() + std::size_t(t) * count;
        for (int j = 0; j < count; ++j) row[j] = base[off[j]];
      }
    }
  }

  void col2im_add(const ConvGeometry& g, const float* cols, float* grad_in) const {
    const std::int64_t hw = std::int64_t{g.height} * g.width;
    for (int c = 0; c < g.in_channels; ++c) {
      float* base = grad_in + c * hw;
      for (int t = 0; t < 9; ++t) {
        const float* row = cols + (std::size_t(c) * 9 + t) * count;
        const std::int64_t* off = tap_offset.data() + std::size_t(t) * count;
        for (int j = 0; j < count; ++j) base[off[j]] += row[j];
      }
    }
  }

  void gather_output(const ConvGeometry& g, const float* grad_out, float* dst) const {
    const std::int64_t plane = std::int64_t{g.out_height()} * g.out_width();
    for (int o = 0; o < g.out_channels; ++o) {
      float* row = dst + std::size_t(o) * count;
      for (int j = 0; j < count; ++j) row[j] = grad_out[out_offset[j] + o * plane];
    }
  }
};

std::int64_t block_count(std::int64_t columns) {
  return (columns + kBlockColumns - 1) / kBlockColumns;
}

}  // namespace

void conv2d_forward(const ConvGeometry& g, std::span<const float> input,
                    std::span<const float> kernel, std::span<const float> bias,
                    std::span<float> out) {
  const std::int64_t plane = std::int64_t{g.out_height()} * g.out_width();
  const std::int64_t columns = g.batch * plane;
  const std::int64_t blocks = block_count(columns);
  const int depth = g.in_channels * 9;
  const ConstMatrixMap weights(kernel.data(), g.out_channels, depth);

#pragma omp parallel
  {
    ColumnBlock block;
    std::vector<float> cols;
    std::vector<float> result;
#pragma omp for schedule(static)
    for (std::int64_t blk = 0; blk < blocks; ++blk) {
      const std::int64_t first = blk * kBlockColumns;
      const int n = static_cast<int>(std::min<std::int64_t>(kBlockColumns, columns - first));
      block.build(g, first, n);
      cols.resize(std::size_t(depth) * n);
      result.resize(std::size_t(g.out_channels) * n);
      block.im2col(g, input.data(), cols.data());
      MatrixMap(result.data(), g.out_channels, n).noalias() =
          weights * ConstMatrixMap(cols.data(), depth, n);
      for (int o = 0; o < g.out_channels; ++o) {
        const float* row = result.data() + std::size_t(o) * n;
        const float bo = bias[o];
        for (int j = 0; j < n; ++j) out[block.out_offset[j] + o * plane] = row[j] + bo;
      }
    }
  }
}

void conv2d_backward_input(const ConvGeometry& g, std::span<const float> grad_out,
                           std::span<const float> kernel, std::span<float> grad_in) {
  const std::int64_t plane = std::int64_t{g.out_height()} * g.out_width();
  const int depth = g.in_channels * 9;
  const ConstMatrixMap weights(kernel.data(), g.out_channels, depth);

  // One image per iteration: col2im scatters only inside its own image.
#pragma omp parallel
  {
    ColumnBlock block;
    std::vector<float> dy;
    std::vector<float> dcols;
#pragma omp for schedule(static)
    for (int b = 0; b < g.batch; ++b) {
      for (std::int64_t p0 = 0; p0 < plane; p0 += kBlockColumns) {
        const int n = static_cast<int>(std::min<std::int64_t>(kBlockColumns, plane - p0));
        block.build(g, b * plane + p0, n);
        dy.resize(std::size_t(g.out_channels) * n);
        dcols.resize(std::size_t(depth) * n);
        block.gather_output(g, grad_out.data(), dy.data());
        MatrixMap(dcols.data(), depth, n).noalias() =
            weights.transpose() * ConstMatrixMap(dy.data(), g.out_channels, n);
        block.col2im_add(g, dcols.data(), grad_in.data());
      }
    }
  }
}

void conv2d_backward_params(const ConvGeometry& g, std::span<const float> input,
                            std::span<const float> grad_out, std::span<float> grad_kernel,
                            std::span<float> grad_bias) {
  const std::int64_t plane = std::int64_t{g.out_height()} * g.out_width();
  const std::int64_t columns = g.batch * plane;
  const std::int64_t blocks = block_count(columns);
  const int depth = g.in_channels * 9;
  const int threads = omp_get_max_threads();
  std::vector<std::vector<float>> partial_kernel(threads);
  std::vector<std::vector<double>> partial_bias(threads);

#pragma omp parallel num_threads(threads)
  {
    const int tid = omp_get_thread_num();
    auto& gk = partial_kernel[tid];
    auto& gb = partial_bias[tid];
    gk.assign(std::size_t(g.out_channels) * depth, 0.0f);
    gb.assign(g.out_channels, 0.0);
    MatrixMap gk_map(gk.data(), g.out_channels, depth);
    ColumnBlock block;
    std::vector<float> cols;
    std::vector<float> dy;
#pragma omp for schedule(static)
    for (std::int64_t blk = 0; blk < blocks; ++blk) {
      const std::int64_t first = blk * kBlockColumns;
      const int n = static_cast<int>(std::min<std::int64_t>(kBlockColumns, columns - first));
      block.build(g, first, n);
      cols.resize(std::size_t(depth) * n);
      dy.resize(std::size_t(g.out_channels) * n);
      block.im2col(g, input.data(), cols.data());
      block.gather_output(g, grad_out.data(), dy.data());
      const ConstMatrixMap dy_map(dy.data(), g.out_channels, n);
      gk_map.noalias() += dy_map * ConstMatrixMap(cols.data(), depth, n).transpose();
      for (int o = 0; o < g.out_channels; ++o) {
        const float* row = dy.data() + std::size_t(o) * n;
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += row[j];
        gb[o] += s;
      }
    }
  }
  // Reduce in thread order so the sum is reproducible.
  for (int t = 0; t < threads; ++t) {
    if (partial_kernel[t].empty()) continue;
    for (std::size_t i = 0; i < partial_kernel[t].size(); ++i) grad_kernel[i] += partial_kernel[t][i];
    for (int o = 0; o < g.out_channels; ++o) grad_bias[o] += static_cast<float>(partial_bias[t][o]);
  }
}

void cost_volume(std::span<const float> reference, std::span<const float> other, int channels,
                 int height, int width, int max_disparity, int step, std::span<float> out) {
  const std::int64_t plane = std::int64_t{height} * width;
  // Pixel-major unit vectors; zero-norm pixels become zero vectors, which
  // makes their similarity 0 without a branch in the inner loop.
  auto normalize = [&](std::span<const float> features) {
    std::vector<float> unit(std::size_t(plane) * channels);
#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < plane; ++p) {
      double norm = 0.0;
      for (int c = 0; c < channels; ++c) {
        const double v = features[c * plane + p];
        norm += v * v;
      }
      norm = std::sqrt(norm);
      const double scale = norm < 1e-8 ? 0.0 : 1.0 / norm;
      float* dst = unit.data() + p * channels;
      for (int c = 0; c < channels; ++c) dst[c] = static_cast<float>(features[c * plane + p] * scale);
    }
    return unit;
  };
  const std::vector<float> ref_unit = normalize(reference);
  const std::vector<float> other_unit = normalize(other);

#pragma omp parallel for collapse(2) schedule(static)
  for (int d = 0; d < max_disparity; ++d) {
    for (int y = 0; y < height; ++y) {
      float* dst = out.data() + d * plane + std::int64_t{y} * width;
      for (int x = 0; x < width; ++x) {
        const int xo = x + step * d;
        if (xo < 0 || xo >= width) {
          dst[x] = -1.0f;
          continue;
        }
        const float* a = ref_unit.data() + (std::int64_t{y} * width + x) * channels;
        const float* b = other_unit.data() + (std::int64_t{y} * width + xo) * channels;
        double dot = 0.0;
        for (int c = 0; c < channels; ++c) dot += double(a[c]) * b[c];
        dst[x] = static_cast<float>(std::clamp(dot, -1.0, 1.0));
      }
    }
  }
}

void median5x5(std::span<const float> slice, int height, int width, std::span<float> out) {
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    std::array<float, 25> window{};
    std::array<const float*, 5> rows{};
    for (int dy = -2; dy <= 2; ++dy) {
      rows[dy + 2] = slice.data() + std::int64_t{reflect_index(y + dy, height)} * width;
    }
    for (int x = 0; x < width; ++x) {
      int k = 0;
      for (int dx = -2; dx <= 2; ++dx) {
        const int sx = reflect_index(x + dx, width);
        for (const float* row : rows) window[k++] = row[sx];
      }
      std::nth_element(window.begin(), window.begin() + 12, window.end());
      out[std::int64_t{y} * width + x] = window[12];
    }
  }
}

namespace {

// Summed-area table with a zero guard row and column.
template <typename T>
std::vector<double> integral_image(const T* values, int height, int width) {
  std::vector<double> table(std::size_t(height + 1) * (width + 1), 0.0);
  for (int y = 0; y < height; ++y) {
    double row_sum = 0.0;
    for (int x = 0; x < width; ++x) {
      row_sum += values[std::size_t(y) * width + x];
      table[std::size_t(y + 1) * (width + 1) + x + 1] = table[std::size_t(y) * (width + 1) + x + 1] + row_sum;
    }
  }
  return table;
}

void box_mean_from_integral(const std::vector<double>& table, int height, int width, int radius,
                            double* out) {
  const std::size_t stride = std::size_t(width) + 1;
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    const int y0 = std::max(0, y - radius);
    const int y1 = std::min(height - 1, y + radius) + 1;
    for (int x = 0; x < width; ++x) {
      const int x0 = std::max(0, x - radius);
      const int x1 = std::min(width - 1, x + radius) + 1;
      const double sum = table[y1 * stride + x1] - table[y0 * stride + x1] -
                         table[y1 * stride + x0] + table[y0 * stride + x0];
      out[std::size_t(y) * width + x] = sum / (double(y1 - y0) * (x1 - x0));
    }
  }
}

template <typename T>
std::vector<double> box_mean_of(const T* values, int height, int width, int radius) {
  std::vector<double> out(std::size_t(height) * width);
  box_mean_from_integral(integral_image(values, height, width), height, width, radius, out.data());
  return out;
}

}  // namespace

void box_mean(std::span<const float> values, int height, int width, int radius,
              std::span<double> out) {
  box_mean_from_integral(integral_image(values.data(), height, width), height, width, radius,
                         out.data());
}

void guided_filter(std::span<const float> slice, std::span<const float> guide, int height,
                   int width, int radius, double eta, std::span<float> out) {
  const std::size_t n = std::size_t(height) * width;
  std::vector<double> gg(n), gp(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double gv = guide[i];
    gg[i] = gv * gv;
    gp[i] = gv * slice[i];
  }
  const auto mean_g = box_mean_of(guide.data(), height, width, radius);
  const auto mean_p = box_mean_of(slice.data(), height, width, radius);
  const auto mean_gg = box_mean_of(gg.data(), height, width, radius);
  const auto mean_gp = box_mean_of(gp.data(), height, width, radius);

  std::vector<double> a(n), b(n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const double var = mean_gg[i] - mean_g[i] * mean_g[i];
    const double cov = mean_gp[i] - mean_g[i] * mean_p[i];
    a[i] = cov / (var + eta);
    b[i] = mean_p[i] - a[i] * mean_g[i];
  }
  const auto mean_a = box_mean_of(a.data(), height, width, radius);
  const auto mean_b = box_mean_of(b.data(), height, width, radius);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = static_cast<float>(mean_a[i] * guide[i] + mean_b[i]);
  }
}

void winner_takes_all(std::span<const float> volume, int max_disparity, int height, int width,
                      std::span<float> out) {
  const std::int64_t plane = std::int64_t{height} * width;
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < plane; ++p) {
    float best = -std::numeric_limits<float>::infinity();
    int best_d = 0;
    for (int d = 0; d < max_disparity; ++d) {
      const float v = volume[d * plane + p];
      if (v > best) {
        best = v;
        best_d = d;
      }
    }
    out[p] = static_cast<float>(best_d);
  }
}

}  // namespace fcdcnn::kernels::parallel
