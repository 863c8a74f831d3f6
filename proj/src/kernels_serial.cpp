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


// Reference kernels: direct loops, no threading. These define the expected
// results for the parallel implementations.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "fcdcnn/kernels.hpp"

namespace fcdcnn::kernels::serial {

namespace {

inline int source_index(int out_index, int tap, int n, PadMode pad) {
  return pad == PadMode::Reflect1 ? reflect_index(out_index + tap - 1, n) : out_index + tap;
}

}  // namespace

void conv2d_forward(const ConvGeometry& g, std::span<const float> input,
                    std::span<const float> kernel, std::span<const float> bias,
                    std::span<float> out) {
  const int oh = g.out_height();
  const int ow = g.out_width();
  for (int b = 0; b < g.batch; ++b) {
    for (int o = 0; o < g.out_channels; ++o) {
      for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
          float acc = bias[o];
          for (int c = 0; c < g.in_channels; ++c) {
            const float* plane = input.data() + (std::int64_t{b} * g.in_channels + c) * g.height * g.width;
            const float* w = kernel.data() + (std::int64_t{o} * g.in_channels + c) * 9;
            for (int ky = 0; ky < 3; ++ky) {
              const int sy = source_index(y, ky, g.height, g.pad);
              for (int kx = 0; kx < 3; ++kx) {
                const int sx = source_index(x, kx, g.width, g.pad);
                acc += w[ky * 3 + kx] * plane[sy * g.width + sx];
              }
            }
          }
          out[((std::int64_t{b} * g.out_channels + o) * oh + y) * ow + x] = acc;
        }
      }
    }
  }
}

void conv2d_backward_input(const ConvGeometry& g, std::span<const float> grad_out,
                           std::span<const float> kernel, std::span<float> grad_in) {
  const int oh = g.out_height();
  const int ow = g.out_width();
  for (int b = 0; b < g.batch; ++b) {
    for (int o = 0; o < g.out_channels; ++o) {
      for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
          const float go = grad_out[((std::int64_t{b} * g.out_channels + o) * oh + y) * ow + x];
          for (int c = 0; c < g.in_channels; ++c) {
            float* plane = grad_in.data() + (std::int64_t{b} * g.in_channels + c) * g.height * g.width;
            const float* w = kernel.data() + (std::int64_t{o} * g.in_channels + c) * 9;
            for (int ky = 0; ky < 3; ++ky) {
              const int sy = source_index(y, ky, g.height, g.pad);
              for (int kx = 0; kx < 3; ++kx) {
                const int sx = source_index(x, kx, g.width, g.pad);
                plane[sy * g.width + sx] += w[ky * 3 + kx] * go;
              }
            }
          }
        }
      }
    }
  }
}

void conv2d_backward_params(const ConvGeometry& g, std::span<const float> input,
                            std::span<const float> grad_out, std::span<float> grad_kernel,
                            std::span<float> grad_bias) {
  const int oh = g.out_height();
  const int ow = g.out_width();
  for (int b = 0; b < g.batch; ++b) {
    for (int o = 0; o < g.out_channels; ++o) {
      for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
          const float go = grad_out[((std::int64_t{b} * g.out_channels + o) * oh + y) * ow + x];
          grad_bias[o] += go;
          for (int c = 0; c < g.in_channels; ++c) {
            const float* plane = input.data() + (std::int64_t{b} * g.in_channels + c) * g.height * g.width;
            float* w = grad_kernel.data() + (std::int64_t{o} * g.in_channels + c) * 9;
            for (int ky = 0; ky < 3; ++ky) {
              const int sy = source_index(y, ky, g.height, g.pad);
              for (int kx = 0; kx < 3; ++kx) {
                const int sx = source_index(x, kx, g.width, g.pad);
                w[ky * 3 + kx] += go * plane[sy * g.width + sx];
              }
            }
          }
        }
      }
    }
  }
}

void cost_volume(std::span<const float> reference, std::span<const float> other, int channels,
                 int height, int width, int max_disparity, int step, std::span<float> out) {
  const std::int64_t plane = std::int64_t{height} * width;
  for (int d = 0; d < max_disparity; ++d) {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        float& dst = out[d * plane + std::int64_t{y} * width + x];
        const int xo = x + step * d;
        if (xo < 0 || xo >= width) {
          dst = -1.0f;
          continue;
        }
        double dot = 0.0;
        double na = 0.0;
        double nb = 0.0;
        for (int c = 0; c < channels; ++c) {
          const double a = reference[c * plane + std::int64_t{y} * width + x];
          const double b = other[c * plane + std::int64_t{y} * width + xo];
          dot += a * b;
          na += a * a;
          nb += b * b;
        }
        na = std::sqrt(na);
        nb = std::sqrt(nb);
        if (na < 1e-8 || nb < 1e-8) {
          dst = 0.0f;
        } else {
          dst = static_cast<float>(std::clamp(dot / (na * nb), -1.0, 1.0));
        }
      }
    }
  }
}

void median5x5(std::span<const float> slice, int height, int width, std::span<float> out) {
  std::array<float, 25> window{};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      int k = 0;
      for (int dy = -2; dy <= 2; ++dy) {
        const int sy = reflect_index(y + dy, height);
        for (int dx = -2; dx <= 2; ++dx) {
          window[k++] = slice[std::int64_t{sy} * width + reflect_index(x + dx, width)];
        }
      }
      std::sort(window.begin(), window.end());
      out[std::int64_t{y} * width + x] = window[12];
    }
  }
}

void box_mean(std::span<const float> values, int height, int width, int radius,
              std::span<double> out) {
  for (int y = 0; y < height; ++y) {
    const int y0 = std::max(0, y - radius);
    const int y1 = std::min(height - 1, y + radius);
    for (int x = 0; x < width; ++x) {
      const int x0 = std::max(0, x - radius);
      const int x1 = std::min(width - 1, x + radius);
      double sum = 0.0;
      for (int yy = y0; yy <= y1; ++yy) {
        for (int xx = x0; xx <= x1; ++xx) sum += values[std::int64_t{yy} * width + xx];
      }
      out[std::int64_t{y} * width + x] = sum / ((y1 - y0 + 1) * (x1 - x0 + 1));
    }
  }
}

namespace {

void box_mean_double(const std::vector<double>& values, int height, int width, int radius,
                     std::vector<double>& out) {
  for (int y = 0; y < height; ++y) {
    const int y0 = std::max(0, y - radius);
    const int y1 = std::min(height - 1, y + radius);
    for (int x = 0; x < width; ++x) {
      const int x0 = std::max(0, x - radius);
      const int x1 = std::min(width - 1, x + radius);
      double sum = 0.0;
      for (int yy = y0; yy <= y1; ++yy) {
        for (int xx = x0; xx <= x1; ++xx) sum += values[std::size_t(yy) * width + xx];
      }
      out[std::size_t(y) * width + x] = sum / ((y1 - y0 + 1) * (x1 - x0 + 1));
    }
  }
}

}  // namespace

void guided_filter(std::span<const float> slice, std::span<const float> guide, int height,
                   int width, int radius, double eta, std::span<float> out) {
  const std::size_t n = std::size_t(height) * width;
  std::vector<double> guide_d(guide.begin(), guide.end());
  std::vector<double> slice_d(slice.begin(), slice.end());
  std::vector<double> gg(n), gp(n);
  for (std::size_t i = 0; i < n; ++i) {
    gg[i] = guide_d[i] * guide_d[i];
    gp[i] = guide_d[i] * slice_d[i];
  }
  std::vector<double> mean_g(n), mean_p(n), mean_gg(n), mean_gp(n);
  box_mean_double(guide_d, height, width, radius, mean_g);
  box_mean_double(slice_d, height, width, radius, mean_p);
  box_mean_double(gg, height, width, radius, mean_gg);
  box_mean_double(gp, height, width, radius, mean_gp);

  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double var = mean_gg[i] - mean_g[i] * mean_g[i];
    const double cov = mean_gp[i] - mean_g[i] * mean_p[i];
    a[i] = cov / (var + eta);
    b[i] = mean_p[i] - a[i] * mean_g[i];
  }
  std::vector<double> mean_a(n), mean_b(n);
  box_mean_double(a, height, width, radius, mean_a);
  box_mean_double(b, height, width, radius, mean_b);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = static_cast<float>(mean_a[i] * guide_d[i] + mean_b[i]);
  }
}

void winner_takes_all(std::span<const float> volume, int max_disparity, int height, int width,
                      std::span<float> out) {
  const std::int64_t plane = std::int64_t{height} * width;
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

}  // namespace fcdcnn::kernels::serial
