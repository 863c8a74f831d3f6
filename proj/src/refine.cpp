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


#include "fcdcnn/refine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <optional>
#include <queue>
#include <string>
#include <tuple>

#include "fcdcnn/errors.hpp"

namespace fcdcnn {

std::size_t SegmentationMask::foreground_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::Foreground));
}

void RefineConfig::validate() const {
  if (!(lr_threshold > 0.0f)) throw ConfigError("lr_threshold must be positive");
  if (morph_kernel < 1 || morph_kernel % 2 == 0) throw ConfigError("morph_kernel must be odd");
  if (morph_iterations < 0) throw ConfigError("morph_iterations must be non-negative");
  if (!(background_quantile >= 0.0 && background_quantile <= foreground_quantile &&
        foreground_quantile <= 1.0)) {
    throw ConfigError("watershed quantiles must satisfy 0 <= background <= foreground <= 1");
  }
}

namespace {

// Runs fn(i) for every linear index, in `order` when given; otherwise in
// parallel. Callers only write position i, so both paths agree.
template <typename Fn>
void for_each_pixel(std::size_t count, PixelOrder order, Fn&& fn) {
  if (!order.empty()) {
    if (order.size() != count) throw ConfigError("pixel order does not cover the image");
    for (std::size_t i : order) fn(i);
    return;
  }
  const std::int64_t n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) fn(static_cast<std::size_t>(i));
}

float median_of(std::vector<float> values) {
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  float m = values[mid];
  if (values.size() % 2 == 0) {
    const float lower = *std::max_element(values.begin(), values.begin() + mid);
    m = 0.5f * (m + lower);
  }
  return m;
}

// Median of the valid Background values; empty when there are none.
std::optional<float> background_median(const DisparityMap& map, const SegmentationMask& mask) {
  std::vector<float> values;
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (mask.labels[i] == Label::Background && DisparityMap::is_valid(map.values[i])) {
      values.push_back(map.values[i]);
    }
  }
  if (values.empty()) return std::nullopt;
  return median_of(std::move(values));
}

// Last-resort fill value; 0 with a single warning when no Background value exists.
class GlobalFallback {
 public:
  GlobalFallback(const DisparityMap& map, const SegmentationMask& mask) : median_(background_median(map, mask)) {}
  float get() {
    if (median_) return *median_;
    if (!warned_.exchange(true)) {
      std::cerr << "warning: no valid background disparity to fill from; using 0\n";
    }
    return 0.0f;
  }

 private:
  std::optional<float> median_;
  std::atomic<bool> warned_{false};
};

// First valid Background value on row y scanning right of x, then left.
bool scan_row_background(const DisparityMap& map, const SegmentationMask& mask, int x, int y,
                         float& value) {
  for (int xx = x + 1; xx < map.width; ++xx) {
    if (map.valid(xx, y) && mask.at(xx, y) == Label::Background) {
      value = map.at(xx, y);
      return true;
    }
  }
  for (int xx = x - 1; xx >= 0; --xx) {
    if (map.valid(xx, y) && mask.at(xx, y) == Label::Background) {
      value = map.at(xx, y);
      return true;
    }
  }
  return false;
}

void require_same_size(const DisparityMap& map, const SegmentationMask& mask) {
  if (map.width != mask.width || map.height != mask.height) {
    throw ShapeError("disparity map and segmentation mask differ in size");
  }
}

}  // namespace

DisparityMap lr_consistency_check(const DisparityMap& left, const DisparityMap& right,
                                  float threshold, PixelOrder order) {
  if (!left.same_size(right)) throw ShapeError("left and right disparity maps differ in size");
  DisparityMap out(left.width, left.height);
  out.resolution = left.resolution;
  for_each_pixel(left.size(), order, [&](std::size_t i) {
    const int x = static_cast<int>(i % left.width);
    const int y = static_cast<int>(i / left.width);
    const float dl = left.values[i];
    if (!DisparityMap::is_valid(dl)) return;
    const int xr = x - static_cast<int>(std::lround(dl));
    if (xr < 0 || xr >= right.width) return;
    const float dr = right.at(xr, y);
    if (!DisparityMap::is_valid(dr)) return;
    if (std::fabs(dl - dr) > threshold) return;
    out.values[i] = dl;
  });
  return out;
}

SegmentationMask watershed_fg_bg(const DisparityMap& with_holes, const RefineConfig& config) {
  config.validate();
  const int w = with_holes.width;
  const int h = with_holes.height;
  const std::size_t n = with_holes.size();

  std::vector<float> valid_values;
  for (float v : with_holes.values) {
    if (DisparityMap::is_valid(v)) valid_values.push_back(v);
  }
  if (valid_values.empty()) {
    throw DegenerateInputError("segmentation needs at least one valid disparity");
  }
  std::sort(valid_values.begin(), valid_values.end());
  auto quantile = [&](double q) {
    return valid_values[static_cast<std::size_t>(std::floor(q * (valid_values.size() - 1)))];
  };
  const float low = quantile(config.background_quantile);
  const float high = quantile(config.foreground_quantile);

  constexpr int kUnlabeled = -1;
  std::vector<int> label(n, kUnlabeled);
  bool any_foreground = false;
  for (std::size_t i = 0; i < n; ++i) {
    const float v = with_holes.values[i];
    if (!DisparityMap::is_valid(v) || v <= low) {
      label[i] = static_cast<int>(Label::Background);
    } else if (v >= high) {
      label[i] = static_cast<int>(Label::Foreground);
      any_foreground = true;
    }
  }
  SegmentationMask mask(w, h, Label::Background);
  if (!any_foreground) return mask;

  // Nearest-valid extension by multi-source breadth-first search.
  std::vector<float> extended(with_holes.values);
  {
    std::vector<bool> seen(n, false);
    std::queue<std::size_t> frontier;
    for (std::size_t i = 0; i < n; ++i) {
      if (DisparityMap::is_valid(with_holes.values[i])) {
        seen[i] = true;
        frontier.push(i);
      }
    }
    while (!frontier.empty()) {
      const std::size_t i = frontier.front();
      frontier.pop();
      const int x = static_cast<int>(i % w);
      const int y = static_cast<int>(i / w);
      const int nx[4] = {x, x - 1, x + 1, x};
      const int ny[4] = {y - 1, y, y, y + 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || nx[k] >= w || ny[k] < 0 || ny[k] >= h) continue;
        const std::size_t j = std::size_t(ny[k]) * w + nx[k];
        if (seen[j]) continue;
        seen[j] = true;
        extended[j] = extended[i];
        frontier.push(j);
      }
    }
  }

  std::vector<float> elevation(n);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - 1), x1 = std::min(w - 1, x + 1);
      const int y0 = std::max(0, y - 1), y1 = std::min(h - 1, y + 1);
      const float gx = x1 > x0 ? (extended[std::size_t(y) * w + x1] - extended[std::size_t(y) * w + x0]) / (x1 - x0) : 0.0f;
      const float gy = y1 > y0 ? (extended[std::size_t(y1) * w + x] - extended[std::size_t(y0) * w + x]) / (y1 - y0) : 0.0f;
      elevation[std::size_t(y) * w + x] = std::sqrt(gx * gx + gy * gy);
    }
  }

  // Flooding: lowest elevation first, FIFO among equals.
  using Entry = std::tuple<float, std::uint64_t, std::size_t, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  std::uint64_t sequence = 0;
  auto push_neighbours = [&](std::size_t i) {
    const int x = static_cast<int>(i % w);
    const int y = static_cast<int>(i / w);
    const int nx[4] = {x, x - 1, x + 1, x};
    const int ny[4] = {y - 1, y, y, y + 1};
    for (int k = 0; k < 4; ++k) {
      if (nx[k] < 0 || nx[k] >= w || ny[k] < 0 || ny[k] >= h) continue;
      const std::size_t j = std::size_t(ny[k]) * w + nx[k];
      if (label[j] == kUnlabeled) queue.emplace(elevation[j], sequence++, j, label[i]);
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] != kUnlabeled) push_neighbours(i);
  }
  while (!queue.empty()) {
    const auto [elev, seq, i, lab] = queue.top();
    queue.pop();
    if (label[i] != kUnlabeled) continue;
    label[i] = lab;
    push_neighbours(i);
  }

  for (std::size_t i = 0; i < n; ++i) {
    mask.labels[i] = label[i] == static_cast<int>(Label::Foreground) ? Label::Foreground : Label::Background;
  }
  return mask;
}

namespace {

// One separable pass of a k x k dilation (want = Foreground present) or
// erosion (want = all Foreground). Out-of-image samples are Background.
SegmentationMask morph_pass(const SegmentationMask& in, int kernel, bool dilate) {
  const int r = kernel / 2;
  const int w = in.width;
  const int h = in.height;
  SegmentationMask rows(w, h), out(w, h);
  auto eval = [&](auto sample, int center, int limit) {
    for (int k = center - r; k <= center + r; ++k) {
      const bool fg = k >= 0 && k < limit && sample(k);
      if (dilate && fg) return true;
      if (!dilate && !fg) return false;
    }
    return !dilate;
  };
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool v = eval([&](int xx) { return in.foreground(xx, y); }, x, w);
      rows.at(x, y) = v ? Label::Foreground : Label::Background;
    }
  }
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool v = eval([&](int yy) { return rows.foreground(x, yy); }, y, h);
      out.at(x, y) = v ? Label::Foreground : Label::Background;
    }
  }
  return out;
}

}  // namespace

SegmentationMask close_mask(const SegmentationMask& mask, int kernel, int iterations) {
  if (kernel < 1 || kernel % 2 == 0) throw ConfigError("morphology kernel must be odd");
  SegmentationMask out = mask;
  for (int i = 0; i < iterations; ++i) out = morph_pass(out, kernel, true);
  for (int i = 0; i < iterations; ++i) out = morph_pass(out, kernel, false);
  return out;
}

DisparityMap fill_background(const DisparityMap& with_holes, const SegmentationMask& mask,
                             PixelOrder order) {
  require_same_size(with_holes, mask);
  DisparityMap out = with_holes;
  GlobalFallback fallback(with_holes, mask);
  for_each_pixel(with_holes.size(), order, [&](std::size_t i) {
    if (DisparityMap::is_valid(with_holes.values[i]) || mask.labels[i] != Label::Background) return;
    const int x = static_cast<int>(i % with_holes.width);
    const int y = static_cast<int>(i / with_holes.width);
    float value;
    out.values[i] = scan_row_background(with_holes, mask, x, y, value) ? value : fallback.get();
  });
  return out;
}

DisparityMap fill_foreground(const DisparityMap& with_holes, const SegmentationMask& mask,
                             PixelOrder order) {
  require_same_size(with_holes, mask);
  DisparityMap out = with_holes;
  GlobalFallback fallback(with_holes, mask);
  static constexpr int kDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
  static constexpr int kDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
  for_each_pixel(with_holes.size(), order, [&](std::size_t i) {
    if (DisparityMap::is_valid(with_holes.values[i]) || mask.labels[i] != Label::Foreground) return;
    const int x = static_cast<int>(i % with_holes.width);
    const int y = static_cast<int>(i / with_holes.width);
    double sum = 0.0;
    int hits = 0;
    for (int dir = 0; dir < 8; ++dir) {
      int xx = x + kDx[dir];
      int yy = y + kDy[dir];
      while (xx >= 0 && xx < with_holes.width && yy >= 0 && yy < with_holes.height) {
        if (with_holes.valid(xx, yy) && mask.foreground(xx, yy)) {
          sum += with_holes.at(xx, yy);
          ++hits;
          break;
        }
        xx += kDx[dir];
        yy += kDy[dir];
      }
    }
    if (hits > 0) {
      out.values[i] = static_cast<float>(sum / hits);
      return;
    }
    float value;
    out.values[i] = scan_row_background(with_holes, mask, x, y, value) ? value : fallback.get();
  });
  return out;
}

RefineResult refine_disparity(const DisparityMap& left, const DisparityMap& right,
                              const RefineConfig& config) {
  config.validate();
  RefineResult result;
  result.consistent = lr_consistency_check(left, right, config.lr_threshold);
  result.segmentation = watershed_fg_bg(result.consistent, config);
  result.mask = close_mask(result.segmentation, config.morph_kernel, config.morph_iterations);
  result.final = fill_foreground(fill_background(result.consistent, result.mask), result.mask);
  return result;
}

}  // namespace fcdcnn
