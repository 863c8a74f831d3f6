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
#include <span>
#include <vector>

#include "fcdcnn/disparity.hpp"

namespace fcdcnn {

enum class Label : std::uint8_t { Background = 0, Foreground = 1 };

struct SegmentationMask {
  int width = 0;
  int height = 0;
  std::vector<Label> labels;

  SegmentationMask() = default;
  SegmentationMask(int w, int h, Label fill = Label::Background)
      : width(w), height(h), labels(std::size_t(w) * h, fill) {}

  Label at(int x, int y) const { return labels[std::size_t(y) * width + x]; }
  Label& at(int x, int y) { return labels[std::size_t(y) * width + x]; }
  bool foreground(int x, int y) const { return at(x, y) == Label::Foreground; }
  std::size_t foreground_count() const;
};

struct RefineConfig {
  float lr_threshold = 1.1f;
  int morph_kernel = 5;
  int morph_iterations = 2;
  // Quantiles of the valid disparities that seed the watershed markers.
  double background_quantile = 0.35;
  double foreground_quantile = 0.65;

  void validate() const;
};

/// Optional pixel-processing order (linear indices) for the per-pixel
/// passes. Empty means row-major. Results never depend on it.
using PixelOrder = std::span<const std::size_t>;

/// Invalidates (x, y) when x - d leaves the image, the right map is invalid
/// there, or |D_L(x, y) - D_R(x - d, y)| > threshold, with d = D_L(x, y)
/// rounded to the nearest integer. Surviving values are copied unchanged.
DisparityMap lr_consistency_check(const DisparityMap& left, const DisparityMap& right,
                                  float threshold = 1.1f, PixelOrder order = {});

/// Two-class marker watershed on the gradient magnitude of the
/// nearest-valid-extended disparity.
///
/// Background markers are invalid pixels and valid pixels at or below the
/// background quantile level; foreground markers are valid pixels at or
/// above the foreground quantile level that are also strictly above the
/// background level. Without foreground markers everything is Background.
/// Throws DegenerateInputError when no pixel is valid.
SegmentationMask watershed_fg_bg(const DisparityMap& with_holes, const RefineConfig& config = {});

/// `iterations` dilations of the Foreground class with a full kernel x
/// kernel element followed by as many erosions. Pixels outside the image
/// count as Background.
SegmentationMask close_mask(const SegmentationMask& mask, int kernel = 5, int iterations = 2);

/// Fills invalid Background pixels from the first valid Background pixel to
/// the right on the same row, else to the left, else with the median of all
/// valid Background values (0 when there are none). Reads only the input.
DisparityMap fill_background(const DisparityMap& with_holes, const SegmentationMask& mask,
                             PixelOrder order = {});

/// Fills invalid Foreground pixels with the mean of the first valid
/// Foreground value met along each of the eight compass directions.
/// Directions that leave the image without a hit are skipped; with no hit
/// at all the background rule applies. Reads only the input.
DisparityMap fill_foreground(const DisparityMap& with_holes, const SegmentationMask& mask,
                             PixelOrder order = {});

struct RefineResult {
  DisparityMap consistent;      // after the left-right check
  SegmentationMask segmentation;  // raw watershed output
  SegmentationMask mask;        // after closing
  DisparityMap final;
};

RefineResult refine_disparity(const DisparityMap& left, const DisparityMap& right,
                              const RefineConfig& config = {});

}  // namespace fcdcnn
