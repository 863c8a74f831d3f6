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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fcdcnn/disparity.hpp"

namespace fcdcnn {

inline const std::vector<double> kDefaultThresholds{0.5, 1.0, 2.0, 3.0, 4.0, 5.0};

/// Percentage of valid ground-truth pixels whose prediction misses by more
/// than `tau`. Invalid predictions on valid ground truth count as misses.
double n_point_error(const DisparityMap& pred, const DisparityMap& gt, double tau);

struct PairEval {
  std::string id;
  std::size_t valid_pixels = 0;
  std::vector<std::size_t> bad_pixels;  // one per threshold
  std::vector<double> n_pe;
};

struct EvalResult {
  std::vector<double> thresholds;
  std::vector<double> n_pe;  // pooled over all pairs
  std::size_t valid_pixels = 0;
  std::vector<std::size_t> bad_pixels;
  std::vector<PairEval> pairs;

  double at(double tau) const;
  std::string table() const;
  std::string csv() const;
};

struct EvalInput {
  std::string id;
  const DisparityMap* pred = nullptr;
  const DisparityMap* gt = nullptr;
};

EvalResult evaluate(std::span<const EvalInput> inputs,
                    const std::vector<double>& thresholds = kDefaultThresholds);

}  // namespace fcdcnn
