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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fcdcnn/disparity.hpp"
#include "fcdcnn/image.hpp"
#include "fcdcnn/matcher.hpp"
#include "fcdcnn/network.hpp"
#include "fcdcnn/refine.hpp"

namespace fcdcnn {

enum class DatasetStyle { Middlebury, Kitti2012, Kitti2015, Eth3d, Synthetic };

DatasetStyle parse_dataset_style(const std::string& name);
std::string dataset_style_name(DatasetStyle style);

/// Default number of disparity candidates for a dataset style, or 0 when the
/// style has no fixed range (Middlebury, synthetic) and it must be given.
int default_max_disparity(DatasetStyle style);

struct StereoPair {
  std::string id;
  Image left;
  Image right;
  std::optional<DisparityMap> gt_left;
  DatasetStyle style = DatasetStyle::Middlebury;
  int max_disparity = 0;

  /// 1 where ground truth is valid, 0 elsewhere; empty without ground truth.
  std::vector<std::uint8_t> gt_mask() const;
  void validate() const;
};

struct PipelineConfig {
  int max_disparity = 0;  // 0 uses the pair's hint
  bool filtering = true;
  GuidedFilterParams guided;
  RefineConfig refine;
  bool keep_volumes = false;
};

struct PipelineResult {
  DisparityMap wta;         // left-referenced winner-takes-all
  DisparityMap wta_right;   // right-referenced winner-takes-all
  DisparityMap consistent;  // inconsistencies removed
  SegmentationMask segmentation;
  SegmentationMask mask;
  DisparityMap final;
  int max_disparity = 0;
  std::optional<CostVolume> left_volume;
  std::optional<CostVolume> right_volume;
};

PipelineResult run_pipeline(const StereoPair& pair, const NetworkWeights& weights,
                            const PipelineConfig& config = {});

/// Writes <stem>_wta.png, <stem>_consistent.png, <stem>_final.png,
/// <stem>_mask.png and, when kept, <stem>_volume.fccv into `dir`.
void write_intermediates(const PipelineResult& result, const std::filesystem::path& dir,
                         const std::string& stem);

struct Dataset {
  std::string name;
  DatasetStyle style = DatasetStyle::Middlebury;
  int max_disparity = 0;
  std::vector<StereoPair> pairs;
};

/// Pairs are matched by file stem across the three directories; `gt_dir`
/// may be empty.
Dataset load_dataset(const std::filesystem::path& left_dir, const std::filesystem::path& right_dir,
                     const std::filesystem::path& gt_dir, DatasetStyle style, int max_disparity,
                     std::string name = {});

/// Loads `root/left`, `root/right` and `root/gt`; an optional `root/dataset.cfg`
/// sets `style`, `max_disparity` and `name` as key=value lines.
Dataset load_dataset(const std::filesystem::path& root);

struct NamedWeights {
  std::string name;
  NetworkWeights weights;
};

struct CrossMatrix {
  std::vector<std::string> datasets;  // rows
  std::vector<std::string> weights;   // columns
  std::vector<std::vector<double>> two_pe;

  std::string table() const;
  std::string csv() const;
};

/// 2-point error of every (dataset, weights) cell, pooled over the pairs of
/// each dataset.
CrossMatrix cross_dataset_eval(std::span<const NamedWeights> weights,
                               std::span<const Dataset> datasets,
                               const PipelineConfig& config = {});

}  // namespace fcdcnn
