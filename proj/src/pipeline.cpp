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


#include "fcdcnn/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "fcdcnn/errors.hpp"
#include "fcdcnn/eval.hpp"
#include "fcdcnn/io.hpp"

namespace fcdcnn {

namespace fs = std::filesystem;

DatasetStyle parse_dataset_style(const std::string& name) {
  if (name == "middlebury") return DatasetStyle::Middlebury;
  if (name == "kitti2012") return DatasetStyle::Kitti2012;
  if (name == "kitti2015") return DatasetStyle::Kitti2015;
  if (name == "eth3d") return DatasetStyle::Eth3d;
  if (name == "synthetic") return DatasetStyle::Synthetic;
  throw ConfigError("unknown dataset style '" + name +
                    "' (expected middlebury, kitti2012, kitti2015, eth3d or synthetic)");
}

std::string dataset_style_name(DatasetStyle style) {
  switch (style) {
    case DatasetStyle::Middlebury: return "middlebury";
    case DatasetStyle::Kitti2012: return "kitti2012";
    case DatasetStyle::Kitti2015: return "kitti2015";
    case DatasetStyle::Eth3d: return "eth3d";
    case DatasetStyle::Synthetic: return "synthetic";
  }
  return "unknown";
}

int default_max_disparity(DatasetStyle style) {
  switch (style) {
    case DatasetStyle::Kitti2012: return 192;
    case DatasetStyle::Kitti2015: return 228;
    case DatasetStyle::Eth3d: return 64;
    default: return 0;
  }
}

std::vector<std::uint8_t> StereoPair::gt_mask() const {
  std::vector<std::uint8_t> mask;
  if (!gt_left) return mask;
  mask.reserve(gt_left->size());
  for (float v : gt_left->values) mask.push_back(DisparityMap::is_valid(v) ? 1 : 0);
  return mask;
}

void StereoPair::validate() const {
  if (left.width < 1 || left.height < 1) throw ShapeError(id + ": empty left image");
  if (!left.same_size(right)) {
    throw ShapeError(id + ": left " + std::to_string(left.width) + "x" + std::to_string(left.height) +
                     " and right " + std::to_string(right.width) + "x" +
                     std::to_string(right.height) + " differ in size");
  }
  if (gt_left && (gt_left->width != left.width || gt_left->height != left.height)) {
    throw ShapeError(id + ": ground truth does not match the left image size");
  }
}

PipelineResult run_pipeline(const StereoPair& pair, const NetworkWeights& weights,
                            const PipelineConfig& config) {
  pair.validate();
  config.refine.validate();
  int max_disparity = config.max_disparity;
  if (max_disparity == 0) max_disparity = pair.max_disparity;
  if (max_disparity == 0) max_disparity = default_max_disparity(pair.style);
  if (max_disparity == 0) {
    throw ConfigError(pair.id + ": no maximum disparity given for a " +
                      dataset_style_name(pair.style) + " pair");
  }

  MatchResult match =
      match_pair(pair.left, pair.right, weights, max_disparity, config.filtering, config.guided);
  RefineResult refined = refine_disparity(match.left, match.right, config.refine);

  PipelineResult result;
  result.max_disparity = max_disparity;
  result.wta = std::move(match.left);
  result.wta_right = std::move(match.right);
  result.consistent = std::move(refined.consistent);
  result.segmentation = std::move(refined.segmentation);
  result.mask = std::move(refined.mask);
  result.final = std::move(refined.final);
  if (config.keep_volumes) {
    result.left_volume = std::move(match.left_volume);
    result.right_volume = std::move(match.right_volume);
  }
  return result;
}

namespace {

Image mask_image(const SegmentationMask& mask) {
  Image out(mask.width, mask.height);
  for (std::size_t i = 0; i < mask.labels.size(); ++i) {
    out.pixels[i] = mask.labels[i] == Label::Foreground ? 255.0f : 0.0f;
  }
  return out;
}

}  // namespace

void write_intermediates(const PipelineResult& result, const fs::path& dir, const std::string& stem) {
  fs::create_directories(dir);
  write_png8(disparity_image(result.wta, result.max_disparity), dir / (stem + "_wta.png"));
  write_png8(disparity_image(result.consistent, result.max_disparity), dir / (stem + "_consistent.png"));
  write_png8(disparity_image(result.final, result.max_disparity), dir / (stem + "_final.png"));
  write_png8(mask_image(result.mask), dir / (stem + "_mask.png"));
  if (result.left_volume) save_cost_volume(*result.left_volume, dir / (stem + "_volume.fccv"));
}

namespace {

bool is_image_file(const fs::path& p) {
  const std::string ext = p.extension().string();
  return ext == ".png" || ext == ".pgm" || ext == ".ppm";
}

std::map<std::string, fs::path> files_by_stem(const fs::path& dir, bool disparity) {
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const fs::path& p = entry.path();
    const bool accepted = disparity ? (p.extension() == ".pfm" || p.extension() == ".png")
                                    : is_image_file(p);
    if (!accepted) continue;
    const std::string stem = p.stem().string();
    if (out.count(stem)) throw ConfigError("two files share the stem '" + stem + "' in " + dir.string());
    out[stem] = p;
  }
  return out;
}

std::map<std::string, std::string> read_key_values(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

}  // namespace

Dataset load_dataset(const fs::path& left_dir, const fs::path& right_dir, const fs::path& gt_dir,
                     DatasetStyle style, int max_disparity, std::string name) {
  const auto lefts = files_by_stem(left_dir, false);
  const auto rights = files_by_stem(right_dir, false);
  std::map<std::string, fs::path> gts;
  if (!gt_dir.empty()) gts = files_by_stem(gt_dir, true);
  if (lefts.empty()) throw ConfigError("no images in " + left_dir.string());

  Dataset dataset;
  dataset.name = name.empty() ? left_dir.parent_path().filename().string() : std::move(name);
  dataset.style = style;
  dataset.max_disparity = max_disparity;
  for (const auto& [stem, path] : lefts) {
    const auto r = rights.find(stem);
    if (r == rights.end()) throw ConfigError("no right image for '" + stem + "' in " + right_dir.string());
    StereoPair pair;
    pair.id = stem;
    pair.left = read_image(path);
    pair.right = read_image(r->second);
    pair.style = style;
    pair.max_disparity = max_disparity;
    if (!gt_dir.empty()) {
      const auto g = gts.find(stem);
      if (g == gts.end()) throw ConfigError("no ground truth for '" + stem + "' in " + gt_dir.string());
      pair.gt_left = read_disparity(g->second);
    }
    pair.validate();
    dataset.pairs.push_back(std::move(pair));
  }
  return dataset;
}

Dataset load_dataset(const fs::path& root) {
  DatasetStyle style = DatasetStyle::Middlebury;
  int max_disparity = 0;
  std::string name = root.filename().string();
  if (name.empty()) name = root.parent_path().filename().string();
  const fs::path cfg = root / "dataset.cfg";
  if (fs::exists(cfg)) {
    for (const auto& [key, value] : read_key_values(cfg)) {
      if (key == "style") {
        style = parse_dataset_style(value);
      } else if (key == "max_disparity") {
        try {
          max_disparity = std::stoi(value);
        } catch (const std::exception&) {
          throw ConfigError(cfg.string() + ": max_disparity is not an integer");
        }
      } else if (key == "name") {
        name = value;
      } else {
        throw ConfigError(cfg.string() + ": unknown key '" + key + "'");
      }
    }
  }
  if (max_disparity == 0) max_disparity = default_max_disparity(style);
  const fs::path gt = fs::is_directory(root / "gt") ? root / "gt" : fs::path();
  return load_dataset(root / "left", root / "right", gt, style, max_disparity, name);
}

std::string CrossMatrix::table() const {
  std::ostringstream os;
  char cell[48];
  std::snprintf(cell, sizeof cell, "%-20s", "dataset \\ weights");
  os << cell;
  for (const auto& w : weights) {
    std::snprintf(cell, sizeof cell, "%14s", w.c_str());
    os << cell;
  }
  os << '\n';
  for (std::size_t r = 0; r < datasets.size(); ++r) {
    std::snprintf(cell, sizeof cell, "%-20s", datasets[r].c_str());
    os << cell;
    for (double v : two_pe[r]) {
      std::snprintf(cell, sizeof cell, "%14.2f", v);
      os << cell;
    }
    os << '\n';
  }
  return os.str();
}

std::string CrossMatrix::csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "dataset";
  for (const auto& w : weights) os << ',' << w;
  os << '\n';
  for (std::size_t r = 0; r < datasets.size(); ++r) {
    os << datasets[r];
    for (double v : two_pe[r]) os << ',' << v;
    os << '\n';
  }
  return os.str();
}

CrossMatrix cross_dataset_eval(std::span<const NamedWeights> weights, std::span<const Dataset> datasets,
                               const PipelineConfig& config) {
  if (weights.empty() || datasets.empty()) throw ConfigError("cross test needs weights and datasets");
  CrossMatrix matrix;
  for (const auto& w : weights) matrix.weights.push_back(w.name);
  for (const auto& dataset : datasets) {
    matrix.datasets.push_back(dataset.name);
    std::vector<double> row;
    for (const auto& w : weights) {
      std::vector<DisparityMap> predictions;
      predictions.reserve(dataset.pairs.size());
      std::vector<EvalInput> inputs;
      for (const auto& pair : dataset.pairs) {
        if (!pair.gt_left) continue;
        predictions.push_back(run_pipeline(pair, w.weights, config).final);
      }
      std::size_t k = 0;
      for (const auto& pair : dataset.pairs) {
        if (!pair.gt_left) continue;
        inputs.push_back({pair.id, &predictions[k++], &*pair.gt_left});
      }
      if (inputs.empty()) throw DegenerateInputError(dataset.name + ": no pair has ground truth");
      row.push_back(evaluate(inputs, {2.0}).n_pe[0]);
    }
    matrix.two_pe.push_back(std::move(row));
  }
  return matrix;
}

}  // namespace fcdcnn
