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


#include "fcdcnn/eval.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "fcdcnn/errors.hpp"

namespace fcdcnn {

namespace {

void check_shapes(const DisparityMap& pred, const DisparityMap& gt) {
  if (!pred.same_size(gt)) {
    throw ShapeError("prediction " + std::to_string(pred.width) + "x" + std::to_string(pred.height) +
                     " does not match ground truth " + std::to_string(gt.width) + "x" +
                     std::to_string(gt.height));
  }
}

void check_thresholds(const std::vector<double>& thresholds) {
  if (thresholds.empty()) throw ConfigError("no evaluation thresholds given");
  for (double t : thresholds) {
    if (!std::isfinite(t) || t < 0.0) throw ConfigError("thresholds must be finite and non-negative");
  }
}

PairEval count_pair(const DisparityMap& pred, const DisparityMap& gt,
                    const std::vector<double>& thresholds) {
  check_shapes(pred, gt);
  PairEval out;
  out.bad_pixels.assign(thresholds.size(), 0);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const float g = gt.values[i];
    if (!DisparityMap::is_valid(g)) continue;
    ++out.valid_pixels;
    const float p = pred.values[i];
    const bool valid = DisparityMap::is_valid(p);
    const double error = valid ? std::abs(double(p) - double(g)) : 0.0;
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      if (!valid || error > thresholds[t]) ++out.bad_pixels[t];
    }
  }
  return out;
}

double percentage(std::size_t bad, std::size_t valid) {
  return 100.0 * static_cast<double>(bad) / static_cast<double>(valid);
}

std::string threshold_label(double t) {
  std::ostringstream os;
  os << t << "-PE";
  return os.str();
}

}  // namespace

double n_point_error(const DisparityMap& pred, const DisparityMap& gt, double tau) {
  const std::vector<double> thresholds{tau};
  check_thresholds(thresholds);
  const PairEval counts = count_pair(pred, gt, thresholds);
  if (counts.valid_pixels == 0) {
    throw DegenerateInputError("n-point error undefined: ground truth has no valid pixel");
  }
  return percentage(counts.bad_pixels[0], counts.valid_pixels);
}

EvalResult evaluate(std::span<const EvalInput> inputs, const std::vector<double>& thresholds) {
  check_thresholds(thresholds);
  EvalResult result;
  result.thresholds = thresholds;
  result.pairs.resize(inputs.size());
  for (const auto& in : inputs) {
    if (in.pred == nullptr || in.gt == nullptr) throw ConfigError("evaluation input missing a map");
  }
  std::vector<std::string> errors(inputs.size());
  const int n = static_cast<int>(inputs.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      result.pairs[i] = count_pair(*inputs[i].pred, *inputs[i].gt, thresholds);
    } catch (const ShapeError& e) {
      errors[i] = e.what();
    }
  }
  result.bad_pixels.assign(thresholds.size(), 0);
  for (int i = 0; i < n; ++i) {
    if (!errors[i].empty()) throw ShapeError(inputs[i].id + ": " + errors[i]);
    PairEval& p = result.pairs[i];
    p.id = inputs[i].id;
    result.valid_pixels += p.valid_pixels;
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      result.bad_pixels[t] += p.bad_pixels[t];
      if (p.valid_pixels > 0) p.n_pe.push_back(percentage(p.bad_pixels[t], p.valid_pixels));
    }
  }
  if (result.valid_pixels == 0) {
    throw DegenerateInputError("n-point error undefined: no valid ground-truth pixel in any pair");
  }
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    result.n_pe.push_back(percentage(result.bad_pixels[t], result.valid_pixels));
  }
  return result;
}

double EvalResult::at(double tau) const {
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    if (thresholds[t] == tau) return n_pe.at(t);
  }
  throw ConfigError("threshold " + std::to_string(tau) + " was not evaluated");
}

std::string EvalResult::table() const {
  std::ostringstream os;
  char cell[32];
  std::snprintf(cell, sizeof cell, "%-24s", "pair");
  os << cell;
  for (double t : thresholds) {
    std::snprintf(cell, sizeof cell, "%10s", threshold_label(t).c_str());
    os << cell;
  }
  os << '\n';
  auto row = [&](const std::string& name, const std::vector<double>& values) {
    std::snprintf(cell, sizeof cell, "%-24s", name.c_str());
    os << cell;
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      if (t < values.size()) {
        std::snprintf(cell, sizeof cell, "%10.2f", values[t]);
      } else {
        std::snprintf(cell, sizeof cell, "%10s", "n/a");
      }
      os << cell;
    }
    os << '\n';
  };
  for (const auto& p : pairs) row(p.id, p.n_pe);
  row("all", n_pe);
  return os.str();
}

std::string EvalResult::csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "pair,valid_pixels";
  for (double t : thresholds) os << ',' << threshold_label(t);
  os << '\n';
  auto row = [&](const std::string& name, std::size_t valid, const std::vector<double>& values) {
    os << name << ',' << valid;
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      os << ',';
      if (t < values.size()) os << values[t];
    }
    os << '\n';
  };
  for (const auto& p : pairs) row(p.id, p.valid_pixels, p.n_pe);
  row("all", valid_pixels, n_pe);
  return os.str();
}

}  // namespace fcdcnn
