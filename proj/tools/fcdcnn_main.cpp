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


#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fcdcnn/errors.hpp"
#include "fcdcnn/eval.hpp"
#include "fcdcnn/io.hpp"
#include "fcdcnn/matcher.hpp"
#include "fcdcnn/network.hpp"
#include "fcdcnn/pipeline.hpp"
#include "fcdcnn/refine.hpp"
#include "fcdcnn/trainer.hpp"

namespace fs = std::filesystem;
using namespace fcdcnn;

namespace {

enum ExitCode { kOk = 0, kOther = 1, kFormat = 2, kConfig = 3, kDegenerate = 4 };

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << text;
  if (!os) throw ConfigError("failed writing " + path.string());
}

// --report PREFIX writes PREFIX.txt and PREFIX.csv
void write_report(const std::string& prefix, const std::string& table, const std::string& csv) {
  if (prefix.empty()) return;
  write_text(prefix + ".txt", table);
  write_text(prefix + ".csv", csv);
}

struct TrainArgs {
  std::string left_dir, right_dir, gt_dir, out_weights, init_weights, checkpoint, dataset_id;
  std::string style = "middlebury";
  std::vector<std::string> variant_dirs;
  TrainConfig config;
  int layers = 5;
  std::uint64_t init_seed = 1;
  int log_every = 10;
};

int run_train(const TrainArgs& a) {
  TrainConfig config = a.config;
  config.checkpoint_path = a.checkpoint.empty() ? fs::path(a.out_weights + ".ckpt") : fs::path(a.checkpoint);
  config.dataset_id = a.dataset_id.empty() ? fs::path(a.left_dir).parent_path().filename().string()
                                           : a.dataset_id;
  config.validate();

  NetworkWeights initial;
  if (!a.init_weights.empty()) {
    initial = load_weights(a.init_weights);
  } else {
    NetworkConfig net;
    net.num_layers = a.layers;
    initial = init_weights(net, a.init_seed);
  }

  const Dataset data = load_dataset(a.left_dir, a.right_dir, a.gt_dir, parse_dataset_style(a.style), 0);
  std::vector<TrainingPair> pairs;
  for (const auto& p : data.pairs) {
    std::vector<Image> variants;
    for (const auto& dir : a.variant_dirs) {
      for (const char* ext : {".png", ".ppm", ".pgm"}) {
        const fs::path candidate = fs::path(dir) / (p.id + ext);
        if (fs::exists(candidate)) {
          variants.push_back(read_image(candidate));
          break;
        }
      }
    }
    pairs.push_back(make_training_pair(p.left, p.right, *p.gt_left, p.id, variants));
  }
  const PatchSampler sampler(std::move(pairs), config.patch_size, config.variant_fraction);

  std::cerr << "training " << initial.config.num_layers << "-layer network ("
            << count_parameters(initial) << " parameters) on " << data.pairs.size() << " pairs\n";
  const auto progress = [&](int it, double loss) {
    if (a.log_every > 0 && ((it + 1) % a.log_every == 0 || it == 0)) {
      std::fprintf(stderr, "iter %6d  loss %.6f\n", it + 1, loss);
    }
  };
  const TrainResult result = train(sampler, config, std::move(initial), progress);
  save_weights(result.weights, a.out_weights);
  std::cerr << "wrote " << a.out_weights << '\n';
  return kOk;
}

struct InferArgs {
  std::string weights, left, right, out, dump_dir;
  int max_disp = 0;
  bool no_filter = false;
  int guided_radius = 8;
  double guided_eta = 10.0;
};

int run_infer(const InferArgs& a) {
  const NetworkWeights weights = load_weights(a.weights);
  StereoPair pair;
  pair.id = fs::path(a.left).stem().string();
  pair.left = read_image(a.left);
  pair.right = read_image(a.right);
  pair.max_disparity = a.max_disp;

  PipelineConfig config;
  config.filtering = !a.no_filter;
  config.guided = {a.guided_radius, a.guided_eta};
  config.keep_volumes = !a.dump_dir.empty();
  const PipelineResult result = run_pipeline(pair, weights, config);

  write_disparity(result.final, a.out);
  if (!a.dump_dir.empty()) write_intermediates(result, a.dump_dir, pair.id);
  std::cerr << "wrote " << a.out << " (" << result.final.width << "x" << result.final.height << ", "
            << result.max_disparity << " disparities)\n";
  return kOk;
}

struct EvalArgs {
  std::string pred_dir, gt_dir, report;
  std::vector<double> thresholds = kDefaultThresholds;
};

int run_eval(const EvalArgs& a) {
  std::vector<std::string> ids;
  std::vector<DisparityMap> preds, gts;
  std::vector<fs::path> gt_files;
  for (const auto& entry : fs::directory_iterator(a.gt_dir)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".pfm" || ext == ".png")) gt_files.push_back(entry.path());
  }
  std::sort(gt_files.begin(), gt_files.end());
  if (gt_files.empty()) throw ConfigError("no ground-truth maps in " + a.gt_dir);
  for (const auto& g : gt_files) {
    const std::string stem = g.stem().string();
    std::optional<fs::path> pred;
    for (const char* ext : {".pfm", ".png"}) {
      const fs::path candidate = fs::path(a.pred_dir) / (stem + ext);
      if (fs::exists(candidate)) {
        pred = candidate;
        break;
      }
    }
    if (!pred) throw ConfigError("no prediction for '" + stem + "' in " + a.pred_dir);
    ids.push_back(stem);
    preds.push_back(read_disparity(*pred));
    gts.push_back(read_disparity(g));
  }
  std::vector<EvalInput> inputs;
  for (std::size_t i = 0; i < ids.size(); ++i) inputs.push_back({ids[i], &preds[i], &gts[i]});
  const EvalResult result = evaluate(inputs, a.thresholds);
  std::cout << result.table();
  write_report(a.report, result.table(), result.csv());
  return kOk;
}

struct CrossArgs {
  std::vector<std::string> weights, datasets;
  std::string report;
  int max_disp = 0;
};

int run_crosstest(const CrossArgs& a) {
  std::vector<NamedWeights> weights;
  for (const auto& path : a.weights) weights.push_back({fs::path(path).stem().string(), load_weights(path)});
  std::vector<Dataset> datasets;
  for (const auto& root : a.datasets) datasets.push_back(load_dataset(root));
  PipelineConfig config;
  config.max_disparity = a.max_disp;
  const CrossMatrix matrix = cross_dataset_eval(weights, datasets, config);
  std::cout << "2-PE (%), rows are datasets, columns are weights\n" << matrix.table();
  write_report(a.report, matrix.table(), matrix.csv());
  return kOk;
}

struct RefineArgs {
  std::string left_volume, right_volume, out;
};

int run_refine(const RefineArgs& a) {
  const CostVolume left = load_cost_volume(a.left_volume);
  const CostVolume right = load_cost_volume(a.right_volume);
  const RefineResult result = refine_disparity(winner_takes_all(left), winner_takes_all(right));
  write_disparity(result.final, a.out);
  return kOk;
}

std::vector<double> parse_thresholds(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad threshold '" + item + "'");
    }
  }
  return out;
}

// Reads a key=value file ('#' comments) into --key=value arguments.
std::vector<std::string> config_arguments(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path);
  std::vector<std::string> args;
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto trim = [](const std::string& t) {
      const auto b = t.find_first_not_of(" \t\r");
      const auto e = t.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty()) {
      throw ConfigError(path + ":" + std::to_string(number) + ": expected key=value");
    }
    args.push_back("--" + trim(line.substr(0, eq)) + "=" + trim(line.substr(eq + 1)));
  }
  return args;
}

// Splices `--config FILE` (after the subcommand) into the argument list ahead
// of the command-line flags, so explicit flags override file values.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> in(argv + 1, argv + argc), out;
  std::vector<std::string> from_file;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i] == "--config") {
      if (i + 1 >= in.size()) throw ConfigError("--config needs a file name");
      const auto a = config_arguments(in[++i]);
      from_file.insert(from_file.end(), a.begin(), a.end());
    } else if (in[i].rfind("--config=", 0) == 0) {
      const auto a = config_arguments(in[i].substr(9));
      from_file.insert(from_file.end(), a.begin(), a.end());
    } else {
      out.push_back(in[i]);
    }
  }
  if (!from_file.empty()) {
    if (out.empty()) throw ConfigError("--config must follow a subcommand");
    out.insert(out.begin() + 1, from_file.begin(), from_file.end());
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fully convolutional densely connected stereo matching", "fcdcnn"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.footer("Every subcommand accepts --config FILE with key=value lines; keys mirror the long flags.");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train the feature network on patch triples");
  train_cmd->add_option("--left-dir", train_args.left_dir)->required();
  train_cmd->add_option("--right-dir", train_args.right_dir)->required();
  train_cmd->add_option("--gt-dir", train_args.gt_dir)->required();
  train_cmd->add_option("--out-weights", train_args.out_weights)->required();
  train_cmd->add_option("--iters", train_args.config.iterations)->capture_default_str();
  train_cmd->add_option("--batch", train_args.config.batch_size)->capture_default_str();
  train_cmd->add_option("--lr", train_args.config.learning_rate)->capture_default_str();
  train_cmd->add_option("--seed", train_args.config.seed)->capture_default_str();
  train_cmd->add_option("--patch", train_args.config.patch_size)->capture_default_str();
  train_cmd->add_option("--margin", train_args.config.margin)->capture_default_str();
  train_cmd->add_option("--layers", train_args.layers)->capture_default_str();
  train_cmd->add_option("--init-seed", train_args.init_seed)->capture_default_str();
  train_cmd->add_option("--init-weights", train_args.init_weights, "Resume from a weights file");
  train_cmd->add_option("--variant-dir", train_args.variant_dirs,
                        "Directory of alternative right images (lighting/exposure), by stem");
  train_cmd->add_option("--variant-fraction", train_args.config.variant_fraction)->capture_default_str();
  train_cmd->add_option("--chunk", train_args.config.chunk_size)->capture_default_str();
  train_cmd->add_option("--checkpoint-every", train_args.config.checkpoint_every)->capture_default_str();
  train_cmd->add_option("--checkpoint", train_args.checkpoint);
  train_cmd->add_option("--dataset-id", train_args.dataset_id);
  train_cmd->add_option("--style", train_args.style)->capture_default_str();
  train_cmd->add_option("--log-every", train_args.log_every)->capture_default_str();

  InferArgs infer_args;
  auto* infer_cmd = app.add_subcommand("infer", "Estimate a disparity map for one rectified pair");
  infer_cmd->add_option("--weights", infer_args.weights)->required();
  infer_cmd->add_option("--left", infer_args.left)->required();
  infer_cmd->add_option("--right", infer_args.right)->required();
  infer_cmd->add_option("--max-disp", infer_args.max_disp)->required();
  infer_cmd->add_option("--out", infer_args.out, "Output map (.pfm or 16-bit .png)")->required();
  infer_cmd->add_option("--dump-intermediates", infer_args.dump_dir,
                        "Directory for WTA, consistency, mask, final and cost-volume dumps");
  infer_cmd->add_flag("--no-filter", infer_args.no_filter, "Skip median and guided filtering");
  infer_cmd->add_option("--guided-radius", infer_args.guided_radius)->capture_default_str();
  infer_cmd->add_option("--guided-eta", infer_args.guided_eta)->capture_default_str();

  EvalArgs eval_args;
  std::string thresholds = "0.5,1,2,3,4,5";
  auto* eval_cmd = app.add_subcommand("eval", "n-point error of predictions against ground truth");
  eval_cmd->add_option("--pred-dir", eval_args.pred_dir)->required();
  eval_cmd->add_option("--gt-dir", eval_args.gt_dir)->required();
  eval_cmd->add_option("--thresholds", thresholds)->capture_default_str();
  eval_cmd->add_option("--report", eval_args.report, "Write PREFIX.txt and PREFIX.csv");

  CrossArgs cross_args;
  auto* cross_cmd = app.add_subcommand("crosstest", "2-point error of every weights/dataset combination");
  cross_cmd->add_option("--weights", cross_args.weights)->required()->delimiter(',');
  cross_cmd->add_option("--datasets", cross_args.datasets)->required()->delimiter(',');
  cross_cmd->add_option("--report", cross_args.report, "Write PREFIX.txt and PREFIX.csv");
  cross_cmd->add_option("--max-disp", cross_args.max_disp, "Override every dataset's disparity range");

  RefineArgs refine_args;
  auto* refine_cmd = app.add_subcommand("refine", "Refine disparities from dumped cost volumes");
  refine_cmd->add_option("--left-volume", refine_args.left_volume)->required();
  refine_cmd->add_option("--right-volume", refine_args.right_volume)->required();
  refine_cmd->add_option("--out", refine_args.out)->required();

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*train_cmd) return run_train(train_args);
    if (*infer_cmd) return run_infer(infer_args);
    if (*eval_cmd) {
      eval_args.thresholds = parse_thresholds(thresholds);
      return run_eval(eval_args);
    }
    if (*cross_cmd) return run_crosstest(cross_args);
    if (*refine_cmd) return run_refine(refine_args);
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kFormat;
  } catch (const ShapeError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kFormat;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const DegenerateInputError& e) {
    std::cerr << "degenerate input: " << e.what() << '\n';
    return kDegenerate;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
  return kOther;
}
