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


#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "fcdcnn/errors.hpp"
#include "fcdcnn/eval.hpp"
#include "fcdcnn/io.hpp"
#include "fcdcnn/pipeline.hpp"
#include "fcdcnn/synthetic.hpp"

using namespace fcdcnn;
namespace fs = std::filesystem;

namespace {

constexpr float inv = DisparityMap::kInvalid;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& f) const { return path / f; }
};

void write_bytes(const fs::path& p, const std::string& header, const std::vector<unsigned char>& payload) {
  std::ofstream os(p, std::ios::binary);
  os << header;
  os.write(reinterpret_cast<const char*>(payload.data()), std::streamsize(payload.size()));
}

std::vector<unsigned char> float_bytes(std::initializer_list<float> values, bool little) {
  std::vector<unsigned char> out;
  for (float f : values) {
    std::uint32_t v;
    std::memcpy(&v, &f, 4);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * (little ? i : 3 - i))));
  }
  return out;
}

NetworkWeights small_net() {
  NetworkConfig c;
  c.num_layers = 2;
  return init_weights(c, 3);
}

}  // namespace

TEST_CASE("PFM round trip is bit exact and keeps invalid pixels") {
  TempDir dir("fcdcnn_pfm");
  DisparityMap m(5, 3);
  for (std::size_t i = 0; i < m.size(); ++i) m.values[i] = i % 4 == 0 ? inv : 0.1f * float(i) + 1e-3f;
  write_pfm(m, dir / "a.pfm");
  const DisparityMap r = read_pfm(dir / "a.pfm");
  CHECK(r.width == 5);
  CHECK(r.height == 3);
  CHECK(std::memcmp(r.values.data(), m.values.data(), m.size() * 4) == 0);
}

TEST_CASE("PFM endianness and row order") {
  TempDir dir("fcdcnn_pfm2");
  // two rows stored bottom-up: file row 0 is image row 1
  write_bytes(dir / "le.pfm", "Pf\n2 2\n-1.0\n", float_bytes({1, 2, 3, INFINITY}, true));
  const DisparityMap le = read_pfm(dir / "le.pfm");
  CHECK(le.at(0, 1) == 1.0f);
  CHECK(le.at(1, 1) == 2.0f);
  CHECK(le.at(0, 0) == 3.0f);
  CHECK_FALSE(le.valid(1, 0));
  write_bytes(dir / "be.pfm", "Pf\n2 1\n1.0\n", float_bytes({4.5f, 6.25f}, false));
  const DisparityMap be = read_pfm(dir / "be.pfm");
  CHECK(be.at(0, 0) == 4.5f);
  CHECK(be.at(1, 0) == 6.25f);
}

TEST_CASE("PFM format errors") {
  TempDir dir("fcdcnn_pfm3");
  write_bytes(dir / "color.pfm", "PF\n1 1\n-1\n", float_bytes({1, 2, 3}, true));
  CHECK_THROWS_AS(read_pfm(dir / "color.pfm"), FormatError);
  write_bytes(dir / "short.pfm", "Pf\n4 4\n-1\n", float_bytes({1, 2}, true));
  try {
    read_pfm(dir / "short.pfm");
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("offset") != std::string::npos);
  }
  write_bytes(dir / "junk.pfm", "P6\n1 1\n255\n", {0, 0, 0});
  CHECK_THROWS_AS(read_pfm(dir / "junk.pfm"), FormatError);
}

TEST_CASE("16-bit disparity PNG encoding") {
  TempDir dir("fcdcnn_png");
  DisparityMap m(4, 2);
  m.values = {2.0f, inv, 0.5f, 100.0f, 1.0f / 256.0f, 3.0f, inv, 255.0f};
  write_disparity_png16(m, dir / "d.png");
  const DisparityMap r = read_disparity_png16(dir / "d.png");
  CHECK(r.values[0] == 2.0f);  // stored 512
  CHECK_FALSE(r.valid(1, 0));   // stored 0
  CHECK(r.values == m.values);
  write_png8(Image(3, 3, 1, 7.0f), dir / "eight.png");
  CHECK_THROWS_AS(read_disparity_png16(dir / "eight.png"), FormatError);
  write_bytes(dir / "fake.png", "not a png at all", {});
  CHECK_THROWS_AS(read_disparity_png16(dir / "fake.png"), FormatError);
  CHECK(read_disparity(dir / "d.png").values == m.values);
  CHECK_THROWS_AS(read_disparity(dir / "d.tiff"), FormatError);
}

TEST_CASE("image readers") {
  TempDir dir("fcdcnn_img");
  Image rgb(3, 2, 3);
  for (std::size_t i = 0; i < rgb.pixels.size(); ++i) rgb.pixels[i] = float(i * 10);
  write_png8(rgb, dir / "rgb.png");
  const Image r = read_image(dir / "rgb.png");
  CHECK(r.channels == 3);
  CHECK(r.pixels == rgb.pixels);
  Image gray(4, 3, 1);
  for (std::size_t i = 0; i < gray.pixels.size(); ++i) gray.pixels[i] = float(i * 20);
  write_pgm8(gray, dir / "g.pgm");
  CHECK(read_image(dir / "g.pgm").pixels == gray.pixels);
  write_bytes(dir / "bad.pgm", "P2\n1 1\n255\n", {0});
  CHECK_THROWS_AS(read_image(dir / "bad.pgm"), FormatError);
  write_bytes(dir / "short.ppm", "P6\n4 4\n255\n", {1, 2, 3});
  CHECK_THROWS_AS(read_image(dir / "short.ppm"), FormatError);
  CHECK_THROWS_AS(read_image(dir / "missing.png"), ConfigError);
}

TEST_CASE("grayscale and standardisation") {
  Image rgb(1, 1, 3);
  rgb.pixels = {100, 50, 200};
  CHECK(to_grayscale(rgb).pixels[0] == doctest::Approx(0.299 * 100 + 0.587 * 50 + 0.114 * 200));
  const Image flat = standardize(Image(3, 3, 1, 42.0f));
  for (float v : flat.pixels) CHECK(v == 0.0f);
  Image ramp(4, 1);
  ramp.pixels = {0, 1, 2, 3};
  const Image s = standardize(ramp);
  double mean = 0, var = 0;
  for (float v : s.pixels) mean += v;
  for (float v : s.pixels) var += v * v;
  CHECK(mean == doctest::Approx(0.0).scale(1.0));
  CHECK(var / 4 == doctest::Approx(1.0));
}

TEST_CASE("n-point error examples") {
  DisparityMap gt(2, 2), pred(2, 2);
  gt.values = {1, 2, 3, 4};
  pred.values = {1, 2, 3, 7};
  CHECK(n_point_error(pred, gt, 2.0) == 25.0);
  CHECK(n_point_error(pred, gt, 3.0) == 0.0);  // strictly greater than tau
  for (double tau : kDefaultThresholds) CHECK(n_point_error(gt, gt, tau) == 0.0);

  DisparityMap gt_hole = gt, pred_far = pred;
  gt_hole.values.push_back(inv);
  pred_far.values.push_back(1000.0f);
  gt_hole.width = pred_far.width = 5;
  gt_hole.height = pred_far.height = 1;
  CHECK(n_point_error(pred_far, gt_hole, 2.0) == 25.0);

  pred.values[0] = inv;  // invalid prediction on valid ground truth counts as a miss
  CHECK(n_point_error(pred, gt, 2.0) == 50.0);
  CHECK_THROWS_AS(n_point_error(pred, DisparityMap(2, 2), 2.0), DegenerateInputError);
  CHECK_THROWS_AS(n_point_error(pred, DisparityMap(3, 2, 1.0f), 2.0), ShapeError);
}

TEST_CASE("n-point error is monotone and order invariant") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> u(0.0f, 30.0f);
  for (int t = 0; t < 50; ++t) {
    DisparityMap gt(11, 7), pred(11, 7);
    for (std::size_t i = 0; i < gt.size(); ++i) {
      gt.values[i] = i % 5 == 0 ? inv : u(rng);
      pred.values[i] = gt.values[i] + (u(rng) - 15.0f) / 3.0f;
    }
    double prev = 100.0;
    for (double tau : {0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 8.0}) {
      const double e = n_point_error(pred, gt, tau);
      CHECK(e <= prev);
      prev = e;
    }
    std::vector<std::size_t> perm(gt.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    DisparityMap gp = gt, pp = pred;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      gp.values[i] = gt.values[perm[i]];
      pp.values[i] = pred.values[perm[i]];
    }
    CHECK(n_point_error(pp, gp, 2.0) == n_point_error(pred, gt, 2.0));
  }
}

TEST_CASE("pooled evaluation and reports") {
  DisparityMap g1(2, 1), p1(2, 1), g2(2, 2), p2(2, 2);
  g1.values = {1, 1};
  p1.values = {1, 9};
  g2.values = {2, 2, 2, inv};
  p2.values = {2, 2, 2, 2};
  const EvalInput inputs[] = {{"a", &p1, &g1}, {"b", &p2, &g2}};
  const EvalResult r = evaluate(inputs);
  CHECK(r.valid_pixels == 5);
  CHECK(r.at(2.0) == 20.0);
  CHECK(r.pairs[0].n_pe[2] == 50.0);
  CHECK(r.pairs[1].n_pe[2] == 0.0);
  CHECK(r.table().find("all") != std::string::npos);
  const std::string csv = r.csv();
  CHECK(csv.rfind("pair,valid_pixels,0.5-PE,1-PE,2-PE,3-PE,4-PE,5-PE\n", 0) == 0);
  CHECK(csv.find("all,5,20,20,20,20,20,20") != std::string::npos);
  CHECK_THROWS_AS(r.at(7.0), ConfigError);
  CHECK(evaluate(inputs).csv() == csv);
}

TEST_CASE("pipeline on synthetic pairs") {
  SUBCASE("identical images give zero disparity") {
    StereoPair p = make_shifted_texture_pair(48, 32, 0, 5);
    p.right = p.left;
    PipelineConfig c;
    c.max_disparity = 8;
    const PipelineResult r = run_pipeline(p, small_net(), c);
    for (int y = 8; y < 24; ++y)
      for (int x = 8; x < 40; ++x) CHECK(r.final.at(x, y) == 0.0f);
    CHECK(r.final.invalid_count() == 0);
  }
  SUBCASE("missing disparity range is a configuration error") {
    const StereoPair p = make_shifted_texture_pair(20, 20, 2, 5);
    CHECK_THROWS_AS(run_pipeline(p, small_net()), ConfigError);
  }
  SUBCASE("intermediates are written") {
    TempDir dir("fcdcnn_dump");
    StereoPair p = make_shifted_texture_pair(40, 24, 3, 6);
    p.max_disparity = 8;
    PipelineConfig c;
    c.keep_volumes = true;
    const PipelineResult r = run_pipeline(p, small_net(), c);
    write_intermediates(r, dir.path, "pair");
    for (const char* f : {"pair_wta.png", "pair_consistent.png", "pair_final.png", "pair_mask.png", "pair_volume.fccv"}) {
      CHECK(fs::exists(dir / f));
    }
  }
  CHECK(default_max_disparity(DatasetStyle::Kitti2012) == 192);
  CHECK(default_max_disparity(DatasetStyle::Kitti2015) == 228);
  CHECK(default_max_disparity(DatasetStyle::Eth3d) == 64);
  CHECK_THROWS_AS(parse_dataset_style("sintel"), ConfigError);
}

TEST_CASE("dataset loading and the cross test") {
  TempDir dir("fcdcnn_ds");
  for (const char* sub : {"left", "right", "gt"}) fs::create_directories(dir / sub);
  for (int i = 0; i < 2; ++i) {
    const StereoPair p = make_shifted_texture_pair(40, 24, 3 + i, 10 + i);
    const std::string name = "p" + std::to_string(i);
    write_png8(p.left, dir.path / "left" / (name + ".png"));
    write_png8(p.right, dir.path / "right" / (name + ".png"));
    write_pfm(*p.gt_left, dir.path / "gt" / (name + ".pfm"));
  }
  {
    std::ofstream cfg(dir / "dataset.cfg");
    cfg << "# synthetic suite\nstyle = synthetic\nmax_disparity = 8\nname = synth\n";
  }
  const Dataset ds = load_dataset(dir.path);
  CHECK(ds.name == "synth");
  CHECK(ds.max_disparity == 8);
  REQUIRE(ds.pairs.size() == 2);
  CHECK(ds.pairs[1].id == "p1");
  CHECK(ds.pairs[0].gt_left->at(10, 3) == 3.0f);

  const NamedWeights weights[] = {{"net", small_net()}};
  const CrossMatrix m = cross_dataset_eval(weights, std::span(&ds, 1));
  REQUIRE(m.two_pe.size() == 1);
  REQUIRE(m.two_pe[0].size() == 1);
  std::vector<DisparityMap> preds;
  std::vector<EvalInput> inputs;
  for (const auto& p : ds.pairs) preds.push_back(run_pipeline(p, weights[0].weights).final);
  for (std::size_t i = 0; i < preds.size(); ++i) inputs.push_back({ds.pairs[i].id, &preds[i], &*ds.pairs[i].gt_left});
  CHECK(m.two_pe[0][0] == evaluate(inputs, {2.0}).n_pe[0]);
  CHECK(m.csv().rfind("dataset,net\nsynth,", 0) == 0);

  fs::remove(dir.path / "right" / "p1.png");
  CHECK_THROWS_AS(load_dataset(dir.path), ConfigError);
  {
    std::ofstream cfg(dir / "dataset.cfg");
    cfg << "colour = yes\n";
  }
  CHECK_THROWS_AS(load_dataset(dir.path), ConfigError);
}

TEST_CASE("single-pair cross test equals the direct metric") {
  StereoPair p = make_shifted_texture_pair(40, 24, 4, 21);
  p.max_disparity = 8;
  Dataset ds{"one", DatasetStyle::Synthetic, 8, {p}};
  const NamedWeights weights[] = {{"w", small_net()}};
  const CrossMatrix m = cross_dataset_eval(weights, std::span(&ds, 1));
  CHECK(m.two_pe[0][0] == n_point_error(run_pipeline(p, weights[0].weights).final, *p.gt_left, 2.0));
}
