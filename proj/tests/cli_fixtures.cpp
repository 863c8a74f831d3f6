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


// Writes the small disparity maps used by the command-line exit-code test.

#include <filesystem>
#include <fstream>

#include "fcdcnn/io.hpp"
#include "fcdcnn/synthetic.hpp"

using namespace fcdcnn;

int main(int argc, char** argv) {
  if (argc != 2) return 1;
  const std::filesystem::path root = argv[1];
  for (const char* d : {"pred", "gt", "empty_gt", "bad_gt"}) std::filesystem::create_directories(root / d);
  DisparityMap map(2, 1);
  map.values = {1.0f, 2.0f};
  write_pfm(map, root / "pred" / "a.pfm");
  write_pfm(map, root / "gt" / "a.pfm");
  write_pfm(DisparityMap(2, 1), root / "empty_gt" / "a.pfm");
  std::ofstream(root / "bad_gt" / "a.pfm") << "PF\n2 1\n-1\n";

  const std::filesystem::path synth = root / "synth";
  for (const char* d : {"left", "right", "gt"}) std::filesystem::create_directories(synth / d);
  for (int i = 0; i < 2; ++i) {
    const StereoPair p = make_shifted_texture_pair(48, 32, 3 + 2 * i, 40 + i);
    const std::string name = "p" + std::to_string(i);
    write_png8(p.left, synth / "left" / (name + ".png"));
    write_png8(p.right, synth / "right" / (name + ".png"));
    write_disparity_png16(*p.gt_left, synth / "gt" / (name + ".png"));
  }
  std::ofstream(synth / "dataset.cfg") << "style=synthetic\nmax_disparity=8\n";
  std::ofstream(root / "train.cfg") << "# flags for the train subcommand\niters=3\nbatch=8\nlr=1e-3\nlayers=2\n";
  return 0;
}
