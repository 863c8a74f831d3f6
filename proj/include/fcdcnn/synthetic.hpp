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

#include "fcdcnn/pipeline.hpp"

namespace fcdcnn {

/// Random-texture pair with a constant integer disparity: right(x) equals
/// left(x + d), and columns of the left image with x < d are marked invalid in
/// the ground truth. Pixel values lie in [0, 255]; `smoothing` applies a box
/// blur of that radius to the shared texture.
StereoPair make_shifted_texture_pair(int width, int height, int disparity, std::uint64_t seed,
                                     int smoothing = 0);

}  // namespace fcdcnn
