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

#include <filesystem>

#include "fcdcnn/disparity.hpp"
#include "fcdcnn/image.hpp"

namespace fcdcnn {

/// Single-channel PFM ("Pf"). Rows are stored bottom-up; a negative scale
/// means little-endian payload. Infinite values map to the invalid sentinel.
DisparityMap read_pfm(const std::filesystem::path& path);
/// Writes little-endian (scale -1); invalid pixels are written as +inf.
void write_pfm(const DisparityMap& map, const std::filesystem::path& path);

/// 16-bit single-channel PNG disparity encoding: value = stored / 256,
/// stored 0 = invalid.
DisparityMap read_disparity_png16(const std::filesystem::path& path);
void write_disparity_png16(const DisparityMap& map, const std::filesystem::path& path);

/// Dispatches on extension: .pfm or .png.
DisparityMap read_disparity(const std::filesystem::path& path);
void write_disparity(const DisparityMap& map, const std::filesystem::path& path);

/// Reads 8/16-bit PNG (gray, gray+alpha, RGB, RGBA) or binary PGM/PPM
/// (P5/P6, 8 or 16 bit). Values are scaled to 0..255; alpha is dropped.
Image read_image(const std::filesystem::path& path);

/// 8-bit PNG (1 or 3 channels); values are rounded and clamped to 0..255.
void write_png8(const Image& image, const std::filesystem::path& path);
/// Binary PGM (P5), 8 bit.
void write_pgm8(const Image& image, const std::filesystem::path& path);

/// 0 for invalid pixels, 255 for valid ones.
Image validity_image(const DisparityMap& map);
/// Linear 0..255 rendering of valid disparities over [0, max_disparity).
Image disparity_image(const DisparityMap& map, int max_disparity);

}  // namespace fcdcnn
