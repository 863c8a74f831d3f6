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


#include "fcdcnn/io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "fcdcnn/errors.hpp"

namespace fcdcnn {

namespace {

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void write_all(const std::filesystem::path& path, const std::string& header,
               const std::vector<unsigned char>& payload) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
  os.write(header.data(), static_cast<std::streamsize>(header.size()));
  os.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (!os) throw ConfigError("failed writing " + path.string());
}

// Whitespace-separated ASCII header tokens for PFM / PNM, with '#' comments.
class HeaderParser {
 public:
  HeaderParser(const std::vector<unsigned char>& bytes, std::string file)
      : bytes_(bytes), file_(std::move(file)) {}

  std::size_t offset() const { return pos_; }

  std::string token() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_])) ++pos_;
    if (start == pos_) fail("unexpected end of header");
    return {bytes_.begin() + start, bytes_.begin() + pos_};
  }

  long integer(const char* what) {
    const std::size_t at = pos_;
    const std::string t = token();
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (*end != '\0' || v <= 0) fail(std::string("bad ") + what + " '" + t + "'", at);
    return v;
  }

  double real(const char* what) {
    const std::size_t at = pos_;
    const std::string t = token();
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (*end != '\0' || v == 0.0 || !std::isfinite(v)) fail(std::string("bad ") + what + " '" + t + "'", at);
    return v;
  }

  // Exactly one whitespace byte separates the header from the payload.
  void end_of_header() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) fail("missing header terminator");
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& what, std::size_t at = std::string::npos) const {
    throw FormatError(file_ + ": " + what + " at byte offset " +
                      std::to_string(at == std::string::npos ? pos_ : at));
  }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
  std::string file_;
  std::size_t pos_ = 0;
};

bool has_extension(const std::filesystem::path& path, const char* ext) {
  std::string e = path.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e == ext;
}

struct RawPng {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  int color_type = 0;
  std::vector<unsigned char> bytes;  // big-endian samples for 16-bit
};

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

RawPng decode_png(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
  if (!file) throw ConfigError("cannot open " + path.string());
  unsigned char signature[8];
  if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    throw FormatError(path.string() + ": not a PNG file (bad signature at byte offset 0)");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("libpng initialisation failed");
  }
  // Every object touched after setjmp is declared before it.
  RawPng raw;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": corrupt or truncated PNG data");
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  raw.bit_depth = png_get_bit_depth(png, info);
  raw.color_type = png_get_color_type(png, info);
  if (raw.color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (raw.color_type == PNG_COLOR_TYPE_GRAY && raw.bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);
  raw.width = static_cast<int>(png_get_image_width(png, info));
  raw.height = static_cast<int>(png_get_image_height(png, info));
  raw.channels = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  raw.bytes.resize(stride * raw.height);
  rows.resize(raw.height);
  for (int y = 0; y < raw.height; ++y) rows[y] = raw.bytes.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return raw;
}

void encode_png(const std::filesystem::path& path, int width, int height, int channels,
                int bit_depth, const std::vector<unsigned char>& bytes) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "wb"));
  if (!file) throw ConfigError("cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error("libpng initialisation failed");
  }
  std::vector<png_bytep> rows(height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw ConfigError("failed writing PNG " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, width, height, bit_depth,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = std::size_t(width) * channels * (bit_depth / 8);
  for (int y = 0; y < height; ++y) rows[y] = const_cast<png_bytep>(bytes.data() + y * stride);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

DisparityMap read_pfm(const std::filesystem::path& path) {
  const auto bytes = read_all(path);
  HeaderParser header(bytes, path.string());
  const std::string magic = header.token();
  if (magic == "PF") header.fail("colour PFM ('PF') is not supported, expected 'Pf'", 0);
  if (magic != "Pf") header.fail("bad PFM magic '" + magic + "'", 0);
  const long width = header.integer("width");
  const long height = header.integer("height");
  const double scale = header.real("scale");
  header.end_of_header();
  const std::size_t offset = header.offset();
  const std::size_t count = std::size_t(width) * height;
  if (bytes.size() - offset < count * 4) {
    throw FormatError(path.string() + ": PFM payload truncated at byte offset " +
                      std::to_string(bytes.size()) + ", expected " + std::to_string(offset + count * 4));
  }
  const bool little = scale < 0.0;
  DisparityMap map(static_cast<int>(width), static_cast<int>(height));
  for (long row = 0; row < height; ++row) {
    const long y = height - 1 - row;
    for (long x = 0; x < width; ++x) {
      const unsigned char* p = bytes.data() + offset + (std::size_t(row) * width + x) * 4;
      std::uint32_t v = little ? (std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
                                  std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24)
                               : (std::uint32_t(p[3]) | std::uint32_t(p[2]) << 8 |
                                  std::uint32_t(p[1]) << 16 | std::uint32_t(p[0]) << 24);
      float f;
      std::memcpy(&f, &v, 4);
      map.at(static_cast<int>(x), static_cast<int>(y)) = std::isinf(f) ? DisparityMap::kInvalid : f;
    }
  }
  return map;
}

void write_pfm(const DisparityMap& map, const std::filesystem::path& path) {
  const std::string header = "Pf\n" + std::to_string(map.width) + " " + std::to_string(map.height) + "\n-1\n";
  std::vector<unsigned char> payload(map.size() * 4);
  std::size_t k = 0;
  for (int y = map.height - 1; y >= 0; --y) {
    for (int x = 0; x < map.width; ++x) {
      const float value = map.at(x, y);
      const float f = DisparityMap::is_valid(value) ? value : std::numeric_limits<float>::infinity();
      std::uint32_t v;
      std::memcpy(&v, &f, 4);
      for (int i = 0; i < 4; ++i) payload[k++] = static_cast<unsigned char>(v >> (8 * i));
    }
  }
  write_all(path, header, payload);
}

DisparityMap read_disparity_png16(const std::filesystem::path& path) {
  const RawPng raw = decode_png(path);
  if (raw.bit_depth != 16 || raw.color_type != PNG_COLOR_TYPE_GRAY) {
    throw FormatError(path.string() + ": disparity PNG must be 16-bit single-channel, got " +
                      std::to_string(raw.bit_depth) + "-bit with " + std::to_string(raw.channels) +
                      " channel(s) (header at byte offset 16)");
  }
  DisparityMap map(raw.width, raw.height);
  for (std::size_t i = 0; i < map.size(); ++i) {
    const unsigned stored = unsigned(raw.bytes[2 * i]) << 8 | raw.bytes[2 * i + 1];
    map.values[i] = stored == 0 ? DisparityMap::kInvalid : static_cast<float>(stored / 256.0);
  }
  return map;
}

void write_disparity_png16(const DisparityMap& map, const std::filesystem::path& path) {
  std::vector<unsigned char> bytes(map.size() * 2);
  for (std::size_t i = 0; i < map.size(); ++i) {
    const float v = map.values[i];
    unsigned stored = 0;
    if (DisparityMap::is_valid(v)) {
      stored = static_cast<unsigned>(std::clamp(std::lround(v * 256.0), 1L, 65535L));
    }
    bytes[2 * i] = static_cast<unsigned char>(stored >> 8);
    bytes[2 * i + 1] = static_cast<unsigned char>(stored & 0xff);
  }
  encode_png(path, map.width, map.height, 1, 16, bytes);
}

DisparityMap read_disparity(const std::filesystem::path& path) {
  if (has_extension(path, ".pfm")) return read_pfm(path);
  if (has_extension(path, ".png")) return read_disparity_png16(path);
  throw FormatError(path.string() + ": unsupported disparity format (expected .pfm or .png)");
}

void write_disparity(const DisparityMap& map, const std::filesystem::path& path) {
  if (has_extension(path, ".pfm")) return write_pfm(map, path);
  if (has_extension(path, ".png")) return write_disparity_png16(map, path);
  throw ConfigError(path.string() + ": unsupported disparity output format (use .pfm or .png)");
}

namespace {

Image read_pnm(const std::filesystem::path& path) {
  const auto bytes = read_all(path);
  HeaderParser header(bytes, path.string());
  const std::string magic = header.token();
  if (magic != "P5" && magic != "P6") header.fail("unsupported PNM magic '" + magic + "'", 0);
  const int channels = magic == "P5" ? 1 : 3;
  const long width = header.integer("width");
  const long height = header.integer("height");
  const long maxval = header.integer("maxval");
  if (maxval > 65535) header.fail("maxval above 65535");
  header.end_of_header();
  const int sample_bytes = maxval < 256 ? 1 : 2;
  const std::size_t offset = header.offset();
  const std::size_t count = std::size_t(width) * height * channels;
  if (bytes.size() - offset < count * sample_bytes) {
    throw FormatError(path.string() + ": PNM payload truncated at byte offset " + std::to_string(bytes.size()));
  }
  Image image(static_cast<int>(width), static_cast<int>(height), channels);
  const double scale = 255.0 / maxval;
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned char* p = bytes.data() + offset + i * sample_bytes;
    const unsigned v = sample_bytes == 1 ? p[0] : (unsigned(p[0]) << 8 | p[1]);
    image.pixels[i] = static_cast<float>(v * scale);
  }
  return image;
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  if (has_extension(path, ".pgm") || has_extension(path, ".ppm") || has_extension(path, ".pnm")) {
    return read_pnm(path);
  }
  const RawPng raw = decode_png(path);
  const bool has_alpha = raw.channels == 2 || raw.channels == 4;
  const int color_channels = raw.channels - (has_alpha ? 1 : 0);
  Image image(raw.width, raw.height, color_channels == 1 ? 1 : 3);
  const double scale = raw.bit_depth == 16 ? 255.0 / 65535.0 : 1.0;
  const int sample_bytes = raw.bit_depth == 16 ? 2 : 1;
  for (std::size_t p = 0; p < image.pixel_count(); ++p) {
    for (int c = 0; c < image.channels; ++c) {
      const unsigned char* s = raw.bytes.data() + (p * raw.channels + c) * sample_bytes;
      const unsigned v = sample_bytes == 1 ? s[0] : (unsigned(s[0]) << 8 | s[1]);
      image.pixels[p * image.channels + c] = static_cast<float>(v * scale);
    }
  }
  return image;
}

namespace {
std::vector<unsigned char> to_bytes(const Image& image) {
  std::vector<unsigned char> bytes(image.pixels.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] = static_cast<unsigned char>(std::clamp(std::lround(image.pixels[i]), 0L, 255L));
  }
  return bytes;
}
}  // namespace

void write_png8(const Image& image, const std::filesystem::path& path) {
  if (image.channels != 1 && image.channels != 3) throw ConfigError("write_png8 supports 1 or 3 channels");
  encode_png(path, image.width, image.height, image.channels, 8, to_bytes(image));
}

void write_pgm8(const Image& image, const std::filesystem::path& path) {
  if (image.channels != 1) throw ConfigError("write_pgm8 expects a single-channel image");
  write_all(path, "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n",
            to_bytes(image));
}

Image validity_image(const DisparityMap& map) {
  Image image(map.width, map.height, 1);
  for (std::size_t i = 0; i < map.size(); ++i) {
    image.pixels[i] = DisparityMap::is_valid(map.values[i]) ? 255.0f : 0.0f;
  }
  return image;
}

Image disparity_image(const DisparityMap& map, int max_disparity) {
  Image image(map.width, map.height, 1);
  const float scale = max_disparity > 1 ? 255.0f / (max_disparity - 1) : 255.0f;
  for (std::size_t i = 0; i < map.size(); ++i) {
    const float v = map.values[i];
    image.pixels[i] = DisparityMap::is_valid(v) ? std::min(255.0f, v * scale) : 0.0f;
  }
  return image;
}

}  // namespace fcdcnn
