// Copyright (c) the TXSK Project Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "txsk/image_io.h"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "txsk/error.h"

namespace txsk {

namespace {

uint8_t ToByte(float v) {
  return static_cast<uint8_t>(
      std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

float FromByte(uint8_t b) { return static_cast<float>(b) / 255.0f; }

struct PngReadState {
  const uint8_t* data;
  size_t size;
  size_t pos;
};

void PngReadFn(png_structp png, png_bytep out, png_size_t count) {
  auto* state = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (state->pos + count > state->size) {
    png_error(png, "read past end of buffer");
  }
  std::memcpy(out, state->data + state->pos, count);
  state->pos += count;
}

void PngWriteFn(png_structp png, png_bytep data, png_size_t count) {
  auto* out = static_cast<std::vector<uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + count);
}

void PngFlushFn(png_structp) {}

// Decodes to 8-bit rows with `channels` components (3 or 1).
std::vector<uint8_t> DecodePngRows(std::span<const uint8_t> bytes, int* width,
                                   int* height, int channels) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorCode::kFormat, "not a PNG stream");
  }
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kIo, "libpng allocation failed");
  }
  std::vector<uint8_t> pixels;
  std::vector<png_bytep> rows;
  PngReadState state{bytes.data(), bytes.size(), 0};
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kFormat, "corrupt PNG stream");
  }
  png_set_read_fn(png, &state, PngReadFn);
  png_read_info(png, info);

  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_packing(png);
  png_set_expand(png);
  if (channels == 3) {
    png_set_gray_to_rgb(png);
  } else {
    const int color = png_get_color_type(png, info);
    if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
        color == PNG_COLOR_TYPE_PALETTE) {
      png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    }
  }
  png_read_update_info(png, info);

  *width = static_cast<int>(png_get_image_width(png, info));
  *height = static_cast<int>(png_get_image_height(png, info));
  const size_t stride = png_get_rowbytes(png, info);
  if (stride != static_cast<size_t>(*width) * channels) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kFormat, "unexpected PNG row layout");
  }
  pixels.resize(stride * *height);
  rows.resize(*height);
  for (int y = 0; y < *height; ++y) rows[y] = pixels.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return pixels;
}

std::vector<uint8_t> EncodePngRows(const uint8_t* pixels, int width, int height,
                                   int channels) {
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIo, "libpng allocation failed");
  }
  std::vector<uint8_t> out;
  std::vector<png_bytep> rows(height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIo, "PNG encode failed");
  }
  png_set_write_fn(png, &out, PngWriteFn, PngFlushFn);
  png_set_IHDR(png, info, width, height, 8,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const size_t stride = static_cast<size_t>(width) * channels;
  for (int y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(pixels + y * stride);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

// Minimal binary PPM/PGM (P6/P5, maxval 255).
void ParsePnmHeader(std::istream& in, int magic_digit, int* width,
                    int* height) {
  auto next_token = [&in]() {
    std::string tok;
    for (;;) {
      int c = in.get();
      if (c == EOF) throw Error(ErrorCode::kFormat, "truncated PNM header");
      if (c == '#') {
        std::string line;
        std::getline(in, line);
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) return tok;
        continue;
      }
      tok.push_back(static_cast<char>(c));
    }
  };
  std::string m = next_token();
  if (m != std::string("P") + static_cast<char>('0' + magic_digit)) {
    throw Error(ErrorCode::kFormat, "unexpected PNM magic " + m);
  }
  *width = std::stoi(next_token());
  *height = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (*width <= 0 || *height <= 0 || maxval != 255) {
    throw Error(ErrorCode::kFormat, "unsupported PNM geometry");
  }
}

bool HasSuffix(const std::string& s, const char* suffix) {
  const size_t n = std::strlen(suffix);
  return s.size() >= n && s.compare(s.size() - n, n, suffix) == 0;
}

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

}  // namespace

std::vector<uint8_t> EncodePng(const Image& image) {
  std::vector<uint8_t> rgb(image.pixel_count() * 3);
  for (size_t i = 0; i < rgb.size(); ++i) rgb[i] = ToByte(image.data[i]);
  return EncodePngRows(rgb.data(), image.width, image.height, 3);
}

Image DecodePng(std::span<const uint8_t> bytes) {
  Image image;
  auto rows = DecodePngRows(bytes, &image.width, &image.height, 3);
  image.data.resize(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) image.data[i] = FromByte(rows[i]);
  return image;
}

std::vector<uint8_t> EncodePngGray(const SketchMap& map) {
  std::vector<uint8_t> gray(map.data.size());
  for (size_t i = 0; i < gray.size(); ++i) gray[i] = ToByte(map.data[i]);
  return EncodePngRows(gray.data(), map.width, map.height, 1);
}

SketchMap DecodePngGray(std::span<const uint8_t> bytes) {
  SketchMap map;
  auto rows = DecodePngRows(bytes, &map.width, &map.height, 1);
  map.data.resize(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) map.data[i] = FromByte(rows[i]);
  return map;
}

std::vector<uint8_t> ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::kIo, "read failed for " + path);
  return bytes;
}

void WriteFileBytes(const std::string& path, std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot create " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

Image ReadImageFile(const std::string& path) {
  const auto bytes = ReadFileBytes(path);
  if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) {
    return DecodePng(bytes);
  }
  std::istringstream in(
      std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') {
    int w = 0, h = 0;
    ParsePnmHeader(in, 5, &w, &h);
    std::vector<char> gray(static_cast<size_t>(w) * h);
    in.read(gray.data(), static_cast<std::streamsize>(gray.size()));
    if (!in) throw Error(ErrorCode::kTruncation, "PGM pixel data truncated");
    Image image(w, h);
    for (size_t i = 0; i < gray.size(); ++i) {
      const float v = FromByte(static_cast<uint8_t>(gray[i]));
      image.data[3 * i] = image.data[3 * i + 1] = image.data[3 * i + 2] = v;
    }
    return image;
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') {
    int w = 0, h = 0;
    ParsePnmHeader(in, 6, &w, &h);
    std::vector<char> rgb(static_cast<size_t>(w) * h * 3);
    in.read(rgb.data(), static_cast<std::streamsize>(rgb.size()));
    if (!in) throw Error(ErrorCode::kTruncation, "PPM pixel data truncated");
    Image image(w, h);
    for (size_t i = 0; i < rgb.size(); ++i) {
      image.data[i] = FromByte(static_cast<uint8_t>(rgb[i]));
    }
    return image;
  }
  throw Error(ErrorCode::kFormat, "unrecognized image format: " + path);
}

void WriteImageFile(const std::string& path, const Image& image) {
  if (HasSuffix(path, ".png")) {
    WriteFileBytes(path, EncodePng(image));
    return;
  }
  if (HasSuffix(path, ".pgm")) {
    WriteSketchFile(path, Luminance(image));
    return;
  }
  if (HasSuffix(path, ".ppm")) {
    std::ostringstream header;
    header << "P6\n" << image.width << " " << image.height << "\n255\n";
    std::vector<uint8_t> out(header.str().begin(), header.str().end());
    for (float v : image.data) out.push_back(ToByte(v));
    WriteFileBytes(path, out);
    return;
  }
  throw Error(ErrorCode::kIo, "unsupported image extension: " + path);
}

void WriteSketchFile(const std::string& path, const SketchMap& map) {
  if (HasSuffix(path, ".png")) {
    WriteFileBytes(path, EncodePngGray(map));
    return;
  }
  if (HasSuffix(path, ".pgm")) {
    std::ostringstream header;
    header << "P5\n" << map.width << " " << map.height << "\n255\n";
    std::vector<uint8_t> out(header.str().begin(), header.str().end());
    for (float v : map.data) out.push_back(ToByte(v));
    WriteFileBytes(path, out);
    return;
  }
  throw Error(ErrorCode::kIo, "unsupported sketch extension: " + path);
}

SketchMap ReadSketchFile(const std::string& path) {
  const auto bytes = ReadFileBytes(path);
  if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) {
    return DecodePngGray(bytes);
  }
  const Image image = ReadImageFile(path);
  return Luminance(image);
}

std::string Base64Encode(std::span<const uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(kB64Alphabet[(v >> 6) & 63]);
    out.push_back(kB64Alphabet[v & 63]);
  }
  const size_t rem = bytes.size() - i;
  if (rem == 1) {
    const uint32_t v = bytes[i] << 16;
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.append("==");
  } else if (rem == 2) {
    const uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(kB64Alphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

std::vector<uint8_t> Base64Decode(const std::string& text) {
  static const auto value_of = [] {
    std::array<int8_t, 256> table;
    table.fill(-1);
    for (int i = 0; i < 64; ++i) {
      table[static_cast<uint8_t>(kB64Alphabet[i])] = static_cast<int8_t>(i);
    }
    return table;
  }();
  std::vector<uint8_t> out;
  uint32_t acc = 0;
  int bits = 0;
  for (char ch : text) {
    if (ch == '=' || ch == '\n' || ch == '\r') continue;
    const int8_t v = value_of[static_cast<uint8_t>(ch)];
    if (v < 0) throw Error(ErrorCode::kFormat, "invalid base64 character");
    acc = (acc << 6) | static_cast<uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<uint8_t>(acc >> bits));
    }
  }
  // A lone trailing symbol carries fewer than 8 bits and cannot encode a
  // byte; such input is malformed rather than merely unpadded.
  if (bits >= 6) throw Error(ErrorCode::kFormat, "truncated base64 input");
  return out;
}

}  // namespace txsk
