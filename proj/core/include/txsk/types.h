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

#ifndef TXSK_TYPES_H_
#define TXSK_TYPES_H_

#include <cstdint>
#include <string>
#include <vector>

namespace txsk {

// RGB image, row-major, values in [0,1].
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> data;  // height*width*3, interleaved RGB

  Image() = default;
  Image(int w, int h, float fill = 0.0f)
      : width(w), height(h), data(static_cast<size_t>(w) * h * 3, fill) {}

  float& at(int y, int x, int c) {
    return data[(static_cast<size_t>(y) * width + x) * 3 + c];
  }
  float at(int y, int x, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * 3 + c];
  }
  size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

// Single-channel map in [0,1]; same grid as the image it was extracted from.
struct SketchMap {
  int width = 0;
  int height = 0;
  std::vector<float> data;  // height*width

  SketchMap() = default;
  SketchMap(int w, int h, float fill = 0.0f)
      : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

  float& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
  float at(int y, int x) const {
    return data[static_cast<size_t>(y) * width + x];
  }
};

// Hard prompt: codebook indices, all < vocab_size.
struct TokenSequence {
  std::vector<uint32_t> ids;
  uint32_t vocab_size = 0;
};

enum class Mode : uint8_t { kPic = 0, kPics = 1 };

const char* ModeName(Mode mode);

// Per-image record emitted by the evaluation harness. `mode` is the
// CSV value: "pic", "pics", or "pairs" for direct set comparison.
struct RateReport {
  std::string image_id;
  std::string mode = "pic";
  uint64_t total_bits = 0;
  double bpp = 0.0;
  double d_clip = 0.0;
  double ms_ssim = 0.0;
  double psnr = 0.0;
  // Per-stream breakdown, diagnostics only (not part of the CSV schema).
  uint64_t token_bits = 0;
  uint64_t sketch_bits = 0;
  uint64_t header_bits = 0;
};

// Throws kDomain on out-of-range values or dimensions below 8x8,
// kShape if the buffer size disagrees with width*height*3.
void ValidateImage(const Image& image);

// Throws kDomain/kShape for the single-channel analogue.
void ValidateSketch(const SketchMap& sketch);

// Throws kRange if some id >= vocab_size, kShape on length mismatch.
void ValidateTokens(const TokenSequence& tokens, size_t expected_length);

// Rec.601 luma of an RGB image.
SketchMap Luminance(const Image& image);

enum class Interp { kBilinear, kBicubic };

// Separable resize; kBicubic is Catmull-Rom. Output values are clamped
// to [0,1] (bicubic overshoots).
SketchMap Resize(const SketchMap& map, int width, int height,
                 Interp interp = Interp::kBicubic);
Image Resize(const Image& image, int width, int height,
             Interp interp = Interp::kBicubic);

}  // namespace txsk

#endif  // TXSK_TYPES_H_
