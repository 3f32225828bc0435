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

#include "txsk/types.h"

#include <algorithm>
#include <cmath>

#include "txsk/error.h"

namespace txsk {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDomain:
      return "domain error";
    case ErrorCode::kShape:
      return "shape error";
    case ErrorCode::kRange:
      return "range error";
    case ErrorCode::kArgument:
      return "argument error";
    case ErrorCode::kFormat:
      return "format error";
    case ErrorCode::kCorruption:
      return "corruption error";
    case ErrorCode::kTruncation:
      return "truncation error";
    case ErrorCode::kVersion:
      return "version error";
    case ErrorCode::kDecode:
      return "decode error";
    case ErrorCode::kConfig:
      return "config error";
    case ErrorCode::kIo:
      return "io error";
    case ErrorCode::kData:
      return "data error";
    case ErrorCode::kBackend:
      return "backend error";
    case ErrorCode::kTimeout:
      return "timeout error";
    case ErrorCode::kCapability:
      return "capability error";
    case ErrorCode::kNumerical:
      return "numerical error";
  }
  return "error";
}

const char* ModeName(Mode mode) { return mode == Mode::kPic ? "pic" : "pics"; }

void ValidateImage(const Image& image) {
  if (image.width < 8 || image.height < 8) {
    throw Error(ErrorCode::kDomain, "image dimensions below 8x8");
  }
  if (image.data.size() != image.pixel_count() * 3) {
    throw Error(ErrorCode::kShape, "image buffer size mismatch");
  }
  for (float v : image.data) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw Error(ErrorCode::kDomain, "image value outside [0,1]");
    }
  }
}

void ValidateSketch(const SketchMap& sketch) {
  if (sketch.width < 1 || sketch.height < 1) {
    throw Error(ErrorCode::kDomain, "empty sketch");
  }
  if (sketch.data.size() != static_cast<size_t>(sketch.width) * sketch.height) {
    throw Error(ErrorCode::kShape, "sketch buffer size mismatch");
  }
  for (float v : sketch.data) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw Error(ErrorCode::kDomain, "sketch value outside [0,1]");
    }
  }
}

void ValidateTokens(const TokenSequence& tokens, size_t expected_length) {
  if (tokens.vocab_size == 0) {
    throw Error(ErrorCode::kDomain, "vocabulary size must be positive");
  }
  if (tokens.ids.size() != expected_length) {
    throw Error(ErrorCode::kShape, "token sequence length mismatch");
  }
  for (uint32_t id : tokens.ids) {
    if (id >= tokens.vocab_size) {
      throw Error(ErrorCode::kRange, "token id outside vocabulary");
    }
  }
}

SketchMap Luminance(const Image& image) {
  SketchMap out(image.width, image.height);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      out.at(y, x) = 0.299f * image.at(y, x, 0) + 0.587f * image.at(y, x, 1) +
                     0.114f * image.at(y, x, 2);
    }
  }
  return out;
}

namespace {

float CatmullRom(float p0, float p1, float p2, float p3, float t) {
  const float a = 0.5f * (-p0 + 3.0f * p1 - 3.0f * p2 + p3);
  const float b = 0.5f * (2.0f * p0 - 5.0f * p1 + 4.0f * p2 - p3);
  const float c = 0.5f * (-p0 + p2);
  return ((a * t + b) * t + c) * t + p1;
}

// Samples one channel plane with clamp-to-edge addressing.
template <typename GetT>
float SampleLine(const GetT& get, int n, float pos, Interp interp) {
  if (interp == Interp::kBilinear) {
    const int i0 = static_cast<int>(std::floor(pos));
    const float t = pos - static_cast<float>(i0);
    const int a = std::clamp(i0, 0, n - 1);
    const int b = std::clamp(i0 + 1, 0, n - 1);
    return (1.0f - t) * get(a) + t * get(b);
  }
  const int i1 = static_cast<int>(std::floor(pos));
  const float t = pos - static_cast<float>(i1);
  const float p0 = get(std::clamp(i1 - 1, 0, n - 1));
  const float p1 = get(std::clamp(i1, 0, n - 1));
  const float p2 = get(std::clamp(i1 + 1, 0, n - 1));
  const float p3 = get(std::clamp(i1 + 2, 0, n - 1));
  return CatmullRom(p0, p1, p2, p3, t);
}

// Generic two-pass resize over `channels` interleaved planes.
std::vector<float> ResizePlanes(const std::vector<float>& src, int sw, int sh,
                                int dw, int dh, int channels, Interp interp) {
  if (dw < 1 || dh < 1) {
    throw Error(ErrorCode::kDomain, "resize target must be positive");
  }
  const float sx = static_cast<float>(sw) / static_cast<float>(dw);
  const float sy = static_cast<float>(sh) / static_cast<float>(dh);

  // Horizontal pass.
  std::vector<float> tmp(static_cast<size_t>(sh) * dw * channels);
  for (int y = 0; y < sh; ++y) {
    for (int x = 0; x < dw; ++x) {
      const float pos = (static_cast<float>(x) + 0.5f) * sx - 0.5f;
      for (int c = 0; c < channels; ++c) {
        auto get = [&](int i) {
          return src[(static_cast<size_t>(y) * sw + i) * channels + c];
        };
        tmp[(static_cast<size_t>(y) * dw + x) * channels + c] =
            SampleLine(get, sw, pos, interp);
      }
    }
  }

  // Vertical pass.
  std::vector<float> out(static_cast<size_t>(dh) * dw * channels);
  for (int y = 0; y < dh; ++y) {
    const float pos = (static_cast<float>(y) + 0.5f) * sy - 0.5f;
    for (int x = 0; x < dw; ++x) {
      for (int c = 0; c < channels; ++c) {
        auto get = [&](int i) {
          return tmp[(static_cast<size_t>(i) * dw + x) * channels + c];
        };
        out[(static_cast<size_t>(y) * dw + x) * channels + c] =
            std::clamp(SampleLine(get, sh, pos, interp), 0.0f, 1.0f);
      }
    }
  }
  return out;
}

}  // namespace

SketchMap Resize(const SketchMap& map, int width, int height, Interp interp) {
  if (map.width == width && map.height == height) return map;
  SketchMap out(width, height);
  out.data = ResizePlanes(map.data, map.width, map.height, width, height,
                          /*channels=*/1, interp);
  return out;
}

Image Resize(const Image& image, int width, int height, Interp interp) {
  if (image.width == width && image.height == height) return image;
  Image out(width, height);
  out.data = ResizePlanes(image.data, image.width, image.height, width, height,
                          /*channels=*/3, interp);
  return out;
}

}  // namespace txsk
