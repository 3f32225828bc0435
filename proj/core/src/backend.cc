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

#include "txsk/backend.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "txsk/error.h"
#include "txsk/image_io.h"
#include "txsk/rng.h"

namespace txsk {

namespace {

// Two-octave value noise on a hashed lattice; smoothstep-interpolated,
// bitwise deterministic for a given base key.
double LatticeValue(uint64_t base, int octave, int ix, int iy) {
  const uint64_t h = HashCombine(
      HashCombine(HashCombine(base, static_cast<uint64_t>(octave)),
                  static_cast<uint64_t>(static_cast<uint32_t>(ix))),
      static_cast<uint64_t>(static_cast<uint32_t>(iy)));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double SmoothStep(double t) { return t * t * (3.0 - 2.0 * t); }

double ValueNoise(uint64_t base, int px, int py) {
  static constexpr int kCell[2] = {32, 8};
  static constexpr double kAmp[2] = {0.65, 0.35};
  double value = 0.0;
  for (int o = 0; o < 2; ++o) {
    const int cell = kCell[o];
    const int cx = px / cell;
    const int cy = py / cell;
    const double fx = SmoothStep(static_cast<double>(px % cell) / cell);
    const double fy = SmoothStep(static_cast<double>(py % cell) / cell);
    const double v00 = LatticeValue(base, o, cx, cy);
    const double v10 = LatticeValue(base, o, cx + 1, cy);
    const double v01 = LatticeValue(base, o, cx, cy + 1);
    const double v11 = LatticeValue(base, o, cx + 1, cy + 1);
    const double top = v00 + (v10 - v00) * fx;
    const double bot = v01 + (v11 - v01) * fx;
    value += kAmp[o] * (top + (bot - top) * fy);
  }
  return value;
}

}  // namespace

Image MockBackend::Generate(const std::string& text, const SketchMap* sketch,
                            uint64_t seed, const GenParams& params) {
  (void)params;
  const uint64_t base = HashCombine(HashString(text), seed);
  Image image(kNativeSize, kNativeSize);

  if (sketch == nullptr) {
    for (int c = 0; c < 3; ++c) {
      const uint64_t channel_base = HashCombine(base, 100 + c);
      for (int y = 0; y < kNativeSize; ++y) {
        for (int x = 0; x < kNativeSize; ++x) {
          image.at(y, x, c) =
              static_cast<float>(std::clamp(ValueNoise(channel_base, x, y),
                                            0.0, 1.0));
        }
      }
    }
    return image;
  }

  ValidateSketch(*sketch);
  const SketchMap up = Resize(*sketch, kNativeSize, kNativeSize,
                              Interp::kBicubic);
  const uint64_t noise_base = HashCombine(base, 7);
  for (int y = 0; y < kNativeSize; ++y) {
    for (int x = 0; x < kNativeSize; ++x) {
      const double lum = 0.7 * up.at(y, x) + 0.3 * ValueNoise(noise_base, x, y);
      const float v = static_cast<float>(std::clamp(lum, 0.0, 1.0));
      image.at(y, x, 0) = v;
      image.at(y, x, 1) = v;
      image.at(y, x, 2) = v;
    }
  }
  return image;
}

RemoteBackend::RemoteBackend(std::string endpoint, bool accepts_sketch,
                             int connect_retries, int timeout_seconds)
    : endpoint_(std::move(endpoint)),
      accepts_sketch_(accepts_sketch),
      connect_retries_(connect_retries),
      timeout_seconds_(timeout_seconds) {
  if (endpoint_.empty()) {
    throw Error(ErrorCode::kConfig, "backend endpoint is empty");
  }
}

std::string RemoteBackend::EndpointFromEnv() {
  const char* value = std::getenv("TXSK_BACKEND_ENDPOINT");
  if (value == nullptr || value[0] == '\0') {
    throw Error(ErrorCode::kConfig,
                "TXSK_BACKEND_ENDPOINT is not set; pass --endpoint or export "
                "the variable");
  }
  return value;
}

Image RemoteBackend::Generate(const std::string& text, const SketchMap* sketch,
                              uint64_t seed, const GenParams& params) {
  if (sketch != nullptr && !accepts_sketch_) {
    throw Error(ErrorCode::kCapability,
                "backend does not accept sketch conditioning");
  }

  nlohmann::json request{{"text", text},
                         {"seed", seed},
                         {"steps", params.steps},
                         {"guidance", params.guidance}};
  if (sketch != nullptr) {
    request["sketch_png_b64"] = Base64Encode(EncodePngGray(*sketch));
  }
  const std::string body = request.dump();

  httplib::Client client(endpoint_);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(timeout_seconds_, 0);
  client.set_write_timeout(timeout_seconds_, 0);

  httplib::Result result{nullptr, httplib::Error::Unknown};
  for (int attempt = 0; attempt <= connect_retries_; ++attempt) {
    result = client.Post("/generate", body, "application/json");
    if (result) break;
    if (result.error() == httplib::Error::Read ||
        result.error() == httplib::Error::Write) {
      throw Error(ErrorCode::kTimeout, "backend response timed out");
    }
    if (attempt < connect_retries_) {
      std::this_thread::sleep_for(std::chrono::milliseconds(200 * (attempt + 1)));
    }
  }
  if (!result) {
    throw Error(ErrorCode::kBackend,
                "backend unreachable: " + httplib::to_string(result.error()));
  }
  if (result->status != 200) {
    throw Error(ErrorCode::kBackend,
                "backend returned status " + std::to_string(result->status));
  }

  const std::vector<uint8_t> png(result->body.begin(), result->body.end());
  return DecodePng(png);
}

Image ReconstructPic(const std::string& text, uint64_t seed, Backend& backend,
                     int width, int height, const GenParams& params) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kArgument, "output extent must be positive");
  }
  const Image native = backend.Generate(text, nullptr, seed, params);
  return Resize(native, width, height, Interp::kBicubic);
}

Image ReconstructPics(const std::string& text, const SketchMap& sketch,
                      uint64_t seed, Backend& backend, int width, int height,
                      const GenParams& params) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kArgument, "output extent must be positive");
  }
  if (!backend.AcceptsSketch()) {
    throw Error(ErrorCode::kCapability,
                "backend does not accept sketch conditioning");
  }
  ValidateSketch(sketch);
  const Image native = backend.Generate(text, &sketch, seed, params);
  return Resize(native, width, height, Interp::kBicubic);
}

}  // namespace txsk
