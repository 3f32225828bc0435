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
//
// Text-to-image reconstruction backends. Production models run behind a
// process boundary and are reached over HTTP with a JSON request
// {text, sketch_png_b64?, seed, steps, guidance} answered by a PNG.
// The mock backend is a pure function of (text, sketch, seed) so the
// whole pipeline is testable offline.

#ifndef TXSK_BACKEND_H_
#define TXSK_BACKEND_H_

#include <cstdint>
#include <memory>
#include <string>

#include "txsk/types.h"

namespace txsk {

// Sampler settings forwarded to generative backends; the mock backend
// ignores them. Recorded in reports for reproducibility.
struct GenParams {
  int steps = 50;
  double guidance = 9.0;
};

class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string Name() const = 0;
  virtual bool AcceptsSketch() const = 0;
  virtual bool DeterministicGivenSeed() const = 0;
  // Output at the backend's native resolution. `sketch` may be null
  // for text-only generation; passing one to a backend that cannot
  // consume it is a capability error.
  virtual Image Generate(const std::string& text, const SketchMap* sketch,
                         uint64_t seed, const GenParams& params) = 0;
};

// Deterministic offline stand-in: seeded value noise from (text, seed);
// with a sketch, output luminance is 0.7 * upsampled sketch + 0.3 *
// noise rendered as gray, so reconstructions track the sketch's
// spatial structure by construction.
class MockBackend : public Backend {
 public:
  static constexpr int kNativeSize = 256;

  std::string Name() const override { return "mock"; }
  bool AcceptsSketch() const override { return true; }
  bool DeterministicGivenSeed() const override { return true; }
  Image Generate(const std::string& text, const SketchMap* sketch,
                 uint64_t seed, const GenParams& params) override;
};

// HTTP client for an external generation service. Connection failures
// are retried; an exhausted retry budget is a backend error and a
// response timeout is a timeout error.
class RemoteBackend : public Backend {
 public:
  RemoteBackend(std::string endpoint, bool accepts_sketch,
                int connect_retries = 3, int timeout_seconds = 120);

  // Reads TXSK_BACKEND_ENDPOINT; unset or empty is a config error.
  static std::string EndpointFromEnv();

  std::string Name() const override { return "remote:" + endpoint_; }
  bool AcceptsSketch() const override { return accepts_sketch_; }
  bool DeterministicGivenSeed() const override { return false; }
  Image Generate(const std::string& text, const SketchMap* sketch,
                 uint64_t seed, const GenParams& params) override;

 private:
  std::string endpoint_;
  bool accepts_sketch_;
  int connect_retries_;
  int timeout_seconds_;
};

// Prompt-only reconstruction, resized to the requested extent.
Image ReconstructPic(const std::string& text, uint64_t seed, Backend& backend,
                     int width, int height, const GenParams& params = {});

// Prompt-plus-sketch reconstruction; the backend receives the sketch
// at its stored resolution and resizes as needed.
Image ReconstructPics(const std::string& text, const SketchMap& sketch,
                      uint64_t seed, Backend& backend, int width, int height,
                      const GenParams& params = {});

}  // namespace txsk

#endif  // TXSK_BACKEND_H_
