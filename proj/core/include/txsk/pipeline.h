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
// End-to-end single-image paths: image -> .tsk container bytes and
// container -> reconstruction. The CLI and the benchmark harness both
// sit on top of these.

#ifndef TXSK_PIPELINE_H_
#define TXSK_PIPELINE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "txsk/backend.h"
#include "txsk/container.h"
#include "txsk/embedder.h"
#include "txsk/ntc.h"
#include "txsk/prompt_inversion.h"
#include "txsk/sketch.h"
#include "txsk/token_codec.h"
#include "txsk/types.h"

namespace txsk {

struct CompressOptions {
  Mode mode = Mode::kPic;
  TokenCoding token_coding = TokenCoding::kFixedWidth;
  PiConfig inversion;
};

struct CompressResult {
  Container container;
  std::vector<uint8_t> bytes;  // serialized container, checksum included
  std::string prompt_text;
  PiResult inversion;
  bool token_fell_back = false;

  // Bit accounting; header covers everything outside the two payloads.
  uint64_t total_bits = 0;
  uint64_t token_bits = 0;
  uint64_t sketch_bits = 0;
  uint64_t header_bits = 0;
  double bpp = 0.0;
};

// Packs an already-inverted token sequence. `sketch_model` and
// `detector` are consulted only in sketch mode; a null detector means
// the built-in gradient detector. Throws kConfig when sketch mode lacks
// a model.
CompressResult CompressWithTokens(const Image& image,
                                  const TokenSequence& tokens,
                                  const Tokenizer& tokenizer,
                                  const CompressOptions& options,
                                  const NtcModel* sketch_model,
                                  const EdgeDetector* detector);

// Full encoder: prompt inversion against `embedder`, then packing.
CompressResult CompressImage(const Image& image, const Embedder& embedder,
                             const Tokenizer& tokenizer,
                             const CompressOptions& options,
                             const NtcModel* sketch_model = nullptr,
                             const EdgeDetector* detector = nullptr);

struct DecompressOptions {
  uint64_t seed = 0;
  // Token count recorded nowhere in the container; the scheme fixes it.
  int prompt_length = 16;
  GenParams generation;
};

struct DecompressResult {
  Image image;
  std::string prompt_text;
  Mode mode = Mode::kPic;
  SketchMap sketch;  // decoded side information, empty in prompt-only mode
  uint64_t token_bits = 0;
  uint64_t sketch_bits = 0;
};

// Full decoder for a parsed container. Throws kConfig when a sketch
// payload is present but no model was supplied, and propagates backend
// and capability errors.
DecompressResult DecompressContainer(const Container& container,
                                     const Tokenizer& tokenizer,
                                     Backend& backend,
                                     const NtcModel* sketch_model,
                                     uint32_t vocab_size,
                                     const DecompressOptions& options = {});

}  // namespace txsk

#endif  // TXSK_PIPELINE_H_
