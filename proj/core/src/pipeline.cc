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

#include "txsk/pipeline.h"

#include <utility>

#include "txsk/error.h"
#include "txsk/numeric.h"

namespace txsk {

CompressResult CompressWithTokens(const Image& image,
                                  const TokenSequence& tokens,
                                  const Tokenizer& tokenizer,
                                  const CompressOptions& options,
                                  const NtcModel* sketch_model,
                                  const EdgeDetector* detector) {
  ValidateImage(image);
  ValidateTokens(tokens, tokens.ids.size());

  CompressResult result;
  result.container.mode = options.mode;
  result.container.width = static_cast<uint16_t>(image.width);
  result.container.height = static_cast<uint16_t>(image.height);

  TokenPayload payload = options.token_coding == TokenCoding::kTextLossless
                             ? EncodeTextLossless(tokens, tokenizer)
                             : EncodeTokensFixed(tokens);
  result.token_fell_back = payload.fell_back;
  result.container.token_coding = payload.coding;
  result.container.token_payload = std::move(payload.bytes);

  if (options.mode == Mode::kPics) {
    if (sketch_model == nullptr) {
      throw Error(ErrorCode::kConfig,
                  "sketch mode needs a trained sketch codec model");
    }
    const EdgeDetector fallback = EdgeDetector::FallbackGradient();
    const EdgeDetector& active = detector ? *detector : fallback;
    SketchMap sketch = ExtractSketch(image, active);
    result.container.sketch_payload = EncodeSketch(sketch, *sketch_model);
  }

  result.bytes = WriteContainer(result.container);
  result.prompt_text = tokenizer.Render(tokens);
  result.total_bits = static_cast<uint64_t>(result.bytes.size()) * 8;
  result.token_bits =
      static_cast<uint64_t>(result.container.token_payload.size()) * 8;
  if (result.container.sketch_payload) {
    result.sketch_bits =
        static_cast<uint64_t>(result.container.sketch_payload->size()) * 8;
  }
  result.header_bits =
      result.total_bits - result.token_bits - result.sketch_bits;
  result.bpp = ComputeBpp(result.total_bits, image.width, image.height);
  return result;
}

CompressResult CompressImage(const Image& image, const Embedder& embedder,
                             const Tokenizer& tokenizer,
                             const CompressOptions& options,
                             const NtcModel* sketch_model,
                             const EdgeDetector* detector) {
  PiResult inversion =
      InvertPromptForImage(embedder, image, options.inversion);
  CompressResult result = CompressWithTokens(
      image, inversion.tokens, tokenizer, options, sketch_model, detector);
  result.inversion = std::move(inversion);
  return result;
}

DecompressResult DecompressContainer(const Container& container,
                                     const Tokenizer& tokenizer,
                                     Backend& backend,
                                     const NtcModel* sketch_model,
                                     uint32_t vocab_size,
                                     const DecompressOptions& options) {
  if (options.prompt_length < 1) {
    throw Error(ErrorCode::kConfig, "prompt length must be positive");
  }
  DecompressResult result;
  result.mode = container.mode;
  TokenSequence tokens = DecodeTokens(
      container.token_payload, container.token_coding,
      static_cast<size_t>(options.prompt_length), vocab_size, tokenizer);
  result.prompt_text = tokenizer.Render(tokens);
  result.token_bits =
      static_cast<uint64_t>(container.token_payload.size()) * 8;

  if (container.mode == Mode::kPics) {
    if (sketch_model == nullptr) {
      throw Error(ErrorCode::kConfig,
                  "container carries a sketch but no codec model was loaded");
    }
    result.sketch = DecodeSketch(*container.sketch_payload, *sketch_model,
                                 container.width, container.height);
    result.sketch_bits =
        static_cast<uint64_t>(container.sketch_payload->size()) * 8;
    result.image =
        ReconstructPics(result.prompt_text, result.sketch, options.seed,
                        backend, container.width, container.height,
                        options.generation);
  } else {
    result.image =
        ReconstructPic(result.prompt_text, options.seed, backend,
                       container.width, container.height, options.generation);
  }
  return result;
}

}  // namespace txsk
