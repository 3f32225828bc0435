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

#ifndef TXSK_TOKEN_CODEC_H_
#define TXSK_TOKEN_CODEC_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "txsk/container.h"
#include "txsk/types.h"

namespace txsk {

// Renders token ids to text and back. Rendering must be deterministic;
// Tokenize(Render(ids)) is verified at encode time rather than assumed.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::string Render(const TokenSequence& tokens) const = 0;
  virtual TokenSequence Tokenize(const std::string& text) const = 0;
};

struct TokenPayload {
  TokenCoding coding = TokenCoding::kFixedWidth;
  std::vector<uint8_t> bytes;
  uint64_t bit_count = 0;
  // Set when the text route was requested but fixed-width was emitted
  // (re-tokenization mismatch or bounded-regret size rule).
  bool fell_back = false;
  // Size the text route would have used, for rate diagnostics.
  uint64_t text_bits_attempted = 0;
};

// Bits per id under fixed-width coding: ceil(log2(vocab_size)), min 1.
int FixedTokenWidth(uint32_t vocab_size);

// Each id packed MSB-first with FixedTokenWidth bits, zero-padded to a
// byte boundary. bit_count excludes the padding.
TokenPayload EncodeTokensFixed(const TokenSequence& tokens);

// Exact inverse. Pad bits must be zero (canonical form); kFormat otherwise.
// kTruncation if the payload cannot hold length*width bits.
TokenSequence DecodeTokensFixed(std::span<const uint8_t> payload,
                                size_t length, uint32_t vocab_size);

// Renders to text, verifies re-tokenization, deflate-compresses the text.
// Falls back to fixed-width when verification fails or when the text route
// exceeds the fixed-width size by more than kTextRegretBytes.
TokenPayload EncodeTextLossless(const TokenSequence& tokens,
                                const Tokenizer& tokenizer);

inline constexpr size_t kTextRegretBytes = 16;

// Decodes either coding mode, dispatching on `coding`.
TokenSequence DecodeTokens(std::span<const uint8_t> payload, TokenCoding coding,
                           size_t length, uint32_t vocab_size,
                           const Tokenizer& tokenizer);

}  // namespace txsk

#endif  // TXSK_TOKEN_CODEC_H_
