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

#include "txsk/token_codec.h"

#include <zlib.h>

#include "txsk/error.h"

namespace txsk {

namespace {

std::vector<uint8_t> Deflate(const std::string& text) {
  uLongf bound = compressBound(static_cast<uLong>(text.size()));
  std::vector<uint8_t> out(bound);
  const int rc = compress2(out.data(), &bound,
                           reinterpret_cast<const Bytef*>(text.data()),
                           static_cast<uLong>(text.size()), Z_BEST_COMPRESSION);
  if (rc != Z_OK) {
    throw Error(ErrorCode::kIo, "deflate failed");
  }
  out.resize(bound);
  return out;
}

std::string Inflate(std::span<const uint8_t> bytes) {
  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) {
    throw Error(ErrorCode::kIo, "inflate init failed");
  }
  zs.next_in = const_cast<Bytef*>(bytes.data());
  zs.avail_in = static_cast<uInt>(bytes.size());
  std::string out;
  char buf[4096];
  int rc = Z_OK;
  do {
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof(buf);
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw Error(ErrorCode::kFormat, "corrupt text payload");
    }
    out.append(buf, sizeof(buf) - zs.avail_out);
  } while (rc != Z_STREAM_END);
  inflateEnd(&zs);
  return out;
}

}  // namespace

int FixedTokenWidth(uint32_t vocab_size) {
  if (vocab_size == 0) {
    throw Error(ErrorCode::kDomain, "empty vocabulary");
  }
  int bits = 0;
  while ((1ull << bits) < vocab_size) ++bits;
  return bits > 0 ? bits : 1;
}

TokenPayload EncodeTokensFixed(const TokenSequence& tokens) {
  const int width = FixedTokenWidth(tokens.vocab_size);
  TokenPayload payload;
  payload.coding = TokenCoding::kFixedWidth;
  payload.bit_count = static_cast<uint64_t>(tokens.ids.size()) * width;
  payload.bytes.assign((payload.bit_count + 7) / 8, 0);
  uint64_t bit = 0;
  for (uint32_t id : tokens.ids) {
    if (id >= tokens.vocab_size) {
      throw Error(ErrorCode::kRange, "token id outside vocabulary");
    }
    for (int b = width - 1; b >= 0; --b, ++bit) {
      if ((id >> b) & 1u) {
        payload.bytes[bit / 8] |= static_cast<uint8_t>(0x80u >> (bit % 8));
      }
    }
  }
  return payload;
}

TokenSequence DecodeTokensFixed(std::span<const uint8_t> payload,
                                size_t length, uint32_t vocab_size) {
  const int width = FixedTokenWidth(vocab_size);
  const uint64_t bit_count = static_cast<uint64_t>(length) * width;
  if (payload.size() != (bit_count + 7) / 8) {
    throw Error(ErrorCode::kTruncation, "fixed-width payload size mismatch");
  }
  TokenSequence tokens;
  tokens.vocab_size = vocab_size;
  tokens.ids.reserve(length);
  uint64_t bit = 0;
  for (size_t i = 0; i < length; ++i) {
    uint32_t id = 0;
    for (int b = 0; b < width; ++b, ++bit) {
      id = (id << 1) |
           ((payload[bit / 8] >> (7 - bit % 8)) & 1u);
    }
    if (id >= vocab_size) {
      throw Error(ErrorCode::kRange, "decoded token id outside vocabulary");
    }
    tokens.ids.push_back(id);
  }
  // Canonical form: the padding tail must be zero.
  for (uint64_t b = bit_count; b < payload.size() * 8; ++b) {
    if ((payload[b / 8] >> (7 - b % 8)) & 1u) {
      throw Error(ErrorCode::kFormat, "nonzero padding bits");
    }
  }
  return tokens;
}

TokenPayload EncodeTextLossless(const TokenSequence& tokens,
                                const Tokenizer& tokenizer) {
  TokenPayload fixed = EncodeTokensFixed(tokens);

  const std::string text = tokenizer.Render(tokens);
  bool roundtrips = false;
  try {
    const TokenSequence back = tokenizer.Tokenize(text);
    roundtrips = back.ids == tokens.ids && back.vocab_size == tokens.vocab_size;
  } catch (const Error&) {
    roundtrips = false;
  }

  std::vector<uint8_t> compressed;
  if (roundtrips) {
    compressed = Deflate(text);
  }
  const uint64_t text_bits = 8ull * compressed.size();

  if (!roundtrips ||
      compressed.size() > fixed.bytes.size() + kTextRegretBytes) {
    fixed.fell_back = true;
    fixed.text_bits_attempted = text_bits;
    return fixed;
  }

  TokenPayload payload;
  payload.coding = TokenCoding::kTextLossless;
  payload.bytes = std::move(compressed);
  payload.bit_count = text_bits;
  payload.text_bits_attempted = text_bits;
  return payload;
}

TokenSequence DecodeTokens(std::span<const uint8_t> payload, TokenCoding coding,
                           size_t length, uint32_t vocab_size,
                           const Tokenizer& tokenizer) {
  if (coding == TokenCoding::kFixedWidth) {
    return DecodeTokensFixed(payload, length, vocab_size);
  }
  const std::string text = Inflate(payload);
  TokenSequence tokens = tokenizer.Tokenize(text);
  if (tokens.ids.size() != length) {
    throw Error(ErrorCode::kTruncation, "decoded token count mismatch");
  }
  if (tokens.vocab_size != vocab_size) {
    throw Error(ErrorCode::kFormat, "tokenizer vocabulary mismatch");
  }
  return tokens;
}

}  // namespace txsk
