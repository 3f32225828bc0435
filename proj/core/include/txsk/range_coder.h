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
// Carryless byte-oriented range coder. Symbols are coded from integer
// frequency tables with total at most 2^16; the decoder consumes the
// byte stream in lockstep with the encoder, so a well-formed stream is
// read exactly to its end and truncation surfaces as a decode error.

#ifndef TXSK_RANGE_CODER_H_
#define TXSK_RANGE_CODER_H_

#include <cstddef>
#include <cstdint>
#include <vector>

namespace txsk {

inline constexpr uint32_t kRangeCoderMaxTotal = 1u << 16;

class RangeEncoder {
 public:
  // Appends coded bytes to `*out`; the buffer must outlive the encoder.
  explicit RangeEncoder(std::vector<uint8_t>* out);

  // Codes a symbol occupying [cum, cum + freq) of [0, total).
  void Encode(uint32_t cum, uint32_t freq, uint32_t total);
  // Codes `bits` raw bits of `value` (MSB first), bits in [1, 32].
  void EncodeBypass(uint32_t value, int bits);
  // Drains the state; the encoder must not be used afterwards.
  void Flush();

 private:
  void Normalize();

  std::vector<uint8_t>* out_;
  uint32_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  bool flushed_ = false;
};

class RangeDecoder {
 public:
  RangeDecoder(const uint8_t* data, size_t size);

  // Returns a point in [0, total); the caller locates the symbol whose
  // [cum, cum + freq) interval contains it and then calls Consume with
  // that interval.
  uint32_t DecodeTarget(uint32_t total);
  void Consume(uint32_t cum, uint32_t freq);
  uint32_t DecodeBypass(int bits);
  size_t consumed() const { return pos_; }

 private:
  uint8_t NextByte();
  void Normalize();

  const uint8_t* data_;
  size_t size_;
  size_t pos_ = 0;
  uint32_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint32_t code_ = 0;
  uint32_t slot_ = 0;  // range_ / total from the pending DecodeTarget
};

}  // namespace txsk

#endif  // TXSK_RANGE_CODER_H_
