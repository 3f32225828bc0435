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

#include "txsk/range_coder.h"

#include <algorithm>

#include "txsk/error.h"

namespace txsk {

namespace {

constexpr uint32_t kTop = 1u << 24;
constexpr uint32_t kBottom = 1u << 16;

void CheckInterval(uint32_t cum, uint32_t freq, uint32_t total) {
  if (total == 0 || total > kRangeCoderMaxTotal) {
    throw Error(ErrorCode::kArgument, "range coder total out of bounds");
  }
  if (freq == 0 || cum + freq > total) {
    throw Error(ErrorCode::kArgument, "range coder interval out of bounds");
  }
}

}  // namespace

RangeEncoder::RangeEncoder(std::vector<uint8_t>* out) : out_(out) {}

void RangeEncoder::Normalize() {
  // Emit leading bytes while they are settled; force the range open
  // when it underflows without agreement in the top byte.
  while ((low_ ^ (low_ + range_)) < kTop ||
         (range_ < kBottom && ((range_ = -low_ & (kBottom - 1)), true))) {
    out_->push_back(static_cast<uint8_t>(low_ >> 24));
    low_ <<= 8;
    range_ <<= 8;
  }
}

void RangeEncoder::Encode(uint32_t cum, uint32_t freq, uint32_t total) {
  CheckInterval(cum, freq, total);
  const uint32_t r = range_ / total;
  low_ += r * cum;
  range_ = r * freq;
  Normalize();
}

void RangeEncoder::EncodeBypass(uint32_t value, int bits) {
  if (bits < 1 || bits > 32) {
    throw Error(ErrorCode::kArgument, "bypass bit count out of bounds");
  }
  // MSB-first 16-bit chunks keep the totals within coder limits.
  while (bits > 0) {
    const int chunk = std::min(bits, 16);
    const uint32_t piece = (value >> (bits - chunk)) & ((1u << chunk) - 1u);
    Encode(piece, 1, 1u << chunk);
    bits -= chunk;
  }
}

void RangeEncoder::Flush() {
  if (flushed_) return;
  flushed_ = true;
  for (int i = 0; i < 4; ++i) {
    out_->push_back(static_cast<uint8_t>(low_ >> 24));
    low_ <<= 8;
  }
}

RangeDecoder::RangeDecoder(const uint8_t* data, size_t size)
    : data_(data), size_(size) {
  for (int i = 0; i < 4; ++i) {
    code_ = (code_ << 8) | NextByte();
  }
}

uint8_t RangeDecoder::NextByte() {
  if (pos_ >= size_) {
    throw Error(ErrorCode::kDecode, "coded stream truncated");
  }
  return data_[pos_++];
}

void RangeDecoder::Normalize() {
  while ((low_ ^ (low_ + range_)) < kTop ||
         (range_ < kBottom && ((range_ = -low_ & (kBottom - 1)), true))) {
    code_ = (code_ << 8) | NextByte();
    low_ <<= 8;
    range_ <<= 8;
  }
}

uint32_t RangeDecoder::DecodeTarget(uint32_t total) {
  if (total == 0 || total > kRangeCoderMaxTotal) {
    throw Error(ErrorCode::kArgument, "range coder total out of bounds");
  }
  slot_ = range_ / total;
  const uint32_t target = (code_ - low_) / slot_;
  // A corrupt stream can point past the table; clamp so the caller's
  // symbol lookup stays defined and the mismatch surfaces later.
  return std::min(target, total - 1);
}

void RangeDecoder::Consume(uint32_t cum, uint32_t freq) {
  low_ += slot_ * cum;
  range_ = slot_ * freq;
  Normalize();
}

uint32_t RangeDecoder::DecodeBypass(int bits) {
  if (bits < 1 || bits > 32) {
    throw Error(ErrorCode::kArgument, "bypass bit count out of bounds");
  }
  uint32_t value = 0;
  while (bits > 0) {
    const int chunk = std::min(bits, 16);
    const uint32_t piece = DecodeTarget(1u << chunk);
    Consume(piece, 1);
    value = (value << chunk) | piece;
    bits -= chunk;
  }
  return value;
}

}  // namespace txsk
