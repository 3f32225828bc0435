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

#ifndef TXSK_CONTAINER_H_
#define TXSK_CONTAINER_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "txsk/types.h"

namespace txsk {

// .tsk byte layout, all integers big-endian:
//
//   magic   "TXSK"                        4 bytes
//   version 0x01                          1 byte
//   mode    0=PIC, 1=PICS                 1 byte
//   width                                 2 bytes
//   height                                2 bytes
//   token_coding 0=fixed-width, 1=text    1 byte
//   token_len                             4 bytes
//   token_payload                         token_len bytes
//   sketch_len   (PICS only)              4 bytes
//   sketch_payload (PICS only)            sketch_len bytes
//   crc32 over all preceding bytes        4 bytes
inline constexpr uint8_t kContainerMagic[4] = {'T', 'X', 'S', 'K'};
inline constexpr uint8_t kContainerVersion = 1;

enum class TokenCoding : uint8_t { kFixedWidth = 0, kTextLossless = 1 };

struct Container {
  Mode mode = Mode::kPic;
  uint16_t width = 0;
  uint16_t height = 0;
  TokenCoding token_coding = TokenCoding::kFixedWidth;
  std::vector<uint8_t> token_payload;
  std::optional<std::vector<uint8_t>> sketch_payload;

  bool operator==(const Container&) const = default;
};

// Serializes the exact layout above. Throws kArgument if mode/payload
// presence disagree, kRange if a dimension exceeds 16 bits.
std::vector<uint8_t> WriteContainer(const Container& container);

// Parses and validates a container. The CRC is verified before any field
// is interpreted, so any bit flip in a well-formed container surfaces as
// kCorruption; structural checks (magic, version, lengths) only run on
// buffers whose checksum passes. Throws kTruncation, kCorruption, kFormat
// or kVersion.
Container ReadContainer(std::span<const uint8_t> bytes);

// Smallest well-formed container: PIC with an empty token payload.
inline constexpr size_t kMinContainerSize = 4 + 1 + 1 + 2 + 2 + 1 + 4 + 4;

}  // namespace txsk

#endif  // TXSK_CONTAINER_H_
