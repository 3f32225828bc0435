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

#include "txsk/container.h"

#include <zlib.h>

#include <cstring>
#include <limits>

#include "txsk/error.h"

namespace txsk {

namespace {

void PutU16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v >> 24));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

uint16_t GetU16(const uint8_t* p) {
  return static_cast<uint16_t>((p[0] << 8) | p[1]);
}

uint32_t GetU32(const uint8_t* p) {
  return (static_cast<uint32_t>(p[0]) << 24) |
         (static_cast<uint32_t>(p[1]) << 16) |
         (static_cast<uint32_t>(p[2]) << 8) | static_cast<uint32_t>(p[3]);
}

uint32_t Crc32(std::span<const uint8_t> bytes) {
  return static_cast<uint32_t>(
      crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

}  // namespace

std::vector<uint8_t> WriteContainer(const Container& container) {
  const bool pics = container.mode == Mode::kPics;
  if (pics != container.sketch_payload.has_value()) {
    throw Error(ErrorCode::kArgument,
                pics ? "PICS container requires a sketch payload"
                     : "PIC container must not carry a sketch payload");
  }
  if (container.width == 0 || container.height == 0) {
    throw Error(ErrorCode::kArgument, "container dimensions must be positive");
  }
  if (container.token_payload.size() >
      std::numeric_limits<uint32_t>::max()) {
    throw Error(ErrorCode::kRange, "token payload too large");
  }

  std::vector<uint8_t> out;
  out.insert(out.end(), kContainerMagic, kContainerMagic + 4);
  out.push_back(kContainerVersion);
  out.push_back(static_cast<uint8_t>(container.mode));
  PutU16(out, container.width);
  PutU16(out, container.height);
  out.push_back(static_cast<uint8_t>(container.token_coding));
  PutU32(out, static_cast<uint32_t>(container.token_payload.size()));
  out.insert(out.end(), container.token_payload.begin(),
             container.token_payload.end());
  if (pics) {
    if (container.sketch_payload->size() >
        std::numeric_limits<uint32_t>::max()) {
      throw Error(ErrorCode::kRange, "sketch payload too large");
    }
    PutU32(out, static_cast<uint32_t>(container.sketch_payload->size()));
    out.insert(out.end(), container.sketch_payload->begin(),
               container.sketch_payload->end());
  }
  PutU32(out, Crc32(out));
  return out;
}

Container ReadContainer(std::span<const uint8_t> bytes) {
  if (bytes.size() < kMinContainerSize) {
    throw Error(ErrorCode::kTruncation, "container shorter than minimal size");
  }
  // Integrity gate first: the checksum is always the trailing 4 bytes.
  const uint32_t stored = GetU32(bytes.data() + bytes.size() - 4);
  const uint32_t computed = Crc32(bytes.first(bytes.size() - 4));
  if (stored != computed) {
    throw Error(ErrorCode::kCorruption, "container checksum mismatch");
  }

  const uint8_t* p = bytes.data();
  if (std::memcmp(p, kContainerMagic, 4) != 0) {
    throw Error(ErrorCode::kFormat, "bad container magic");
  }
  if (p[4] != kContainerVersion) {
    throw Error(ErrorCode::kVersion, "unknown container version");
  }
  if (p[5] > 1) {
    throw Error(ErrorCode::kFormat, "bad mode byte");
  }
  if (p[10] > 1) {
    throw Error(ErrorCode::kFormat, "bad token coding byte");
  }

  Container c;
  c.mode = static_cast<Mode>(p[5]);
  c.width = GetU16(p + 6);
  c.height = GetU16(p + 8);
  if (c.width == 0 || c.height == 0) {
    throw Error(ErrorCode::kFormat, "zero container dimension");
  }
  c.token_coding = static_cast<TokenCoding>(p[10]);

  const uint64_t token_len = GetU32(p + 11);
  uint64_t expected = 15 + token_len;
  if (expected + 4 > bytes.size()) {
    throw Error(ErrorCode::kTruncation, "token payload truncated");
  }
  c.token_payload.assign(p + 15, p + 15 + token_len);

  if (c.mode == Mode::kPics) {
    if (expected + 4 + 4 > bytes.size()) {
      throw Error(ErrorCode::kTruncation, "sketch length truncated");
    }
    const uint64_t sketch_len = GetU32(p + expected);
    const uint64_t sketch_off = expected + 4;
    expected = sketch_off + sketch_len;
    if (expected + 4 > bytes.size()) {
      throw Error(ErrorCode::kTruncation, "sketch payload truncated");
    }
    c.sketch_payload.emplace(p + sketch_off, p + expected);
  }

  if (expected + 4 != bytes.size()) {
    throw Error(ErrorCode::kFormat, "trailing bytes after container");
  }
  return c;
}

}  // namespace txsk
