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

#ifndef TXSK_IMAGE_IO_H_
#define TXSK_IMAGE_IO_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "txsk/types.h"

namespace txsk {

// PNG (8-bit RGB) in memory.
std::vector<uint8_t> EncodePng(const Image& image);
Image DecodePng(std::span<const uint8_t> bytes);

// PNG (8-bit grayscale) for sketch transport.
std::vector<uint8_t> EncodePngGray(const SketchMap& map);
SketchMap DecodePngGray(std::span<const uint8_t> bytes);

// Reads .png/.ppm/.pgm by signature; grayscale inputs are replicated to RGB.
Image ReadImageFile(const std::string& path);

// Writes by extension: .png, .ppm, or .pgm (luma). Throws kIo.
void WriteImageFile(const std::string& path, const Image& image);

// Writes a sketch map as .png or .pgm.
void WriteSketchFile(const std::string& path, const SketchMap& map);
SketchMap ReadSketchFile(const std::string& path);

std::string Base64Encode(std::span<const uint8_t> bytes);
std::vector<uint8_t> Base64Decode(const std::string& text);

std::vector<uint8_t> ReadFileBytes(const std::string& path);
void WriteFileBytes(const std::string& path, std::span<const uint8_t> bytes);

}  // namespace txsk

#endif  // TXSK_IMAGE_IO_H_
