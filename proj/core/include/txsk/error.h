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

#ifndef TXSK_ERROR_H_
#define TXSK_ERROR_H_

#include <stdexcept>
#include <string>

namespace txsk {

enum class ErrorCode {
  kDomain,      // input outside the mathematical domain of an operation
  kShape,       // mismatched dimensions
  kRange,       // value exceeds a representable range
  kArgument,    // inconsistent argument combination
  kFormat,      // malformed bytes (bad magic, bad padding, trailing data)
  kCorruption,  // checksum mismatch
  kTruncation,  // byte stream shorter than its declared layout
  kVersion,     // unknown format version
  kDecode,      // undecodable coded stream
  kConfig,      // invalid configuration
  kIo,          // file system failure
  kData,        // dataset-level problem (empty, mismatched sets)
  kBackend,     // external backend unavailable or failing
  kTimeout,     // external backend timed out
  kCapability,  // backend cannot serve the requested mode
  kNumerical,   // non-finite value encountered
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace txsk

#endif  // TXSK_ERROR_H_
