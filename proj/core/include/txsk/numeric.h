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

#ifndef TXSK_NUMERIC_H_
#define TXSK_NUMERIC_H_

#include <cstdint>
#include <span>

namespace txsk {

// u.v / (|u||v|), clamped to [-1,1]. Throws kShape on dimension mismatch,
// kDomain if either vector has zero norm.
double CosineSimilarity(std::span<const double> u, std::span<const double> v);

// total_bits / (width*height). Throws kDomain on a zero-area image.
double ComputeBpp(uint64_t total_bits, int width, int height);

}  // namespace txsk

#endif  // TXSK_NUMERIC_H_
