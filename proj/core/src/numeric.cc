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

#include "txsk/numeric.h"

#include <algorithm>
#include <cmath>

#include "txsk/error.h"

namespace txsk {

double CosineSimilarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::kShape, "cosine inputs differ in dimension");
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) {
    throw Error(ErrorCode::kDomain, "cosine of a zero vector");
  }
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

double ComputeBpp(uint64_t total_bits, int width, int height) {
  const int64_t pixels = static_cast<int64_t>(width) * height;
  if (pixels <= 0) {
    throw Error(ErrorCode::kDomain, "bpp of a zero-area image");
  }
  return static_cast<double>(total_bits) / static_cast<double>(pixels);
}

}  // namespace txsk
