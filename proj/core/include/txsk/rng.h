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

#ifndef TXSK_RNG_H_
#define TXSK_RNG_H_

#include <cstdint>
#include <random>

namespace txsk {

// Deterministic RNG with explicit value derivation (no distribution
// objects, whose sequences vary across standard libraries).
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform in [0,1).
  double Uniform() {
    return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  uint64_t Below(uint64_t n) { return n ? NextU64() % n : 0; }

  // Standard normal via Box-Muller, one value per call.
  double Normal();

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Mixes values into a single well-spread 64-bit hash (splitmix64 core).
uint64_t HashCombine(uint64_t h, uint64_t v);
uint64_t HashString(const std::string& s);

}  // namespace txsk

#endif  // TXSK_RNG_H_
