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

#include "support.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "txsk/rng.h"
#include "txsk/sketch.h"

namespace txsk::test {

Image SyntheticScene(uint64_t seed, int width, int height) {
  Rng rng(HashCombine(seed, 0x5CE11E));
  Image image(width, height);

  // Diagonal background wash between two seeded colors.
  float bg_a[3], bg_b[3];
  for (int c = 0; c < 3; ++c) {
    bg_a[c] = static_cast<float>(0.15 + 0.35 * rng.Uniform());
    bg_b[c] = static_cast<float>(0.45 + 0.4 * rng.Uniform());
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const float t = static_cast<float>(x + y) /
                      static_cast<float>(width + height - 2);
      for (int c = 0; c < 3; ++c) {
        image.at(y, x, c) = bg_a[c] + (bg_b[c] - bg_a[c]) * t;
      }
    }
  }

  const int shapes = 3 + static_cast<int>(rng.Below(4));
  for (int s = 0; s < shapes; ++s) {
    float fill[3];
    for (int c = 0; c < 3; ++c) {
      fill[c] = static_cast<float>(0.05 + 0.9 * rng.Uniform());
    }
    const bool disk = rng.Below(2) == 0;
    const int cx = static_cast<int>(rng.Below(static_cast<uint64_t>(width)));
    const int cy = static_cast<int>(rng.Below(static_cast<uint64_t>(height)));
    const int extent =
        std::max(4, static_cast<int>(rng.Below(
                        static_cast<uint64_t>(std::min(width, height) / 2))));
    const int x0 = std::max(0, cx - extent), x1 = std::min(width, cx + extent);
    const int y0 = std::max(0, cy - extent),
              y1 = std::min(height, cy + extent);
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        if (disk) {
          const long dx = x - cx, dy = y - cy;
          if (dx * dx + dy * dy > static_cast<long>(extent) * extent) continue;
        }
        for (int c = 0; c < 3; ++c) image.at(y, x, c) = fill[c];
      }
    }
  }
  return image;
}

SketchMap SyntheticSketch(uint64_t seed, int width, int height) {
  return ExtractSketch(SyntheticScene(seed, width, height),
                       EdgeDetector::FallbackGradient());
}

std::vector<SketchMap> SketchDataset(uint64_t seed, int count, int min_extent,
                                     int max_extent) {
  Rng rng(HashCombine(seed, 0xDA7A));
  std::vector<SketchMap> maps;
  maps.reserve(count);
  const uint64_t span = static_cast<uint64_t>(max_extent - min_extent + 1);
  for (int i = 0; i < count; ++i) {
    const int w = min_extent + static_cast<int>(rng.Below(span));
    const int h = min_extent + static_cast<int>(rng.Below(span));
    maps.push_back(SyntheticSketch(HashCombine(seed, 0x100 + i), w, h));
  }
  return maps;
}

TempDir::TempDir(const std::string& tag) {
  std::string templ = (std::filesystem::temp_directory_path() /
                       ("txsk_" + tag + "_XXXXXX"))
                          .string();
  char* made = mkdtemp(templ.data());
  if (made == nullptr) {
    std::abort();
  }
  path_ = made;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

double MaxAbsDiff(const std::vector<float>& a, const std::vector<float>& b) {
  if (a.size() != b.size()) return 1e30;
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst,
                     std::abs(static_cast<double>(a[i]) - b[i]));
  }
  return worst;
}

}  // namespace txsk::test
