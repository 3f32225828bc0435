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
// Shared fixtures: deterministic synthetic scenes with crisp shape
// edges, sketch sets derived from them, and scratch directories.

#ifndef TXSK_TESTS_SUPPORT_H_
#define TXSK_TESTS_SUPPORT_H_

#include <filesystem>
#include <string>
#include <vector>

#include "txsk/types.h"

namespace txsk::test {

// Smooth two-tone background plus a few seeded rectangles and disks.
// Same seed, same pixels, on any platform.
Image SyntheticScene(uint64_t seed, int width, int height);

// Edge map of a synthetic scene, via the built-in gradient detector.
SketchMap SyntheticSketch(uint64_t seed, int width, int height);

// `count` sketches with seeded sizes in [min_extent, max_extent].
std::vector<SketchMap> SketchDataset(uint64_t seed, int count, int min_extent,
                                     int max_extent);

// Self-deleting scratch directory under the system temp root.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();

  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

double MaxAbsDiff(const std::vector<float>& a, const std::vector<float>& b);

}  // namespace txsk::test

#endif  // TXSK_TESTS_SUPPORT_H_
