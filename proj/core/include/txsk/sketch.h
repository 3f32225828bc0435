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
// Edge-map extraction for the sketch branch. The built-in detector is a
// 3x3 gradient magnitude on luminance, normalized by the image's peak
// response; a learned holistic detector can be bound through OpenCV's
// DNN module when the library is built with it. Both emit a [0,1] map
// at the input resolution.

#ifndef TXSK_SKETCH_H_
#define TXSK_SKETCH_H_

#include <string>

#include "txsk/types.h"

namespace txsk {

enum class EdgeDetectorKind {
  kFallbackGradient = 0,
  kHed = 1,
};

class EdgeDetector {
 public:
  // Threshold-free gradient detector; always available.
  static EdgeDetector FallbackGradient();
  // Holistic detector from a Caffe prototxt/weights pair. Throws a
  // backend error when DNN support is not compiled in or the files
  // cannot be loaded.
  static EdgeDetector Hed(const std::string& proto_path,
                          const std::string& weights_path);

  EdgeDetectorKind kind() const { return kind_; }
  SketchMap Extract(const Image& image) const;

 private:
  EdgeDetector(EdgeDetectorKind kind, std::string proto, std::string weights)
      : kind_(kind), proto_path_(std::move(proto)),
        weights_path_(std::move(weights)) {}

  EdgeDetectorKind kind_;
  std::string proto_path_;
  std::string weights_path_;
};

SketchMap ExtractSketch(const Image& image, const EdgeDetector& detector);

}  // namespace txsk

#endif  // TXSK_SKETCH_H_
