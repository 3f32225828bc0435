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

#include "txsk/sketch.h"

#include <algorithm>
#include <cmath>

#include "txsk/error.h"

#ifdef TXSK_WITH_OPENCV
#include <opencv2/dnn.hpp>
#include <opencv2/imgproc.hpp>
#endif

namespace txsk {

namespace {

float ClampedLuma(const SketchMap& luma, int y, int x) {
  const int yc = std::clamp(y, 0, luma.height - 1);
  const int xc = std::clamp(x, 0, luma.width - 1);
  return luma.at(yc, xc);
}

// 3x3 gradient magnitude on luminance with edge replication; the map
// is scaled by its peak so a flat image stays all zero.
SketchMap GradientSketch(const Image& image) {
  const SketchMap luma = Luminance(image);
  SketchMap sketch(image.width, image.height);

  float peak = 0.0f;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      float gx = 0.0f, gy = 0.0f;
      for (int d = -1; d <= 1; ++d) {
        const float w = d == 0 ? 2.0f : 1.0f;
        gx += w * (ClampedLuma(luma, y + d, x + 1) -
                   ClampedLuma(luma, y + d, x - 1));
        gy += w * (ClampedLuma(luma, y + 1, x + d) -
                   ClampedLuma(luma, y - 1, x + d));
      }
      const float mag = std::sqrt(gx * gx + gy * gy);
      sketch.at(y, x) = mag;
      peak = std::max(peak, mag);
    }
  }
  if (peak > 0.0f) {
    for (float& v : sketch.data) v /= peak;
  }
  return sketch;
}

#ifdef TXSK_WITH_OPENCV
SketchMap HedSketch(const Image& image, const std::string& proto_path,
                    const std::string& weights_path) {
  cv::dnn::Net net;
  try {
    net = cv::dnn::readNetFromCaffe(proto_path, weights_path);
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::kBackend,
                std::string("failed to load edge network: ") + e.what());
  }

  cv::Mat bgr(image.height, image.width, CV_8UC3);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      auto& px = bgr.at<cv::Vec3b>(y, x);
      px[0] = static_cast<uint8_t>(std::lround(image.at(y, x, 2) * 255.0f));
      px[1] = static_cast<uint8_t>(std::lround(image.at(y, x, 1) * 255.0f));
      px[2] = static_cast<uint8_t>(std::lround(image.at(y, x, 0) * 255.0f));
    }
  }

  // Mean values from the detector's published preprocessing.
  const cv::Mat blob = cv::dnn::blobFromImage(
      bgr, 1.0, cv::Size(image.width, image.height),
      cv::Scalar(104.00698793, 116.66876762, 122.67891434), false, false);
  net.setInput(blob);
  cv::Mat out;
  try {
    out = net.forward();
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::kBackend,
                std::string("edge network inference failed: ") + e.what());
  }
  cv::Mat map(out.size[2], out.size[3], CV_32F, out.ptr<float>());
  cv::Mat resized;
  cv::resize(map, resized, cv::Size(image.width, image.height));

  SketchMap sketch(image.width, image.height);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      sketch.at(y, x) = std::clamp(resized.at<float>(y, x), 0.0f, 1.0f);
    }
  }
  return sketch;
}
#endif  // TXSK_WITH_OPENCV

}  // namespace

EdgeDetector EdgeDetector::FallbackGradient() {
  return EdgeDetector(EdgeDetectorKind::kFallbackGradient, "", "");
}

EdgeDetector EdgeDetector::Hed(const std::string& proto_path,
                               const std::string& weights_path) {
#ifdef TXSK_WITH_OPENCV
  return EdgeDetector(EdgeDetectorKind::kHed, proto_path, weights_path);
#else
  (void)proto_path;
  (void)weights_path;
  throw Error(ErrorCode::kBackend,
              "holistic edge detector requires an OpenCV build");
#endif
}

SketchMap EdgeDetector::Extract(const Image& image) const {
  ValidateImage(image);
  switch (kind_) {
    case EdgeDetectorKind::kFallbackGradient:
      return GradientSketch(image);
    case EdgeDetectorKind::kHed:
#ifdef TXSK_WITH_OPENCV
      return HedSketch(image, proto_path_, weights_path_);
#else
      throw Error(ErrorCode::kBackend,
                  "holistic edge detector requires an OpenCV build");
#endif
  }
  throw Error(ErrorCode::kArgument, "unknown edge detector kind");
}

SketchMap ExtractSketch(const Image& image, const EdgeDetector& detector) {
  return detector.Extract(image);
}

}  // namespace txsk
