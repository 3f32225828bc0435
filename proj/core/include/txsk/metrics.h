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
// Fidelity and realism metrics: embedding distance per image pair,
// Frechet and kernel distances over feature sets, PSNR, and the edge
// correlation used to check sketch-conditioned reconstructions.

#ifndef TXSK_METRICS_H_
#define TXSK_METRICS_H_

#include <span>
#include <string>

#include <Eigen/Dense>

#include "txsk/embedder.h"
#include "txsk/types.h"

namespace txsk {

// 1 - cosine similarity, clamped to [0,2]. Zero-norm input is a domain
// error.
double DClip(const Eigen::VectorXd& ea, const Eigen::VectorXd& eb);
double DClip(const Embedder& embedder, const Image& x, const Image& xhat);

// Peak signal-to-noise ratio over RGB in dB; +infinity for identical
// images.
double Psnr(const Image& a, const Image& b);

double PearsonCorrelation(std::span<const double> a,
                          std::span<const double> b);

// Pearson correlation between the image's gradient edge map and the
// sketch (resized to the image extent when needed).
double EdgeCorrelation(const Image& image, const SketchMap& sketch);

// Frechet distance between Gaussian fits of the two feature sets (rows
// are samples, unbiased covariance). Needs >= 2 rows per set.
double Fid(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Unbiased squared maximum mean discrepancy with the cubic kernel
// k(x, y) = (x.y / dim + 1)^3; exactly zero when both sets coincide.
// May be negative. Needs >= 2 rows per set.
double Kid(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Image-to-vector stage feeding Fid/Kid.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual int dim() const = 0;
  virtual std::string VariantId() const = 0;
  virtual Eigen::VectorXd Extract(const Image& image) const = 0;
};

// Fixed seeded linear projection of 8x8-pooled RGB planes; lets the
// distribution metrics run without any pretrained network.
class RandomProjectionExtractor : public FeatureExtractor {
 public:
  RandomProjectionExtractor(int dim, uint64_t seed);

  int dim() const override { return static_cast<int>(projection_.rows()); }
  std::string VariantId() const override;
  Eigen::VectorXd Extract(const Image& image) const override;

 private:
  Eigen::MatrixXd projection_;  // dim x 192
  uint64_t seed_;
};

// Adapter exposing an embedder's image encoder as a FeatureExtractor.
class EmbedderFeatureExtractor : public FeatureExtractor {
 public:
  explicit EmbedderFeatureExtractor(const Embedder& embedder)
      : embedder_(&embedder) {}

  int dim() const override { return embedder_->feature_dim(); }
  std::string VariantId() const override { return embedder_->VariantId(); }
  Eigen::VectorXd Extract(const Image& image) const override {
    return embedder_->EmbedImage(image);
  }

 private:
  const Embedder* embedder_;
};

}  // namespace txsk

#endif  // TXSK_METRICS_H_
