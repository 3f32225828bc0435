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

#include "txsk/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "txsk/error.h"
#include "txsk/numeric.h"
#include "txsk/rng.h"
#include "txsk/sketch.h"

namespace txsk {
namespace {

// Symmetric positive semi-definite square root. Eigenvalues slightly
// below zero (numerical noise from the similarity transform) are
// clipped; anything worse is reported rather than silently absorbed.
Eigen::MatrixXd SymmetricSqrt(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumerical, "eigendecomposition failed");
  }
  Eigen::VectorXd evals = solver.eigenvalues();
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    if (evals[i] < -1e-6) {
      throw Error(ErrorCode::kNumerical,
                  "covariance product is not positive semi-definite");
    }
    evals[i] = std::sqrt(std::max(evals[i], 0.0));
  }
  return solver.eigenvectors() * evals.asDiagonal() *
         solver.eigenvectors().transpose();
}

// Mean row and unbiased covariance of a sample-per-row matrix.
void GaussianFit(const Eigen::MatrixXd& samples, Eigen::VectorXd* mean,
                 Eigen::MatrixXd* cov) {
  const Eigen::Index n = samples.rows();
  *mean = samples.colwise().mean();
  Eigen::MatrixXd centered = samples.rowwise() - mean->transpose();
  *cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
}

void CheckFeatureSets(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) {
    throw Error(ErrorCode::kShape, "feature sets have different dimensions");
  }
  if (a.rows() < 2 || b.rows() < 2) {
    throw Error(ErrorCode::kData,
                "distribution metrics need at least two samples per set");
  }
  if (!a.allFinite() || !b.allFinite()) {
    throw Error(ErrorCode::kNumerical, "feature set contains non-finite values");
  }
}

// Cubic polynomial kernel over the full cross-product of two sets.
Eigen::MatrixXd KernelMatrix(const Eigen::MatrixXd& a,
                             const Eigen::MatrixXd& b) {
  const double inv_dim = 1.0 / static_cast<double>(a.cols());
  Eigen::MatrixXd k = (a * b.transpose()) * inv_dim;
  k.array() += 1.0;
  return k.array().cube().matrix();
}

}  // namespace

double DClip(const Eigen::VectorXd& ea, const Eigen::VectorXd& eb) {
  if (ea.size() != eb.size()) {
    throw Error(ErrorCode::kShape, "embedding sizes differ");
  }
  const double cosine = CosineSimilarity(
      std::span<const double>(ea.data(), static_cast<size_t>(ea.size())),
      std::span<const double>(eb.data(), static_cast<size_t>(eb.size())));
  return std::clamp(1.0 - cosine, 0.0, 2.0);
}

double DClip(const Embedder& embedder, const Image& x, const Image& xhat) {
  return DClip(embedder.EmbedImage(x), embedder.EmbedImage(xhat));
}

double Psnr(const Image& a, const Image& b) {
  ValidateImage(a);
  ValidateImage(b);
  if (a.width != b.width || a.height != b.height) {
    throw Error(ErrorCode::kShape, "image sizes differ");
  }
  double sq = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - b.data[i];
    sq += d * d;
  }
  const double mse = sq / static_cast<double>(a.data.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double PearsonCorrelation(std::span<const double> a,
                          std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kShape, "correlation inputs have different lengths");
  }
  if (a.size() < 2) {
    throw Error(ErrorCode::kData, "correlation needs at least two samples");
  }
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) {
    throw Error(ErrorCode::kDomain, "correlation input has zero variance");
  }
  return sab / std::sqrt(saa * sbb);
}

double EdgeCorrelation(const Image& image, const SketchMap& sketch) {
  ValidateImage(image);
  ValidateSketch(sketch);
  SketchMap edges = ExtractSketch(image, EdgeDetector::FallbackGradient());
  SketchMap aligned = sketch;
  if (sketch.width != image.width || sketch.height != image.height) {
    aligned = Resize(sketch, image.width, image.height);
  }
  std::vector<double> ve(edges.data.begin(), edges.data.end());
  std::vector<double> vs(aligned.data.begin(), aligned.data.end());
  return PearsonCorrelation(ve, vs);
}

double Fid(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  CheckFeatureSets(a, b);
  Eigen::VectorXd mu_a, mu_b;
  Eigen::MatrixXd cov_a, cov_b;
  GaussianFit(a, &mu_a, &cov_a);
  GaussianFit(b, &mu_b, &cov_b);

  const double mean_term = (mu_a - mu_b).squaredNorm();
  Eigen::MatrixXd root_a = SymmetricSqrt(cov_a);
  Eigen::MatrixXd cross = SymmetricSqrt(root_a * cov_b * root_a);
  const double trace_term =
      cov_a.trace() + cov_b.trace() - 2.0 * cross.trace();
  return mean_term + trace_term;
}

double Kid(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  CheckFeatureSets(a, b);
  const Eigen::Index m = a.rows();
  const Eigen::Index n = b.rows();
  Eigen::MatrixXd kaa = KernelMatrix(a, a);
  Eigen::MatrixXd kbb = KernelMatrix(b, b);
  Eigen::MatrixXd kab = KernelMatrix(a, b);

  const double off_aa = kaa.sum() - kaa.trace();
  const double off_bb = kbb.sum() - kbb.trace();
  if (m == n) {
    // Paired estimator: cancels exactly when the two sets coincide.
    const double off_ab = kab.sum() - kab.trace();
    return (off_aa + off_bb - 2.0 * off_ab) /
           static_cast<double>(m * (m - 1));
  }
  const double term_aa = off_aa / static_cast<double>(m * (m - 1));
  const double term_bb = off_bb / static_cast<double>(n * (n - 1));
  const double term_ab = 2.0 * kab.sum() / static_cast<double>(m * n);
  return term_aa + term_bb - term_ab;
}

RandomProjectionExtractor::RandomProjectionExtractor(int dim, uint64_t seed)
    : seed_(seed) {
  if (dim < 1) {
    throw Error(ErrorCode::kConfig, "feature dimension must be positive");
  }
  Rng rng(HashCombine(seed, 0x30));
  projection_.resize(dim, 192);
  const double scale = 1.0 / std::sqrt(192.0);
  for (Eigen::Index r = 0; r < projection_.rows(); ++r) {
    for (Eigen::Index c = 0; c < projection_.cols(); ++c) {
      projection_(r, c) = rng.Normal() * scale;
    }
  }
}

std::string RandomProjectionExtractor::VariantId() const {
  return "randproj-v1/seed" + std::to_string(seed_) + "/d" +
         std::to_string(dim());
}

Eigen::VectorXd RandomProjectionExtractor::Extract(const Image& image) const {
  ValidateImage(image);
  // Box-pool each color plane to 8x8 cells; the pooled planes feed the
  // fixed projection.
  Eigen::VectorXd pooled(192);
  const int grid = 8;
  for (int ch = 0; ch < 3; ++ch) {
    for (int gy = 0; gy < grid; ++gy) {
      const int y0 = gy * image.height / grid;
      const int y1 = (gy + 1) * image.height / grid;
      for (int gx = 0; gx < grid; ++gx) {
        const int x0 = gx * image.width / grid;
        const int x1 = (gx + 1) * image.width / grid;
        double acc = 0.0;
        for (int y = y0; y < y1; ++y) {
          for (int x = x0; x < x1; ++x) {
            acc += image.data[(static_cast<size_t>(y) * image.width + x) * 3 +
                              ch];
          }
        }
        const int count = (y1 - y0) * (x1 - x0);
        pooled[ch * 64 + gy * grid + gx] = acc / std::max(count, 1);
      }
    }
  }
  return projection_ * pooled;
}

}  // namespace txsk
