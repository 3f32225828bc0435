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

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "support.h"
#include "txsk/error.h"
#include "txsk/metrics.h"
#include "txsk/rng.h"
#include "txsk/sketch.h"
#include "txsk/toy_embedder.h"
#include "txsk/types.h"

namespace {

Eigen::MatrixXd RandomMatrix(int rows, int cols, uint64_t seed) {
  txsk::Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.Normal();
  }
  return m;
}

// Kernel value from explicit scalar loops; shares nothing with the
// library's matrix-product evaluation.
double CubicKernel(const Eigen::MatrixXd& a, int i, const Eigen::MatrixXd& b,
                   int j) {
  double dot = 0.0;
  for (int c = 0; c < a.cols(); ++c) dot += a(i, c) * b(j, c);
  const double base = dot / static_cast<double>(a.cols()) + 1.0;
  return base * base * base;
}

// Unbiased squared MMD written straight from the estimator definitions:
// the paired form when sample counts match, the three-term form
// otherwise.
double KidReference(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(b.rows());
  if (m == n) {
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        if (i == j) continue;
        acc += CubicKernel(a, i, a, j) + CubicKernel(b, i, b, j) -
               CubicKernel(a, i, b, j) - CubicKernel(a, j, b, i);
      }
    }
    return acc / (static_cast<double>(m) * (m - 1));
  }
  double aa = 0.0, bb = 0.0, ab = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i != j) aa += CubicKernel(a, i, a, j);
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) bb += CubicKernel(b, i, b, j);
    }
  }
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) ab += CubicKernel(a, i, b, j);
  }
  return aa / (static_cast<double>(m) * (m - 1)) +
         bb / (static_cast<double>(n) * (n - 1)) -
         2.0 * ab / (static_cast<double>(m) * n);
}

// One-dimensional Frechet distance between Gaussian fits, from scalar
// arithmetic only.
double FidReference1D(const std::vector<double>& a,
                      const std::vector<double>& b) {
  auto mean = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  };
  auto var = [&](const std::vector<double>& v, double mu) {
    double acc = 0.0;
    for (double x : v) acc += (x - mu) * (x - mu);
    return acc / (v.size() - 1);
  };
  const double ma = mean(a), mb = mean(b);
  const double va = var(a, ma), vb = var(b, mb);
  return (ma - mb) * (ma - mb) + va + vb - 2.0 * std::sqrt(va * vb);
}

Eigen::VectorXd UnitAxis(int dim, int axis, double sign = 1.0) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  v[axis] = sign;
  return v;
}

txsk::Image ConstantImage(int width, int height, float value) {
  txsk::Image img;
  img.width = width;
  img.height = height;
  img.data.assign(static_cast<size_t>(width) * height * 3, value);
  return img;
}

}  // namespace

TEST_CASE("embedding distance hits the identity, orthogonal, and antipodal pins") {
  const Eigen::VectorXd ex = UnitAxis(2, 0);
  const Eigen::VectorXd ey = UnitAxis(2, 1);
  const Eigen::VectorXd enx = UnitAxis(2, 0, -1.0);

  CHECK(txsk::DClip(ex, ex) == 0.0);
  CHECK(txsk::DClip(ex, ey) == 1.0);
  CHECK(txsk::DClip(ex, enx) == 2.0);

  // Scale of either argument is irrelevant.
  CHECK(txsk::DClip(3.0 * ex, 7.0 * ex) == 0.0);
  CHECK(txsk::DClip(0.25 * ex, 40.0 * enx) == 2.0);

  for (uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::VectorXd a = RandomMatrix(6, 1, 100 + seed).col(0);
    const Eigen::VectorXd b = RandomMatrix(6, 1, 200 + seed).col(0);
    const double d = txsk::DClip(a, b);
    CHECK(d >= 0.0);
    CHECK(d <= 2.0);
    CHECK(txsk::DClip(b, a) == doctest::Approx(d).epsilon(1e-15));
  }

  CHECK_THROWS_WITH_AS(txsk::DClip(ex, UnitAxis(3, 0)),
                       "shape error: embedding sizes differ", txsk::Error);
  CHECK_THROWS_AS(txsk::DClip(Eigen::VectorXd::Zero(4), UnitAxis(4, 1)),
                  txsk::Error);
}

TEST_CASE("embedding distance over images goes through the embedder") {
  txsk::ToyEmbedder embedder({.vocab_size = 512, .embed_dim = 24, .seed = 7});
  const txsk::Image x = txsk::test::SyntheticScene(11, 48, 40);
  const txsk::Image y = txsk::test::SyntheticScene(12, 48, 40);

  CHECK(txsk::DClip(embedder, x, x) == 0.0);
  const double via_images = txsk::DClip(embedder, x, y);
  const double via_vectors =
      txsk::DClip(embedder.EmbedImage(x), embedder.EmbedImage(y));
  CHECK(via_images == via_vectors);
  CHECK(via_images > 0.0);
}

TEST_CASE("peak signal-to-noise ratio matches hand values") {
  const txsk::Image base = ConstantImage(8, 8, 0.25f);
  CHECK(std::isinf(txsk::Psnr(base, base)));
  CHECK(txsk::Psnr(base, base) > 0.0);

  // Uniform gap of 0.5 means mse 0.25, so 10*log10(4) dB.
  const txsk::Image offset = ConstantImage(8, 8, 0.75f);
  CHECK(txsk::Psnr(base, offset) ==
        doctest::Approx(10.0 * std::log10(4.0)).epsilon(1e-12));

  // A single differing channel out of 192 samples.
  txsk::Image a = ConstantImage(8, 8, 0.0f);
  txsk::Image b = a;
  b.data[2] = 0.3f;
  const double mse =
      (static_cast<double>(b.data[2]) * b.data[2]) / (8.0 * 8.0 * 3.0);
  CHECK(txsk::Psnr(a, b) ==
        doctest::Approx(10.0 * std::log10(1.0 / mse)).epsilon(1e-9));

  CHECK_THROWS_AS(txsk::Psnr(base, ConstantImage(9, 8, 0.25f)), txsk::Error);
}

TEST_CASE("correlation matches hand computation and rejects degenerate input") {
  const std::vector<double> a{1.0, 2.0, 3.0, 4.0};
  const std::vector<double> b{2.0, 1.0, 4.0, 3.0};
  CHECK(txsk::PearsonCorrelation(a, b) == doctest::Approx(0.6).epsilon(1e-12));

  std::vector<double> up, down;
  for (double x : a) {
    up.push_back(3.0 * x + 2.0);
    down.push_back(-2.0 * x + 5.0);
  }
  CHECK(txsk::PearsonCorrelation(a, up) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(txsk::PearsonCorrelation(a, down) ==
        doctest::Approx(-1.0).epsilon(1e-12));

  const std::vector<double> three{1.0, 2.0, 3.0};
  const std::vector<double> flat{5.0, 5.0, 5.0, 5.0};
  CHECK_THROWS_AS(txsk::PearsonCorrelation(a, three), txsk::Error);
  CHECK_THROWS_AS(txsk::PearsonCorrelation(std::vector<double>{1.0},
                                           std::vector<double>{2.0}),
                  txsk::Error);
  CHECK_THROWS_AS(txsk::PearsonCorrelation(a, flat), txsk::Error);
}

TEST_CASE("edge correlation is exact for matched and inverted sketches") {
  // Vertical two-tone step: the gradient detector marks the columns on
  // both sides of the boundary.
  txsk::Image step = ConstantImage(12, 10, 0.1f);
  for (int y = 0; y < step.height; ++y) {
    for (int x = 6; x < step.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        step.data[(static_cast<size_t>(y) * step.width + x) * 3 + c] = 0.9f;
      }
    }
  }
  const txsk::SketchMap edges =
      txsk::ExtractSketch(step, txsk::EdgeDetector::FallbackGradient());

  CHECK(txsk::EdgeCorrelation(step, edges) ==
        doctest::Approx(1.0).epsilon(1e-12));

  txsk::SketchMap inverted = edges;
  for (float& v : inverted.data) v = 1.0f - v;
  CHECK(txsk::EdgeCorrelation(step, inverted) ==
        doctest::Approx(-1.0).epsilon(1e-12));

  // A half-resolution sketch is resized up before correlating; the
  // structure still aligns strongly.
  const txsk::SketchMap half = txsk::Resize(edges, 6, 5);
  CHECK(txsk::EdgeCorrelation(step, half) > 0.5);
}

TEST_CASE("frechet distance reproduces the one-dimensional hand value") {
  Eigen::MatrixXd a(2, 1), b(2, 1);
  a << 0.0, 2.0;
  b << 1.0, 3.0;
  CHECK(txsk::Fid(a, b) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(txsk::Fid(b, a) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(txsk::Fid(a, b) ==
        doctest::Approx(FidReference1D({0.0, 2.0}, {1.0, 3.0})).epsilon(1e-12));
}

TEST_CASE("frechet distance is zero on identical and permuted sets") {
  const Eigen::MatrixXd a = RandomMatrix(20, 6, 301);
  CHECK(std::abs(txsk::Fid(a, a)) <= 1e-9);

  Eigen::MatrixXd shuffled = a;
  for (int i = 0; i < a.rows(); ++i) {
    shuffled.row(i) = a.row((i * 7 + 3) % a.rows());
  }
  CHECK(std::abs(txsk::Fid(a, shuffled)) <= 1e-9);

  const Eigen::MatrixXd b = RandomMatrix(17, 6, 302);
  const double fwd = txsk::Fid(a, b);
  CHECK(fwd >= -1e-9);
  CHECK(txsk::Fid(b, a) == doctest::Approx(fwd).epsilon(1e-9));
}

TEST_CASE("frechet distance matches closed forms for shifted and scaled sets") {
  const Eigen::MatrixXd a = RandomMatrix(30, 4, 310);

  // Pure mean shift: covariances coincide, only the mean term is left.
  Eigen::RowVectorXd shift(4);
  shift << 0.5, -1.25, 2.0, 0.75;
  Eigen::MatrixXd shifted = a.rowwise() + shift;
  CHECK(txsk::Fid(a, shifted) ==
        doctest::Approx(shift.squaredNorm()).epsilon(1e-8));

  // Global scaling s: the covariances commute, so the distance reduces
  // to (1-s)^2 (|mu|^2 + tr cov) with both moments computed directly.
  const double s = 1.7;
  Eigen::MatrixXd scaled = s * a;
  const Eigen::RowVectorXd mu = a.colwise().mean();
  Eigen::MatrixXd centered = a.rowwise() - mu;
  const double trace_cov =
      centered.array().square().sum() / static_cast<double>(a.rows() - 1);
  const double want = (1.0 - s) * (1.0 - s) * (mu.squaredNorm() + trace_cov);
  CHECK(txsk::Fid(a, scaled) == doctest::Approx(want).epsilon(1e-8));

  // Independent scalar-path oracle on unequal sample counts.
  std::vector<double> va, vb;
  txsk::Rng rng(311);
  for (int i = 0; i < 9; ++i) va.push_back(rng.Normal() * 2.0 + 0.3);
  for (int i = 0; i < 7; ++i) vb.push_back(rng.Normal() * 0.5 - 1.1);
  Eigen::MatrixXd ma(9, 1), mb(7, 1);
  for (int i = 0; i < 9; ++i) ma(i, 0) = va[i];
  for (int i = 0; i < 7; ++i) mb(i, 0) = vb[i];
  CHECK(txsk::Fid(ma, mb) ==
        doctest::Approx(FidReference1D(va, vb)).epsilon(1e-10));
}

TEST_CASE("frechet distance on a duplicated set shrinks with the unbiased correction") {
  // Concatenating a set with itself preserves the mean but rescales the
  // unbiased covariance by 2(m-1)/(2m-1), so the distance is the tiny
  // closed-form residue rather than an exact zero.
  const int m = 12;
  const Eigen::MatrixXd a = RandomMatrix(m, 5, 320);
  Eigen::MatrixXd dup(2 * m, 5);
  dup << a, a;

  const Eigen::RowVectorXd mu = a.colwise().mean();
  Eigen::MatrixXd centered = a.rowwise() - mu;
  const double trace_cov =
      centered.array().square().sum() / static_cast<double>(m - 1);
  const double c = 2.0 * (m - 1) / (2.0 * m - 1.0);
  const double want = (1.0 - std::sqrt(c)) * (1.0 - std::sqrt(c)) * trace_cov;

  const double got = txsk::Fid(a, dup);
  CHECK(got == doctest::Approx(want).epsilon(1e-9));
  CHECK(got < 0.05);
}

TEST_CASE("frechet distance validates its inputs") {
  const Eigen::MatrixXd a = RandomMatrix(5, 3, 330);
  CHECK_THROWS_AS(txsk::Fid(a, RandomMatrix(5, 4, 331)), txsk::Error);
  CHECK_THROWS_AS(txsk::Fid(RandomMatrix(1, 3, 332), a), txsk::Error);
  CHECK_THROWS_AS(txsk::Fid(a, RandomMatrix(1, 3, 333)), txsk::Error);

  Eigen::MatrixXd poisoned = a;
  poisoned(2, 1) = std::nan("");
  CHECK_THROWS_AS(txsk::Fid(poisoned, a), txsk::Error);
}

TEST_CASE("kernel distance reproduces the hand value and brute-force oracle") {
  Eigen::MatrixXd a(2, 1), b(2, 1);
  a << 2.0, 0.0;
  b << 1.0, 1.0;
  CHECK(txsk::Kid(a, b) == doctest::Approx(-19.0).epsilon(1e-9));
  CHECK(KidReference(a, b) == doctest::Approx(-19.0).epsilon(1e-12));
  CHECK(txsk::Kid(b, a) == doctest::Approx(-19.0).epsilon(1e-9));
}

TEST_CASE("kernel distance matches the brute-force oracle on random sets") {
  const Eigen::MatrixXd a7 = RandomMatrix(7, 3, 401);
  const Eigen::MatrixXd b7 = RandomMatrix(7, 3, 402);
  const Eigen::MatrixXd b9 = RandomMatrix(9, 3, 403);

  // Matched counts exercise the paired estimator, mismatched counts the
  // three-term one.
  CHECK(txsk::Kid(a7, b7) ==
        doctest::Approx(KidReference(a7, b7)).epsilon(1e-12));
  CHECK(txsk::Kid(a7, b9) ==
        doctest::Approx(KidReference(a7, b9)).epsilon(1e-12));

  CHECK(txsk::Kid(b7, a7) == doctest::Approx(txsk::Kid(a7, b7)).epsilon(1e-12));
  CHECK(txsk::Kid(b9, a7) == doctest::Approx(txsk::Kid(a7, b9)).epsilon(1e-12));

  // The diagonal-excluding paired estimator keeps rows of the two sets
  // aligned, so invariance holds for a joint reordering.
  Eigen::MatrixXd pa = a7, pb = b7;
  for (int i = 0; i < a7.rows(); ++i) {
    const int src = (i * 3 + 1) % static_cast<int>(a7.rows());
    pa.row(i) = a7.row(src);
    pb.row(i) = b7.row(src);
  }
  CHECK(txsk::Kid(pa, pb) == doctest::Approx(txsk::Kid(a7, b7)).epsilon(1e-10));

  // With mismatched counts no pairing exists and either side may be
  // reordered freely.
  Eigen::MatrixXd a_only = a7;
  for (int i = 0; i < a7.rows(); ++i) {
    a_only.row(i) = a7.row((i * 3 + 1) % static_cast<int>(a7.rows()));
  }
  CHECK(txsk::Kid(a_only, b9) ==
        doctest::Approx(txsk::Kid(a7, b9)).epsilon(1e-10));
}

TEST_CASE("kernel distance vanishes on identical sets and stays small for matched distributions") {
  Eigen::MatrixXd two(2, 2);
  two << 0.3, 0.7, -1.0, 2.0;
  CHECK(std::abs(txsk::Kid(two, two)) <= 1e-12);

  const Eigen::MatrixXd a = RandomMatrix(15, 5, 410);
  CHECK(std::abs(txsk::Kid(a, a)) <= 1e-12);

  // Two independent draws from the same distribution: the unbiased
  // estimator is degenerate at zero and concentrates at rate 1/n.
  const Eigen::MatrixXd big_a = RandomMatrix(1000, 4, 411);
  const Eigen::MatrixXd big_b = RandomMatrix(1000, 4, 412);
  CHECK(std::abs(txsk::Kid(big_a, big_b)) < 0.01);
}

TEST_CASE("kernel distance validates its inputs") {
  const Eigen::MatrixXd a = RandomMatrix(5, 3, 420);
  CHECK_THROWS_AS(txsk::Kid(a, RandomMatrix(5, 2, 421)), txsk::Error);
  CHECK_THROWS_AS(txsk::Kid(RandomMatrix(1, 3, 422), a), txsk::Error);

  Eigen::MatrixXd poisoned = a;
  poisoned(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(txsk::Kid(a, poisoned), txsk::Error);
}

TEST_CASE("random projection features are deterministic and linear in the image") {
  txsk::RandomProjectionExtractor fx(64, 9);
  CHECK(fx.dim() == 64);
  CHECK(fx.VariantId() == "randproj-v1/seed9/d64");

  const txsk::Image scene = txsk::test::SyntheticScene(21, 32, 32);
  const Eigen::VectorXd f1 = fx.Extract(scene);
  const Eigen::VectorXd f2 = txsk::RandomProjectionExtractor(64, 9).Extract(scene);
  CHECK((f1 - f2).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(f1.allFinite());

  const Eigen::VectorXd other = txsk::RandomProjectionExtractor(64, 10).Extract(scene);
  CHECK((f1 - other).lpNorm<Eigen::Infinity>() > 1e-6);

  // The extractor is linear, so convex pixel mixes map to the same mix
  // of features.
  const txsk::Image a = txsk::test::SyntheticScene(22, 32, 32);
  const txsk::Image b = txsk::test::SyntheticScene(23, 32, 32);
  txsk::Image mix = a;
  for (size_t i = 0; i < mix.data.size(); ++i) {
    mix.data[i] = 0.5f * a.data[i] + 0.5f * b.data[i];
  }
  // Pixels are single precision, so the mix rounds once per sample.
  const Eigen::VectorXd want = 0.5 * (fx.Extract(a) + fx.Extract(b));
  CHECK((fx.Extract(mix) - want).lpNorm<Eigen::Infinity>() <= 1e-6);

  CHECK_THROWS_AS(txsk::RandomProjectionExtractor(0, 1), txsk::Error);
}

TEST_CASE("random projection pools eight-by-eight cells") {
  // Permuting pixels inside one pooling cell cannot change the feature.
  txsk::Image a = txsk::test::SyntheticScene(25, 16, 16);
  txsk::Image swapped = a;
  // Cells are 2x2 here; swap the two pixels of the top row in every cell.
  for (int gy = 0; gy < 8; ++gy) {
    for (int gx = 0; gx < 8; ++gx) {
      const size_t left = (static_cast<size_t>(gy * 2) * 16 + gx * 2) * 3;
      for (int c = 0; c < 3; ++c) {
        std::swap(swapped.data[left + c], swapped.data[left + 3 + c]);
      }
    }
  }
  txsk::RandomProjectionExtractor fx(16, 4);
  CHECK((fx.Extract(a) - fx.Extract(swapped)).lpNorm<Eigen::Infinity>() <=
        1e-12);

  // Extents that do not divide evenly still pool cleanly.
  CHECK(fx.Extract(txsk::test::SyntheticScene(26, 10, 9)).allFinite());
  CHECK(fx.Extract(txsk::test::SyntheticScene(27, 13, 8)).allFinite());

  // Two constant images give proportional features.
  const Eigen::VectorXd low = fx.Extract(ConstantImage(8, 8, 0.2f));
  const Eigen::VectorXd high = fx.Extract(ConstantImage(8, 8, 0.8f));
  CHECK((high - 4.0 * low).lpNorm<Eigen::Infinity>() <= 1e-9);
}

TEST_CASE("embedder adapter forwards features verbatim") {
  txsk::ToyEmbedder embedder({.vocab_size = 64, .embed_dim = 8, .seed = 3});
  txsk::EmbedderFeatureExtractor fx(embedder);
  CHECK(fx.dim() == 8);
  CHECK(fx.VariantId() == embedder.VariantId());

  const txsk::Image scene = txsk::test::SyntheticScene(31, 24, 20);
  CHECK((fx.Extract(scene) - embedder.EmbedImage(scene))
            .lpNorm<Eigen::Infinity>() == 0.0);
}
