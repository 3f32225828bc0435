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

#include "txsk/toy_embedder.h"

#include <cctype>
#include <cmath>
#include <sstream>

#include "txsk/error.h"
#include "txsk/rng.h"

namespace txsk {

namespace {

constexpr int kPatch = 16;  // downsample target for image features

Eigen::MatrixXd SeededGaussian(int rows, int cols, uint64_t seed,
                               double scale) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      m(r, c) = rng.Normal() * scale;
    }
  }
  return m;
}

}  // namespace

ToyEmbedder::ToyEmbedder(const ToyEmbedderConfig& config)
    : codebook_(SeededGaussian(config.vocab_size, config.embed_dim,
                               HashCombine(config.seed, 0x10),
                               1.0 / std::sqrt(config.embed_dim))),
      image_projection_(SeededGaussian(config.embed_dim, 2 * kPatch * kPatch,
                                       HashCombine(config.seed, 0x20),
                                       1.0 / std::sqrt(2.0 * kPatch * kPatch))),
      seed_(config.seed) {}

ToyEmbedder::ToyEmbedder(Eigen::MatrixXd codebook, uint64_t seed)
    : codebook_(std::move(codebook)),
      image_projection_(SeededGaussian(static_cast<int>(codebook_.cols()),
                                       2 * kPatch * kPatch,
                                       HashCombine(seed, 0x20),
                                       1.0 / std::sqrt(2.0 * kPatch * kPatch))),
      seed_(seed) {}

std::string ToyEmbedder::VariantId() const {
  std::ostringstream id;
  id << "toy-v1/seed" << seed_ << "/V" << vocab_size() << "/d" << embed_dim();
  return id.str();
}

void ToyEmbedder::FixImageFeature(Eigen::VectorXd feature) {
  if (feature.size() != feature_dim()) {
    throw Error(ErrorCode::kShape, "fixed feature dimension mismatch");
  }
  fixed_feature_ = std::move(feature);
}

Eigen::VectorXd ToyEmbedder::EmbedImage(const Image& image) const {
  if (fixed_feature_) return *fixed_feature_;
  ValidateImage(image);

  // Luma and gradient-magnitude planes, box-downsampled to kPatch^2 each.
  const SketchMap luma = Luminance(image);
  Eigen::VectorXd planes(2 * kPatch * kPatch);
  for (int py = 0; py < kPatch; ++py) {
    for (int px = 0; px < kPatch; ++px) {
      const int y0 = py * image.height / kPatch;
      const int y1 = (py + 1) * image.height / kPatch;
      const int x0 = px * image.width / kPatch;
      const int x1 = (px + 1) * image.width / kPatch;
      double lum = 0.0, grad = 0.0;
      int count = 0;
      for (int y = y0; y < std::max(y0 + 1, y1); ++y) {
        for (int x = x0; x < std::max(x0 + 1, x1); ++x) {
          const int yc = std::min(y, image.height - 1);
          const int xc = std::min(x, image.width - 1);
          lum += luma.at(yc, xc);
          const float dx = luma.at(yc, std::min(xc + 1, image.width - 1)) -
                           luma.at(yc, std::max(xc - 1, 0));
          const float dy = luma.at(std::min(yc + 1, image.height - 1), xc) -
                           luma.at(std::max(yc - 1, 0), xc);
          grad += std::sqrt(static_cast<double>(dx) * dx +
                            static_cast<double>(dy) * dy);
          ++count;
        }
      }
      planes[py * kPatch + px] = lum / count;
      planes[kPatch * kPatch + py * kPatch + px] = grad / count;
    }
  }
  Eigen::VectorXd feature = image_projection_ * planes;
  const double norm = feature.norm();
  if (norm > 0.0) feature /= norm;
  return feature;
}

Eigen::VectorXd ToyEmbedder::EmbedTokens(
    const Eigen::MatrixXd& token_embeds) const {
  if (token_embeds.cols() != embed_dim() || token_embeds.rows() < 1) {
    throw Error(ErrorCode::kShape, "token embedding shape mismatch");
  }
  return token_embeds.colwise().mean();
}

Eigen::MatrixXd ToyEmbedder::EmbedTokensVjp(
    const Eigen::MatrixXd& token_embeds,
    const Eigen::VectorXd& grad_out) const {
  if (grad_out.size() != embed_dim()) {
    throw Error(ErrorCode::kShape, "gradient dimension mismatch");
  }
  const double inv_rows = 1.0 / static_cast<double>(token_embeds.rows());
  Eigen::MatrixXd grad(token_embeds.rows(), token_embeds.cols());
  for (int r = 0; r < grad.rows(); ++r) {
    grad.row(r) = grad_out.transpose() * inv_rows;
  }
  return grad;
}

std::string ToyTokenizer::Word(uint32_t id) {
  // Bijective base 26: no two ids share a rendering.
  std::string word;
  uint64_t n = static_cast<uint64_t>(id) + 1;
  while (n > 0) {
    n -= 1;
    word.insert(word.begin(), static_cast<char>('a' + n % 26));
    n /= 26;
  }
  return word;
}

uint32_t ToyTokenizer::Id(const std::string& word) {
  if (word.empty()) {
    throw Error(ErrorCode::kFormat, "empty token word");
  }
  uint64_t n = 0;
  for (char c : word) {
    if (c < 'a' || c > 'z') {
      throw Error(ErrorCode::kFormat, "token word has non a-z character");
    }
    n = n * 26 + static_cast<uint64_t>(c - 'a') + 1;
  }
  return static_cast<uint32_t>(n - 1);
}

std::string ToyTokenizer::Render(const TokenSequence& tokens) const {
  std::string text;
  for (size_t i = 0; i < tokens.ids.size(); ++i) {
    if (i) text.push_back(' ');
    text += Word(tokens.ids[i]);
  }
  return text;
}

TokenSequence ToyTokenizer::Tokenize(const std::string& text) const {
  TokenSequence tokens;
  tokens.vocab_size = vocab_size_;
  std::istringstream in(text);
  std::string word;
  while (in >> word) {
    const uint32_t id = Id(word);
    if (id >= vocab_size_) {
      throw Error(ErrorCode::kRange, "word outside vocabulary: " + word);
    }
    tokens.ids.push_back(id);
  }
  return tokens;
}

}  // namespace txsk
