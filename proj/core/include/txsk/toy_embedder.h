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

#ifndef TXSK_TOY_EMBEDDER_H_
#define TXSK_TOY_EMBEDDER_H_

#include <memory>
#include <optional>

#include "txsk/embedder.h"
#include "txsk/token_codec.h"

namespace txsk {

struct ToyEmbedderConfig {
  int vocab_size = 8192;
  int embed_dim = 32;
  uint64_t seed = 7;
};

// Pure-math embedder binding: seeded Gaussian codebook, text encoder =
// mean of token embeddings, image encoder = fixed random projection of
// downsampled luma and gradient-magnitude planes. Deterministic given the
// seed; no external model.
class ToyEmbedder : public Embedder {
 public:
  explicit ToyEmbedder(const ToyEmbedderConfig& config = {});
  // Explicit codebook, for hand-built cases.
  ToyEmbedder(Eigen::MatrixXd codebook, uint64_t seed);

  std::string VariantId() const override;
  int vocab_size() const override { return static_cast<int>(codebook_.rows()); }
  int embed_dim() const override { return static_cast<int>(codebook_.cols()); }
  int feature_dim() const override { return embed_dim(); }
  const Eigen::MatrixXd& Codebook() const override { return codebook_; }

  Eigen::VectorXd EmbedImage(const Image& image) const override;
  Eigen::VectorXd EmbedTokens(
      const Eigen::MatrixXd& token_embeds) const override;
  Eigen::MatrixXd EmbedTokensVjp(
      const Eigen::MatrixXd& token_embeds,
      const Eigen::VectorXd& grad_out) const override;

  // Pins EmbedImage to a constant feature, ignoring image content.
  void FixImageFeature(Eigen::VectorXd feature);

 private:
  Eigen::MatrixXd codebook_;
  Eigen::MatrixXd image_projection_;  // embed_dim x (2*16*16)
  std::optional<Eigen::VectorXd> fixed_feature_;
  uint64_t seed_ = 0;
};

// Bijective base-26 rendering: id 0 -> "a", 25 -> "z", 26 -> "aa", ...
// joined by single spaces. Tokenize is the exact inverse.
class ToyTokenizer : public Tokenizer {
 public:
  explicit ToyTokenizer(uint32_t vocab_size) : vocab_size_(vocab_size) {}

  std::string Render(const TokenSequence& tokens) const override;
  TokenSequence Tokenize(const std::string& text) const override;

  static std::string Word(uint32_t id);
  static uint32_t Id(const std::string& word);

 private:
  uint32_t vocab_size_;
};

}  // namespace txsk

#endif  // TXSK_TOY_EMBEDDER_H_
