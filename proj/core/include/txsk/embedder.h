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

#ifndef TXSK_EMBEDDER_H_
#define TXSK_EMBEDDER_H_

#include <Eigen/Core>
#include <string>

#include "txsk/types.h"

namespace txsk {

// Joint text-image embedding model: a token codebook plus an image encoder
// and a text encoder mapping into one shared feature space. The text
// encoder must be differentiable; gradients are exposed as a
// vector-Jacobian product so bindings need no autodiff framework.
class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual std::string VariantId() const = 0;
  virtual int vocab_size() const = 0;
  virtual int embed_dim() const = 0;
  virtual int feature_dim() const = 0;

  // vocab_size x embed_dim, immutable after construction.
  virtual const Eigen::MatrixXd& Codebook() const = 0;

  virtual Eigen::VectorXd EmbedImage(const Image& image) const = 0;

  // token_embeds is prompt_length x embed_dim.
  virtual Eigen::VectorXd EmbedTokens(
      const Eigen::MatrixXd& token_embeds) const = 0;

  // Given dL/d(EmbedTokens output), returns dL/d(token_embeds).
  virtual Eigen::MatrixXd EmbedTokensVjp(
      const Eigen::MatrixXd& token_embeds,
      const Eigen::VectorXd& grad_out) const = 0;
};

}  // namespace txsk

#endif  // TXSK_EMBEDDER_H_
