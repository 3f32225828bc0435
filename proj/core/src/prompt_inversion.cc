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

#include "txsk/prompt_inversion.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "txsk/error.h"
#include "txsk/rng.h"

namespace txsk {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void ValidateConfig(const PiConfig& config) {
  if (config.prompt_length < 1) {
    throw Error(ErrorCode::kConfig, "prompt_length must be >= 1");
  }
  if (config.step_count < 1) {
    throw Error(ErrorCode::kConfig, "step_count must be >= 1");
  }
  if (!(config.learning_rate > 0.0)) {
    throw Error(ErrorCode::kConfig, "learning_rate must be > 0");
  }
  if (config.restart_count < 1) {
    throw Error(ErrorCode::kConfig, "restart_count must be >= 1");
  }
}

// Objective value and its gradient with respect to the pooled feature.
// cos = (t . y) / (|t| |y|); d cos / dy = t/(|t||y|) - cos * y/|y|^2.
double CosineAndGrad(const Eigen::VectorXd& target, double target_norm,
                     const Eigen::VectorXd& pooled, Eigen::VectorXd* grad) {
  const double pooled_norm = pooled.norm();
  const double dot = target.dot(pooled);
  const double cosine = dot / (target_norm * pooled_norm);
  if (grad != nullptr) {
    *grad = target / (target_norm * pooled_norm) -
            (cosine / (pooled_norm * pooled_norm)) * pooled;
  }
  return cosine;
}

}  // namespace

Projection ProjectToCodebook(const Eigen::MatrixXd& soft,
                             const Eigen::MatrixXd& codebook) {
  if (soft.cols() != codebook.cols()) {
    throw Error(ErrorCode::kShape, "soft prompt dimension mismatch");
  }
  const int length = static_cast<int>(soft.rows());
  const int vocab = static_cast<int>(codebook.rows());

  // |s - c|^2 = |c|^2 - 2 s.c + const(s); the |s|^2 term cannot change
  // the argmin so it is dropped.
  const Eigen::VectorXd code_sq = codebook.rowwise().squaredNorm();
  const Eigen::MatrixXd dots = soft * codebook.transpose();  // L x V

  Projection out;
  out.ids.resize(length);
  out.hard.resize(length, codebook.cols());
  for (int r = 0; r < length; ++r) {
    int best = 0;
    double best_dist = code_sq[0] - 2.0 * dots(r, 0);
    for (int v = 1; v < vocab; ++v) {
      const double dist = code_sq[v] - 2.0 * dots(r, v);
      if (dist < best_dist) {
        best_dist = dist;
        best = v;
      }
    }
    out.ids[r] = static_cast<uint32_t>(best);
    out.hard.row(r) = codebook.row(best);
  }
  return out;
}

PiResult InvertPrompt(const Embedder& embedder,
                      const Eigen::VectorXd& target_feature,
                      const PiConfig& config) {
  ValidateConfig(config);
  if (target_feature.size() != embedder.feature_dim()) {
    throw Error(ErrorCode::kShape, "target feature dimension mismatch");
  }
  const double target_norm = target_feature.norm();
  if (!(target_norm > 0.0) || !target_feature.allFinite()) {
    throw Error(ErrorCode::kDomain, "target feature must be finite and nonzero");
  }

  const Eigen::MatrixXd& codebook = embedder.Codebook();
  const int length = config.prompt_length;
  const int dim = static_cast<int>(codebook.cols());
  const uint32_t vocab = static_cast<uint32_t>(codebook.rows());

  PiResult result;
  result.cosine = -std::numeric_limits<double>::infinity();
  result.tokens.vocab_size = vocab;

  for (int restart = 0; restart < config.restart_count; ++restart) {
    Rng rng(HashCombine(config.random_seed, static_cast<uint64_t>(restart) + 1));

    Eigen::MatrixXd soft(length, dim);
    for (int r = 0; r < length; ++r) {
      soft.row(r) = codebook.row(static_cast<int>(rng.Below(vocab)));
    }

    Eigen::MatrixXd adam_m = Eigen::MatrixXd::Zero(length, dim);
    Eigen::MatrixXd adam_v = Eigen::MatrixXd::Zero(length, dim);

    // step_count updates; the state after the last update is also
    // evaluated so no work is discarded.
    for (int step = 0; step <= config.step_count; ++step) {
      Projection proj = ProjectToCodebook(soft, codebook);
      const Eigen::VectorXd pooled = embedder.EmbedTokens(proj.hard);

      const bool last = step == config.step_count;
      Eigen::VectorXd pooled_grad;
      const double cosine = CosineAndGrad(target_feature, target_norm, pooled,
                                          last ? nullptr : &pooled_grad);
      if (!std::isfinite(cosine)) {
        throw Error(ErrorCode::kNumerical,
                    "non-finite objective at step " + std::to_string(step) +
                        " of restart " + std::to_string(restart));
      }

      result.objective_trace.push_back(cosine);
      if (cosine > result.cosine) {
        result.cosine = cosine;
        result.tokens.ids = proj.ids;
        result.best_restart = restart;
        result.best_step = step;
      }
      result.best_trace.push_back(result.cosine);
      if (last) break;

      // Ascent on cosine evaluated at the hard point, applied to the
      // soft state.
      Eigen::MatrixXd grad =
          -embedder.EmbedTokensVjp(proj.hard, pooled_grad);
      if (!grad.allFinite()) {
        throw Error(ErrorCode::kNumerical,
                    "non-finite gradient at step " + std::to_string(step) +
                        " of restart " + std::to_string(restart));
      }

      const double t = static_cast<double>(step) + 1.0;
      const double bias1 = 1.0 - std::pow(kAdamBeta1, t);
      const double bias2 = 1.0 - std::pow(kAdamBeta2, t);
      adam_m = kAdamBeta1 * adam_m + (1.0 - kAdamBeta1) * grad;
      adam_v = kAdamBeta2 * adam_v.array().matrix() +
               (1.0 - kAdamBeta2) * grad.array().square().matrix();
      soft -= config.learning_rate *
              ((adam_m / bias1).array() /
               ((adam_v / bias2).array().sqrt() + kAdamEps))
                  .matrix();
    }
  }

  result.d_clip = std::clamp(1.0 - result.cosine, 0.0, 2.0);
  return result;
}

PiResult InvertPromptForImage(const Embedder& embedder, const Image& image,
                              const PiConfig& config) {
  ValidateImage(image);
  return InvertPrompt(embedder, embedder.EmbedImage(image), config);
}

}  // namespace txsk
