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

#ifndef TXSK_PROMPT_INVERSION_H_
#define TXSK_PROMPT_INVERSION_H_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "txsk/embedder.h"
#include "txsk/types.h"

namespace txsk {

// Search hyperparameters for hard prompt optimization.
struct PiConfig {
  int prompt_length = 16;
  int step_count = 1000;
  double learning_rate = 0.1;
  int restart_count = 3;
  uint64_t random_seed = 0;
};

// Nearest-codeword projection of a soft prompt.
struct Projection {
  std::vector<uint32_t> ids;
  Eigen::MatrixXd hard;  // rows are the selected codebook rows
};

// Outcome of one inversion run. `objective_trace` records the cosine
// objective at every evaluated step across all restarts, in restart
// order; `best_trace` is its running maximum and is non-decreasing.
struct PiResult {
  TokenSequence tokens;
  double cosine = 0.0;   // best objective achieved
  double d_clip = 0.0;   // 1 - cosine, clamped to [0, 2]
  int best_restart = 0;
  int best_step = 0;
  std::vector<double> objective_trace;
  std::vector<double> best_trace;
};

// Maps each row of `soft` to the nearest codebook row in Euclidean
// distance. Ties break toward the lowest row index, so projecting an
// exact codeword returns it and the map is idempotent.
Projection ProjectToCodebook(const Eigen::MatrixXd& soft,
                             const Eigen::MatrixXd& codebook);

// Searches for a token sequence whose pooled embedding is maximally
// cosine-similar to `target_feature`. The continuous relaxation keeps a
// soft embedding per position; the objective and its gradient are
// evaluated at the projected (hard) embeddings and the gradient is
// applied to the soft state with adaptive-moment updates. Runs
// `restart_count` independent restarts seeded from `random_seed` and
// returns the best projected sequence seen at any step (earlier restart
// and step win ties).
PiResult InvertPrompt(const Embedder& embedder,
                      const Eigen::VectorXd& target_feature,
                      const PiConfig& config);

// Convenience wrapper: embeds `image` first, then inverts.
PiResult InvertPromptForImage(const Embedder& embedder, const Image& image,
                              const PiConfig& config);

}  // namespace txsk

#endif  // TXSK_PROMPT_INVERSION_H_
