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
// Trainable transform codec for sketch maps. The analysis path is four
// stride-2 convolutions down to a 64-channel latent grid; synthesis
// mirrors it with transposed convolutions and a sigmoid output. Latents
// are rounded to integers and range-coded under a per-channel
// discretized-logistic entropy model that is frozen into integer
// frequency tables after training. Values outside a table's support are
// escape-coded with 32 raw bits, so any latent grid is codable.

#ifndef TXSK_NTC_H_
#define TXSK_NTC_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "txsk/nn.h"
#include "txsk/types.h"

namespace txsk {

inline constexpr int kNtcLatentChannels = 64;

// Frozen per-channel code table. Frequencies cover the inclusive value
// range [min_value, max_value] followed by one escape symbol, and sum
// to exactly 2^16.
struct EntropyTable {
  int32_t min_value = 0;
  int32_t max_value = -1;
  std::vector<uint16_t> freq;
  std::vector<uint32_t> cum;  // prefix sums, cum[i] = sum of freq[0..i)

  int symbol_count() const { return static_cast<int>(freq.size()); }
  void RebuildCum();
};

struct NtcModelMeta {
  double lambda = 0.0;
  double target_bpp = 0.0;
  double validation_bpp = 0.0;
  double validation_quality = 0.0;
  uint64_t seed = 0;
  std::string distortion = "ms-ssim";
};

struct NtcModel {
  int hidden_channels = 0;
  nn::ConvLayer a1, a2, a3, a4;
  nn::TconvLayer s1, s2, s3, s4;
  Eigen::VectorXd ent_mu;     // per latent channel
  Eigen::VectorXd ent_log_s;  // log scale of the logistic
  std::vector<EntropyTable> tables;  // empty until FreezeTables
  NtcModelMeta meta;

  NtcModel() = default;
  NtcModel(int hidden, uint64_t init_seed);

  // plane: 1 x h x w in [0,1]; latent: 64 x ceil(h/16) x ceil(w/16).
  nn::Tensor Analyze(const nn::Tensor& plane) const;
  nn::Tensor Synthesize(const nn::Tensor& latent, int out_h, int out_w) const;

  bool frozen() const { return !tables.empty(); }
  // Truncates every parameter to float precision, so the in-memory
  // model and its serialized form behave identically.
  void RoundParamsToF32();
  // Builds the integer code tables from the logistic parameters.
  // Support spans the central mass; tails go to the escape symbol.
  void FreezeTables();
};

// Continuous rate of a (possibly noisy) latent under the logistic
// model, in bits; used as the training objective. When `grad` is given
// it receives d bits / d latent, and mu/log_s gradients are
// accumulated into the provided vectors.
double LatentRateBits(const NtcModel& model, const nn::Tensor& latent,
                      nn::Tensor* grad, Eigen::VectorXd* mu_grad,
                      Eigen::VectorXd* log_s_grad);

// Rounds latents and range-codes them channel by channel. The payload
// has no framing besides the coder flush; dimensions travel in the
// enclosing container.
std::vector<uint8_t> EncodeSketch(const SketchMap& sketch,
                                  const NtcModel& model);

// Inverse of EncodeSketch for the given output extent. Bytes from a
// mismatched model yield a decode error or a garbage map, never a
// crash.
SketchMap DecodeSketch(std::span<const uint8_t> bytes, const NtcModel& model,
                       int width, int height);

// Table-based estimate of EncodeSketch's output size in bits, counting
// 32 extra bits per escape-coded latent. Excludes the coder flush.
double EstimateSketchBits(const SketchMap& sketch, const NtcModel& model);

struct NtcTrainConfig {
  std::vector<double> lambda_grid = {0.0625, 0.25, 1.0, 4.0, 16.0};
  int epochs = 2;
  int batch_size = 4;
  int crop_size = 64;
  double learning_rate = 0.002;
  int hidden_channels = 32;
  double target_bpp = 0.01;
  uint64_t seed = 0;
  // Maps held out from the end of the dataset for bpp/quality readings.
  int validation_count = 8;
  // Only the perceptual distortion is implemented; the field is kept
  // explicit so configs stay self-describing.
  std::string distortion = "ms-ssim";
};

struct LambdaPoint {
  double lambda = 0.0;
  double validation_bpp = 0.0;
  double validation_quality = 0.0;
};

struct NtcTrainReport {
  std::vector<LambdaPoint> grid;
  int selected_index = -1;
};

// Trains one model per lambda on random crops of the training split,
// freezes each, and returns the model whose validation bpp lands
// nearest target_bpp (lowest grid index on ties). Deterministic given
// the config seed.
NtcModel TrainNtc(const NtcTrainConfig& config,
                  std::span<const SketchMap> dataset,
                  NtcTrainReport* report = nullptr);

// Serialized model: magic "TXNM", version, architecture and training
// metadata, float32 parameter blob, code tables, trailing CRC-32.
std::vector<uint8_t> SerializeNtcModel(const NtcModel& model);
NtcModel DeserializeNtcModel(std::span<const uint8_t> bytes);
void SaveNtcModel(const NtcModel& model, const std::string& path);
NtcModel LoadNtcModel(const std::string& path);

}  // namespace txsk

#endif  // TXSK_NTC_H_
