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

#include "txsk/ntc.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <utility>

#include <zlib.h>

#include "txsk/error.h"
#include "txsk/image_io.h"
#include "txsk/ms_ssim.h"
#include "txsk/range_coder.h"
#include "txsk/rng.h"
#include "wire.h"

namespace txsk {

namespace {

constexpr double kLeakySlope = 0.2;
constexpr uint32_t kFreqTotal = kRangeCoderMaxTotal;  // 2^16
constexpr int kMaxSupport = 1024;   // symbols per table before escape
constexpr int kEscapeBits = 32;
constexpr double kMinTrainProb = 1e-10;
constexpr double kLog2E = 1.4426950408889634;  // 1 / ln 2

constexpr char kModelMagic[4] = {'T', 'X', 'N', 'M'};
constexpr uint8_t kModelVersion = 1;

double StableSigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Probability mass of the integer-width bin around t under a logistic
// with location mu and scale s.
double LogisticBinMass(double t, double mu, double s) {
  return StableSigmoid((t + 0.5 - mu) / s) - StableSigmoid((t - 0.5 - mu) / s);
}

int32_t QuantizeLatent(double y) {
  const double clamped =
      std::clamp(y, -2147483000.0, 2147483000.0);  // keep int32-safe
  return static_cast<int32_t>(std::llround(clamped));
}

struct LatentDims {
  int h1, w1, h2, w2, h3, w3, h4, w4;
};

LatentDims DimsFor(int height, int width) {
  LatentDims d;
  d.h1 = nn::ConvOutSize(height);
  d.w1 = nn::ConvOutSize(width);
  d.h2 = nn::ConvOutSize(d.h1);
  d.w2 = nn::ConvOutSize(d.w1);
  d.h3 = nn::ConvOutSize(d.h2);
  d.w3 = nn::ConvOutSize(d.w2);
  d.h4 = nn::ConvOutSize(d.h3);
  d.w4 = nn::ConvOutSize(d.w3);
  return d;
}

nn::Tensor PlaneFromSketch(const SketchMap& sketch) {
  nn::Tensor plane(1, sketch.height, sketch.width);
  for (size_t i = 0; i < sketch.data.size(); ++i) {
    plane.v[i] = sketch.data[i];
  }
  return plane;
}

SketchMap SketchFromPlane(const nn::Tensor& plane) {
  SketchMap sketch(plane.width, plane.height);
  for (size_t i = 0; i < plane.v.size(); ++i) {
    sketch.data[i] = static_cast<float>(std::clamp(plane.v[i], 0.0, 1.0));
  }
  return sketch;
}

void RequireFrozen(const NtcModel& model) {
  if (!model.frozen()) {
    throw Error(ErrorCode::kArgument, "model has no frozen code tables");
  }
}

// Parameter blocks in serialization order.
std::vector<std::pair<double*, Eigen::Index>> ParamBlocks(NtcModel* m) {
  std::vector<std::pair<double*, Eigen::Index>> blocks;
  for (nn::ConvLayer* l : {&m->a1, &m->a2, &m->a3, &m->a4}) {
    blocks.emplace_back(l->weight.data(), l->weight.size());
    blocks.emplace_back(l->bias.data(), l->bias.size());
  }
  for (nn::TconvLayer* l : {&m->s1, &m->s2, &m->s3, &m->s4}) {
    blocks.emplace_back(l->weight.data(), l->weight.size());
    blocks.emplace_back(l->bias.data(), l->bias.size());
  }
  blocks.emplace_back(m->ent_mu.data(), m->ent_mu.size());
  blocks.emplace_back(m->ent_log_s.data(), m->ent_log_s.size());
  return blocks;
}

}  // namespace

void EntropyTable::RebuildCum() {
  cum.assign(freq.size() + 1, 0);
  for (size_t i = 0; i < freq.size(); ++i) {
    cum[i + 1] = cum[i] + freq[i];
  }
}

namespace {

int CheckedHidden(int hidden) {
  if (hidden < 1) {
    throw Error(ErrorCode::kConfig, "hidden channel count must be >= 1");
  }
  return hidden;
}

}  // namespace

NtcModel::NtcModel(int hidden, uint64_t init_seed)
    : hidden_channels(CheckedHidden(hidden)),
      a1(1, hidden),
      a2(hidden, hidden),
      a3(hidden, hidden),
      a4(hidden, kNtcLatentChannels),
      s1(kNtcLatentChannels, hidden),
      s2(hidden, hidden),
      s3(hidden, hidden),
      s4(hidden, 1),
      ent_mu(Eigen::VectorXd::Zero(kNtcLatentChannels)),
      ent_log_s(Eigen::VectorXd::Zero(kNtcLatentChannels)) {
  Rng rng(init_seed);
  a1.InitHe(rng);
  a2.InitHe(rng);
  a3.InitHe(rng);
  a4.InitHe(rng);
  s1.InitHe(rng);
  s2.InitHe(rng);
  s3.InitHe(rng);
  s4.InitHe(rng);
}

nn::Tensor NtcModel::Analyze(const nn::Tensor& plane) const {
  nn::Tensor t = nn::LeakyRelu(a1.Forward(plane), kLeakySlope);
  t = nn::LeakyRelu(a2.Forward(t), kLeakySlope);
  t = nn::LeakyRelu(a3.Forward(t), kLeakySlope);
  return a4.Forward(t);
}

nn::Tensor NtcModel::Synthesize(const nn::Tensor& latent, int out_h,
                                int out_w) const {
  const LatentDims d = DimsFor(out_h, out_w);
  nn::Tensor t = nn::LeakyRelu(s1.Forward(latent, d.h3, d.w3), kLeakySlope);
  t = nn::LeakyRelu(s2.Forward(t, d.h2, d.w2), kLeakySlope);
  t = nn::LeakyRelu(s3.Forward(t, d.h1, d.w1), kLeakySlope);
  return nn::Sigmoid(s4.Forward(t, out_h, out_w));
}

void NtcModel::RoundParamsToF32() {
  for (auto [data, n] : ParamBlocks(this)) {
    for (Eigen::Index i = 0; i < n; ++i) {
      data[i] = static_cast<double>(static_cast<float>(data[i]));
    }
  }
}

void NtcModel::FreezeTables() {
  if (!ent_mu.allFinite() || !ent_log_s.allFinite()) {
    throw Error(ErrorCode::kNumerical, "non-finite entropy parameters");
  }
  tables.assign(kNtcLatentChannels, EntropyTable());
  for (int c = 0; c < kNtcLatentChannels; ++c) {
    const double mu = ent_mu[c];
    const double s = std::exp(ent_log_s[c]);
    // Cover the central mass out to where a bin holds less than half a
    // frequency unit; everything further rides the escape symbol.
    int32_t lo = static_cast<int32_t>(std::floor(mu - 12.0 * s - 0.5));
    int32_t hi = static_cast<int32_t>(std::ceil(mu + 12.0 * s + 0.5));
    if (hi - lo + 1 > kMaxSupport) {
      const int32_t center = static_cast<int32_t>(std::llround(mu));
      lo = center - kMaxSupport / 2 + 1;
      hi = lo + kMaxSupport - 1;
    }

    const int support = hi - lo + 1;
    std::vector<double> mass(support + 1);
    double total_mass = 0.0;
    for (int i = 0; i < support; ++i) {
      mass[i] = std::max(LogisticBinMass(lo + i, mu, s), 0.0);
      total_mass += mass[i];
    }
    mass[support] = std::max(1.0 - total_mass, 1e-9);  // escape: tail mass
    total_mass += mass[support];

    // Integer allocation: one guaranteed count per symbol, remainder by
    // largest fractional part, index as the tie-break.
    const int n_sym = support + 1;
    const double scale = static_cast<double>(kFreqTotal - n_sym) / total_mass;
    EntropyTable table;
    table.min_value = lo;
    table.max_value = hi;
    table.freq.resize(n_sym);
    std::vector<std::pair<double, int>> rema(n_sym);
    uint32_t assigned = 0;
    for (int i = 0; i < n_sym; ++i) {
      const double exact = mass[i] * scale;
      const double base = std::floor(exact);
      table.freq[i] = static_cast<uint16_t>(1 + static_cast<uint32_t>(base));
      rema[i] = {exact - base, i};
      assigned += table.freq[i];
    }
    std::sort(rema.begin(), rema.end(), [](const auto& x, const auto& y) {
      if (x.first != y.first) return x.first > y.first;
      return x.second < y.second;
    });
    for (size_t i = 0; assigned < kFreqTotal; ++i) {
      table.freq[rema[i % rema.size()].second] += 1;
      ++assigned;
    }
    table.RebuildCum();
    tables[c] = std::move(table);
  }
}

double LatentRateBits(const NtcModel& model, const nn::Tensor& latent,
                      nn::Tensor* grad, Eigen::VectorXd* mu_grad,
                      Eigen::VectorXd* log_s_grad) {
  if (latent.channels != kNtcLatentChannels) {
    throw Error(ErrorCode::kShape, "latent channel count mismatch");
  }
  if (grad != nullptr) {
    *grad = nn::Tensor(latent.channels, latent.height, latent.width);
  }
  double bits = 0.0;
  const size_t plane = static_cast<size_t>(latent.height) * latent.width;
  for (int c = 0; c < kNtcLatentChannels; ++c) {
    const double mu = model.ent_mu[c];
    const double s = std::exp(model.ent_log_s[c]);
    for (size_t i = 0; i < plane; ++i) {
      const size_t idx = static_cast<size_t>(c) * plane + i;
      const double t = latent.v[idx];
      const double z_hi = (t + 0.5 - mu) / s;
      const double z_lo = (t - 0.5 - mu) / s;
      const double sig_hi = StableSigmoid(z_hi);
      const double sig_lo = StableSigmoid(z_lo);
      const double p = sig_hi - sig_lo;
      if (p <= kMinTrainProb) {
        bits += -std::log2(kMinTrainProb);
        continue;  // clamped region: no gradient
      }
      bits += -std::log2(p);
      if (grad != nullptr) {
        const double d_hi = sig_hi * (1.0 - sig_hi);
        const double d_lo = sig_lo * (1.0 - sig_lo);
        const double dbits_dp = -kLog2E / p;
        grad->v[idx] = dbits_dp * (d_hi - d_lo) / s;
        if (mu_grad != nullptr) {
          (*mu_grad)[c] += dbits_dp * -(d_hi - d_lo) / s;
        }
        if (log_s_grad != nullptr) {
          (*log_s_grad)[c] += dbits_dp * -(d_hi * z_hi - d_lo * z_lo);
        }
      }
    }
  }
  return bits;
}

namespace {

std::vector<int32_t> QuantizedLatents(const SketchMap& sketch,
                                      const NtcModel& model,
                                      LatentDims* dims) {
  ValidateSketch(sketch);
  const nn::Tensor latent = model.Analyze(PlaneFromSketch(sketch));
  *dims = DimsFor(sketch.height, sketch.width);
  std::vector<int32_t> q(latent.v.size());
  for (size_t i = 0; i < latent.v.size(); ++i) {
    q[i] = QuantizeLatent(latent.v[i]);
  }
  return q;
}

}  // namespace

std::vector<uint8_t> EncodeSketch(const SketchMap& sketch,
                                  const NtcModel& model) {
  RequireFrozen(model);
  LatentDims dims;
  const std::vector<int32_t> latents = QuantizedLatents(sketch, model, &dims);
  const size_t plane = static_cast<size_t>(dims.h4) * dims.w4;

  std::vector<uint8_t> bytes;
  RangeEncoder enc(&bytes);
  for (int c = 0; c < kNtcLatentChannels; ++c) {
    const EntropyTable& table = model.tables[c];
    const int escape = table.symbol_count() - 1;
    for (size_t i = 0; i < plane; ++i) {
      const int32_t v = latents[static_cast<size_t>(c) * plane + i];
      if (v >= table.min_value && v <= table.max_value) {
        const int sym = static_cast<int>(v - table.min_value);
        enc.Encode(table.cum[sym], table.freq[sym], kFreqTotal);
      } else {
        enc.Encode(table.cum[escape], table.freq[escape], kFreqTotal);
        enc.EncodeBypass(static_cast<uint32_t>(v), kEscapeBits);
      }
    }
  }
  enc.Flush();
  return bytes;
}

SketchMap DecodeSketch(std::span<const uint8_t> bytes, const NtcModel& model,
                       int width, int height) {
  RequireFrozen(model);
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kArgument, "sketch extent must be positive");
  }
  const LatentDims dims = DimsFor(height, width);
  nn::Tensor latent(kNtcLatentChannels, dims.h4, dims.w4);
  const size_t plane = static_cast<size_t>(dims.h4) * dims.w4;

  RangeDecoder dec(bytes.data(), bytes.size());
  for (int c = 0; c < kNtcLatentChannels; ++c) {
    const EntropyTable& table = model.tables[c];
    const int escape = table.symbol_count() - 1;
    for (size_t i = 0; i < plane; ++i) {
      const uint32_t target = dec.DecodeTarget(kFreqTotal);
      const int sym = static_cast<int>(
          std::upper_bound(table.cum.begin(), table.cum.end(), target) -
          table.cum.begin() - 1);
      dec.Consume(table.cum[sym], table.freq[sym]);
      int32_t v;
      if (sym == escape) {
        v = static_cast<int32_t>(dec.DecodeBypass(kEscapeBits));
      } else {
        v = table.min_value + sym;
      }
      latent.v[static_cast<size_t>(c) * plane + i] = v;
    }
  }
  if (dec.consumed() != bytes.size()) {
    throw Error(ErrorCode::kDecode, "trailing bytes after sketch stream");
  }
  return SketchFromPlane(model.Synthesize(latent, height, width));
}

double EstimateSketchBits(const SketchMap& sketch, const NtcModel& model) {
  RequireFrozen(model);
  LatentDims dims;
  const std::vector<int32_t> latents = QuantizedLatents(sketch, model, &dims);
  const size_t plane = static_cast<size_t>(dims.h4) * dims.w4;

  double bits = 0.0;
  for (int c = 0; c < kNtcLatentChannels; ++c) {
    const EntropyTable& table = model.tables[c];
    const int escape = table.symbol_count() - 1;
    for (size_t i = 0; i < plane; ++i) {
      const int32_t v = latents[static_cast<size_t>(c) * plane + i];
      int sym = escape;
      if (v >= table.min_value && v <= table.max_value) {
        sym = static_cast<int>(v - table.min_value);
      }
      bits += -std::log2(static_cast<double>(table.freq[sym]) / kFreqTotal);
      if (sym == escape) bits += kEscapeBits;
    }
  }
  return bits;
}

namespace {

void ValidateTrainConfig(const NtcTrainConfig& config) {
  if (config.lambda_grid.empty()) {
    throw Error(ErrorCode::kConfig, "lambda grid is empty");
  }
  for (double l : config.lambda_grid) {
    if (!(l > 0.0)) {
      throw Error(ErrorCode::kConfig, "lambda values must be > 0");
    }
  }
  if (config.epochs < 1 || config.batch_size < 1) {
    throw Error(ErrorCode::kConfig, "epochs and batch size must be >= 1");
  }
  if (config.crop_size < 16) {
    throw Error(ErrorCode::kConfig, "crop size must be >= 16");
  }
  if (config.hidden_channels < 1) {
    throw Error(ErrorCode::kConfig, "hidden channel count must be >= 1");
  }
  if (!(config.target_bpp > 0.0)) {
    throw Error(ErrorCode::kConfig, "target bpp must be > 0");
  }
  if (config.validation_count < 1) {
    throw Error(ErrorCode::kConfig, "validation count must be >= 1");
  }
  if (config.distortion != "ms-ssim") {
    throw Error(ErrorCode::kConfig,
                "unsupported distortion: " + config.distortion);
  }
}

struct TrainedCandidate {
  NtcModel model;
  LambdaPoint point;
};

TrainedCandidate TrainOne(const NtcTrainConfig& config,
                          std::span<const SketchMap> train_split,
                          std::span<const SketchMap> val_split, double lambda,
                          int lambda_index) {
  NtcModel model(config.hidden_channels,
                 HashCombine(config.seed, 0xA000 + lambda_index));
  Rng data_rng(HashCombine(config.seed, 0xB000 + lambda_index));

  Eigen::VectorXd mu_grad = Eigen::VectorXd::Zero(kNtcLatentChannels);
  Eigen::VectorXd log_s_grad = Eigen::VectorXd::Zero(kNtcLatentChannels);

  nn::Adam adam(config.learning_rate);
  for (nn::ConvLayer* l : {&model.a1, &model.a2, &model.a3, &model.a4}) {
    adam.Register(&l->weight, &l->weight_grad);
    adam.Register(&l->bias, &l->bias_grad);
  }
  for (nn::TconvLayer* l : {&model.s1, &model.s2, &model.s3, &model.s4}) {
    adam.Register(&l->weight, &l->weight_grad);
    adam.Register(&l->bias, &l->bias_grad);
  }
  adam.Register(&model.ent_mu, &mu_grad);
  adam.Register(&model.ent_log_s, &log_s_grad);

  const int train_count = static_cast<int>(train_split.size());
  const int steps_per_epoch =
      (train_count + config.batch_size - 1) / config.batch_size;
  int global_step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (int step = 0; step < steps_per_epoch; ++step, ++global_step) {
      for (nn::ConvLayer* l : {&model.a1, &model.a2, &model.a3, &model.a4}) {
        l->ZeroGrad();
      }
      for (nn::TconvLayer* l : {&model.s1, &model.s2, &model.s3, &model.s4}) {
        l->ZeroGrad();
      }
      mu_grad.setZero();
      log_s_grad.setZero();

      double loss = 0.0;
      for (int item = 0; item < config.batch_size; ++item) {
        const SketchMap& map =
            train_split[data_rng.Below(static_cast<uint64_t>(train_count))];
        const int ch = std::min(config.crop_size, map.height);
        const int cw = std::min(config.crop_size, map.width);
        const int oy =
            static_cast<int>(data_rng.Below(map.height - ch + 1));
        const int ox = static_cast<int>(data_rng.Below(map.width - cw + 1));

        nn::Tensor x(1, ch, cw);
        for (int y = 0; y < ch; ++y) {
          for (int xx = 0; xx < cw; ++xx) {
            x.at(0, y, xx) = map.at(oy + y, ox + xx);
          }
        }

        // Analysis with kept pre-activations for the reverse pass.
        const nn::Tensor t1 = model.a1.Forward(x);
        const nn::Tensor r1 = nn::LeakyRelu(t1, kLeakySlope);
        const nn::Tensor t2 = model.a2.Forward(r1);
        const nn::Tensor r2 = nn::LeakyRelu(t2, kLeakySlope);
        const nn::Tensor t3 = model.a3.Forward(r2);
        const nn::Tensor r3 = nn::LeakyRelu(t3, kLeakySlope);
        const nn::Tensor latent = model.a4.Forward(r3);

        nn::Tensor noisy = latent;
        for (double& v : noisy.v) {
          v += data_rng.Uniform() - 0.5;
        }

        Eigen::VectorXd item_mu_grad =
            Eigen::VectorXd::Zero(kNtcLatentChannels);
        Eigen::VectorXd item_log_s_grad =
            Eigen::VectorXd::Zero(kNtcLatentChannels);
        nn::Tensor rate_grad;
        const double rate_bits = LatentRateBits(model, noisy, &rate_grad,
                                                &item_mu_grad,
                                                &item_log_s_grad);

        const LatentDims d = DimsFor(ch, cw);
        const nn::Tensor u1 = model.s1.Forward(noisy, d.h3, d.w3);
        const nn::Tensor v1 = nn::LeakyRelu(u1, kLeakySlope);
        const nn::Tensor u2 = model.s2.Forward(v1, d.h2, d.w2);
        const nn::Tensor v2 = nn::LeakyRelu(u2, kLeakySlope);
        const nn::Tensor u3 = model.s3.Forward(v2, d.h1, d.w1);
        const nn::Tensor v3 = nn::LeakyRelu(u3, kLeakySlope);
        const nn::Tensor u4 = model.s4.Forward(v3, ch, cw);
        const nn::Tensor out = nn::Sigmoid(u4);

        std::vector<double> ms_grad;
        const double ms =
            MsSsimPlaneWithGrad(x.v, out.v, ch, cw, &ms_grad);

        const double pixels = static_cast<double>(ch) * cw;
        loss += (rate_bits / pixels + lambda * (1.0 - ms)) /
                config.batch_size;

        // Reverse pass. Distortion first: d loss / d out.
        nn::Tensor g_out(1, ch, cw);
        const double dist_scale = -lambda / config.batch_size;
        for (size_t i = 0; i < g_out.v.size(); ++i) {
          g_out.v[i] = dist_scale * ms_grad[i];
        }
        nn::Tensor g = nn::SigmoidGrad(out, g_out);
        g = model.s4.Backward(v3, g);
        g = nn::LeakyReluGrad(u3, g, kLeakySlope);
        g = model.s3.Backward(v2, g);
        g = nn::LeakyReluGrad(u2, g, kLeakySlope);
        g = model.s2.Backward(v1, g);
        g = nn::LeakyReluGrad(u1, g, kLeakySlope);
        g = model.s1.Backward(noisy, g);

        const double rate_scale = 1.0 / (config.batch_size * pixels);
        for (size_t i = 0; i < g.v.size(); ++i) {
          g.v[i] += rate_scale * rate_grad.v[i];
        }
        mu_grad += rate_scale * item_mu_grad;
        log_s_grad += rate_scale * item_log_s_grad;

        // Additive noise has unit derivative; continue into analysis.
        g = model.a4.Backward(r3, g);
        g = nn::LeakyReluGrad(t3, g, kLeakySlope);
        g = model.a3.Backward(r2, g);
        g = nn::LeakyReluGrad(t2, g, kLeakySlope);
        g = model.a2.Backward(r1, g);
        g = nn::LeakyReluGrad(t1, g, kLeakySlope);
        model.a1.Backward(x, g);
      }

      if (!std::isfinite(loss)) {
        throw Error(ErrorCode::kNumerical,
                    "non-finite training loss at step " +
                        std::to_string(global_step));
      }
      adam.Step();
    }
  }

  model.RoundParamsToF32();
  model.FreezeTables();
  model.meta.lambda = lambda;
  model.meta.target_bpp = config.target_bpp;
  model.meta.seed = config.seed;
  model.meta.distortion = config.distortion;

  double bpp_sum = 0.0;
  double quality_sum = 0.0;
  for (const SketchMap& map : val_split) {
    const std::vector<uint8_t> bytes = EncodeSketch(map, model);
    bpp_sum += static_cast<double>(bytes.size()) * 8.0 /
               (static_cast<double>(map.width) * map.height);
    const SketchMap rec = DecodeSketch(bytes, model, map.width, map.height);
    quality_sum += MsSsim(map, rec);
  }
  model.meta.validation_bpp = bpp_sum / static_cast<double>(val_split.size());
  model.meta.validation_quality =
      quality_sum / static_cast<double>(val_split.size());

  TrainedCandidate candidate;
  candidate.point = {lambda, model.meta.validation_bpp,
                     model.meta.validation_quality};
  candidate.model = std::move(model);
  return candidate;
}

}  // namespace

NtcModel TrainNtc(const NtcTrainConfig& config,
                  std::span<const SketchMap> dataset, NtcTrainReport* report) {
  ValidateTrainConfig(config);
  if (dataset.empty()) {
    throw Error(ErrorCode::kData, "empty sketch dataset");
  }
  if (static_cast<int>(dataset.size()) <= config.validation_count) {
    throw Error(ErrorCode::kData, "dataset smaller than validation split");
  }
  for (const SketchMap& map : dataset) {
    ValidateSketch(map);
    if (std::min(map.width, map.height) < 16) {
      throw Error(ErrorCode::kData, "sketch maps must be at least 16x16");
    }
  }

  const size_t train_count = dataset.size() - config.validation_count;
  const std::span<const SketchMap> train_split = dataset.first(train_count);
  const std::span<const SketchMap> val_split = dataset.subspan(train_count);

  NtcModel best;
  double best_gap = std::numeric_limits<double>::infinity();
  NtcTrainReport local_report;
  for (size_t i = 0; i < config.lambda_grid.size(); ++i) {
    TrainedCandidate candidate =
        TrainOne(config, train_split, val_split, config.lambda_grid[i],
                 static_cast<int>(i));
    local_report.grid.push_back(candidate.point);
    const double gap =
        std::abs(candidate.point.validation_bpp - config.target_bpp);
    if (gap < best_gap) {
      best_gap = gap;
      best = std::move(candidate.model);
      local_report.selected_index = static_cast<int>(i);
    }
  }
  if (report != nullptr) {
    *report = std::move(local_report);
  }
  return best;
}

std::vector<uint8_t> SerializeNtcModel(const NtcModel& model) {
  RequireFrozen(model);
  std::vector<uint8_t> bytes;
  bytes.insert(bytes.end(), kModelMagic, kModelMagic + 4);
  wire::PutU8(&bytes, kModelVersion);
  wire::PutU16(&bytes, static_cast<uint16_t>(model.hidden_channels));
  wire::PutU16(&bytes, static_cast<uint16_t>(kNtcLatentChannels));
  wire::PutF64(&bytes, model.meta.lambda);
  wire::PutF64(&bytes, model.meta.target_bpp);
  wire::PutF64(&bytes, model.meta.validation_bpp);
  wire::PutF64(&bytes, model.meta.validation_quality);
  wire::PutU64(&bytes, model.meta.seed);
  wire::PutU8(&bytes, 0);  // distortion id: ms-ssim

  auto blocks = ParamBlocks(const_cast<NtcModel*>(&model));
  uint64_t param_count = 0;
  for (const auto& [data, n] : blocks) param_count += n;
  wire::PutU32(&bytes, static_cast<uint32_t>(param_count));
  for (const auto& [data, n] : blocks) {
    for (Eigen::Index i = 0; i < n; ++i) {
      wire::PutF32(&bytes, static_cast<float>(data[i]));
    }
  }

  for (const EntropyTable& table : model.tables) {
    wire::PutU32(&bytes, static_cast<uint32_t>(table.min_value));
    wire::PutU32(&bytes, static_cast<uint32_t>(table.max_value));
    for (uint16_t f : table.freq) {
      wire::PutU16(&bytes, f);
    }
  }

  const uint32_t crc = static_cast<uint32_t>(
      crc32(crc32(0, nullptr, 0), bytes.data(), bytes.size()));
  wire::PutU32(&bytes, crc);
  return bytes;
}

NtcModel DeserializeNtcModel(std::span<const uint8_t> bytes) {
  if (bytes.size() < 8) {
    throw Error(ErrorCode::kTruncation, "model data ends early");
  }
  const size_t body = bytes.size() - 4;
  const uint32_t stored = static_cast<uint32_t>(bytes[body]) << 24 |
                          static_cast<uint32_t>(bytes[body + 1]) << 16 |
                          static_cast<uint32_t>(bytes[body + 2]) << 8 |
                          static_cast<uint32_t>(bytes[body + 3]);
  const uint32_t computed =
      static_cast<uint32_t>(crc32(crc32(0, nullptr, 0), bytes.data(), body));
  if (stored != computed) {
    throw Error(ErrorCode::kCorruption, "model checksum mismatch");
  }

  wire::Reader r(bytes.first(body));
  char magic[4];
  for (char& ch : magic) ch = static_cast<char>(r.U8());
  if (std::memcmp(magic, kModelMagic, 4) != 0) {
    throw Error(ErrorCode::kFormat, "not a model file");
  }
  const uint8_t version = r.U8();
  if (version != kModelVersion) {
    throw Error(ErrorCode::kVersion,
                "unsupported model version " + std::to_string(version));
  }
  const int hidden = r.U16();
  const int latent_channels = r.U16();
  if (hidden < 1 || latent_channels != kNtcLatentChannels) {
    throw Error(ErrorCode::kFormat, "unsupported model architecture");
  }

  NtcModel model(hidden, 0);
  model.meta.lambda = r.F64();
  model.meta.target_bpp = r.F64();
  model.meta.validation_bpp = r.F64();
  model.meta.validation_quality = r.F64();
  model.meta.seed = r.U64();
  const uint8_t distortion = r.U8();
  if (distortion != 0) {
    throw Error(ErrorCode::kFormat, "unknown distortion id");
  }
  model.meta.distortion = "ms-ssim";

  auto blocks = ParamBlocks(&model);
  uint64_t expected = 0;
  for (const auto& [data, n] : blocks) expected += n;
  const uint32_t param_count = r.U32();
  if (param_count != expected) {
    throw Error(ErrorCode::kFormat, "parameter count mismatch");
  }
  for (const auto& [data, n] : blocks) {
    for (Eigen::Index i = 0; i < n; ++i) {
      data[i] = static_cast<double>(r.F32());
    }
  }

  model.tables.assign(kNtcLatentChannels, EntropyTable());
  for (int c = 0; c < kNtcLatentChannels; ++c) {
    EntropyTable& table = model.tables[c];
    table.min_value = static_cast<int32_t>(r.U32());
    table.max_value = static_cast<int32_t>(r.U32());
    const int64_t span = static_cast<int64_t>(table.max_value) -
                         table.min_value + 1;
    if (span < 1 || span > kMaxSupport) {
      throw Error(ErrorCode::kFormat, "code table support out of bounds");
    }
    table.freq.resize(static_cast<size_t>(span) + 1);
    uint32_t sum = 0;
    for (uint16_t& f : table.freq) {
      f = r.U16();
      if (f == 0) {
        throw Error(ErrorCode::kFormat, "zero frequency in code table");
      }
      sum += f;
    }
    if (sum != kFreqTotal) {
      throw Error(ErrorCode::kFormat, "code table does not sum to total");
    }
    table.RebuildCum();
  }

  if (r.remaining() != 0) {
    throw Error(ErrorCode::kFormat, "trailing bytes in model data");
  }
  return model;
}

void SaveNtcModel(const NtcModel& model, const std::string& path) {
  WriteFileBytes(path, SerializeNtcModel(model));
}

NtcModel LoadNtcModel(const std::string& path) {
  return DeserializeNtcModel(ReadFileBytes(path));
}

}  // namespace txsk
