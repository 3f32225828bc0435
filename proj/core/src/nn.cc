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

#include "txsk/nn.h"

#include <cmath>

#include "txsk/error.h"

namespace txsk {
namespace nn {

namespace {

// Patch matrix for the stride-2 convolution: row = output position
// (oy * out_w + ox), column = (ic * kKernel + ky) * kKernel + kx.
// Out-of-bounds taps read as zero (zero padding).
Eigen::MatrixXd Im2col(const Tensor& in, int out_h, int out_w) {
  Eigen::MatrixXd patches =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out_h) * out_w,
                            static_cast<Eigen::Index>(in.channels) * kKernel *
                                kKernel);
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      const Eigen::Index row = static_cast<Eigen::Index>(oy) * out_w + ox;
      for (int ic = 0; ic < in.channels; ++ic) {
        for (int ky = 0; ky < kKernel; ++ky) {
          const int y = oy * kStride + ky - kPad;
          if (y < 0 || y >= in.height) continue;
          for (int kx = 0; kx < kKernel; ++kx) {
            const int x = ox * kStride + kx - kPad;
            if (x < 0 || x >= in.width) continue;
            patches(row, (static_cast<Eigen::Index>(ic) * kKernel + ky) *
                             kKernel +
                             kx) = in.at(ic, y, x);
          }
        }
      }
    }
  }
  return patches;
}

// Adjoint of Im2col: scatter-adds patch-space values back to a CHW grid.
void Col2imAdd(const Eigen::MatrixXd& patches, int out_h, int out_w,
               Tensor* grid) {
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      const Eigen::Index row = static_cast<Eigen::Index>(oy) * out_w + ox;
      for (int ic = 0; ic < grid->channels; ++ic) {
        for (int ky = 0; ky < kKernel; ++ky) {
          const int y = oy * kStride + ky - kPad;
          if (y < 0 || y >= grid->height) continue;
          for (int kx = 0; kx < kKernel; ++kx) {
            const int x = ox * kStride + kx - kPad;
            if (x < 0 || x >= grid->width) continue;
            grid->at(ic, y, x) +=
                patches(row, (static_cast<Eigen::Index>(ic) * kKernel + ky) *
                                 kKernel +
                                 kx);
          }
        }
      }
    }
  }
}

Eigen::Map<const Eigen::MatrixXd> AsMatrix(const Tensor& t) {
  // Column c of the map is channel c: entries within a channel are
  // contiguous in CHW order.
  return Eigen::Map<const Eigen::MatrixXd>(
      t.v.data(), static_cast<Eigen::Index>(t.height) * t.width, t.channels);
}

Eigen::Map<Eigen::MatrixXd> AsMatrix(Tensor& t) {
  return Eigen::Map<Eigen::MatrixXd>(
      t.v.data(), static_cast<Eigen::Index>(t.height) * t.width, t.channels);
}

// Shared core: convolution of `in` with `weight` into out_ch channels.
Tensor ConvForward(const Tensor& in, const Eigen::MatrixXd& weight,
                   const Eigen::VectorXd* bias, int out_ch) {
  const int out_h = ConvOutSize(in.height);
  const int out_w = ConvOutSize(in.width);
  Tensor out(out_ch, out_h, out_w);
  // Row-major output positions match the column layout of AsMatrix.
  AsMatrix(out) = Im2col(in, out_h, out_w) * weight;
  if (bias != nullptr) {
    AsMatrix(out).rowwise() += bias->transpose();
  }
  return out;
}

Tensor ConvGradInput(const Tensor& grad_out, const Eigen::MatrixXd& weight,
                     int in_ch, int in_h, int in_w) {
  Tensor grad_in(in_ch, in_h, in_w);
  const Eigen::MatrixXd patches = AsMatrix(grad_out) * weight.transpose();
  Col2imAdd(patches, grad_out.height, grad_out.width, &grad_in);
  return grad_in;
}

void ConvGradWeight(const Tensor& in, const Tensor& grad_out,
                    Eigen::MatrixXd* weight_grad) {
  *weight_grad +=
      Im2col(in, grad_out.height, grad_out.width).transpose() *
      AsMatrix(grad_out);
}

Eigen::VectorXd ChannelSums(const Tensor& t) {
  return AsMatrix(t).colwise().sum().transpose();
}

}  // namespace

int ConvOutSize(int in) { return (in + kStride - 1) / kStride; }

ConvLayer::ConvLayer(int in_channels, int out_channels)
    : in_ch(in_channels),
      out_ch(out_channels),
      weight(Eigen::MatrixXd::Zero(
          static_cast<Eigen::Index>(in_channels) * kKernel * kKernel,
          out_channels)),
      bias(Eigen::VectorXd::Zero(out_channels)),
      weight_grad(Eigen::MatrixXd::Zero(weight.rows(), weight.cols())),
      bias_grad(Eigen::VectorXd::Zero(out_channels)) {}

void ConvLayer::InitHe(Rng& rng) {
  const double scale = std::sqrt(2.0 / static_cast<double>(weight.rows()));
  for (Eigen::Index c = 0; c < weight.cols(); ++c) {
    for (Eigen::Index r = 0; r < weight.rows(); ++r) {
      weight(r, c) = rng.Normal() * scale;
    }
  }
  bias.setZero();
}

void ConvLayer::ZeroGrad() {
  weight_grad.setZero();
  bias_grad.setZero();
}

Tensor ConvLayer::Forward(const Tensor& in) const {
  if (in.channels != in_ch) {
    throw Error(ErrorCode::kShape, "conv input channel mismatch");
  }
  return ConvForward(in, weight, &bias, out_ch);
}

Tensor ConvLayer::Backward(const Tensor& in, const Tensor& grad_out) {
  ConvGradWeight(in, grad_out, &weight_grad);
  bias_grad += ChannelSums(grad_out);
  return ConvGradInput(grad_out, weight, in.channels, in.height, in.width);
}

TconvLayer::TconvLayer(int low_channels, int high_channels)
    : low_ch(low_channels),
      high_ch(high_channels),
      weight(Eigen::MatrixXd::Zero(
          static_cast<Eigen::Index>(high_channels) * kKernel * kKernel,
          low_channels)),
      bias(Eigen::VectorXd::Zero(high_channels)),
      weight_grad(Eigen::MatrixXd::Zero(weight.rows(), weight.cols())),
      bias_grad(Eigen::VectorXd::Zero(high_channels)) {}

void TconvLayer::InitHe(Rng& rng) {
  // Each output pixel receives roughly kKernel^2 / kStride^2 taps per
  // low channel.
  const double fan_in =
      static_cast<double>(low_ch) * kKernel * kKernel / (kStride * kStride);
  const double scale = std::sqrt(2.0 / fan_in);
  for (Eigen::Index c = 0; c < weight.cols(); ++c) {
    for (Eigen::Index r = 0; r < weight.rows(); ++r) {
      weight(r, c) = rng.Normal() * scale;
    }
  }
  bias.setZero();
}

void TconvLayer::ZeroGrad() {
  weight_grad.setZero();
  bias_grad.setZero();
}

Tensor TconvLayer::Forward(const Tensor& in, int out_h, int out_w) const {
  if (in.channels != low_ch) {
    throw Error(ErrorCode::kShape, "tconv input channel mismatch");
  }
  if (ConvOutSize(out_h) != in.height || ConvOutSize(out_w) != in.width) {
    throw Error(ErrorCode::kShape, "tconv output extent incompatible");
  }
  Tensor out = ConvGradInput(in, weight, high_ch, out_h, out_w);
  AsMatrix(out).rowwise() += bias.transpose();
  return out;
}

Tensor TconvLayer::Backward(const Tensor& in, const Tensor& grad_out) {
  // Forward here is the adjoint convolution's input-gradient, so the
  // roles of input and output gradient swap relative to ConvLayer.
  ConvGradWeight(grad_out, in, &weight_grad);
  bias_grad += ChannelSums(grad_out);
  return ConvForward(grad_out, weight, nullptr, low_ch);
}

Tensor LeakyRelu(const Tensor& in, double slope) {
  Tensor out = in;
  for (double& x : out.v) {
    if (x < 0.0) x *= slope;
  }
  return out;
}

Tensor LeakyReluGrad(const Tensor& in, const Tensor& grad_out, double slope) {
  Tensor grad = grad_out;
  for (size_t i = 0; i < grad.v.size(); ++i) {
    if (in.v[i] < 0.0) grad.v[i] *= slope;
  }
  return grad;
}

Tensor Sigmoid(const Tensor& in) {
  Tensor out = in;
  for (double& x : out.v) {
    x = 1.0 / (1.0 + std::exp(-x));
  }
  return out;
}

Tensor SigmoidGrad(const Tensor& out, const Tensor& grad_out) {
  Tensor grad = grad_out;
  for (size_t i = 0; i < grad.v.size(); ++i) {
    grad.v[i] *= out.v[i] * (1.0 - out.v[i]);
  }
  return grad;
}

Adam::Adam(double learning_rate, double beta1, double beta2, double eps)
    : learning_rate_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::Register(double* param, const double* grad, Eigen::Index n) {
  blocks_.push_back(Block{param, grad, n, Eigen::VectorXd::Zero(n),
                          Eigen::VectorXd::Zero(n)});
}

void Adam::Register(Eigen::MatrixXd* param, const Eigen::MatrixXd* grad) {
  Register(param->data(), grad->data(), param->size());
}

void Adam::Register(Eigen::VectorXd* param, const Eigen::VectorXd* grad) {
  Register(param->data(), grad->data(), param->size());
}

void Adam::Step() {
  ++t_;
  const double bias1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (Block& b : blocks_) {
    Eigen::Map<Eigen::VectorXd> p(b.param, b.n);
    Eigen::Map<const Eigen::VectorXd> g(b.grad, b.n);
    b.m = beta1_ * b.m + (1.0 - beta1_) * g;
    b.v = beta2_ * b.v.array().matrix() +
          (1.0 - beta2_) * g.array().square().matrix();
    p.array() -= learning_rate_ * (b.m.array() / bias1) /
                 ((b.v.array() / bias2).sqrt() + eps_);
  }
}

}  // namespace nn
}  // namespace txsk
