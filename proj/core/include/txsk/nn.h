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
// Minimal dense-tensor layers for the sketch transform codec: stride-2
// convolutions and their transposes (kernel 5, pad 2 throughout), leaky
// ReLU, sigmoid, and an Adam optimizer over registered parameter blocks.
// Everything runs in double precision on the CPU; convolutions lower to
// patch-matrix GEMMs.

#ifndef TXSK_NN_H_
#define TXSK_NN_H_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "txsk/rng.h"

namespace txsk {
namespace nn {

// Dense CHW tensor.
struct Tensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int c, int h, int w)
      : channels(c), height(h), width(w),
        v(static_cast<size_t>(c) * h * w, 0.0) {}

  double& at(int c, int y, int x) {
    return v[(static_cast<size_t>(c) * height + y) * width + x];
  }
  double at(int c, int y, int x) const {
    return v[(static_cast<size_t>(c) * height + y) * width + x];
  }
  size_t size() const { return v.size(); }
  bool SameShape(const Tensor& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
};

inline constexpr int kKernel = 5;
inline constexpr int kStride = 2;
inline constexpr int kPad = 2;

// Output extent of the stride-2 convolution; equals ceil(in / 2).
int ConvOutSize(int in);

// Downsampling convolution. Weight is stored as a
// (in_ch * kKernel^2) x out_ch matrix with row index
// (ic * kKernel + ky) * kKernel + kx.
struct ConvLayer {
  int in_ch = 0;
  int out_ch = 0;
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
  Eigen::MatrixXd weight_grad;
  Eigen::VectorXd bias_grad;

  ConvLayer() = default;
  ConvLayer(int in_channels, int out_channels);

  void InitHe(Rng& rng);
  void ZeroGrad();
  Tensor Forward(const Tensor& in) const;
  // Accumulates parameter gradients and returns dLoss/dInput.
  Tensor Backward(const Tensor& in, const Tensor& grad_out);
};

// Upsampling transpose of ConvLayer. `low_ch` is the input (coarse)
// channel count and `high_ch` the output; the weight is kept in the
// layout of the adjoint convolution (high -> low), so forward here is
// that convolution's input-gradient.
struct TconvLayer {
  int low_ch = 0;
  int high_ch = 0;
  Eigen::MatrixXd weight;  // (high_ch * kKernel^2) x low_ch
  Eigen::VectorXd bias;    // per high channel
  Eigen::MatrixXd weight_grad;
  Eigen::VectorXd bias_grad;

  TconvLayer() = default;
  TconvLayer(int low_channels, int high_channels);

  void InitHe(Rng& rng);
  void ZeroGrad();
  // out_h/out_w select between the two sizes that downsample to the
  // input extent; ConvOutSize(out) must equal in.
  Tensor Forward(const Tensor& in, int out_h, int out_w) const;
  // grad_out carries the forward output shape.
  Tensor Backward(const Tensor& in, const Tensor& grad_out);
};

Tensor LeakyRelu(const Tensor& in, double slope);
// `in` is the activation input (pre-activation values).
Tensor LeakyReluGrad(const Tensor& in, const Tensor& grad_out, double slope);
Tensor Sigmoid(const Tensor& in);
// `out` is the activation output, reused to avoid recomputing exp.
Tensor SigmoidGrad(const Tensor& out, const Tensor& grad_out);

// Adam over externally owned parameter/gradient storage. Blocks are
// registered once; Step applies one update with shared time index.
class Adam {
 public:
  Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);

  void Register(double* param, const double* grad, Eigen::Index n);
  void Register(Eigen::MatrixXd* param, const Eigen::MatrixXd* grad);
  void Register(Eigen::VectorXd* param, const Eigen::VectorXd* grad);
  void Step();
  void set_learning_rate(double lr) { learning_rate_ = lr; }

 private:
  struct Block {
    double* param;
    const double* grad;
    Eigen::Index n;
    Eigen::VectorXd m;
    Eigen::VectorXd v;
  };
  double learning_rate_;
  double beta1_;
  double beta2_;
  double eps_;
  int64_t t_ = 0;
  std::vector<Block> blocks_;
};

}  // namespace nn
}  // namespace txsk

#endif  // TXSK_NN_H_
