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
#include <utility>
#include <vector>

#include "doctest.h"
#include "txsk/error.h"

using txsk::Error;
using txsk::Rng;
using namespace txsk::nn;

namespace {

void FillRandom(Tensor* t, Rng* rng) {
  for (double& x : t->v) x = rng->Normal();
}

double Dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.v.size(); ++i) s += a.v[i] * b.v[i];
  return s;
}

// Direct nested-loop convolution, written independently of the layer's
// GEMM lowering. Zero padding of 2, kernel 5, stride 2.
Tensor ConvReference(const ConvLayer& layer, const Tensor& in) {
  Tensor out(layer.out_ch, ConvOutSize(in.height), ConvOutSize(in.width));
  for (int oc = 0; oc < layer.out_ch; ++oc) {
    for (int oy = 0; oy < out.height; ++oy) {
      for (int ox = 0; ox < out.width; ++ox) {
        double acc = layer.bias[oc];
        for (int ic = 0; ic < layer.in_ch; ++ic) {
          for (int ky = 0; ky < kKernel; ++ky) {
            for (int kx = 0; kx < kKernel; ++kx) {
              const int iy = oy * kStride + ky - kPad;
              const int ix = ox * kStride + kx - kPad;
              if (iy < 0 || iy >= in.height || ix < 0 || ix >= in.width) {
                continue;
              }
              acc += layer.weight((ic * kKernel + ky) * kKernel + kx, oc) *
                     in.at(ic, iy, ix);
            }
          }
        }
        out.at(oc, oy, ox) = acc;
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("stride-2 output extent is the ceiling half") {
  CHECK(ConvOutSize(1) == 1);
  CHECK(ConvOutSize(2) == 1);
  CHECK(ConvOutSize(3) == 2);
  CHECK(ConvOutSize(4) == 2);
  CHECK(ConvOutSize(5) == 3);
  CHECK(ConvOutSize(11) == 6);
  CHECK(ConvOutSize(160) == 80);
}

TEST_CASE("convolution forward matches the direct reference") {
  Rng rng(21);
  const std::vector<std::pair<int, int>> shapes = {
      {7, 9}, {8, 8}, {5, 12}, {3, 3}};
  for (const auto& [h, w] : shapes) {
    ConvLayer layer(2, 3);
    layer.InitHe(rng);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      layer.bias[i] = rng.Normal();
    }
    Tensor in(2, h, w);
    FillRandom(&in, &rng);

    const Tensor got = layer.Forward(in);
    const Tensor want = ConvReference(layer, in);
    REQUIRE(got.SameShape(want));
    for (size_t i = 0; i < got.v.size(); ++i) {
      CHECK(got.v[i] == doctest::Approx(want.v[i]).epsilon(1e-12));
    }
  }

  Tensor wrong(3, 7, 9);
  ConvLayer layer(2, 3);
  CHECK_THROWS_AS(layer.Forward(wrong), Error);
}

TEST_CASE("convolution backward matches finite differences") {
  Rng rng(22);
  ConvLayer layer(2, 2);
  layer.InitHe(rng);
  for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
    layer.bias[i] = rng.Normal();
  }
  Tensor in(2, 6, 5);
  FillRandom(&in, &rng);

  // Loss L = <g, Forward(in)> with a fixed random g.
  Tensor g(2, ConvOutSize(6), ConvOutSize(5));
  FillRandom(&g, &rng);

  layer.ZeroGrad();
  const Tensor in_grad = layer.Backward(in, g);
  REQUIRE(in_grad.SameShape(in));

  const double h = 1e-6;
  auto loss = [&](const ConvLayer& l, const Tensor& x) {
    return Dot(l.Forward(x), g);
  };

  for (size_t i = 0; i < in.v.size(); ++i) {
    Tensor plus = in, minus = in;
    plus.v[i] += h;
    minus.v[i] -= h;
    const double fd = (loss(layer, plus) - loss(layer, minus)) / (2.0 * h);
    CHECK(in_grad.v[i] == doctest::Approx(fd).epsilon(1e-5));
  }
  for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
      ConvLayer plus = layer, minus = layer;
      plus.weight(r, c) += h;
      minus.weight(r, c) -= h;
      const double fd = (loss(plus, in) - loss(minus, in)) / (2.0 * h);
      CHECK(layer.weight_grad(r, c) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
  for (Eigen::Index b = 0; b < layer.bias.size(); ++b) {
    ConvLayer plus = layer, minus = layer;
    plus.bias[b] += h;
    minus.bias[b] -= h;
    const double fd = (loss(plus, in) - loss(minus, in)) / (2.0 * h);
    CHECK(layer.bias_grad[b] == doctest::Approx(fd).epsilon(1e-5));
  }

  // Gradients accumulate across calls until cleared.
  const double once = layer.bias_grad[0];
  layer.Backward(in, g);
  CHECK(layer.bias_grad[0] == doctest::Approx(2.0 * once).epsilon(1e-12));
  layer.ZeroGrad();
  CHECK(layer.bias_grad.isZero());
}

TEST_CASE("transpose convolution is the adjoint of the convolution") {
  Rng rng(23);
  // conv maps 3 channels down to 2; its adjoint maps 2 back up to 3.
  ConvLayer conv(3, 2);
  conv.InitHe(rng);
  conv.bias.setZero();
  TconvLayer tconv(2, 3);
  tconv.weight = conv.weight;
  tconv.bias.setZero();

  const std::vector<std::pair<int, int>> shapes = {{9, 7}, {8, 10}, {5, 5}};
  for (const auto& [h, w] : shapes) {
    Tensor x(3, h, w);
    FillRandom(&x, &rng);
    Tensor y(2, ConvOutSize(h), ConvOutSize(w));
    FillRandom(&y, &rng);

    // <C x, y> == <x, C^T y> for every x, y.
    const double lhs = Dot(conv.Forward(x), y);
    const double rhs = Dot(x, tconv.Forward(y, h, w));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }

  // Both parities upsample from the same coarse extent.
  Tensor coarse(2, 3, 3);
  FillRandom(&coarse, &rng);
  CHECK(tconv.Forward(coarse, 5, 6).height == 5);
  CHECK(tconv.Forward(coarse, 6, 5).width == 5);
  CHECK_THROWS_AS(tconv.Forward(coarse, 8, 6), Error);
  Tensor wrong(3, 3, 3);
  CHECK_THROWS_AS(tconv.Forward(wrong, 5, 5), Error);
}

TEST_CASE("transpose convolution backward matches finite differences") {
  Rng rng(24);
  TconvLayer layer(2, 2);
  layer.InitHe(rng);
  for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
    layer.bias[i] = rng.Normal();
  }
  Tensor in(2, 3, 4);
  FillRandom(&in, &rng);
  const int out_h = 6, out_w = 7;

  Tensor g(2, out_h, out_w);
  FillRandom(&g, &rng);

  layer.ZeroGrad();
  const Tensor in_grad = layer.Backward(in, g);
  REQUIRE(in_grad.SameShape(in));

  const double h = 1e-6;
  auto loss = [&](const TconvLayer& l, const Tensor& x) {
    return Dot(l.Forward(x, out_h, out_w), g);
  };

  for (size_t i = 0; i < in.v.size(); ++i) {
    Tensor plus = in, minus = in;
    plus.v[i] += h;
    minus.v[i] -= h;
    const double fd = (loss(layer, plus) - loss(layer, minus)) / (2.0 * h);
    CHECK(in_grad.v[i] == doctest::Approx(fd).epsilon(1e-5));
  }
  for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
      TconvLayer plus = layer, minus = layer;
      plus.weight(r, c) += h;
      minus.weight(r, c) -= h;
      const double fd = (loss(plus, in) - loss(minus, in)) / (2.0 * h);
      CHECK(layer.weight_grad(r, c) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
  for (Eigen::Index b = 0; b < layer.bias.size(); ++b) {
    TconvLayer plus = layer, minus = layer;
    plus.bias[b] += h;
    minus.bias[b] -= h;
    const double fd = (loss(plus, in) - loss(minus, in)) / (2.0 * h);
    CHECK(layer.bias_grad[b] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("activations match their formulas and gradients") {
  Tensor in(1, 1, 4);
  in.v = {-2.0, -0.5, 0.0, 3.0};

  const Tensor lrelu = LeakyRelu(in, 0.1);
  CHECK(lrelu.v[0] == doctest::Approx(-0.2));
  CHECK(lrelu.v[1] == doctest::Approx(-0.05));
  CHECK(lrelu.v[2] == doctest::Approx(0.0));
  CHECK(lrelu.v[3] == doctest::Approx(3.0));

  const Tensor sig = Sigmoid(in);
  for (int i = 0; i < 4; ++i) {
    CHECK(sig.v[i] == doctest::Approx(1.0 / (1.0 + std::exp(-in.v[i]))));
  }

  // Finite differences away from the rectifier kink at zero.
  Tensor smooth(1, 1, 4);
  smooth.v = {-2.0, -0.5, 0.25, 3.0};
  const Tensor smooth_sig = Sigmoid(smooth);
  Tensor g(1, 1, 4);
  g.v = {1.0, 1.0, 1.0, 1.0};
  const double h = 1e-6;
  const Tensor lg = LeakyReluGrad(smooth, g, 0.1);
  const Tensor sg = SigmoidGrad(smooth_sig, g);
  for (int i = 0; i < 4; ++i) {
    Tensor plus = smooth, minus = smooth;
    plus.v[i] += h;
    minus.v[i] -= h;
    const double fd_l =
        (LeakyRelu(plus, 0.1).v[i] - LeakyRelu(minus, 0.1).v[i]) / (2.0 * h);
    const double fd_s = (Sigmoid(plus).v[i] - Sigmoid(minus).v[i]) / (2.0 * h);
    CHECK(lg.v[i] == doctest::Approx(fd_l).epsilon(1e-5));
    CHECK(sg.v[i] == doctest::Approx(fd_s).epsilon(1e-5));
  }
}

TEST_CASE("adam takes a unit-rate first step and minimizes a quadratic") {
  // First update magnitude is exactly the learning rate after bias
  // correction, independent of gradient scale.
  double x = 0.0;
  double grad = -6.0;
  Adam opt(0.05);
  opt.Register(&x, &grad, 1);
  opt.Step();
  CHECK(x == doctest::Approx(0.05).epsilon(1e-6));

  // Descending (x - 3)^2 converges.
  double y = 0.0;
  double ygrad = 0.0;
  Adam opt2(0.1);
  opt2.Register(&y, &ygrad, 1);
  for (int i = 0; i < 2000; ++i) {
    ygrad = 2.0 * (y - 3.0);
    opt2.Step();
  }
  CHECK(y == doctest::Approx(3.0).epsilon(1e-3));
}
