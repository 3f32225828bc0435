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

#include "txsk/ms_ssim.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "txsk/error.h"

namespace txsk {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 1e-4;  // (0.01 * range)^2
constexpr double kC2 = 9e-4;  // (0.03 * range)^2
constexpr int kMaxScales = 5;
constexpr std::array<double, kMaxScales> kScaleWeights = {
    0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
// Smallest extent at which s scales survive ceil-mode halving down to
// the 11-pixel window.
constexpr std::array<int, kMaxScales> kMinExtent = {11, 21, 41, 81, 161};
// Per-scale means below this floor are clamped and stop gradients, so
// the geometric mean stays defined for anti-correlated inputs.
constexpr double kValueFloor = 1e-9;

struct Plane {
  int h = 0;
  int w = 0;
  std::vector<double> v;

  Plane() = default;
  Plane(int height, int width)
      : h(height), w(width), v(static_cast<size_t>(height) * width, 0.0) {}
  double& at(int y, int x) { return v[static_cast<size_t>(y) * w + x]; }
  double at(int y, int x) const { return v[static_cast<size_t>(y) * w + x]; }
};

const std::array<double, kWindow>& Window() {
  static const std::array<double, kWindow> window = [] {
    std::array<double, kWindow> g;
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
      const double d = i - (kWindow - 1) / 2.0;
      g[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
      sum += g[i];
    }
    for (double& x : g) x /= sum;
    return g;
  }();
  return window;
}

// Separable valid convolution with the Gaussian window; output shrinks
// by kWindow - 1 in each direction.
Plane Filter(const Plane& in) {
  const auto& g = Window();
  Plane tmp(in.h, in.w - kWindow + 1);
  for (int y = 0; y < in.h; ++y) {
    for (int x = 0; x < tmp.w; ++x) {
      double s = 0.0;
      for (int k = 0; k < kWindow; ++k) s += g[k] * in.at(y, x + k);
      tmp.at(y, x) = s;
    }
  }
  Plane out(in.h - kWindow + 1, tmp.w);
  for (int y = 0; y < out.h; ++y) {
    for (int x = 0; x < out.w; ++x) {
      double s = 0.0;
      for (int k = 0; k < kWindow; ++k) s += g[k] * tmp.at(y + k, x);
      out.at(y, x) = s;
    }
  }
  return out;
}

// Adjoint of Filter: scatters filtered-space gradients back onto the
// input grid.
Plane FilterAdjoint(const Plane& grad, int in_h, int in_w) {
  const auto& g = Window();
  Plane tmp(in_h, grad.w);
  for (int y = 0; y < grad.h; ++y) {
    for (int x = 0; x < grad.w; ++x) {
      const double v = grad.at(y, x);
      for (int k = 0; k < kWindow; ++k) tmp.at(y + k, x) += g[k] * v;
    }
  }
  Plane out(in_h, in_w);
  for (int y = 0; y < in_h; ++y) {
    for (int x = 0; x < tmp.w; ++x) {
      const double v = tmp.at(y, x);
      for (int k = 0; k < kWindow; ++k) out.at(y, x + k) += g[k] * v;
    }
  }
  return out;
}

// 2x2 mean pooling, ceil sizing; edge windows average only the pixels
// they cover.
Plane Pool(const Plane& in) {
  Plane out((in.h + 1) / 2, (in.w + 1) / 2);
  for (int y = 0; y < out.h; ++y) {
    for (int x = 0; x < out.w; ++x) {
      double s = 0.0;
      int n = 0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const int yy = 2 * y + dy;
          const int xx = 2 * x + dx;
          if (yy < in.h && xx < in.w) {
            s += in.at(yy, xx);
            ++n;
          }
        }
      }
      out.at(y, x) = s / n;
    }
  }
  return out;
}

Plane PoolAdjoint(const Plane& grad, int in_h, int in_w) {
  Plane out(in_h, in_w);
  for (int y = 0; y < grad.h; ++y) {
    for (int x = 0; x < grad.w; ++x) {
      int n = 0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          if (2 * y + dy < in_h && 2 * x + dx < in_w) ++n;
        }
      }
      const double v = grad.at(y, x) / n;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const int yy = 2 * y + dy;
          const int xx = 2 * x + dx;
          if (yy < in_h && xx < in_w) out.at(yy, xx) += v;
        }
      }
    }
  }
  return out;
}

struct ScaleStats {
  Plane a, b;        // inputs at this scale
  Plane mu_a, mu_b;  // filtered means
  Plane cs;          // contrast-structure map
  Plane d2;          // its denominator, var_a + var_b + C2
  Plane lum;         // luminance map (last scale only)
  double mean = 0.0;
  double value = 0.0;  // mean clamped to the floor
};

double Core(std::span<const double> a, std::span<const double> b, int height,
            int width, std::vector<double>* grad_b) {
  if (a.size() != b.size() ||
      a.size() != static_cast<size_t>(height) * width) {
    throw Error(ErrorCode::kShape, "similarity inputs must share shape");
  }
  const int scales = MsSsimScaleCount(height, width);

  double weight_sum = 0.0;
  for (int j = 0; j < scales; ++j) weight_sum += kScaleWeights[j];

  std::vector<ScaleStats> levels(scales);
  levels[0].a = Plane(height, width);
  levels[0].b = Plane(height, width);
  std::copy(a.begin(), a.end(), levels[0].a.v.begin());
  std::copy(b.begin(), b.end(), levels[0].b.v.begin());

  double log_value = 0.0;
  for (int j = 0; j < scales; ++j) {
    ScaleStats& s = levels[j];
    if (j > 0) {
      s.a = Pool(levels[j - 1].a);
      s.b = Pool(levels[j - 1].b);
    }
    s.mu_a = Filter(s.a);
    s.mu_b = Filter(s.b);

    Plane a2 = s.a, b2 = s.b, ab = s.a;
    for (size_t i = 0; i < a2.v.size(); ++i) {
      a2.v[i] *= s.a.v[i];
      b2.v[i] *= s.b.v[i];
      ab.v[i] *= s.b.v[i];
    }
    const Plane e_a2 = Filter(a2);
    const Plane e_b2 = Filter(b2);
    const Plane e_ab = Filter(ab);

    const bool last = j == scales - 1;
    s.cs = Plane(s.mu_a.h, s.mu_a.w);
    s.d2 = Plane(s.mu_a.h, s.mu_a.w);
    if (last) s.lum = Plane(s.mu_a.h, s.mu_a.w);
    double sum = 0.0;
    for (size_t i = 0; i < s.cs.v.size(); ++i) {
      const double ma = s.mu_a.v[i];
      const double mb = s.mu_b.v[i];
      const double var_a = e_a2.v[i] - ma * ma;
      const double var_b = e_b2.v[i] - mb * mb;
      const double cov = e_ab.v[i] - ma * mb;
      const double d2 = var_a + var_b + kC2;
      const double cs = (2.0 * cov + kC2) / d2;
      s.cs.v[i] = cs;
      s.d2.v[i] = d2;
      if (last) {
        const double lum = (2.0 * ma * mb + kC1) / (ma * ma + mb * mb + kC1);
        s.lum.v[i] = lum;
        sum += lum * cs;
      } else {
        sum += cs;
      }
    }
    s.mean = sum / static_cast<double>(s.cs.v.size());
    s.value = std::max(s.mean, kValueFloor);
    log_value += (kScaleWeights[j] / weight_sum) * std::log(s.value);
  }
  const double result = std::exp(log_value);
  if (grad_b == nullptr) return result;

  // Reverse pass: per-scale gradients with respect to b_j, lifted
  // through the pooling chain back to the full-resolution input.
  Plane carried;
  for (int j = scales - 1; j >= 0; --j) {
    const ScaleStats& s = levels[j];
    const bool last = j == scales - 1;
    const double count = static_cast<double>(s.cs.v.size());
    // d result / d mean_j; zero while the floor clamp is active.
    const double outer =
        s.mean > kValueFloor
            ? result * (kScaleWeights[j] / weight_sum) / s.value / count
            : 0.0;

    Plane g_mu(s.cs.h, s.cs.w);   // into mu_b
    Plane g_eb2(s.cs.h, s.cs.w);  // into the filtered b^2 map
    Plane g_eab(s.cs.h, s.cs.w);  // into the filtered a*b map
    for (size_t i = 0; i < s.cs.v.size(); ++i) {
      const double ma = s.mu_a.v[i];
      const double mb = s.mu_b.v[i];
      const double cs = s.cs.v[i];
      const double d2 = s.d2.v[i];
      double g_cs = outer;
      double mu = 0.0;
      if (last) {
        const double lum = s.lum.v[i];
        g_cs = outer * lum;
        const double d1 = ma * ma + mb * mb + kC1;
        mu += outer * cs * 2.0 * (ma - lum * mb) / d1;
      }
      // cs depends on b through cov = E[ab] - mu_a mu_b and
      // var_b = E[b^2] - mu_b^2.
      const double g_cov = g_cs * 2.0 / d2;
      const double g_var_b = -g_cs * cs / d2;
      g_eab.v[i] = g_cov;
      g_eb2.v[i] = g_var_b;
      mu += -g_cov * ma - g_var_b * 2.0 * mb;
      g_mu.v[i] = mu;
    }

    Plane level_grad = FilterAdjoint(g_mu, s.b.h, s.b.w);
    const Plane back_b2 = FilterAdjoint(g_eb2, s.b.h, s.b.w);
    const Plane back_ab = FilterAdjoint(g_eab, s.b.h, s.b.w);
    for (size_t i = 0; i < level_grad.v.size(); ++i) {
      level_grad.v[i] +=
          2.0 * s.b.v[i] * back_b2.v[i] + s.a.v[i] * back_ab.v[i];
    }

    if (last) {
      carried = std::move(level_grad);
    } else {
      Plane lifted = PoolAdjoint(carried, s.b.h, s.b.w);
      for (size_t i = 0; i < lifted.v.size(); ++i) {
        lifted.v[i] += level_grad.v[i];
      }
      carried = std::move(lifted);
    }
  }
  *grad_b = std::move(carried.v);
  return result;
}

}  // namespace

int MsSsimScaleCount(int height, int width) {
  const int extent = std::min(height, width);
  if (extent < kMinExtent[0]) {
    throw Error(ErrorCode::kShape, "input too small for the similarity window");
  }
  int scales = 1;
  while (scales < kMaxScales && extent >= kMinExtent[scales]) ++scales;
  return scales;
}

double MsSsimPlane(std::span<const double> a, std::span<const double> b,
                   int height, int width) {
  return Core(a, b, height, width, nullptr);
}

double MsSsimPlaneWithGrad(std::span<const double> a,
                           std::span<const double> b, int height, int width,
                           std::vector<double>* grad_b) {
  return Core(a, b, height, width, grad_b);
}

double MsSsim(const SketchMap& a, const SketchMap& b) {
  ValidateSketch(a);
  ValidateSketch(b);
  if (a.width != b.width || a.height != b.height) {
    throw Error(ErrorCode::kShape, "similarity inputs must share shape");
  }
  std::vector<double> pa(a.data.begin(), a.data.end());
  std::vector<double> pb(b.data.begin(), b.data.end());
  return MsSsimPlane(pa, pb, a.height, a.width);
}

double MsSsim(const Image& a, const Image& b) {
  ValidateImage(a);
  ValidateImage(b);
  if (a.width != b.width || a.height != b.height) {
    throw Error(ErrorCode::kShape, "similarity inputs must share shape");
  }
  const size_t n = static_cast<size_t>(a.width) * a.height;
  std::vector<double> pa(n), pb(n);
  double sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (size_t i = 0; i < n; ++i) {
      pa[i] = a.data[i * 3 + c];
      pb[i] = b.data[i * 3 + c];
    }
    sum += MsSsimPlane(pa, pb, a.height, a.width);
  }
  return sum / 3.0;
}

}  // namespace txsk
