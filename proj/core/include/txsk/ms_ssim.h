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
// Multi-scale structural similarity for unit-range planes. An 11x11
// Gaussian window (sigma 1.5) is applied as a valid convolution; scales
// are built by 2x2 average pooling with ceil sizing, so s scales need a
// minimum extent of 11, 21, 41, 81, 161. Per-scale values are the mean
// contrast-structure term, with the luminance term folded into the last
// scale, combined as a weighted geometric mean. RGB images score each
// channel independently and average.

#ifndef TXSK_MS_SSIM_H_
#define TXSK_MS_SSIM_H_

#include <span>
#include <vector>

#include "txsk/types.h"

namespace txsk {

// Number of pyramid scales usable at the given extent, capped at 5.
// Throws if the smaller extent cannot support even one scale.
int MsSsimScaleCount(int height, int width);

// Double-precision core on a single plane, row-major h x w.
double MsSsimPlane(std::span<const double> a, std::span<const double> b,
                   int height, int width);

// Value plus the gradient with respect to `b`, written to `grad_b`
// (resized to h*w). Matches MsSsimPlane exactly on the value.
double MsSsimPlaneWithGrad(std::span<const double> a,
                           std::span<const double> b, int height, int width,
                           std::vector<double>* grad_b);

double MsSsim(const SketchMap& a, const SketchMap& b);
double MsSsim(const Image& a, const Image& b);

}  // namespace txsk

#endif  // TXSK_MS_SSIM_H_
