/* Copyright (c) 2026 TFT Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

#include <Eigen/Dense>
#include <utility>

#include "tft/tensor.hpp"

namespace tft {

// Top-down spatial controls: rotation angle (degrees), isotropic scale,
// translation in target-grid pixels. Coordinates are x = column, y = row,
// with y increasing downward; positive theta maps the +x axis toward +y.
struct TransformParams {
  double theta_deg = 0.0;
  double scale = 1.0;
  double tx = 0.0;
  double ty = 0.0;

  bool is_valid() const;
  void validate() const;  // throws UsageError on invalid values
};

// Order in which the three primitive transforms compose, applied right to
// left to a source point. The default is translation(rotation(scaling(p))).
enum class ComposeOrder { kTranRotScale, kTranScaleRot };

// Homogeneous 3x3 transform with bottom row [0 0 1] and an invertible
// upper-left 2x2 block.
class AffineMatrix {
 public:
  static AffineMatrix from(const Eigen::Matrix3d& m);  // validates
  static AffineMatrix identity();

  const Eigen::Matrix3d& matrix() const { return m_; }
  AffineMatrix inverse() const;

  double operator()(int r, int c) const { return m_(r, c); }
  bool is_identity() const;

  // Maps (x, y) through the transform.
  std::pair<double, double> apply(double x, double y) const;

 private:
  Eigen::Matrix3d m_;
};

// cos/sin on degree arguments, exact at multiples of 90.
double deg_cos(double deg);
double deg_sin(double deg);

Eigen::Matrix3d rotation_matrix(double theta_deg);
Eigen::Matrix3d scaling_matrix(double s);
Eigen::Matrix3d translation_matrix(double tx, double ty);

// C * M_tran * M_rot * M_scale * C^-1 with C translating the origin to
// `center` (x, y). Order of the middle product is configurable.
AffineMatrix make_affine(const TransformParams& params, std::pair<double, double> center,
                         ComposeOrder order = ComposeOrder::kTranRotScale);

// Center of an H x W grid in (x, y) coordinates: ((W-1)/2, (H-1)/2).
std::pair<double, double> grid_center(int height, int width);

// Inverse-mapping bilinear resample of every channel. For each output pixel
// the source location is matrix^-1 applied to the output coordinate;
// out-of-bounds sources contribute zero. Accepts [H,W] or [H,W,C].
Tensor bilinear_warp(const Tensor& features, const AffineMatrix& matrix);

// Adjoint of bilinear_warp: scatters each upstream value onto the four
// source neighbors with the forward interpolation weights.
Tensor warp_backward(const Tensor& features_like, const AffineMatrix& matrix,
                     const Tensor& upstream);

// Translation components are expressed in input-image pixels; deeper layers
// divide them by the cumulative stride. Rotation and scale are unchanged.
TransformParams scale_params_to_layer(const TransformParams& params, int cumulative_stride);

// Elementwise multiply by an [H,W] mask, broadcast across channels.
Tensor apply_mask(const Tensor& features, const Tensor& mask);

}  // namespace tft
