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

#include "tft/affine.hpp"

#include <cmath>

namespace tft {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDetEps = 1e-12;

// Per-output-pixel sampling stencil: up to four (offset, weight) taps.
struct Stencil {
  long off[4];
  double w[4];
  int count = 0;
};

void build_stencils(int height, int width, int channels, const AffineMatrix& inv,
                    std::vector<Stencil>& out) {
  out.resize(static_cast<size_t>(height) * width);
  size_t s = 0;
  for (int oy = 0; oy < height; ++oy) {
    for (int ox = 0; ox < width; ++ox, ++s) {
      auto [sx, sy] = inv.apply(ox, oy);
      Stencil& st = out[s];
      st.count = 0;
      const double fx = std::floor(sx);
      const double fy = std::floor(sy);
      const int x0 = static_cast<int>(fx);
      const int y0 = static_cast<int>(fy);
      const double wx = sx - fx;
      const double wy = sy - fy;
      const double weights[4] = {(1.0 - wx) * (1.0 - wy), wx * (1.0 - wy), (1.0 - wx) * wy,
                                 wx * wy};
      const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
      const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
      for (int k = 0; k < 4; ++k) {
        if (weights[k] == 0.0) continue;
        if (xs[k] < 0 || xs[k] >= width || ys[k] < 0 || ys[k] >= height) continue;
        st.off[st.count] = (static_cast<long>(ys[k]) * width + xs[k]) * channels;
        st.w[st.count] = weights[k];
        ++st.count;
      }
    }
  }
}

}  // namespace

bool TransformParams::is_valid() const {
  return scale > 0.0 && std::isfinite(theta_deg) && std::isfinite(scale) &&
         std::isfinite(tx) && std::isfinite(ty);
}

void TransformParams::validate() const {
  if (!is_valid()) {
    throw UsageError("invalid transform parameters: scale must be positive and all fields finite");
  }
}

AffineMatrix AffineMatrix::from(const Eigen::Matrix3d& m) {
  if (m(2, 0) != 0.0 || m(2, 1) != 0.0 || m(2, 2) != 1.0) {
    throw UsageError("affine matrix bottom row must be [0 0 1]");
  }
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  if (!(std::fabs(det) > kDetEps)) {
    throw UsageError("affine matrix is singular");
  }
  AffineMatrix a;
  a.m_ = m;
  return a;
}

AffineMatrix AffineMatrix::identity() { return from(Eigen::Matrix3d::Identity()); }

AffineMatrix AffineMatrix::inverse() const {
  Eigen::Matrix3d inv = m_.inverse();
  // Guard against drift in the homogeneous row.
  inv(2, 0) = 0.0;
  inv(2, 1) = 0.0;
  inv(2, 2) = 1.0;
  return from(inv);
}

bool AffineMatrix::is_identity() const { return m_ == Eigen::Matrix3d::Identity(); }

std::pair<double, double> AffineMatrix::apply(double x, double y) const {
  return {m_(0, 0) * x + m_(0, 1) * y + m_(0, 2), m_(1, 0) * x + m_(1, 1) * y + m_(1, 2)};
}

double deg_cos(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r < 0) r += 360.0;
  if (r == 0.0) return 1.0;
  if (r == 90.0) return 0.0;
  if (r == 180.0) return -1.0;
  if (r == 270.0) return 0.0;
  return std::cos(deg * kPi / 180.0);
}

double deg_sin(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r < 0) r += 360.0;
  if (r == 0.0) return 0.0;
  if (r == 90.0) return 1.0;
  if (r == 180.0) return 0.0;
  if (r == 270.0) return -1.0;
  return std::sin(deg * kPi / 180.0);
}

Eigen::Matrix3d rotation_matrix(double theta_deg) {
  const double c = deg_cos(theta_deg);
  const double s = deg_sin(theta_deg);
  Eigen::Matrix3d m;
  m << c, -s, 0, s, c, 0, 0, 0, 1;
  return m;
}

Eigen::Matrix3d scaling_matrix(double s) {
  Eigen::Matrix3d m;
  m << s, 0, 0, 0, s, 0, 0, 0, 1;
  return m;
}

Eigen::Matrix3d translation_matrix(double tx, double ty) {
  Eigen::Matrix3d m;
  m << 1, 0, tx, 0, 1, ty, 0, 0, 1;
  return m;
}

AffineMatrix make_affine(const TransformParams& params, std::pair<double, double> center,
                         ComposeOrder order) {
  params.validate();
  const Eigen::Matrix3d rot = rotation_matrix(params.theta_deg);
  const Eigen::Matrix3d scl = scaling_matrix(params.scale);
  const Eigen::Matrix3d tran = translation_matrix(params.tx, params.ty);
  const Eigen::Matrix3d mid = order == ComposeOrder::kTranRotScale ? Eigen::Matrix3d(rot * scl)
                                                                   : Eigen::Matrix3d(scl * rot);
  const Eigen::Matrix3d to_center = translation_matrix(center.first, center.second);
  const Eigen::Matrix3d from_center = translation_matrix(-center.first, -center.second);
  return AffineMatrix::from(to_center * tran * mid * from_center);
}

std::pair<double, double> grid_center(int height, int width) {
  return {(width - 1) / 2.0, (height - 1) / 2.0};
}

Tensor bilinear_warp(const Tensor& features, const AffineMatrix& matrix) {
  if (features.rank() != 2 && features.rank() != 3) {
    throw ShapeError("bilinear_warp expects [H,W] or [H,W,C], got " + features.shape_str());
  }
  const int height = features.dim(0);
  const int width = features.dim(1);
  const int channels = features.rank() == 3 ? features.dim(2) : 1;

  Tensor out(features.shape());
  if (matrix.is_identity()) {
    return features;  // shares the payload; exact
  }

  std::vector<Stencil> stencils;
  build_stencils(height, width, channels, matrix.inverse(), stencils);

  const double* in = features.data();
  double* o = out.mutable_data();
  size_t s = 0;
  for (int oy = 0; oy < height; ++oy) {
    for (int ox = 0; ox < width; ++ox, ++s) {
      const Stencil& st = stencils[s];
      double* op = o + (static_cast<long>(oy) * width + ox) * channels;
      for (int k = 0; k < st.count; ++k) {
        const double w = st.w[k];
        const double* ip = in + st.off[k];
        for (int c = 0; c < channels; ++c) op[c] += w * ip[c];
      }
    }
  }
  return out;
}

Tensor warp_backward(const Tensor& features_like, const AffineMatrix& matrix,
                     const Tensor& upstream) {
  check_same_shape(features_like, upstream, "warp_backward");
  const int height = features_like.dim(0);
  const int width = features_like.dim(1);
  const int channels = features_like.rank() == 3 ? features_like.dim(2) : 1;

  if (matrix.is_identity()) return upstream;

  Tensor grad(features_like.shape());
  std::vector<Stencil> stencils;
  build_stencils(height, width, channels, matrix.inverse(), stencils);

  const double* up = upstream.data();
  double* g = grad.mutable_data();
  size_t s = 0;
  for (int oy = 0; oy < height; ++oy) {
    for (int ox = 0; ox < width; ++ox, ++s) {
      const Stencil& st = stencils[s];
      const double* u = up + (static_cast<long>(oy) * width + ox) * channels;
      for (int k = 0; k < st.count; ++k) {
        const double w = st.w[k];
        double* gp = g + st.off[k];
        for (int c = 0; c < channels; ++c) gp[c] += w * u[c];
      }
    }
  }
  return grad;
}

TransformParams scale_params_to_layer(const TransformParams& params, int cumulative_stride) {
  if (cumulative_stride < 1) throw UsageError("cumulative stride must be >= 1");
  TransformParams scaled = params;
  scaled.tx = params.tx / cumulative_stride;
  scaled.ty = params.ty / cumulative_stride;
  return scaled;
}

Tensor apply_mask(const Tensor& features, const Tensor& mask) {
  if (mask.rank() != 2) throw ShapeError("mask must be [H,W], got " + mask.shape_str());
  if (features.rank() != 2 && features.rank() != 3) {
    throw ShapeError("apply_mask expects [H,W] or [H,W,C]");
  }
  if (features.dim(0) != mask.dim(0) || features.dim(1) != mask.dim(1)) {
    throw ShapeError("apply_mask: spatial dims " + features.shape_str() + " vs " +
                     mask.shape_str());
  }
  const int channels = features.rank() == 3 ? features.dim(2) : 1;
  Tensor out(features.shape());
  const double* in = features.data();
  const double* m = mask.data();
  double* o = out.mutable_data();
  const long pixels = static_cast<long>(features.dim(0)) * features.dim(1);
  for (long p = 0; p < pixels; ++p) {
    const double w = m[p];
    for (int c = 0; c < channels; ++c) o[p * channels + c] = w * in[p * channels + c];
  }
  return out;
}

}  // namespace tft
