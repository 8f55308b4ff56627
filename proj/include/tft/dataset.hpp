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

#include <span>
#include <string>
#include <vector>

#include "tft/affine.hpp"
#include "tft/rng.hpp"
#include "tft/tensor.hpp"

namespace tft {

// Grayscale image with intensities in [0,1], optional class label.
struct ImageSample {
  Tensor pixels;  // [H,W]
  int label = -1;
};

// IDX image/label pair (the MNIST container format), big-endian magics
// 0x803 / 0x801. Files may be gzip-compressed; detected by the 1f 8b prefix.
std::vector<ImageSample> load_idx(const std::string& images_path,
                                  const std::string& labels_path);
void save_idx(std::span<const ImageSample> samples, const std::string& images_path,
              const std::string& labels_path);

// Centers the source inside a target x target zero canvas.
ImageSample pad_to(const ImageSample& image, int target);

// Divides by the maximum intensity; all-zero images pass through unchanged.
ImageSample max_norm(const ImageSample& image);

// Ground-truth spatial transform at image resolution, values clamped to [0,1].
ImageSample warp_image(const ImageSample& image, const TransformParams& params,
                       ComposeOrder order = ComposeOrder::kTranRotScale);

// One axis of the control sampling law: an explicit value set or an interval.
struct RangeSpec {
  bool discrete = true;
  std::vector<double> values;  // discrete mode
  double lo = 0.0, hi = 0.0;   // interval mode

  static RangeSpec set(std::vector<double> values);
  static RangeSpec interval(double lo, double hi);
  static RangeSpec single(double v) { return set({v}); }
  void validate(bool positive) const;
};

struct ThetaRanges {
  RangeSpec tx, ty, rotation, scale;

  void validate() const;

  // Discrete recipe: translations on the integer grid [-7,7]^2, rotations
  // in 5-degree steps over [-30,30], scales {0.9, 1.0, 1.1}.
  static ThetaRanges grid();
  // Continuous recipe: uniform over [-30,30] x [0.8,1.2] x [-20,20]^2.
  static ThetaRanges box();
  static ThetaRanges identity_only();
};

TransformParams sample_theta(const ThetaRanges& ranges, Rng& rng);

// Supervised triple: per-tap features of an image and of its transformed
// version, plus the controls that produced it.
struct TrainingTuple {
  std::vector<int> tap_ids;
  std::vector<Tensor> f_ori;
  std::vector<Tensor> f_theta;
  TransformParams params;

  const Tensor& ori(int tap_id) const;
  const Tensor& theta(int tap_id) const;
};

class Backbone;

// Harvests `count` tuples: draw controls, warp the image, record features
// of both versions at the requested taps. The backbone is read-only.
std::vector<TrainingTuple> make_tuples(const Backbone& bb, std::span<const ImageSample> images,
                                       int count, const ThetaRanges& ranges, Rng& rng,
                                       const std::vector<int>& tap_ids);

void save_tuples(std::span<const TrainingTuple> tuples, const std::string& path);
std::vector<TrainingTuple> load_tuples(const std::string& path);

// Seeded procedural digit-like glyphs in MNIST geometry, for self-contained
// experiments. Labels are the glyph class 0..9.
std::vector<ImageSample> synth_digits(int count, uint64_t seed, int side = 28);

// Seeded binary silhouettes (ellipses, boxes, crosses and the like) at an
// arbitrary side length, for cross-dataset checks.
std::vector<ImageSample> synth_shapes(int count, uint64_t seed, int side = 64);

}  // namespace tft
