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

#include <optional>

#include "tft/backbone.hpp"

namespace tft {

using LossHistory = std::vector<std::pair<long, double>>;

// --- supervised transformer training --------------------------------------

struct TrainConfig {
  long steps = 5000;
  int batch = 32;
  double lr = 1e-4;
  double l2 = 1e-4;
  uint64_t seed = 0;
  int tap_id = 1;
  LossMode loss_mode = LossMode::kMean;
  int workers = 1;
  int history_every = 100;
};

struct TrainResult {
  LossHistory history;  // (step, batch loss incl. the L2 term)
};

// Minibatch training of both aggregated layers on harvested tuples. Branch
// weights stay fixed; only conv kernels and biases move. Workers evaluate
// disjoint batch chunks on independent graphs and are reduced in a fixed
// order, so results do not depend on scheduling.
TrainResult train_tft(Tft& tft, std::span<const TrainingTuple> tuples, const TrainConfig& config);

double feature_loss(const Tensor& predicted, const Tensor& target,
                    LossMode mode = LossMode::kMean);

// Mean transformer loss over a tuple set (no regularizer).
double eval_feature_loss(const Tft& tft, std::span<const TrainingTuple> tuples,
                         LossMode mode = LossMode::kMean);

// --- image generation by inversion ----------------------------------------

double tv_regularizer(const Tensor& image);

struct InversionConfig {
  std::vector<double> alphas;  // per transformer; empty means all 1
  double beta = -1.0;          // < 0 picks beta so beta*TV(init) is 1% of the initial loss
  int iterations = 200;
  double step = 1.0;
  enum class Init { kSource, kNoise } init = Init::kSource;
  uint64_t seed = 0;  // noise init
  LossMode loss_mode = LossMode::kMean;
  // Optional [H,W] mask at image resolution, pooled to each tap and applied
  // to the source features before the transformer.
  std::optional<Tensor> feature_mask;
  int history_every = 10;
};

struct InversionResult {
  ImageSample image;
  double final_loss = 0.0;
  LossHistory history;
};

// Gradient descent on the pixel array toward the transformed target
// features, pixels clamped to [0,1], step halved whenever the candidate
// would increase the loss. The loss sequence is non-increasing.
InversionResult invert_features(const Backbone& bb, const std::vector<const Tft*>& tfts,
                                const ImageSample& source, const TransformParams& params,
                                const InversionConfig& config);

// --- flow analysis ---------------------------------------------------------

// Intensity-weighted mean coordinate using |value| as mass; (x, y) order.
std::pair<double, double> center_of_mass(const Tensor& map2d);

struct FlowVec {
  double x0, y0, x1, y1;
  bool valid;
};

struct FlowField {
  int height = 0, width = 0, spacing = 1;
  std::vector<FlowVec> vectors;
};

// Feeds one-hot probes (1 at the start point, broadcast over channels)
// through the transformer; the channel-mean |output| center of mass is the
// end point. Start points sit at spacing/2 + k*spacing on both axes.
FlowField flow_field(const Tft& tft, const TransformParams& params, int spacing, int height,
                     int width);

// --- evaluation -------------------------------------------------------------

// Mean squared pixel error over [0,1] images of equal size.
double mspe(const ImageSample& a, const ImageSample& b);

// Rotates every sample by an angle drawn uniformly from [lo, hi] degrees.
std::vector<ImageSample> perturb_rotations(std::span<const ImageSample> images, double lo,
                                           double hi, uint64_t seed);

// --- network-internal augmentation ------------------------------------------

struct FinetuneConfig {
  int epochs = 2;
  int batch = 32;
  double lr = 1e-4;
  uint64_t seed = 0;
  bool freeze_upstream = false;
  int history_every = 100;
};

struct FinetuneResult {
  LossHistory history;
};

// Cross-entropy fine-tuning with the frozen transformer inserted at its
// tap; one control draw per minibatch. Passing tft == nullptr fine-tunes
// without an insertion while consuming the same batch randomness, so the
// two paths are comparable seed for seed.
FinetuneResult internal_augment_finetune(Backbone& bb, const Tft* tft,
                                         std::span<const ImageSample> dataset,
                                         const ThetaRanges& ranges, const FinetuneConfig& config);

// --- style conditioning -------------------------------------------------------

// Fixed per-channel linear filters acting on tap features; style s scales
// channel c by gains(s, c).
struct StyleBank {
  Tensor gains;  // [S, C]
  int styles() const { return gains.dim(0); }
};

StyleBank make_style_bank(int styles, int channels, uint64_t seed);
Tensor style_target(const StyleBank& bank, int style, const Tensor& features);

struct StyleModel {
  Tft tft;
  WeightRegressor regressor;
  StyleBank bank;
};

StyleModel make_style_model(int styles, int channels, int hidden, const TftConfig& tft_config,
                            int tap_id, int cumulative_stride, uint64_t seed);

struct StyleTrainConfig {
  long steps = 3000;
  int batch = 8;
  double lr = 1e-3;
  uint64_t seed = 0;
  LossMode loss_mode = LossMode::kMean;
  int history_every = 100;
};

// Joint training of the conv stacks and the weight regressor on
// (features, style) pairs drawn from the bank.
TrainResult train_style(StyleModel& model, std::span<const Tensor> features,
                        const StyleTrainConfig& config);

double eval_style_loss(const StyleModel& model, std::span<const Tensor> features, int style,
                       LossMode mode = LossMode::kMean);

void save_style_model(const StyleModel& model, const std::string& path);
StyleModel load_style_model(const std::string& path);

}  // namespace tft
