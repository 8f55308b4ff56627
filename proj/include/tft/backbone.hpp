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
#include <span>
#include <string>
#include <vector>

#include "tft/dataset.hpp"
#include "tft/model.hpp"

namespace tft {

struct BackboneConfig {
  std::vector<int> channels = {16, 32, 64};  // conv blocks, each conv+relu+pool
  int ksize = 5;
  int fc_hidden = 128;
  int classes = 10;
  int input_side = 44;  // native size; the fully-connected head assumes it
};

struct DenseParams {
  Tensor w, b;
};

// Frozen feature producer: conv blocks with feature taps after each block's
// ReLU (before its pool), then two fully-connected layers.
struct Backbone {
  BackboneConfig config;
  std::vector<ConvLayer> blocks;
  DenseParams fc1, fc2;

  int tap_count() const { return static_cast<int>(blocks.size()); }
  // Taps are 1-based; tap k sits before the k-th pool.
  int tap_stride(int tap_id) const;
  int tap_channels(int tap_id) const;
  // Spatial side of tap k for a square input of the given side.
  int tap_side(int tap_id, int input_side) const;
  // Flattened feature length entering fc1 at the native input size.
  int head_input_size() const;
};

Backbone make_backbone(const BackboneConfig& config, Rng& rng);

struct BackboneActivations {
  std::vector<Tensor> taps;  // index 0 = tap 1
  Tensor logits;             // empty for non-native input sizes
};

// Deterministic forward pass. Accepts any input size compatible with the
// kernels; the classifier head only runs at the native size.
BackboneActivations backbone_forward(const Backbone& bb, const Tensor& image);

// Builds the graph from `image` up to and including tap `stop_after_tap`
// (1-based), or the full network with logits when stop_after_tap == 0.
// tap_vars receives the tap nodes in order.
Var backbone_graph(Graph& g, const Backbone& bb, Var image, int stop_after_tap, Binder* binder,
                   std::vector<Var>* tap_vars = nullptr);

// Continues from a (possibly replaced) tap activation: pools it and runs
// the remaining blocks plus the classifier head. Returns the logits.
Var backbone_tail_graph(Graph& g, const Backbone& bb, Var tap_activation, int from_tap,
                        Binder* binder);

std::vector<Tensor*> backbone_parameters(Backbone& bb);

struct FitConfig {
  int epochs = 5;
  int batch = 32;
  double lr = 1e-3;
  uint64_t seed = 0;
  int history_every = 100;
};

struct FitResult {
  std::vector<std::pair<long, double>> history;  // (step, batch loss)
  double train_accuracy = 0.0;
};

// Softmax cross-entropy training with bias-corrected moment updates.
// Zero epochs leaves the parameters untouched and the history empty.
FitResult train_backbone(Backbone& bb, std::span<const ImageSample> dataset,
                         const FitConfig& config);

double evaluate_accuracy(const Backbone& bb, std::span<const ImageSample> dataset);

void save_backbone(const Backbone& bb, const std::string& path);
Backbone load_backbone(const std::string& path);

}  // namespace tft
