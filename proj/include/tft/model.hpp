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

#include <string>
#include <vector>

#include "tft/graph.hpp"

namespace tft {

// Binds model parameter tensors to graph leaves so a trainer can collect
// gradients. Bind order is the builders' traversal order and is stable
// across calls for a fixed model.
struct Binder {
  explicit Binder(Graph& g) : graph(&g) {}
  Graph* graph;
  std::vector<std::pair<Tensor*, Var>> bound;

  Var bind(Tensor& t) {
    Var v = graph->leaf(t, true);
    bound.emplace_back(&t, v);
    return v;
  }
};

struct ConvLayer {
  Tensor kernel;  // [k,k,in,out]
  Tensor bias;    // [out], empty when bias disabled
};

// A small stack of same-padding stride-1 convolutions operating on a
// feature map, preserving its channel count and spatial dims.
struct TransformationFunction {
  std::vector<ConvLayer> layers;
  bool relu_last = true;  // ReLU after the final conv as well
};

// Residual combination w0 * f + sum_i w_i * T_i(f).
struct AggregatedLayer {
  double w0 = 1.0;
  std::vector<double> weights;
  std::vector<TransformationFunction> functions;

  int branch_count() const { return static_cast<int>(functions.size()); }
};

struct TftConfig {
  int channels = 16;      // channel count of the target backbone layer
  int branches = 8;       // N; spatial mode requires an even count
  int depth = 2;          // convs per transformation function
  int intermediate = 32;  // channel count between convs
  int ksize = 5;
  bool relu_last = true;
  bool with_bias = true;
};

// The transformer for one backbone layer: aggregated layer, affine warp,
// aggregated layer. The two aggregated layers have independent parameters.
struct Tft {
  TftConfig config;
  AggregatedLayer pre;
  AggregatedLayer post;
  int tap_id = 1;
  int cumulative_stride = 1;
};

// Spatial-mode construction: w0 = 1, first N/2 branch weights +1, the rest
// -1; conv kernels uniform with scale 1/sqrt(fan-in), biases zero.
Tft make_tft(const TftConfig& config, int tap_id, int cumulative_stride, Rng& rng);

// Sets every kernel and bias to zero (the layer then reduces to w0 * f).
void zero_kernels(Tft& tft);

std::vector<Tensor*> layer_parameters(AggregatedLayer& layer);
std::vector<Tensor*> tft_parameters(Tft& tft);

// --- forward -----------------------------------------------------------

Var transformation_apply(Graph& g, const TransformationFunction& fn, Var f, Binder* binder);

// Fixed-weight combination (spatial mode).
Var aggregated_apply_graph(Graph& g, const AggregatedLayer& layer, Var f, Binder* binder);
Tensor aggregated_apply(const AggregatedLayer& layer, const Tensor& f);

// Weighted combination with per-branch scalar nodes and w0 = 0 (style mode).
Var aggregated_apply_weighted(Graph& g, const AggregatedLayer& layer, Var f,
                              const std::vector<Var>& branch_weights, Binder* binder);

// post(warp(pre(f))) with translation rescaled by the layer's cumulative
// stride and the warp centered on the feature map.
Var tft_apply(Graph& g, const Tft& tft, Var f, const TransformParams& params, Binder* binder,
              ComposeOrder order = ComposeOrder::kTranRotScale);
Tensor tft_forward(const Tft& tft, const Tensor& f, const TransformParams& params,
                   ComposeOrder order = ComposeOrder::kTranRotScale);

// --- style conditioning --------------------------------------------------

// One-hot style selector or a convex mixture.
struct StyleCode {
  std::vector<double> c;
  static StyleCode one_hot(int styles, int index);
  void validate() const;  // entries >= 0, sum == 1
};

// Two fully-connected layers mapping a style code to 2N branch weights
// (N for each aggregated layer).
struct WeightRegressor {
  Tensor w1, b1;  // styles -> hidden
  Tensor w2, b2;  // hidden -> outputs
  int styles = 0, hidden = 0, outputs = 0;
};

WeightRegressor make_regressor(int styles, int hidden, int outputs, Rng& rng);

struct StyleWeights {
  std::vector<double> pre, post;
  double w0 = 0.0;  // residual path disabled in style mode
};

StyleWeights style_weights(const WeightRegressor& reg, const StyleCode& code);

struct StyleWeightVars {
  std::vector<Var> pre, post;
};

StyleWeightVars style_weights_graph(Graph& g, const WeightRegressor& reg, const StyleCode& code,
                                    Binder* binder);

// Style-mode transform: both aggregated layers use regressed weights with
// w0 = 0 and the affine stage receives the identity.
Var tft_apply_style(Graph& g, const Tft& tft, Var f, const StyleWeightVars& weights,
                    Binder* binder);
Tensor tft_forward_style(const Tft& tft, const Tensor& f, const StyleWeights& weights);

// --- persistence ---------------------------------------------------------

void save_tft(const Tft& tft, const std::string& path);
Tft load_tft(const std::string& path);

class Container;
// Prefixed variants so several models can share one container.
void save_tft_into(Container& c, const Tft& tft, const std::string& prefix);
Tft load_tft_from(const Container& c, const std::string& prefix);

}  // namespace tft
