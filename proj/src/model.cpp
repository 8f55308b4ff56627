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

#include "tft/model.hpp"

#include <cmath>

#include "tft/checkpoint.hpp"

namespace tft {

namespace {

Tensor init_kernel(int ksize, int in_ch, int out_ch, Rng& rng) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(ksize) * ksize * in_ch);
  return Tensor::uniform({ksize, ksize, in_ch, out_ch}, scale, rng);
}

TransformationFunction make_function(const TftConfig& cfg, Rng& rng) {
  TransformationFunction fn;
  fn.relu_last = cfg.relu_last;
  for (int d = 0; d < cfg.depth; ++d) {
    const int in_ch = d == 0 ? cfg.channels : cfg.intermediate;
    const int out_ch = d == cfg.depth - 1 ? cfg.channels : cfg.intermediate;
    ConvLayer layer;
    layer.kernel = init_kernel(cfg.ksize, in_ch, out_ch, rng);
    if (cfg.with_bias) layer.bias = Tensor({out_ch});
    fn.layers.push_back(std::move(layer));
  }
  return fn;
}

AggregatedLayer make_layer(const TftConfig& cfg, Rng& rng) {
  AggregatedLayer layer;
  layer.w0 = 1.0;
  layer.weights.resize(static_cast<size_t>(cfg.branches));
  for (int i = 0; i < cfg.branches; ++i) layer.weights[static_cast<size_t>(i)] =
      i < cfg.branches / 2 ? 1.0 : -1.0;
  for (int i = 0; i < cfg.branches; ++i) layer.functions.push_back(make_function(cfg, rng));
  return layer;
}

int layer_channels(const AggregatedLayer& layer) {
  if (layer.functions.empty()) return -1;
  return layer.functions.front().layers.front().kernel.dim(2);
}

void check_layer_input(const AggregatedLayer& layer, const Tensor& f) {
  if (f.rank() != 3) {
    throw ShapeError("aggregated layer expects [H,W,C], got " + f.shape_str());
  }
  const int ch = layer_channels(layer);
  if (ch > 0 && f.dim(2) != ch) {
    throw ShapeError("aggregated layer channel mismatch: input has " + std::to_string(f.dim(2)) +
                     ", layer expects " + std::to_string(ch));
  }
}

Var const_or_bind(Graph& g, const Tensor& t, Binder* binder) {
  // Binders hold non-const pointers for the optimizer; the const_cast is
  // confined to this seam.
  if (binder) return binder->bind(const_cast<Tensor&>(t));
  return g.leaf(t, false);
}

}  // namespace

Tft make_tft(const TftConfig& config, int tap_id, int cumulative_stride, Rng& rng) {
  if (config.branches <= 0 || config.branches % 2 != 0) {
    throw UsageError("spatial-mode branch count must be positive and even");
  }
  if (config.depth < 1) throw UsageError("transformation function depth must be >= 1");
  if (cumulative_stride < 1) throw UsageError("cumulative stride must be >= 1");
  Tft t;
  t.config = config;
  t.tap_id = tap_id;
  t.cumulative_stride = cumulative_stride;
  t.pre = make_layer(config, rng);
  t.post = make_layer(config, rng);
  return t;
}

void zero_kernels(Tft& tft) {
  for (Tensor* p : tft_parameters(tft)) *p = Tensor(p->shape());
}

std::vector<Tensor*> layer_parameters(AggregatedLayer& layer) {
  std::vector<Tensor*> out;
  for (auto& fn : layer.functions) {
    for (auto& l : fn.layers) {
      out.push_back(&l.kernel);
      if (!l.bias.empty()) out.push_back(&l.bias);
    }
  }
  return out;
}

std::vector<Tensor*> tft_parameters(Tft& tft) {
  std::vector<Tensor*> out = layer_parameters(tft.pre);
  auto post = layer_parameters(tft.post);
  out.insert(out.end(), post.begin(), post.end());
  return out;
}

Var transformation_apply(Graph& g, const TransformationFunction& fn, Var f, Binder* binder) {
  Var x = f;
  for (size_t i = 0; i < fn.layers.size(); ++i) {
    const ConvLayer& layer = fn.layers[i];
    Var k = const_or_bind(g, layer.kernel, binder);
    x = g.conv2d(x, k, 1, Padding::kSame);
    if (!layer.bias.empty()) {
      Var b = const_or_bind(g, layer.bias, binder);
      x = g.bias_add(x, b);
    }
    if (i + 1 < fn.layers.size() || fn.relu_last) x = g.relu(x);
  }
  return x;
}

Var aggregated_apply_graph(Graph& g, const AggregatedLayer& layer, Var f, Binder* binder) {
  check_layer_input(layer, g.value(f));
  Var acc = g.scale(f, layer.w0);
  for (size_t i = 0; i < layer.functions.size(); ++i) {
    Var branch = transformation_apply(g, layer.functions[i], f, binder);
    acc = g.add(acc, g.scale(branch, layer.weights[i]));
  }
  return acc;
}

Tensor aggregated_apply(const AggregatedLayer& layer, const Tensor& f) {
  Graph g;
  Var out = aggregated_apply_graph(g, layer, g.leaf(f), nullptr);
  return g.value(out);
}

Var aggregated_apply_weighted(Graph& g, const AggregatedLayer& layer, Var f,
                              const std::vector<Var>& branch_weights, Binder* binder) {
  check_layer_input(layer, g.value(f));
  if (branch_weights.size() != layer.functions.size()) {
    throw ShapeError("weighted aggregation: " + std::to_string(branch_weights.size()) +
                     " weights for " + std::to_string(layer.functions.size()) + " branches");
  }
  if (layer.functions.empty()) throw ShapeError("weighted aggregation needs branches");
  Var acc;
  for (size_t i = 0; i < layer.functions.size(); ++i) {
    Var branch = transformation_apply(g, layer.functions[i], f, binder);
    Var term = g.scalar_scale(branch_weights[i], branch);
    acc = i == 0 ? term : g.add(acc, term);
  }
  return acc;
}

Var tft_apply(Graph& g, const Tft& tft, Var f, const TransformParams& params, Binder* binder,
              ComposeOrder order) {
  params.validate();
  const Tensor& fv = g.value(f);
  if (fv.rank() != 3) throw ShapeError("tft expects [H,W,C], got " + fv.shape_str());
  const TransformParams scaled = scale_params_to_layer(params, tft.cumulative_stride);
  const AffineMatrix matrix =
      make_affine(scaled, grid_center(fv.dim(0), fv.dim(1)), order);
  Var x = aggregated_apply_graph(g, tft.pre, f, binder);
  x = g.bilinear_warp(x, matrix);
  return aggregated_apply_graph(g, tft.post, x, binder);
}

Tensor tft_forward(const Tft& tft, const Tensor& f, const TransformParams& params,
                   ComposeOrder order) {
  Graph g;
  Var out = tft_apply(g, tft, g.leaf(f), params, nullptr, order);
  return g.value(out);
}

StyleCode StyleCode::one_hot(int styles, int index) {
  if (index < 0 || index >= styles) throw UsageError("style index out of range");
  StyleCode c;
  c.c.assign(static_cast<size_t>(styles), 0.0);
  c.c[static_cast<size_t>(index)] = 1.0;
  return c;
}

void StyleCode::validate() const {
  if (c.empty()) throw UsageError("style code must not be empty");
  double sum = 0.0;
  for (double v : c) {
    if (!(v >= 0.0)) throw UsageError("style code entries must be >= 0");
    sum += v;
  }
  if (std::fabs(sum - 1.0) > 1e-9) throw UsageError("style code must sum to 1");
}

WeightRegressor make_regressor(int styles, int hidden, int outputs, Rng& rng) {
  if (styles < 1 || hidden < 1 || outputs < 1) {
    throw UsageError("regressor dimensions must be positive");
  }
  WeightRegressor r;
  r.styles = styles;
  r.hidden = hidden;
  r.outputs = outputs;
  r.w1 = Tensor::uniform({styles, hidden}, 1.0 / std::sqrt(static_cast<double>(styles)), rng);
  r.b1 = Tensor({hidden});
  r.w2 = Tensor::uniform({hidden, outputs}, 1.0 / std::sqrt(static_cast<double>(hidden)), rng);
  r.b2 = Tensor({outputs});
  return r;
}

StyleWeights style_weights(const WeightRegressor& reg, const StyleCode& code) {
  code.validate();
  if (static_cast<int>(code.c.size()) != reg.styles) {
    throw ShapeError("style code length " + std::to_string(code.c.size()) +
                     " does not match regressor styles " + std::to_string(reg.styles));
  }
  Graph g;
  Var c = g.leaf(Tensor::from({reg.styles}, code.c));
  Var h = g.relu(g.dense(c, g.leaf(reg.w1), g.leaf(reg.b1)));
  Var w = g.dense(h, g.leaf(reg.w2), g.leaf(reg.b2));
  const Tensor& wt = g.value(w);
  const int n = reg.outputs / 2;
  StyleWeights out;
  out.pre.assign(wt.data(), wt.data() + n);
  out.post.assign(wt.data() + n, wt.data() + reg.outputs);
  return out;
}

StyleWeightVars style_weights_graph(Graph& g, const WeightRegressor& reg, const StyleCode& code,
                                    Binder* binder) {
  code.validate();
  if (static_cast<int>(code.c.size()) != reg.styles) {
    throw ShapeError("style code length does not match regressor");
  }
  Var c = g.leaf(Tensor::from({reg.styles}, code.c));
  Var h = g.relu(g.dense(c, const_or_bind(g, reg.w1, binder), const_or_bind(g, reg.b1, binder)));
  Var w = g.dense(h, const_or_bind(g, reg.w2, binder), const_or_bind(g, reg.b2, binder));
  StyleWeightVars out;
  const int n = reg.outputs / 2;
  for (int i = 0; i < n; ++i) out.pre.push_back(g.select(w, i));
  for (int i = n; i < reg.outputs; ++i) out.post.push_back(g.select(w, i));
  return out;
}

Var tft_apply_style(Graph& g, const Tft& tft, Var f, const StyleWeightVars& weights,
                    Binder* binder) {
  Var x = aggregated_apply_weighted(g, tft.pre, f, weights.pre, binder);
  x = g.bilinear_warp(x, AffineMatrix::identity());
  return aggregated_apply_weighted(g, tft.post, x, weights.post, binder);
}

Tensor tft_forward_style(const Tft& tft, const Tensor& f, const StyleWeights& weights) {
  Graph g;
  std::vector<Var> pre, post;
  for (double w : weights.pre) pre.push_back(g.leaf(Tensor::from({1}, {w})));
  for (double w : weights.post) post.push_back(g.leaf(Tensor::from({1}, {w})));
  Var out = tft_apply_style(g, tft, g.leaf(f), StyleWeightVars{pre, post}, nullptr);
  return g.value(out);
}

namespace {

void save_layer(Container& c, const std::string& prefix, const AggregatedLayer& layer) {
  c.add(prefix + "/w0", Tensor::from({1}, {layer.w0}));
  c.add(prefix + "/weights",
        Tensor::from({static_cast<int>(layer.weights.size())}, layer.weights));
  for (size_t i = 0; i < layer.functions.size(); ++i) {
    const auto& fn = layer.functions[i];
    for (size_t j = 0; j < fn.layers.size(); ++j) {
      const std::string base = prefix + "/t" + std::to_string(i) + "/l" + std::to_string(j);
      c.add(base + "/kernel", fn.layers[j].kernel);
      if (!fn.layers[j].bias.empty()) c.add(base + "/bias", fn.layers[j].bias);
    }
  }
}

AggregatedLayer load_layer(const Container& c, const std::string& prefix, const TftConfig& cfg) {
  AggregatedLayer layer;
  layer.w0 = c.get_scalar(prefix + "/w0");
  const Tensor& w = c.get(prefix + "/weights");
  layer.weights.assign(w.data(), w.data() + w.numel());
  for (int i = 0; i < cfg.branches; ++i) {
    TransformationFunction fn;
    fn.relu_last = cfg.relu_last;
    for (int j = 0; j < cfg.depth; ++j) {
      const std::string base = prefix + "/t" + std::to_string(i) + "/l" + std::to_string(j);
      ConvLayer l;
      l.kernel = c.get(base + "/kernel");
      if (cfg.with_bias) l.bias = c.get(base + "/bias");
      fn.layers.push_back(std::move(l));
    }
    layer.functions.push_back(std::move(fn));
  }
  return layer;
}

}  // namespace

void save_tft_into(Container& c, const Tft& tft, const std::string& prefix) {
  const TftConfig& k = tft.config;
  c.add(prefix + "meta/tft",
        Tensor::from({9}, {static_cast<double>(tft.tap_id),
                           static_cast<double>(tft.cumulative_stride),
                           static_cast<double>(k.channels), static_cast<double>(k.branches),
                           static_cast<double>(k.depth), static_cast<double>(k.intermediate),
                           static_cast<double>(k.ksize), k.relu_last ? 1.0 : 0.0,
                           k.with_bias ? 1.0 : 0.0}));
  save_layer(c, prefix + "pre", tft.pre);
  save_layer(c, prefix + "post", tft.post);
}

Tft load_tft_from(const Container& c, const std::string& prefix) {
  const Tensor& meta = c.get(prefix + "meta/tft");
  if (meta.numel() != 9) {
    throw DataError(DataError::Code::kMalformed, "bad tft metadata");
  }
  Tft t;
  t.tap_id = static_cast<int>(meta.at(0));
  t.cumulative_stride = static_cast<int>(meta.at(1));
  t.config.channels = static_cast<int>(meta.at(2));
  t.config.branches = static_cast<int>(meta.at(3));
  t.config.depth = static_cast<int>(meta.at(4));
  t.config.intermediate = static_cast<int>(meta.at(5));
  t.config.ksize = static_cast<int>(meta.at(6));
  t.config.relu_last = meta.at(7) != 0.0;
  t.config.with_bias = meta.at(8) != 0.0;
  t.pre = load_layer(c, prefix + "pre", t.config);
  t.post = load_layer(c, prefix + "post", t.config);
  return t;
}

void save_tft(const Tft& tft, const std::string& path) {
  Container c;
  save_tft_into(c, tft, "");
  c.save(path);
}

Tft load_tft(const std::string& path) { return load_tft_from(Container::load(path), ""); }

}  // namespace tft
