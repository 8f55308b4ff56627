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

#include "tft/backbone.hpp"

#include <cmath>

#include "tft/adam.hpp"
#include "tft/checkpoint.hpp"

namespace tft {

namespace {

Tensor bias_add_eval(const Tensor& x, const Tensor& b) {
  const int c = x.dim(x.rank() - 1);
  Tensor out(x.shape());
  const double* xp = x.data();
  const double* bp = b.data();
  double* op = out.mutable_data();
  const long pixels = x.numel() / c;
  for (long p = 0; p < pixels; ++p) {
    for (int ch = 0; ch < c; ++ch) op[p * c + ch] = xp[p * c + ch] + bp[ch];
  }
  return out;
}

}  // namespace

int Backbone::tap_stride(int tap_id) const {
  if (tap_id < 1 || tap_id > tap_count()) throw UsageError("tap id out of range");
  return 1 << (tap_id - 1);
}

int Backbone::tap_channels(int tap_id) const {
  if (tap_id < 1 || tap_id > tap_count()) throw UsageError("tap id out of range");
  return config.channels[static_cast<size_t>(tap_id - 1)];
}

int Backbone::tap_side(int tap_id, int input_side) const {
  int side = input_side;
  for (int k = 1; k < tap_id; ++k) side = (side + 1) / 2;
  return side;
}

int Backbone::head_input_size() const {
  int side = config.input_side;
  for (size_t k = 0; k < config.channels.size(); ++k) side = (side + 1) / 2;
  return side * side * config.channels.back();
}

Backbone make_backbone(const BackboneConfig& config, Rng& rng) {
  Backbone bb;
  bb.config = config;
  int in_ch = 1;
  for (int out_ch : config.channels) {
    ConvLayer layer;
    const double scale = 1.0 / std::sqrt(static_cast<double>(config.ksize) * config.ksize * in_ch);
    layer.kernel = Tensor::uniform({config.ksize, config.ksize, in_ch, out_ch}, scale, rng);
    layer.bias = Tensor({out_ch});
    bb.blocks.push_back(std::move(layer));
    in_ch = out_ch;
  }
  const int head = bb.head_input_size();
  bb.fc1.w = Tensor::uniform({head, config.fc_hidden}, 1.0 / std::sqrt(head), rng);
  bb.fc1.b = Tensor({config.fc_hidden});
  bb.fc2.w = Tensor::uniform({config.fc_hidden, config.classes},
                             1.0 / std::sqrt(config.fc_hidden), rng);
  bb.fc2.b = Tensor({config.classes});
  return bb;
}

BackboneActivations backbone_forward(const Backbone& bb, const Tensor& image) {
  if (image.rank() != 2 && !(image.rank() == 3 && image.dim(2) == 1)) {
    throw ShapeError("backbone expects [H,W] or [H,W,1] input, got " + image.shape_str());
  }
  BackboneActivations acts;
  Tensor x = image;
  for (const ConvLayer& block : bb.blocks) {
    x = relu(bias_add_eval(conv2d(x, block.kernel), block.bias));
    acts.taps.push_back(x);
    x = maxpool2(x);
  }
  if (image.dim(0) == bb.config.input_side && image.dim(1) == bb.config.input_side) {
    Tensor flat = x.reshaped({static_cast<int>(x.numel())});
    Tensor h = relu(dense(flat, bb.fc1.w, bb.fc1.b));
    acts.logits = dense(h, bb.fc2.w, bb.fc2.b);
  }
  return acts;
}

namespace {

Var bind_param(Graph& g, const Tensor& t, Binder* binder) {
  // Binder seam; parameters stay logically const on inference paths.
  return binder ? binder->bind(const_cast<Tensor&>(t)) : g.leaf(t, false);
}

Var head_graph(Graph& g, const Backbone& bb, Var x, Binder* binder) {
  const Tensor& pooled = g.value(x);
  if (pooled.numel() != bb.head_input_size()) {
    throw ShapeError("classifier head requires the native input size");
  }
  x = g.reshape(x, {static_cast<int>(pooled.numel())});
  x = g.relu(g.dense(x, bind_param(g, bb.fc1.w, binder), bind_param(g, bb.fc1.b, binder)));
  return g.dense(x, bind_param(g, bb.fc2.w, binder), bind_param(g, bb.fc2.b, binder));
}

}  // namespace

Var backbone_graph(Graph& g, const Backbone& bb, Var image, int stop_after_tap, Binder* binder,
                   std::vector<Var>* tap_vars) {
  Var x = image;
  for (int k = 1; k <= bb.tap_count(); ++k) {
    const ConvLayer& block = bb.blocks[static_cast<size_t>(k - 1)];
    x = g.relu(g.bias_add(g.conv2d(x, bind_param(g, block.kernel, binder)),
                          bind_param(g, block.bias, binder)));
    if (tap_vars) tap_vars->push_back(x);
    if (stop_after_tap == k) return x;
    x = g.maxpool2(x);
  }
  return head_graph(g, bb, x, binder);
}

Var backbone_tail_graph(Graph& g, const Backbone& bb, Var tap_activation, int from_tap,
                        Binder* binder) {
  if (from_tap < 1 || from_tap > bb.tap_count()) throw UsageError("tap id out of range");
  Var x = g.maxpool2(tap_activation);
  for (int k = from_tap + 1; k <= bb.tap_count(); ++k) {
    const ConvLayer& block = bb.blocks[static_cast<size_t>(k - 1)];
    x = g.relu(g.bias_add(g.conv2d(x, bind_param(g, block.kernel, binder)),
                          bind_param(g, block.bias, binder)));
    x = g.maxpool2(x);
  }
  return head_graph(g, bb, x, binder);
}

std::vector<Tensor*> backbone_parameters(Backbone& bb) {
  std::vector<Tensor*> out;
  for (auto& block : bb.blocks) {
    out.push_back(&block.kernel);
    out.push_back(&block.bias);
  }
  out.push_back(&bb.fc1.w);
  out.push_back(&bb.fc1.b);
  out.push_back(&bb.fc2.w);
  out.push_back(&bb.fc2.b);
  return out;
}

FitResult train_backbone(Backbone& bb, std::span<const ImageSample> dataset,
                         const FitConfig& config) {
  if (config.epochs < 0) throw UsageError("epochs must be >= 0");
  if (config.batch < 1) throw UsageError("batch must be >= 1");
  if (!(config.lr > 0)) throw UsageError("learning rate must be positive");
  FitResult result;
  if (config.epochs == 0 || dataset.empty()) {
    result.train_accuracy = dataset.empty() ? 0.0 : evaluate_accuracy(bb, dataset);
    return result;
  }

  std::vector<Tensor*> params = backbone_parameters(bb);
  std::vector<AdamState> states;
  std::vector<Tensor> accum;
  for (Tensor* p : params) {
    states.push_back(make_adam(*p, AdamConfig{config.lr, 0.9, 0.999, 1e-8}));
    accum.emplace_back(p->shape());
  }

  Rng rng(config.seed);
  std::vector<size_t> order(dataset.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  long step = 0;
  long last_recorded = -1;
  double last_loss = 0.0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch)) {
      const size_t end = std::min(order.size(), start + static_cast<size_t>(config.batch));
      const double inv = 1.0 / static_cast<double>(end - start);
      double batch_loss = 0.0;
      for (Tensor& a : accum) a = Tensor(a.shape());
      for (size_t bi = start; bi < end; ++bi) {
        const ImageSample& sample = dataset[order[bi]];
        if (sample.label < 0 || sample.label >= bb.config.classes) {
          throw DataError(DataError::Code::kMalformed, "sample label out of range");
        }
        Graph g;
        Binder binder(g);
        Var logits = backbone_graph(g, bb, g.leaf(sample.pixels), 0, &binder);
        Var loss = g.scale(g.softmax_xent(logits, sample.label), inv);
        g.backward(loss);
        batch_loss += g.value(loss).at(0);
        for (size_t j = 0; j < binder.bound.size(); ++j) {
          const Tensor& grad = g.grad(binder.bound[j].second);
          double* a = accum[j].mutable_data();
          const double* gp = grad.data();
          for (long i = 0; i < grad.numel(); ++i) a[i] += gp[i];
        }
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericError("training loss became non-finite", step);
      }
      if (step % config.history_every == 0) {
        result.history.emplace_back(step, batch_loss);
        last_recorded = step;
      }
      last_loss = batch_loss;
      for (size_t j = 0; j < params.size(); ++j) adam_step(*params[j], accum[j], states[j]);
      ++step;
    }
  }
  if (step > 0 && last_recorded != step - 1) result.history.emplace_back(step - 1, last_loss);
  result.train_accuracy = evaluate_accuracy(bb, dataset);
  return result;
}

double evaluate_accuracy(const Backbone& bb, std::span<const ImageSample> dataset) {
  if (dataset.empty()) return 0.0;
  long correct = 0;
  for (const ImageSample& s : dataset) {
    const auto acts = backbone_forward(bb, s.pixels);
    if (acts.logits.empty()) throw ShapeError("accuracy needs native-size inputs");
    const double* l = acts.logits.data();
    int best = 0;
    for (int k = 1; k < acts.logits.numel(); ++k) {
      if (l[k] > l[best]) best = k;
    }
    if (best == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

void save_backbone(const Backbone& bb, const std::string& path) {
  Container c;
  std::vector<double> meta = {static_cast<double>(bb.config.input_side),
                              static_cast<double>(bb.config.ksize),
                              static_cast<double>(bb.config.fc_hidden),
                              static_cast<double>(bb.config.classes),
                              static_cast<double>(bb.config.channels.size())};
  for (int ch : bb.config.channels) meta.push_back(ch);
  c.add("meta/backbone", Tensor::from({static_cast<int>(meta.size())}, meta));
  for (size_t k = 0; k < bb.blocks.size(); ++k) {
    c.add("block" + std::to_string(k) + "/kernel", bb.blocks[k].kernel);
    c.add("block" + std::to_string(k) + "/bias", bb.blocks[k].bias);
  }
  c.add("fc1/w", bb.fc1.w);
  c.add("fc1/b", bb.fc1.b);
  c.add("fc2/w", bb.fc2.w);
  c.add("fc2/b", bb.fc2.b);
  c.save(path);
}

Backbone load_backbone(const std::string& path) {
  const Container c = Container::load(path);
  const Tensor& meta = c.get("meta/backbone");
  if (meta.numel() < 6) throw DataError(DataError::Code::kMalformed, "bad backbone metadata");
  Backbone bb;
  bb.config.input_side = static_cast<int>(meta.at(0));
  bb.config.ksize = static_cast<int>(meta.at(1));
  bb.config.fc_hidden = static_cast<int>(meta.at(2));
  bb.config.classes = static_cast<int>(meta.at(3));
  const int nblocks = static_cast<int>(meta.at(4));
  bb.config.channels.clear();
  for (int k = 0; k < nblocks; ++k) bb.config.channels.push_back(static_cast<int>(meta.at(5 + k)));
  for (int k = 0; k < nblocks; ++k) {
    ConvLayer layer;
    layer.kernel = c.get("block" + std::to_string(k) + "/kernel");
    layer.bias = c.get("block" + std::to_string(k) + "/bias");
    bb.blocks.push_back(std::move(layer));
  }
  bb.fc1.w = c.get("fc1/w");
  bb.fc1.b = c.get("fc1/b");
  bb.fc2.w = c.get("fc2/w");
  bb.fc2.b = c.get("fc2/b");
  return bb;
}

}  // namespace tft
