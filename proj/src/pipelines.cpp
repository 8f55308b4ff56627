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

#include "tft/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "tft/adam.hpp"
#include "tft/checkpoint.hpp"

namespace tft {

namespace {

void add_into(Tensor& acc, const Tensor& g) {
  double* a = acc.mutable_data();
  const double* gp = g.data();
  for (long i = 0; i < g.numel(); ++i) a[i] += gp[i];
}

void record(LossHistory& history, long step, double loss, int every, long& last_recorded) {
  if (step % every == 0) {
    history.emplace_back(step, loss);
    last_recorded = step;
  }
}

void record_final(LossHistory& history, long step, double loss, long last_recorded) {
  if (step >= 0 && last_recorded != step) history.emplace_back(step, loss);
}

}  // namespace

TrainResult train_tft(Tft& tft, std::span<const TrainingTuple> tuples,
                      const TrainConfig& config) {
  if (tuples.empty()) throw UsageError("train_tft needs a non-empty tuple set");
  if (config.batch < 1) throw UsageError("batch must be >= 1");
  if (!(config.lr > 0)) throw UsageError("learning rate must be positive");
  if (config.l2 < 0) throw UsageError("L2 coefficient must be >= 0");
  if (config.steps < 0) throw UsageError("steps must be >= 0");
  const int workers = std::max(1, config.workers);
  const int tap = config.tap_id;
  for (const TrainingTuple& t : tuples) {
    (void)t.ori(tap);  // throws if a tuple does not carry the tap
  }

  TrainResult result;
  if (config.steps == 0) return result;

  std::vector<Tensor*> params = tft_parameters(tft);
  std::vector<AdamState> states;
  std::vector<Tensor> accum;
  for (Tensor* p : params) {
    states.push_back(make_adam(*p, AdamConfig{config.lr, 0.9, 0.999, 1e-8}));
    accum.emplace_back(p->shape());
  }
  std::vector<std::vector<Tensor>> worker_accum(static_cast<size_t>(workers));
  for (auto& wa : worker_accum) {
    for (Tensor* p : params) wa.emplace_back(p->shape());
  }
  std::vector<double> worker_loss(static_cast<size_t>(workers), 0.0);

  Rng rng(config.seed);
  std::vector<size_t> order(tuples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  size_t cursor = 0;
  auto next_index = [&]() {
    if (cursor == order.size()) {
      rng.shuffle(order);
      cursor = 0;
    }
    return order[cursor++];
  };

  const double inv_batch = 1.0 / config.batch;
  std::vector<size_t> batch(static_cast<size_t>(config.batch));
  long last_recorded = -1;
  double batch_loss = 0.0;

  auto run_chunk = [&](int w, size_t lo, size_t hi) {
    for (size_t bi = lo; bi < hi; ++bi) {
      const TrainingTuple& tuple = tuples[batch[bi]];
      Graph g;
      Binder binder(g);
      Var f = g.leaf(tuple.ori(tap), false);
      Var out = tft_apply(g, tft, f, tuple.params, &binder);
      Var target = g.leaf(tuple.theta(tap), false);
      Var loss = g.scale(g.feature_loss(out, target, config.loss_mode), inv_batch);
      g.backward(loss);
      worker_loss[static_cast<size_t>(w)] += g.value(loss).at(0);
      auto& wa = worker_accum[static_cast<size_t>(w)];
      for (size_t j = 0; j < binder.bound.size(); ++j) add_into(wa[j], g.grad(binder.bound[j].second));
    }
  };

  for (long step = 0; step < config.steps; ++step) {
    for (auto& b : batch) b = next_index();
    for (auto& a : accum) a = Tensor(a.shape());
    for (int w = 0; w < workers; ++w) {
      worker_loss[static_cast<size_t>(w)] = 0.0;
      for (auto& t : worker_accum[static_cast<size_t>(w)]) t = Tensor(t.shape());
    }

    if (workers == 1) {
      run_chunk(0, 0, batch.size());
    } else {
      std::vector<std::thread> threads;
      for (int w = 0; w < workers; ++w) {
        const size_t lo = batch.size() * static_cast<size_t>(w) / static_cast<size_t>(workers);
        const size_t hi = batch.size() * static_cast<size_t>(w + 1) / static_cast<size_t>(workers);
        threads.emplace_back(run_chunk, w, lo, hi);
      }
      for (auto& t : threads) t.join();
    }

    batch_loss = 0.0;
    for (int w = 0; w < workers; ++w) {
      batch_loss += worker_loss[static_cast<size_t>(w)];
      for (size_t j = 0; j < params.size(); ++j) {
        add_into(accum[j], worker_accum[static_cast<size_t>(w)][j]);
      }
    }

    if (config.l2 > 0) {
      Graph g;
      std::vector<Var> vars;
      vars.reserve(params.size());
      for (Tensor* p : params) vars.push_back(g.leaf(*p, true));
      Var penalty = g.l2_penalty(vars, config.l2);
      g.backward(penalty);
      batch_loss += g.value(penalty).at(0);
      for (size_t j = 0; j < params.size(); ++j) add_into(accum[j], g.grad(vars[j]));
    }

    if (!std::isfinite(batch_loss)) throw NumericError("training loss became non-finite", step);
    record(result.history, step, batch_loss, config.history_every, last_recorded);
    for (size_t j = 0; j < params.size(); ++j) adam_step(*params[j], accum[j], states[j]);
  }
  record_final(result.history, config.steps - 1, batch_loss, last_recorded);
  return result;
}

double feature_loss(const Tensor& predicted, const Tensor& target, LossMode mode) {
  check_same_shape(predicted, target, "feature_loss");
  const double* p = predicted.data();
  const double* t = target.data();
  double s = 0.0;
  for (long i = 0; i < predicted.numel(); ++i) {
    const double d = p[i] - t[i];
    s += d * d;
  }
  return mode == LossMode::kMean ? s / static_cast<double>(predicted.numel()) : s;
}

double eval_feature_loss(const Tft& tft, std::span<const TrainingTuple> tuples, LossMode mode) {
  if (tuples.empty()) throw UsageError("eval_feature_loss needs tuples");
  double total = 0.0;
  for (const TrainingTuple& t : tuples) {
    total += feature_loss(tft_forward(tft, t.ori(tft.tap_id), t.params), t.theta(tft.tap_id),
                          mode);
  }
  return total / static_cast<double>(tuples.size());
}

double tv_regularizer(const Tensor& image) {
  if (image.rank() != 2 && !(image.rank() == 3 && image.dim(2) == 1)) {
    throw ShapeError("tv_regularizer expects [H,W] or [H,W,1]");
  }
  const int h = image.dim(0);
  const int w = image.dim(1);
  if (h < 2 || w < 2) throw ShapeError("tv_regularizer needs H,W >= 2");
  const double* x = image.data();
  double s = 0.0;
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const double v = x[static_cast<long>(i) * w + j];
      if (i + 1 < h) {
        const double d = x[static_cast<long>(i + 1) * w + j] - v;
        s += d * d;
      }
      if (j + 1 < w) {
        const double d = x[static_cast<long>(i) * w + j + 1] - v;
        s += d * d;
      }
    }
  }
  return s;
}

namespace {

struct InversionProblem {
  const Backbone* bb;
  std::vector<Tensor> targets;
  std::vector<int> taps;
  std::vector<double> alphas;
  double beta = 0.0;
  LossMode mode;
  int max_tap = 0;
};

double inversion_loss(const InversionProblem& prob, const Tensor& x, Tensor* grad_out) {
  Graph g;
  Var img = g.leaf(x, grad_out != nullptr);
  std::vector<Var> taps;
  backbone_graph(g, *prob.bb, img, prob.max_tap, nullptr, &taps);
  Var total{-1};
  for (size_t i = 0; i < prob.targets.size(); ++i) {
    Var term = g.scale(g.feature_loss(taps[static_cast<size_t>(prob.taps[i] - 1)],
                                      g.leaf(prob.targets[i]), prob.mode),
                       prob.alphas[i]);
    total = total.valid() ? g.add(total, term) : term;
  }
  if (prob.beta > 0) total = g.add(total, g.scale(g.tv(img), prob.beta));
  if (grad_out) {
    g.backward(total);
    *grad_out = g.grad(img);
  }
  return g.value(total).at(0);
}

}  // namespace

InversionResult invert_features(const Backbone& bb, const std::vector<const Tft*>& tfts,
                                const ImageSample& source, const TransformParams& params,
                                const InversionConfig& config) {
  if (tfts.empty()) throw UsageError("invert_features needs at least one transformer");
  if (config.iterations < 0) throw UsageError("iterations must be >= 0");
  InversionProblem prob;
  prob.bb = &bb;
  prob.mode = config.loss_mode;
  prob.alphas = config.alphas.empty() ? std::vector<double>(tfts.size(), 1.0) : config.alphas;
  if (prob.alphas.size() != tfts.size()) {
    throw UsageError("alpha count does not match transformer count");
  }
  double alpha_sum = 0.0;
  for (double a : prob.alphas) {
    if (a < 0) throw UsageError("alphas must be >= 0");
    alpha_sum += a;
  }
  if (!(alpha_sum > 0)) throw UsageError("at least one alpha must be positive");

  // Transformed targets from the source's features, masked when requested.
  const auto source_acts = backbone_forward(bb, source.pixels);
  for (const Tft* t : tfts) {
    const int tap = t->tap_id;
    if (tap < 1 || tap > static_cast<int>(source_acts.taps.size())) {
      throw UsageError("transformer tap out of range");
    }
    Tensor f = source_acts.taps[static_cast<size_t>(tap - 1)];
    if (config.feature_mask) {
      Tensor mask = *config.feature_mask;
      // Pool the image-resolution mask down to the tap grid.
      while (mask.dim(0) > f.dim(0) || mask.dim(1) > f.dim(1)) mask = maxpool2(mask);
      if (mask.dim(0) != f.dim(0) || mask.dim(1) != f.dim(1)) {
        throw ShapeError("mask cannot be reduced to the tap size");
      }
      f = apply_mask(f, mask);
    }
    prob.targets.push_back(tft_forward(*t, f, params));
    prob.taps.push_back(tap);
    prob.max_tap = std::max(prob.max_tap, tap);
  }

  Tensor x = source.pixels;
  if (config.init == InversionConfig::Init::kNoise) {
    Rng rng(config.seed);
    x = Tensor(source.pixels.shape());
    double* p = x.mutable_data();
    for (long i = 0; i < x.numel(); ++i) p[i] = rng.uniform(0.25, 0.75);
  }

  prob.beta = config.beta;
  if (prob.beta < 0) {
    prob.beta = 0.0;
    const double f0 = inversion_loss(prob, x, nullptr);
    const double t0 = tv_regularizer(x);
    prob.beta = t0 > 0 ? 0.01 * f0 / t0 : 0.0;
  }

  InversionResult result;
  double cur = inversion_loss(prob, x, nullptr);
  if (!std::isfinite(cur)) throw NumericError("inversion loss non-finite at start", 0);
  long last_recorded = -1;
  record(result.history, 0, cur, config.history_every, last_recorded);

  double step = config.step;
  Tensor grad;
  long accepted_it = 0;
  for (long it = 1; it <= config.iterations; ++it) {
    const double at_x = inversion_loss(prob, x, &grad);
    if (!std::isfinite(at_x) || !grad.all_finite()) {
      throw NumericError("inversion diverged", it);
    }
    bool accepted = false;
    Tensor candidate;
    double cand_loss = 0.0;
    for (int tries = 0; tries < 60; ++tries) {
      candidate = x;
      double* cp = candidate.mutable_data();
      const double* gp = grad.data();
      for (long i = 0; i < candidate.numel(); ++i) {
        cp[i] = std::clamp(cp[i] - step * gp[i], 0.0, 1.0);
      }
      cand_loss = inversion_loss(prob, candidate, nullptr);
      if (std::isfinite(cand_loss) && cand_loss <= cur) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no admissible move left at this step size
    x = candidate;
    cur = cand_loss;
    accepted_it = it;
    record(result.history, it, cur, config.history_every, last_recorded);
  }
  record_final(result.history, accepted_it, cur, last_recorded);

  result.image.pixels = x;
  result.image.label = source.label;
  result.final_loss = cur;
  return result;
}

std::pair<double, double> center_of_mass(const Tensor& map2d) {
  if (map2d.rank() != 2) throw ShapeError("center_of_mass expects [H,W]");
  const int h = map2d.dim(0);
  const int w = map2d.dim(1);
  const double* p = map2d.data();
  double mass = 0.0, mx = 0.0, my = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double m = std::fabs(p[static_cast<long>(y) * w + x]);
      mass += m;
      mx += m * x;
      my += m * y;
    }
  }
  if (mass <= 0.0) throw NumericError("center_of_mass: no mass");
  return {mx / mass, my / mass};
}

FlowField flow_field(const Tft& tft, const TransformParams& params, int spacing, int height,
                     int width) {
  if (spacing < 1) throw UsageError("grid spacing must be >= 1");
  params.validate();
  FlowField field;
  field.height = height;
  field.width = width;
  field.spacing = spacing;
  const int channels = tft.config.channels;
  const int offset = spacing / 2;
  for (int y = offset; y < height; y += spacing) {
    for (int x = offset; x < width; x += spacing) {
      Tensor probe({height, width, channels});
      double* p = probe.mutable_data();
      for (int c = 0; c < channels; ++c) {
        p[(static_cast<long>(y) * width + x) * channels + c] = 1.0;
      }
      const Tensor out = tft_forward(tft, probe, params);
      Tensor mass({height, width});
      double* m = mass.mutable_data();
      const double* op = out.data();
      for (long pix = 0; pix < static_cast<long>(height) * width; ++pix) {
        double acc = 0.0;
        for (int c = 0; c < channels; ++c) acc += std::fabs(op[pix * channels + c]);
        m[pix] = acc / channels;
      }
      FlowVec v{static_cast<double>(x), static_cast<double>(y), static_cast<double>(x),
                static_cast<double>(y), false};
      try {
        auto [ex, ey] = center_of_mass(mass);
        v.x1 = ex;
        v.y1 = ey;
        v.valid = true;
      } catch (const NumericError&) {
        v.valid = false;  // marked, not dropped
      }
      field.vectors.push_back(v);
    }
  }
  return field;
}

double mspe(const ImageSample& a, const ImageSample& b) {
  if (!a.pixels.same_shape(b.pixels)) {
    throw ShapeError("mspe: image dims " + a.pixels.shape_str() + " vs " + b.pixels.shape_str());
  }
  const double* pa = a.pixels.data();
  const double* pb = b.pixels.data();
  double s = 0.0;
  for (long i = 0; i < a.pixels.numel(); ++i) {
    const double d = pa[i] - pb[i];
    s += d * d;
  }
  return s / static_cast<double>(a.pixels.numel());
}

std::vector<ImageSample> perturb_rotations(std::span<const ImageSample> images, double lo,
                                           double hi, uint64_t seed) {
  Rng rng(seed);
  std::vector<ImageSample> out;
  out.reserve(images.size());
  for (const ImageSample& s : images) {
    TransformParams p;
    p.theta_deg = rng.uniform(lo, hi);
    out.push_back(warp_image(s, p));
  }
  return out;
}

FinetuneResult internal_augment_finetune(Backbone& bb, const Tft* tft,
                                         std::span<const ImageSample> dataset,
                                         const ThetaRanges& ranges,
                                         const FinetuneConfig& config) {
  if (config.epochs < 0) throw UsageError("epochs must be >= 0");
  if (config.batch < 1) throw UsageError("batch must be >= 1");
  const int tap = tft ? tft->tap_id : 1;
  if (tft) {
    if (tap < 1 || tap > bb.tap_count() || tft->config.channels != bb.tap_channels(tap)) {
      throw UsageError("transformer does not match the requested tap");
    }
  }
  FinetuneResult result;
  if (config.epochs == 0 || dataset.empty()) return result;

  Rng rng_batch = Rng(config.seed).fork(1);
  Rng rng_theta = Rng(config.seed).fork(2);

  std::vector<Tensor*> params;
  std::vector<AdamState> states;
  std::vector<Tensor> accum;
  bool params_ready = false;

  std::vector<size_t> order(dataset.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  long step = 0;
  long last_recorded = -1;
  double batch_loss = 0.0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng_batch.shuffle(order);
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch)) {
      const size_t end = std::min(order.size(), start + static_cast<size_t>(config.batch));
      const double inv = 1.0 / static_cast<double>(end - start);
      TransformParams theta;  // identity for the plain path
      if (tft) theta = sample_theta(ranges, rng_theta);

      batch_loss = 0.0;
      for (auto& a : accum) a = Tensor(a.shape());
      for (size_t bi = start; bi < end; ++bi) {
        const ImageSample& sample = dataset[order[bi]];
        Graph g;
        Binder upstream(g);
        Binder downstream(g);
        Var img = g.leaf(sample.pixels);
        Var tapv = backbone_graph(g, bb, img, tap,
                                  config.freeze_upstream ? nullptr : &upstream, nullptr);
        Var x = tft ? tft_apply(g, *tft, tapv, theta, nullptr) : tapv;
        Var logits = backbone_tail_graph(g, bb, x, tap, &downstream);
        Var loss = g.scale(g.softmax_xent(logits, sample.label), inv);
        g.backward(loss);
        batch_loss += g.value(loss).at(0);

        std::vector<std::pair<Tensor*, Var>> bound = upstream.bound;
        bound.insert(bound.end(), downstream.bound.begin(), downstream.bound.end());
        if (!params_ready) {
          for (auto& [p, v] : bound) {
            params.push_back(p);
            states.push_back(make_adam(*p, AdamConfig{config.lr, 0.9, 0.999, 1e-8}));
            accum.emplace_back(p->shape());
          }
          params_ready = true;
        }
        for (size_t j = 0; j < bound.size(); ++j) add_into(accum[j], g.grad(bound[j].second));
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericError("fine-tuning loss became non-finite", step);
      }
      record(result.history, step, batch_loss, config.history_every, last_recorded);
      for (size_t j = 0; j < params.size(); ++j) adam_step(*params[j], accum[j], states[j]);
      ++step;
    }
  }
  record_final(result.history, step - 1, batch_loss, last_recorded);
  return result;
}

StyleBank make_style_bank(int styles, int channels, uint64_t seed) {
  if (styles < 1 || channels < 1) throw UsageError("style bank dimensions must be positive");
  Rng rng(seed);
  StyleBank bank;
  bank.gains = Tensor({styles, channels});
  double* g = bank.gains.mutable_data();
  for (long i = 0; i < bank.gains.numel(); ++i) g[i] = rng.uniform(0.3, 1.7);
  return bank;
}

Tensor style_target(const StyleBank& bank, int style, const Tensor& features) {
  if (style < 0 || style >= bank.styles()) throw UsageError("style index out of range");
  if (features.rank() != 3 || features.dim(2) != bank.gains.dim(1)) {
    throw ShapeError("style_target: features " + features.shape_str() +
                     " do not match bank channels " + std::to_string(bank.gains.dim(1)));
  }
  const int channels = features.dim(2);
  Tensor out(features.shape());
  const double* f = features.data();
  const double* g = bank.gains.data();
  double* o = out.mutable_data();
  const long pixels = features.numel() / channels;
  for (long p = 0; p < pixels; ++p) {
    for (int c = 0; c < channels; ++c) {
      o[p * channels + c] = g[static_cast<long>(style) * channels + c] * f[p * channels + c];
    }
  }
  return out;
}

StyleModel make_style_model(int styles, int channels, int hidden, const TftConfig& tft_config,
                            int tap_id, int cumulative_stride, uint64_t seed) {
  Rng rng(seed);
  TftConfig cfg = tft_config;
  cfg.channels = channels;
  StyleModel model{make_tft(cfg, tap_id, cumulative_stride, rng),
                   make_regressor(styles, hidden, 2 * cfg.branches, rng),
                   make_style_bank(styles, channels, Rng(seed).fork(7).next_u64())};
  return model;
}

TrainResult train_style(StyleModel& model, std::span<const Tensor> features,
                        const StyleTrainConfig& config) {
  if (features.empty()) throw UsageError("train_style needs features");
  if (config.batch < 1) throw UsageError("batch must be >= 1");
  TrainResult result;
  if (config.steps == 0) return result;

  std::vector<Tensor*> params = {&model.regressor.w1, &model.regressor.b1, &model.regressor.w2,
                                 &model.regressor.b2};
  for (Tensor* p : tft_parameters(model.tft)) params.push_back(p);
  std::vector<AdamState> states;
  std::vector<Tensor> accum;
  for (Tensor* p : params) {
    states.push_back(make_adam(*p, AdamConfig{config.lr, 0.9, 0.999, 1e-8}));
    accum.emplace_back(p->shape());
  }

  Rng rng(config.seed);
  const double inv = 1.0 / config.batch;
  const int styles = model.bank.styles();
  long last_recorded = -1;
  double batch_loss = 0.0;
  for (long step = 0; step < config.steps; ++step) {
    batch_loss = 0.0;
    for (auto& a : accum) a = Tensor(a.shape());
    for (int b = 0; b < config.batch; ++b) {
      const Tensor& f = features[rng.uniform_int(features.size())];
      const int style = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(styles)));
      const Tensor target = style_target(model.bank, style, f);

      Graph g;
      Binder binder(g);
      const StyleWeightVars weights =
          style_weights_graph(g, model.regressor, StyleCode::one_hot(styles, style), &binder);
      Var out = tft_apply_style(g, model.tft, g.leaf(f), weights, &binder);
      Var loss = g.scale(g.feature_loss(out, g.leaf(target), config.loss_mode), inv);
      g.backward(loss);
      batch_loss += g.value(loss).at(0);
      for (size_t j = 0; j < binder.bound.size(); ++j) {
        add_into(accum[j], g.grad(binder.bound[j].second));
      }
    }
    if (!std::isfinite(batch_loss)) throw NumericError("style loss became non-finite", step);
    record(result.history, step, batch_loss, config.history_every, last_recorded);
    for (size_t j = 0; j < params.size(); ++j) adam_step(*params[j], accum[j], states[j]);
  }
  record_final(result.history, config.steps - 1, batch_loss, last_recorded);
  return result;
}

double eval_style_loss(const StyleModel& model, std::span<const Tensor> features, int style,
                       LossMode mode) {
  if (features.empty()) throw UsageError("eval_style_loss needs features");
  const StyleWeights weights =
      style_weights(model.regressor, StyleCode::one_hot(model.bank.styles(), style));
  double total = 0.0;
  for (const Tensor& f : features) {
    total += feature_loss(tft_forward_style(model.tft, f, weights),
                          style_target(model.bank, style, f), mode);
  }
  return total / static_cast<double>(features.size());
}

void save_style_model(const StyleModel& model, const std::string& path) {
  Container c;
  c.add("meta/style",
        Tensor::from({3}, {static_cast<double>(model.regressor.styles),
                           static_cast<double>(model.regressor.hidden),
                           static_cast<double>(model.regressor.outputs)}));
  save_tft_into(c, model.tft, "tft/");
  c.add("reg/w1", model.regressor.w1);
  c.add("reg/b1", model.regressor.b1);
  c.add("reg/w2", model.regressor.w2);
  c.add("reg/b2", model.regressor.b2);
  c.add("styles/gains", model.bank.gains);
  c.save(path);
}

StyleModel load_style_model(const std::string& path) {
  const Container c = Container::load(path);
  const Tensor& meta = c.get("meta/style");
  StyleModel model;
  model.tft = load_tft_from(c, "tft/");
  model.regressor.styles = static_cast<int>(meta.at(0));
  model.regressor.hidden = static_cast<int>(meta.at(1));
  model.regressor.outputs = static_cast<int>(meta.at(2));
  model.regressor.w1 = c.get("reg/w1");
  model.regressor.b1 = c.get("reg/b1");
  model.regressor.w2 = c.get("reg/w2");
  model.regressor.b2 = c.get("reg/b2");
  model.bank.gains = c.get("styles/gains");
  return model;
}

}  // namespace tft
