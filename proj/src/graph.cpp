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

#include "tft/graph.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstring>
#include <limits>

namespace tft {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<RowMat>;
using CMapRM = Eigen::Map<const RowMat>;
using MapVec = Eigen::Map<Eigen::VectorXd>;
using CMapVec = Eigen::Map<const Eigen::VectorXd>;

struct ConvPlan {
  int in_h, in_w, in_c;
  int kh, kw, out_c;
  int out_h, out_w;
  int pad_top, pad_left;
  int stride;
  long rows() const { return static_cast<long>(out_h) * out_w; }
  long cols() const { return static_cast<long>(kh) * kw * in_c; }
};

ConvPlan plan_conv(const Tensor& input, const Tensor& kernel, int stride, Padding padding) {
  if (kernel.rank() != 4) {
    throw ShapeError("conv2d kernel must be [kh,kw,Cin,Cout], got " + kernel.shape_str());
  }
  if (input.rank() != 2 && input.rank() != 3) {
    throw ShapeError("conv2d input must be [H,W] or [H,W,C], got " + input.shape_str());
  }
  if (stride < 1) throw UsageError("conv2d stride must be >= 1");
  ConvPlan p;
  p.in_h = input.dim(0);
  p.in_w = input.dim(1);
  p.in_c = input.rank() == 3 ? input.dim(2) : 1;
  p.kh = kernel.dim(0);
  p.kw = kernel.dim(1);
  p.out_c = kernel.dim(3);
  p.stride = stride;
  if (kernel.dim(2) != p.in_c) {
    throw ShapeError("conv2d channel mismatch: input " + input.shape_str() + " vs kernel " +
                     kernel.shape_str());
  }
  if (padding == Padding::kSame) {
    p.out_h = (p.in_h + stride - 1) / stride;
    p.out_w = (p.in_w + stride - 1) / stride;
    const int pad_h = std::max((p.out_h - 1) * stride + p.kh - p.in_h, 0);
    const int pad_w = std::max((p.out_w - 1) * stride + p.kw - p.in_w, 0);
    p.pad_top = pad_h / 2;
    p.pad_left = pad_w / 2;
  } else {
    if (p.kh > p.in_h || p.kw > p.in_w) {
      throw ShapeError("conv2d valid padding: kernel " + kernel.shape_str() +
                       " larger than input " + input.shape_str());
    }
    p.out_h = (p.in_h - p.kh) / stride + 1;
    p.out_w = (p.in_w - p.kw) / stride + 1;
    p.pad_top = 0;
    p.pad_left = 0;
  }
  return p;
}

void im2col(const double* in, const ConvPlan& p, double* col) {
  std::memset(col, 0, sizeof(double) * static_cast<size_t>(p.rows() * p.cols()));
  const long row_bytes = p.cols();
  for (int oh = 0; oh < p.out_h; ++oh) {
    for (int dh = 0; dh < p.kh; ++dh) {
      const int ih = oh * p.stride - p.pad_top + dh;
      if (ih < 0 || ih >= p.in_h) continue;
      for (int ow = 0; ow < p.out_w; ++ow) {
        double* crow = col + (static_cast<long>(oh) * p.out_w + ow) * row_bytes +
                       static_cast<long>(dh) * p.kw * p.in_c;
        for (int dw = 0; dw < p.kw; ++dw) {
          const int iw = ow * p.stride - p.pad_left + dw;
          if (iw < 0 || iw >= p.in_w) continue;
          std::memcpy(crow + static_cast<long>(dw) * p.in_c,
                      in + (static_cast<long>(ih) * p.in_w + iw) * p.in_c,
                      sizeof(double) * static_cast<size_t>(p.in_c));
        }
      }
    }
  }
}

void col2im_add(const double* col, const ConvPlan& p, double* grad_in) {
  const long row_bytes = p.cols();
  for (int oh = 0; oh < p.out_h; ++oh) {
    for (int dh = 0; dh < p.kh; ++dh) {
      const int ih = oh * p.stride - p.pad_top + dh;
      if (ih < 0 || ih >= p.in_h) continue;
      for (int ow = 0; ow < p.out_w; ++ow) {
        const double* crow = col + (static_cast<long>(oh) * p.out_w + ow) * row_bytes +
                             static_cast<long>(dh) * p.kw * p.in_c;
        for (int dw = 0; dw < p.kw; ++dw) {
          const int iw = ow * p.stride - p.pad_left + dw;
          if (iw < 0 || iw >= p.in_w) continue;
          double* gp = grad_in + (static_cast<long>(ih) * p.in_w + iw) * p.in_c;
          const double* cp = crow + static_cast<long>(dw) * p.in_c;
          for (int c = 0; c < p.in_c; ++c) gp[c] += cp[c];
        }
      }
    }
  }
}

Tensor conv2d_forward(const Tensor& input, const Tensor& kernel, const ConvPlan& p) {
  std::vector<int> out_shape;
  if (input.rank() == 3) {
    out_shape = {p.out_h, p.out_w, p.out_c};
  } else {
    out_shape = p.out_c == 1 ? std::vector<int>{p.out_h, p.out_w}
                             : std::vector<int>{p.out_h, p.out_w, p.out_c};
  }
  Tensor out(out_shape);
  std::vector<double> col(static_cast<size_t>(p.rows() * p.cols()));
  im2col(input.data(), p, col.data());
  CMapRM colm(col.data(), p.rows(), p.cols());
  CMapRM km(kernel.data(), p.cols(), p.out_c);
  MapRM om(out.mutable_data(), p.rows(), p.out_c);
  om.noalias() = colm * km;
  return out;
}

Tensor maxpool2_forward(const Tensor& input, std::vector<long>* argmax) {
  if (input.rank() != 2 && input.rank() != 3) {
    throw ShapeError("maxpool2 input must be [H,W] or [H,W,C], got " + input.shape_str());
  }
  const int h = input.dim(0);
  const int w = input.dim(1);
  const int c = input.rank() == 3 ? input.dim(2) : 1;
  const int oh = (h + 1) / 2;
  const int ow = (w + 1) / 2;
  std::vector<int> out_shape = input.shape();
  out_shape[0] = oh;
  out_shape[1] = ow;
  Tensor out(out_shape);
  if (argmax) argmax->assign(static_cast<size_t>(out.numel()), -1);
  const double* in = input.data();
  double* o = out.mutable_data();
  long oi = 0;
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      for (int ch = 0; ch < c; ++ch, ++oi) {
        double best = -std::numeric_limits<double>::infinity();
        long best_off = -1;
        for (int dy = 0; dy < 2; ++dy) {
          const int iy = 2 * y + dy;
          if (iy >= h) continue;
          for (int dx = 0; dx < 2; ++dx) {
            const int ix = 2 * x + dx;
            if (ix >= w) continue;
            const long off = (static_cast<long>(iy) * w + ix) * c + ch;
            if (in[off] > best) {
              best = in[off];
              best_off = off;
            }
          }
        }
        o[oi] = best;
        if (argmax) (*argmax)[static_cast<size_t>(oi)] = best_off;
      }
    }
  }
  return out;
}

void check_dense(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  if (weights.rank() != 2) {
    throw ShapeError("dense weights must be [n_in,n_out], got " + weights.shape_str());
  }
  if (input.numel() != weights.dim(0)) {
    throw ShapeError("dense input length " + std::to_string(input.numel()) +
                     " does not match weight rows " + std::to_string(weights.dim(0)));
  }
  if (bias.numel() != weights.dim(1)) {
    throw ShapeError("dense bias length " + std::to_string(bias.numel()) +
                     " does not match weight cols " + std::to_string(weights.dim(1)));
  }
}

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  check_dense(input, weights, bias);
  const int n_in = weights.dim(0);
  const int n_out = weights.dim(1);
  Tensor out({n_out});
  CMapVec x(input.data(), n_in);
  CMapRM wm(weights.data(), n_in, n_out);
  CMapVec b(bias.data(), n_out);
  MapVec o(out.mutable_data(), n_out);
  o.noalias() = wm.transpose() * x + b;
  return out;
}

}  // namespace

Var Graph::push(Tensor value, bool requires_grad, std::function<void()> backward) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Tensor& Graph::grad_of(int id) {
  Node& n = nodes_[static_cast<size_t>(id)];
  if (n.grad.empty()) n.grad = Tensor(n.value.shape());
  return n.grad;
}

Var Graph::leaf(const Tensor& value, bool requires_grad) {
  if (value.empty()) throw ShapeError("leaf tensor must not be empty");
  return push(value, requires_grad, nullptr);
}

const Tensor& Graph::value(Var v) const { return nodes_.at(static_cast<size_t>(v.id)).value; }

const Tensor& Graph::grad(Var v) {
  if (!backward_ran_) throw UsageError("grad() called before backward()");
  return grad_of(v.id);
}

bool Graph::requires_grad(Var v) const {
  return nodes_.at(static_cast<size_t>(v.id)).requires_grad;
}

Var Graph::conv2d(Var input, Var kernel, int stride, Padding padding) {
  const Tensor& in = val(input.id);
  const Tensor& k = val(kernel.id);
  const ConvPlan p = plan_conv(in, k, stride, padding);
  Tensor out = conv2d_forward(in, k, p);
  const bool rg = requires_grad(input) || requires_grad(kernel);
  const int out_id = static_cast<int>(nodes_.size());
  auto back = [this, input, kernel, p, out_id]() {
    const Tensor& g = grad_of(out_id);
    CMapRM gm(g.data(), p.rows(), p.out_c);
    if (requires_grad(kernel)) {
      std::vector<double> col(static_cast<size_t>(p.rows() * p.cols()));
      im2col(val(input.id).data(), p, col.data());
      CMapRM colm(col.data(), p.rows(), p.cols());
      MapRM kg(grad_of(kernel.id).mutable_data(), p.cols(), p.out_c);
      kg.noalias() += colm.transpose() * gm;
      reach(kernel.id);
    }
    if (requires_grad(input)) {
      CMapRM km(val(kernel.id).data(), p.cols(), p.out_c);
      std::vector<double> gcol(static_cast<size_t>(p.rows() * p.cols()));
      MapRM gcolm(gcol.data(), p.rows(), p.cols());
      gcolm.noalias() = gm * km.transpose();
      col2im_add(gcol.data(), p, grad_of(input.id).mutable_data());
      reach(input.id);
    }
  };
  return push(std::move(out), rg, rg ? std::function<void()>(back) : nullptr);
}

Var Graph::bias_add(Var input, Var bias) {
  const Tensor& in = val(input.id);
  const Tensor& b = val(bias.id);
  const int c = in.dim(in.rank() - 1);
  if (b.rank() != 1 || b.dim(0) != c) {
    throw ShapeError("bias_add: bias " + b.shape_str() + " does not match channels of " +
                     in.shape_str());
  }
  Tensor out(in.shape());
  const long pixels = in.numel() / c;
  {
    const double* ip = in.data();
    const double* bp = b.data();
    double* op = out.mutable_data();
    for (long p = 0; p < pixels; ++p) {
      for (int ch = 0; ch < c; ++ch) op[p * c + ch] = ip[p * c + ch] + bp[ch];
    }
  }
  const bool rg = requires_grad(input) || requires_grad(bias);
  const int out_id = static_cast<int>(nodes_.size());
  auto back = [this, input, bias, pixels, c, out_id]() {
    const double* g = grad_of(out_id).data();
    if (requires_grad(input)) {
      double* gi = grad_of(input.id).mutable_data();
      for (long i = 0; i < pixels * c; ++i) gi[i] += g[i];
      reach(input.id);
    }
    if (requires_grad(bias)) {
      double* gb = grad_of(bias.id).mutable_data();
      for (long p = 0; p < pixels; ++p) {
        for (int ch = 0; ch < c; ++ch) gb[ch] += g[p * c + ch];
      }
      reach(bias.id);
    }
  };
  return push(std::move(out), rg, rg ? std::function<void()>(back) : nullptr);
}

Var Graph::relu(Var input) {
  const Tensor& in = val(input.id);
  Tensor out(in.shape());
  {
    const double* ip = in.data();
    double* op = out.mutable_data();
    for (long i = 0; i < in.numel(); ++i) op[i] = ip[i] > 0.0 ? ip[i] : 0.0;
  }
  const bool rg = requires_grad(input);
  const int out_id = static_cast<int>(nodes_.size());
  auto back = [this, input, out_id]() {
    const Tensor& g = grad_of(out_id);
    const double* gp = g.data();
    const double* ip = val(input.id).data();
    double* gi = grad_of(input.id).mutable_data();
    for (long i = 0; i < g.numel(); ++i) {
      if (ip[i] > 0.0) gi[i] += gp[i];
    }
    reach(input.id);
  };
  return push(std::move(out), rg, rg ? std::function<void()>(back) : nullptr);
}

Var Graph::maxpool2(Var input) {
  auto argmax = std::make_shared<std::vector<long>>();
  const bool rg = requires_grad(input);
  Tensor out = maxpool2_forward(val(input.id), rg ? argmax.get() : nullptr);
  const int out_id = static_cast<int>(nodes_.size());
  auto back = [this, input, argmax, out_id]() {
    const Tensor& g = grad_of(out_id);
    const double* gp = g.data();
    double* gi = grad_of(input.id).mutable_data();
    for (long i = 0; i < g.numel(); ++i) gi[(*argmax)[static_cast<size_t>(i)]] += gp[i];
    reach(input.id);
  };
  return push(std::move(out), rg, rg ? std::function<void()>(back) : nullptr);
}

Var Graph::dense(Var input, Var weights, Var bias) {
  const Tensor& in = val(input.id);
  const Tensor& w = val(weights.id);
  Tensor out = dense_forward(in, w, val(bias.id));
  const bool rg = requires_grad(input) || requires_grad(weights) || requires_grad(bias);
  const int out_id = static_cast<int>(nodes_.size());
  const int n_in = w.dim(0);
  const int n_out = w.dim(1);
  auto back = [this, input, weights, bias, n_in, n_out, out_id]() {
    const Tensor& g = grad_of(out_id);
    CMapVec gv(g.data(), n_out);
    if (requires_grad(input)) {
      CMapRM wm(val(weights.id).data(), n_in, n_out);
      MapVec gi(grad_of(input.id).mutable_data(), n_in);
      gi.noalias() += wm * gv;
      reach(input.id);
    }
    if (requires_grad(weights)) {
      CMapVec x(val(input.id).data(), n_in);
      MapRM gw(grad_of(weights.id).mutable_data(), n_in, n_out);
      gw.noalias() += x * gv.transpose();
      reach(weights.id);
    }
    if (requires_grad(bias)) {
      MapVec gb(grad_of(bias.id).mutable_data(), n_out);
      gb.noalias() += gv;
      reach(bias.id);
    }
  };
  return push(std::move(out), rg, rg ? std::function<void()>(back) : nullptr);
}

Var Graph::bilinear_warp(Var features, const AffineMatrix& matrix) {
  Tensor out = tft::bilinear_warp(val(features.id), matrix);
  const bool rg = requires_grad(features);
  const int out_id = static_cast<int>(nodes_.size());
  auto back = [this, features, matrix, out_id]() {
    Tensor contrib = warp_backward(val(features.id), matrix, grad_of(out_id));
    double* gi = grad_of(features.id).mutable_data();
    const double* cp = contrib.data();
    for (long i = 0; i < contrib.numel(); ++i) gi[i] += cp[i];
    reach(features.id);
  };
  return push(std::move(out), rg, rg ? std::function<void()>(back) : nullptr);
}

Var Graph::add(Var a, Var b) {
  const Tensor& ta = val(a.id);
  const Tensor& tb = val(b.id);
  check_same_shape(ta, tb, "add");
  Tensor out(ta.shape());
  {
    const double* pa = ta.data();
    const double* pb = tb.data();
    double* op = out.mutable_data();
    for (long i = 0; i < ta.numel(); ++i) op[i] = pa[i] + pb[i];
  }
  const bool rg = requires_grad(a) || requires_grad(b);
  const int out_id = static_cast<int>(nodes_.size());
  auto back = [this, a, b, out_id]() {
    const Tensor& g = grad_of(out_id);
    const double* gp = g.data();
    for (Var v : {a, b}) {
      if (!requires_grad(v)) continue;
      double* gi = grad_of(v.id).mutable_data();
      for (long i = 0; i < g.numel(); ++i) gi[i] += gp[i];
      reach(v.id);
    }
  };
  return push(std::move(out), rg, rg ? std::function<void()>(back) : nullptr);
}

Var Graph::scale(Var x, double c) {
  const Tensor& in = val(x.id);
  Tensor out(in.shape());
  {
    const double* ip = in.data();
    double* op = out.mutable_data();
    for (long i = 0; i < in.numel(); ++i) op[i] = c * ip[i];
  }
  const bool rg = requires_grad(x);
  const int out_id = static_cast<int>(nodes_.size());
  auto back = [this, x, c, out_id]() {
    const Tensor& g = grad_of(out_id);
    const double* gp = g.data();
    double* gi = grad_of(x.id).mutable_data();
    for (long i = 0; i < g.numel(); ++i) gi[i] += c * gp[i];
    reach(x.id);
  };
  return push(std::move(out), rg, rg ? std::function<void()>(back) : nullptr);
}

Var Graph::scalar_scale(Var scalar, Var x) {
  const Tensor& s = val(scalar.id);
  if (s.numel() != 1) throw ShapeError("scalar_scale: first argument must be scalar");
  const Tensor& in = val(x.id);
  const double sv = s.at(0);
  Tensor out(in.shape());
  {
    const double* ip = in.data();
    double* op = out.mutable_data();
    for (long i = 0; i < in.numel(); ++i) op[i] = sv * ip[i];
  }
  const bool rg = requires_grad(scalar) || requires_grad(x);
  const int out_id = static_cast<int>(nodes_.size());
  auto back = [this, scalar, x, sv, out_id]() {
    const Tensor& g = grad_of(out_id);
    const double* gp = g.data();
    if (requires_grad(x)) {
      double* gi = grad_of(x.id).mutable_data();
      for (long i = 0; i < g.numel(); ++i) gi[i] += sv * gp[i];
      reach(x.id);
    }
    if (requires_grad(scalar)) {
      const double* ip = val(x.id).data();
      double dot = 0.0;
      for (long i = 0; i < g.numel(); ++i) dot += ip[i] * gp[i];
      grad_of(scalar.id).mutable_data()[0] += dot;
      reach(scalar.id);
    }
  };
  return push(std::move(out), rg, rg ? std::function<void()>(back) : nullptr);
}

Var Graph::select(Var vec, int index) {
  const Tensor& v = val(vec.id);
  if (index < 0 || index >= v.numel()) {
    throw ShapeError("select index " + std::to_string(index) + " out of range for " +
                     v.shape_str());
  }
  Tensor out = Tensor::from({1}, {v.at(index)});
  const bool rg = requires_grad(vec);
  const int out_id = static_cast<int>(nodes_.size());
  auto back = [this, vec, index, out_id]() {
    grad_of(vec.id).mutable_data()[index] += grad_of(out_id).at(0);
    reach(vec.id);
  };
  return push(std::move(out), rg, rg ? std::function<void()>(back) : nullptr);
}

Var Graph::reshape(Var x, std::vector<int> shape) {
  Tensor out = val(x.id).reshaped(std::move(shape));
  const bool rg = requires_grad(x);
  const int out_id = static_cast<int>(nodes_.size());
  auto back = [this, x, out_id]() {
    const Tensor& g = grad_of(out_id);
    const double* gp = g.data();
    double* gi = grad_of(x.id).mutable_data();
    for (long i = 0; i < g.numel(); ++i) gi[i] += gp[i];
    reach(x.id);
  };
  return push(std::move(out), rg, rg ? std::function<void()>(back) : nullptr);
}

Var Graph::sum(Var x) {
  const Tensor& in = val(x.id);
  Tensor out = Tensor::from({1}, {in.sum()});
  const bool rg = requires_grad(x);
  const int out_id = static_cast<int>(nodes_.size());
  auto back = [this, x, out_id]() {
    const double g = grad_of(out_id).at(0);
    double* gi = grad_of(x.id).mutable_data();
    for (long i = 0; i < val(x.id).numel(); ++i) gi[i] += g;
    reach(x.id);
  };
  return push(std::move(out), rg, rg ? std::function<void()>(back) : nullptr);
}

Var Graph::feature_loss(Var predicted, Var target, LossMode mode) {
  const Tensor& p = val(predicted.id);
  const Tensor& t = val(target.id);
  check_same_shape(p, t, "feature_loss");
  const double denom = mode == LossMode::kMean ? static_cast<double>(p.numel()) : 1.0;
  double s = 0.0;
  {
    const double* pp = p.data();
    const double* tp = t.data();
    for (long i = 0; i < p.numel(); ++i) {
      const double d = pp[i] - tp[i];
      s += d * d;
    }
  }
  Tensor out = Tensor::from({1}, {s / denom});
  const bool rg = requires_grad(predicted) || requires_grad(target);
  const int out_id = static_cast<int>(nodes_.size());
  auto back = [this, predicted, target, denom, out_id]() {
    const double g = grad_of(out_id).at(0) * 2.0 / denom;
    const double* pp = val(predicted.id).data();
    const double* tp = val(target.id).data();
    const long n = val(predicted.id).numel();
    if (requires_grad(predicted)) {
      double* gp = grad_of(predicted.id).mutable_data();
      for (long i = 0; i < n; ++i) gp[i] += g * (pp[i] - tp[i]);
      reach(predicted.id);
    }
    if (requires_grad(target)) {
      double* gt = grad_of(target.id).mutable_data();
      for (long i = 0; i < n; ++i) gt[i] -= g * (pp[i] - tp[i]);
      reach(target.id);
    }
  };
  return push(std::move(out), rg, rg ? std::function<void()>(back) : nullptr);
}

Var Graph::softmax_xent(Var logits, int label) {
  const Tensor& l = val(logits.id);
  if (l.rank() != 1) throw ShapeError("softmax_xent expects a vector of logits");
  if (label < 0 || label >= l.numel()) throw UsageError("softmax_xent label out of range");
  const double* lp = l.data();
  const long k = l.numel();
  double mx = lp[0];
  for (long i = 1; i < k; ++i) mx = std::max(mx, lp[i]);
  double se = 0.0;
  for (long i = 0; i < k; ++i) se += std::exp(lp[i] - mx);
  const double lse = std::log(se) + mx;
  Tensor out = Tensor::from({1}, {lse - lp[label]});
  const bool rg = requires_grad(logits);
  const int out_id = static_cast<int>(nodes_.size());
  auto back = [this, logits, label, lse, out_id]() {
    const double g = grad_of(out_id).at(0);
    const double* lp2 = val(logits.id).data();
    double* gl = grad_of(logits.id).mutable_data();
    const long n = val(logits.id).numel();
    for (long i = 0; i < n; ++i) {
      const double soft = std::exp(lp2[i] - lse);
      gl[i] += g * (soft - (i == label ? 1.0 : 0.0));
    }
    reach(logits.id);
  };
  return push(std::move(out), rg, rg ? std::function<void()>(back) : nullptr);
}

Var Graph::tv(Var image) {
  const Tensor& im = val(image.id);
  if (im.rank() != 2 && !(im.rank() == 3 && im.dim(2) == 1)) {
    throw ShapeError("tv expects [H,W] or [H,W,1], got " + im.shape_str());
  }
  const int h = im.dim(0);
  const int w = im.dim(1);
  if (h < 2 || w < 2) throw ShapeError("tv needs H,W >= 2");
  const double* x = im.data();
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
  Tensor out = Tensor::from({1}, {s});
  const bool rg = requires_grad(image);
  const int out_id = static_cast<int>(nodes_.size());
  auto back = [this, image, h, w, out_id]() {
    const double g = grad_of(out_id).at(0);
    const double* x2 = val(image.id).data();
    double* gi = grad_of(image.id).mutable_data();
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        const long off = static_cast<long>(i) * w + j;
        if (i + 1 < h) {
          const double d = x2[off + w] - x2[off];
          gi[off + w] += 2.0 * g * d;
          gi[off] -= 2.0 * g * d;
        }
        if (j + 1 < w) {
          const double d = x2[off + 1] - x2[off];
          gi[off + 1] += 2.0 * g * d;
          gi[off] -= 2.0 * g * d;
        }
      }
    }
    reach(image.id);
  };
  return push(std::move(out), rg, rg ? std::function<void()>(back) : nullptr);
}

Var Graph::l2_penalty(const std::vector<Var>& params, double coefficient) {
  if (coefficient < 0.0) throw UsageError("l2_penalty coefficient must be >= 0");
  double s = 0.0;
  bool rg = false;
  for (Var p : params) {
    const Tensor& t = val(p.id);
    const double* tp = t.data();
    for (long i = 0; i < t.numel(); ++i) s += tp[i] * tp[i];
    rg = rg || requires_grad(p);
  }
  Tensor out = Tensor::from({1}, {coefficient * s});
  const int out_id = static_cast<int>(nodes_.size());
  auto params_copy = params;
  auto back = [this, params_copy, coefficient, out_id]() {
    const double g = grad_of(out_id).at(0) * 2.0 * coefficient;
    for (Var p : params_copy) {
      if (!requires_grad(p)) continue;
      const double* tp = val(p.id).data();
      double* gp = grad_of(p.id).mutable_data();
      for (long i = 0; i < val(p.id).numel(); ++i) gp[i] += g * tp[i];
      reach(p.id);
    }
  };
  return push(std::move(out), rg, rg ? std::function<void()>(back) : nullptr);
}

void Graph::backward(Var loss_node) {
  Node& loss = nodes_.at(static_cast<size_t>(loss_node.id));
  if (loss.value.numel() != 1) {
    throw ShapeError("backward target must be scalar, got " + loss.value.shape_str());
  }
  for (Node& n : nodes_) {
    n.reached = false;
    if (!n.grad.empty()) n.grad = Tensor(n.value.shape());
  }
  backward_ran_ = true;
  grad_of(loss_node.id).mutable_data()[0] = 1.0;
  loss.reached = true;
  backward_visits_ = 0;
  for (int id = loss_node.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    ++backward_visits_;
    if (!n.reached || !n.requires_grad || !n.backward) continue;
    n.backward();
  }
}

Tensor conv2d(const Tensor& input, const Tensor& kernel, int stride, Padding padding) {
  return conv2d_forward(input, kernel, plan_conv(input, kernel, stride, padding));
}

Tensor relu(const Tensor& input) {
  Tensor out(input.shape());
  const double* ip = input.data();
  double* op = out.mutable_data();
  for (long i = 0; i < input.numel(); ++i) op[i] = ip[i] > 0.0 ? ip[i] : 0.0;
  return out;
}

Tensor maxpool2(const Tensor& input) { return maxpool2_forward(input, nullptr); }

Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  return dense_forward(input, weights, bias);
}

}  // namespace tft
