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

#include <functional>
#include <vector>

#include "tft/affine.hpp"
#include "tft/tensor.hpp"

namespace tft {

enum class Padding { kSame, kValid };
enum class LossMode { kMean, kSum };

// Handle to a node in a Graph.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Define-by-run reverse-mode tape. A graph is built fresh per forward pass;
// node outputs are never mutated. Confine one graph to one thread.
//
// Gradient conventions: relu passes zero gradient at exactly zero; maxpool2
// routes each window's gradient to the first maximum in row-major scan order.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Shares the tensor payload; no copy is made.
  Var leaf(const Tensor& value, bool requires_grad = false);

  const Tensor& value(Var v) const;
  // Gradient of the last backward target w.r.t. node v. Zero tensor if the
  // node was not reached. Only valid after backward().
  const Tensor& grad(Var v);
  bool requires_grad(Var v) const;
  size_t node_count() const { return nodes_.size(); }

  // input [H,W,Cin] (or [H,W] as Cin=1), kernel [kh,kw,Cin,Cout].
  Var conv2d(Var input, Var kernel, int stride = 1, Padding padding = Padding::kSame);
  Var bias_add(Var input, Var bias);  // bias over the last (channel) axis
  Var relu(Var input);
  Var maxpool2(Var input);  // 2x2 window, stride 2; odd dims padded with -inf
  Var dense(Var input, Var weights, Var bias);  // weights [n_in, n_out]
  Var bilinear_warp(Var features, const AffineMatrix& matrix);
  Var add(Var a, Var b);
  Var scale(Var x, double c);
  Var scalar_scale(Var scalar, Var x);  // scalar is a 1-element node
  Var select(Var vec, int index);       // 1-element view of a vector node
  Var reshape(Var x, std::vector<int> shape);
  Var sum(Var x);
  Var feature_loss(Var predicted, Var target, LossMode mode = LossMode::kMean);
  Var softmax_xent(Var logits, int label);
  Var tv(Var image);  // squared forward differences, [H,W] or [H,W,1]
  Var l2_penalty(const std::vector<Var>& params, double coefficient);

  // Reverse sweep from a scalar node. Rejects non-scalar targets.
  void backward(Var loss_node);

  // Nodes processed by the last backward sweep (diagnostics).
  long backward_visits() const { return backward_visits_; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::function<void()> backward;
    bool requires_grad = false;
    bool reached = false;
  };

  Var push(Tensor value, bool requires_grad, std::function<void()> backward);
  Tensor& grad_of(int id);
  void reach(int id) { nodes_[static_cast<size_t>(id)].reached = true; }
  const Tensor& val(int id) const { return nodes_[static_cast<size_t>(id)].value; }

  std::vector<Node> nodes_;
  bool backward_ran_ = false;
  long backward_visits_ = 0;
};

// Graph-free forward evaluation of the same kernels.
Tensor conv2d(const Tensor& input, const Tensor& kernel, int stride = 1,
              Padding padding = Padding::kSame);
Tensor relu(const Tensor& input);
Tensor maxpool2(const Tensor& input);
Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias);

}  // namespace tft
