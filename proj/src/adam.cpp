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

#include "tft/adam.hpp"

#include <cmath>

namespace tft {

AdamState make_adam(const Tensor& param, const AdamConfig& config) {
  AdamState s;
  s.m = Tensor(param.shape());
  s.v = Tensor(param.shape());
  s.config = config;
  return s;
}

void adam_step(Tensor& param, const Tensor& grad, AdamState& state) {
  check_same_shape(param, grad, "adam_step");
  check_same_shape(param, state.m, "adam_step state");
  const AdamConfig& c = state.config;
  state.step += 1;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  double* p = param.mutable_data();
  double* m = state.m.mutable_data();
  double* v = state.v.mutable_data();
  const double* g = grad.data();
  for (long i = 0; i < param.numel(); ++i) {
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    p[i] -= c.lr * mhat / (std::sqrt(vhat) + c.epsilon);
  }
}

}  // namespace tft
