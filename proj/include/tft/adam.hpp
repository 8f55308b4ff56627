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

#include "tft/tensor.hpp"

namespace tft {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Per-parameter optimizer state: first/second moment accumulators and the
// step counter used for bias correction.
struct AdamState {
  Tensor m;
  Tensor v;
  long step = 0;
  AdamConfig config;
};

AdamState make_adam(const Tensor& param, const AdamConfig& config = {});

// One bias-corrected update. Mutates param and state in place.
void adam_step(Tensor& param, const Tensor& grad, AdamState& state);

}  // namespace tft
