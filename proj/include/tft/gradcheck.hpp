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

#include "tft/rng.hpp"
#include "tft/tensor.hpp"

namespace tft {

// Result of comparing an analytic gradient against central finite
// differences. Elements where both values are below `small_threshold` in
// magnitude are held to an absolute bound instead of a relative one.
struct FdReport {
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  long checked = 0;

  bool passed(double rel_tol = 1e-4, double abs_tol = 1e-7) const {
    return max_rel_err < rel_tol && max_abs_err < abs_tol;
  }
};

// Perturbs elements of x in place, re-evaluating `loss` for each probe.
// `analytic` is d loss / d x. When max_elems > 0 and the tensor is larger,
// a deterministic random subset of elements is probed.
FdReport fd_check(const std::function<double()>& loss, Tensor& x, const Tensor& analytic,
                  double step = 1e-5, long max_elems = 0, uint64_t sample_seed = 0,
                  double small_threshold = 1e-3);

}  // namespace tft
