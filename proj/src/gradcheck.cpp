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

#include "tft/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace tft {

FdReport fd_check(const std::function<double()>& loss, Tensor& x, const Tensor& analytic,
                  double step, long max_elems, uint64_t sample_seed, double small_threshold) {
  check_same_shape(x, analytic, "fd_check");
  std::vector<long> indices;
  if (max_elems > 0 && x.numel() > max_elems) {
    Rng rng(sample_seed);
    indices.reserve(static_cast<size_t>(max_elems));
    for (long i = 0; i < max_elems; ++i) {
      indices.push_back(static_cast<long>(rng.uniform_int(static_cast<uint64_t>(x.numel()))));
    }
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  } else {
    indices.resize(static_cast<size_t>(x.numel()));
    for (long i = 0; i < x.numel(); ++i) indices[static_cast<size_t>(i)] = i;
  }

  FdReport report;
  double* p = x.mutable_data();
  for (long i : indices) {
    const double saved = p[i];
    p[i] = saved + step;
    const double up = loss();
    p[i] = saved - step;
    const double down = loss();
    p[i] = saved;
    const double fd = (up - down) / (2.0 * step);
    const double an = analytic.at(i);
    const double mag = std::max(std::fabs(fd), std::fabs(an));
    if (mag < small_threshold) {
      report.max_abs_err = std::max(report.max_abs_err, std::fabs(fd - an));
    } else {
      report.max_rel_err = std::max(report.max_rel_err, std::fabs(fd - an) / mag);
    }
    ++report.checked;
  }
  return report;
}

}  // namespace tft
