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

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tft/errors.hpp"
#include "tft/rng.hpp"

namespace tft {

// Dense row-major tensor of rank 1..4, double precision. Copies share the
// payload; mutable_data() detaches when shared, so a Tensor handed to another
// owner behaves as an immutable value.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int> shape, double value);
  static Tensor from(std::vector<int> shape, std::vector<double> values);
  // Elementwise uniform in [-scale, scale].
  static Tensor uniform(std::vector<int> shape, double scale, Rng& rng);

  int rank() const { return static_cast<int>(shape_.size()); }
  const std::vector<int>& shape() const { return shape_; }
  int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  long numel() const { return numel_; }
  bool empty() const { return numel_ == 0; }

  const double* data() const { return data_ ? data_->data() : nullptr; }
  double* mutable_data();
  bool unique() const { return !data_ || data_.use_count() == 1; }

  double at(long i) const { return (*data_)[static_cast<size_t>(i)]; }

  // Row-major offsets for the common ranks.
  long idx2(int i, int j) const { return static_cast<long>(i) * shape_[1] + j; }
  long idx3(int i, int j, int k) const {
    return (static_cast<long>(i) * shape_[1] + j) * shape_[2] + k;
  }
  long idx4(int i, int j, int k, int l) const {
    return ((static_cast<long>(i) * shape_[1] + j) * shape_[2] + k) * shape_[3] + l;
  }

  // Same payload under a new shape with equal element count.
  Tensor reshaped(std::vector<int> new_shape) const;

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;

  double sum() const;
  double max_abs() const;
  double max_abs_diff(const Tensor& other) const;

  std::string shape_str() const;

 private:
  std::vector<int> shape_;
  long numel_ = 0;
  std::shared_ptr<std::vector<double>> data_;
};

// Throws ShapeError mentioning `where` unless shapes match.
void check_same_shape(const Tensor& a, const Tensor& b, const char* where);

}  // namespace tft
