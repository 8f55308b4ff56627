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

#include "tft/tensor.hpp"

#include <cmath>
#include <sstream>

namespace tft {

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
  if (shape_.empty() || shape_.size() > 4) {
    throw ShapeError("tensor rank must be 1..4, got " + std::to_string(shape_.size()));
  }
  numel_ = 1;
  for (int d : shape_) {
    if (d <= 0) throw ShapeError("tensor dimensions must be positive");
    numel_ *= d;
  }
  data_ = std::make_shared<std::vector<double>>(static_cast<size_t>(numel_), 0.0);
}

Tensor Tensor::full(std::vector<int> shape, double value) {
  Tensor t(std::move(shape));
  auto* p = t.mutable_data();
  for (long i = 0; i < t.numel(); ++i) p[i] = value;
  return t;
}

Tensor Tensor::from(std::vector<int> shape, std::vector<double> values) {
  Tensor t(std::move(shape));
  if (static_cast<long>(values.size()) != t.numel()) {
    throw ShapeError("value count " + std::to_string(values.size()) +
                     " does not match shape " + t.shape_str());
  }
  *t.data_ = std::move(values);
  return t;
}

Tensor Tensor::uniform(std::vector<int> shape, double scale, Rng& rng) {
  Tensor t(std::move(shape));
  auto* p = t.mutable_data();
  for (long i = 0; i < t.numel(); ++i) p[i] = rng.uniform(-scale, scale);
  return t;
}

Tensor Tensor::reshaped(std::vector<int> new_shape) const {
  Tensor t;
  t.shape_ = std::move(new_shape);
  if (t.shape_.empty() || t.shape_.size() > 4) {
    throw ShapeError("tensor rank must be 1..4");
  }
  t.numel_ = 1;
  for (int d : t.shape_) {
    if (d <= 0) throw ShapeError("tensor dimensions must be positive");
    t.numel_ *= d;
  }
  if (t.numel_ != numel_) {
    throw ShapeError("reshape " + shape_str() + " -> " + t.shape_str() +
                     " changes element count");
  }
  t.data_ = data_;
  return t;
}

double* Tensor::mutable_data() {
  if (!data_) return nullptr;
  if (data_.use_count() > 1) data_ = std::make_shared<std::vector<double>>(*data_);
  return data_->data();
}

bool Tensor::all_finite() const {
  const double* p = data();
  for (long i = 0; i < numel_; ++i) {
    if (!std::isfinite(p[i])) return false;
  }
  return true;
}

double Tensor::sum() const {
  const double* p = data();
  double s = 0.0;
  for (long i = 0; i < numel_; ++i) s += p[i];
  return s;
}

double Tensor::max_abs() const {
  const double* p = data();
  double m = 0.0;
  for (long i = 0; i < numel_; ++i) m = std::max(m, std::fabs(p[i]));
  return m;
}

double Tensor::max_abs_diff(const Tensor& other) const {
  check_same_shape(*this, other, "max_abs_diff");
  const double* a = data();
  const double* b = other.data();
  double m = 0.0;
  for (long i = 0; i < numel_; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape_.size(); ++i) os << (i ? "x" : "") << shape_[i];
  os << "]";
  return os.str();
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* where) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(where) + ": shape mismatch " + a.shape_str() + " vs " +
                     b.shape_str());
  }
}

}  // namespace tft
