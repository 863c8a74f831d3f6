// Copyright 2026 The fcdcnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "fcdcnn/tensor.hpp"

#include <cmath>
#include <sstream>

#include "fcdcnn/errors.hpp"

namespace fcdcnn {

Tensor::Tensor(Shape shape, float fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (element_count(shape_) != data_.size()) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_string(shape_));
  }
}

std::size_t Tensor::element_count(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ShapeError("negative dimension in shape " + shape_string(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string Tensor::shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ')';
  return os.str();
}

std::size_t Tensor::offset(int b, int c, int y, int x) const {
  return ((static_cast<std::size_t>(b) * shape_[1] + c) * shape_[2] + y) * shape_[3] + x;
}

float& Tensor::at(int b, int c, int y, int x) { return data_[offset(b, c, y, x)]; }
float Tensor::at(int b, int c, int y, int x) const { return data_[offset(b, c, y, x)]; }

std::span<float> Tensor::grad() {
  if (!grad_) grad_.emplace(data_.size(), 0.0f);
  return *grad_;
}

std::span<const float> Tensor::grad() const {
  if (!grad_) throw StateError("tensor has no gradient buffer");
  return *grad_;
}

void Tensor::zero_grad() {
  if (grad_) {
    std::fill(grad_->begin(), grad_->end(), 0.0f);
  } else {
    grad_.emplace(data_.size(), 0.0f);
  }
}

bool Tensor::all_finite() const {
  for (float v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace fcdcnn
