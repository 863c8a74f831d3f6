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


#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fcdcnn {

/// Dense row-major float tensor with an optional gradient buffer.
///
/// Four-dimensional tensors use (batch, channels, height, width) ordering.
/// The element count always equals the product of the shape, and a present
/// gradient buffer always has the same length as the data.
class Tensor {
 public:
  using Shape = std::vector<int>;

  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> data);

  const Shape& shape() const { return shape_; }
  int dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  /// Element access for 4-D tensors.
  float& at(int b, int c, int y, int x);
  float at(int b, int c, int y, int x) const;

  bool has_grad() const { return grad_.has_value(); }
  /// Returns the gradient buffer, allocating a zeroed one on first use.
  std::span<float> grad();
  std::span<const float> grad() const;
  void zero_grad();
  void clear_grad() { grad_.reset(); }

  std::vector<float>& storage() { return data_; }
  const std::vector<float>& storage() const { return data_; }

  bool all_finite() const;

  static std::size_t element_count(const Shape& shape);
  static std::string shape_string(const Shape& shape);

 private:
  std::size_t offset(int b, int c, int y, int x) const;

  Shape shape_;
  std::vector<float> data_;
  std::optional<std::vector<float>> grad_;
};

}  // namespace fcdcnn
