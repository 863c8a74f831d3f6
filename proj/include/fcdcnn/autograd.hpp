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

#include <span>
#include <vector>

#include "fcdcnn/kernels.hpp"
#include "fcdcnn/tensor.hpp"

namespace fcdcnn {

/// Handle to a value recorded on a Tape.
struct Var {
  int index = -1;
  bool valid() const { return index >= 0; }
};

/// Reverse-mode recorder for the handful of operations the feature
/// extractor and its loss need.
///
/// Forward values are computed eagerly when an operation is recorded.
/// `backward` walks the tape once in reverse creation order and adds the
/// resulting gradients into the grad buffers of every registered parameter
/// tensor (allocating zeroed buffers when needed). Parameters are held by
/// pointer and must outlive the tape.
class Tape {
 public:
  Var parameter(Tensor& tensor);
  Var constant(Tensor value);

  Var conv2d(Var input, Var kernel, Var bias, PadMode pad);
  Var tanh(Var input);
  Var concat_channels(std::span<const Var> inputs);
  Var crop_center(Var input, int height, int width);
  Var cosine_similarity(Var a, Var b);
  Var hinge_loss(Var s_pos, Var s_neg, float margin);
  /// scale * sum of all elements, as a one-element tensor.
  Var sum(Var input, float scale = 1.0f);
  Var mean(Var input);

  const Tensor& value(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  /// Throws StateError if nothing has been recorded, `loss` is not on this
  /// tape, or backward already ran.
  void backward(Var loss);

 private:
  enum class Op { Constant, Parameter, Conv2d, Tanh, Concat, Crop, Cosine, Hinge, Sum };

  struct Node {
    Op op = Op::Constant;
    std::vector<int> inputs;
    Tensor value;
    Tensor* parameter = nullptr;
    std::vector<float> grad;
    bool requires_grad = false;
    PadMode pad = PadMode::Reflect1;
    float scalar = 0.0f;  // hinge margin or sum scale
  };

  Var push(Node node);
  const Node& node(Var v) const;
  std::vector<float>& grad_of(int index);
  void backward_node(int index);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace fcdcnn
