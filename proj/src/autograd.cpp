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


#include "fcdcnn/autograd.hpp"

#include <cmath>
#include <string>

#include "fcdcnn/errors.hpp"
#include "fcdcnn/execution.hpp"
#include "fcdcnn/ops.hpp"

namespace fcdcnn {

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tape::Node& Tape::node(Var v) const {
  if (v.index < 0 || v.index >= static_cast<int>(nodes_.size())) {
    throw StateError("variable " + std::to_string(v.index) + " is not recorded on this tape");
  }
  return nodes_[v.index];
}

const Tensor& Tape::value(Var v) const {
  const Node& n = node(v);
  return n.parameter ? *n.parameter : n.value;
}

std::vector<float>& Tape::grad_of(int index) {
  Node& n = nodes_[index];
  if (n.grad.empty()) n.grad.assign(value(Var{index}).size(), 0.0f);
  return n.grad;
}

Var Tape::parameter(Tensor& tensor) {
  Node n;
  n.op = Op::Parameter;
  n.parameter = &tensor;
  n.requires_grad = true;
  return push(std::move(n));
}

Var Tape::constant(Tensor value) {
  Node n;
  n.op = Op::Constant;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::conv2d(Var input, Var kernel, Var bias, PadMode pad) {
  Node n;
  n.op = Op::Conv2d;
  n.value = fcdcnn::conv2d(value(input), value(kernel), value(bias), pad);
  n.inputs = {input.index, kernel.index, bias.index};
  n.pad = pad;
  n.requires_grad = node(input).requires_grad || node(kernel).requires_grad || node(bias).requires_grad;
  return push(std::move(n));
}

Var Tape::tanh(Var input) {
  Node n;
  n.op = Op::Tanh;
  n.value = tanh_activation(value(input));
  n.inputs = {input.index};
  n.requires_grad = node(input).requires_grad;
  return push(std::move(n));
}

Var Tape::concat_channels(std::span<const Var> inputs) {
  std::vector<const Tensor*> values;
  Node n;
  n.op = Op::Concat;
  for (Var v : inputs) {
    values.push_back(&value(v));
    n.inputs.push_back(v.index);
    n.requires_grad = n.requires_grad || node(v).requires_grad;
  }
  n.value = fcdcnn::concat_channels(values);
  return push(std::move(n));
}

Var Tape::crop_center(Var input, int height, int width) {
  Node n;
  n.op = Op::Crop;
  n.value = fcdcnn::crop_center(value(input), height, width);
  n.inputs = {input.index};
  n.requires_grad = node(input).requires_grad;
  return push(std::move(n));
}

Var Tape::cosine_similarity(Var a, Var b) {
  Node n;
  n.op = Op::Cosine;
  n.value = fcdcnn::cosine_similarity(value(a), value(b));
  n.inputs = {a.index, b.index};
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  return push(std::move(n));
}

Var Tape::hinge_loss(Var s_pos, Var s_neg, float margin) {
  const Tensor& pos = value(s_pos);
  const Tensor& neg = value(s_neg);
  if (pos.shape() != neg.shape()) throw ShapeError("hinge_loss operands differ in shape");
  Node n;
  n.op = Op::Hinge;
  n.value = Tensor(pos.shape());
  for (std::size_t i = 0; i < pos.size(); ++i) n.value[i] = fcdcnn::hinge_loss(pos[i], neg[i], margin);
  n.inputs = {s_pos.index, s_neg.index};
  n.scalar = margin;
  n.requires_grad = node(s_pos).requires_grad || node(s_neg).requires_grad;
  return push(std::move(n));
}

Var Tape::sum(Var input, float scale) {
  const Tensor& x = value(input);
  double total = 0.0;
  for (float v : x.data()) total += v;
  Node n;
  n.op = Op::Sum;
  n.value = Tensor({1}, static_cast<float>(total * scale));
  n.inputs = {input.index};
  n.scalar = scale;
  n.requires_grad = node(input).requires_grad;
  return push(std::move(n));
}

Var Tape::mean(Var input) {
  const std::size_t count = value(input).size();
  if (count == 0) throw ShapeError("mean of an empty tensor");
  return sum(input, 1.0f / static_cast<float>(count));
}

void Tape::backward(Var loss) {
  if (nodes_.empty()) throw StateError("backward called before any forward operation");
  if (backward_done_) throw StateError("backward already ran on this tape");
  const Tensor& out = value(loss);
  if (out.size() != 1) {
    throw ShapeError("backward expects a scalar loss, got " + Tensor::shape_string(out.shape()));
  }
  backward_done_ = true;
  grad_of(loss.index)[0] = 1.0f;
  for (int i = loss.index; i >= 0; --i) {
    if (!nodes_[i].grad.empty() && nodes_[i].requires_grad) backward_node(i);
  }
  for (Node& n : nodes_) {
    if (n.op != Op::Parameter) continue;
    auto dst = n.parameter->grad();
    for (std::size_t k = 0; k < n.grad.size(); ++k) dst[k] += n.grad[k];
  }
}

void Tape::backward_node(int index) {
  // grad_of() only allocates other nodes' buffers; nodes_ itself is never
  // resized during backward, so these references stay valid.
  Node& n = nodes_[index];
  const std::vector<float>& g = n.grad;
  auto wants = [&](int input) { return nodes_[input].requires_grad; };

  switch (n.op) {
    case Op::Constant:
    case Op::Parameter:
      return;

    case Op::Conv2d: {
      const Tensor& x = value(Var{n.inputs[0]});
      const Tensor& w = value(Var{n.inputs[1]});
      ConvGeometry geom{x.dim(0), x.dim(1), w.dim(0), x.dim(2), x.dim(3), n.pad};
      const bool serial = execution_mode() == ExecutionMode::Serial;
      if (wants(n.inputs[0])) {
        auto& gx = grad_of(n.inputs[0]);
        if (serial) {
          kernels::serial::conv2d_backward_input(geom, g, w.data(), gx);
        } else {
          kernels::parallel::conv2d_backward_input(geom, g, w.data(), gx);
        }
      }
      if (wants(n.inputs[1]) || wants(n.inputs[2])) {
        auto& gw = grad_of(n.inputs[1]);
        auto& gb = grad_of(n.inputs[2]);
        if (serial) {
          kernels::serial::conv2d_backward_params(geom, x.data(), g, gw, gb);
        } else {
          kernels::parallel::conv2d_backward_params(geom, x.data(), g, gw, gb);
        }
      }
      return;
    }

    case Op::Tanh: {
      auto& gx = grad_of(n.inputs[0]);
      const auto y = n.value.data();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (1.0f - y[i] * y[i]);
      return;
    }

    case Op::Concat: {
      const int batch = n.value.dim(0);
      const std::size_t plane = std::size_t(n.value.dim(2)) * n.value.dim(3);
      const std::size_t out_image = std::size_t(n.value.dim(1)) * plane;
      std::size_t channel_offset = 0;
      for (int input : n.inputs) {
        const std::size_t chunk = std::size_t(value(Var{input}).dim(1)) * plane;
        if (wants(input)) {
          auto& gx = grad_of(input);
          for (int b = 0; b < batch; ++b) {
            const float* src = g.data() + b * out_image + channel_offset;
            float* dst = gx.data() + b * chunk;
            for (std::size_t k = 0; k < chunk; ++k) dst[k] += src[k];
          }
        }
        channel_offset += chunk;
      }
      return;
    }

    case Op::Crop: {
      const Tensor& x = value(Var{n.inputs[0]});
      auto& gx = grad_of(n.inputs[0]);
      const int h = n.value.dim(2);
      const int w = n.value.dim(3);
      const int y0 = (x.dim(2) - h) / 2;
      const int x0 = (x.dim(3) - w) / 2;
      std::size_t k = 0;
      for (int b = 0; b < x.dim(0); ++b) {
        for (int c = 0; c < x.dim(1); ++c) {
          for (int y = 0; y < h; ++y) {
            const std::size_t row = ((std::size_t(b) * x.dim(1) + c) * x.dim(2) + y + y0) * x.dim(3) + x0;
            for (int xx = 0; xx < w; ++xx) gx[row + xx] += g[k++];
          }
        }
      }
      return;
    }

    case Op::Cosine: {
      const Tensor& a = value(Var{n.inputs[0]});
      const Tensor& b = value(Var{n.inputs[1]});
      const bool want_a = wants(n.inputs[0]);
      const bool want_b = wants(n.inputs[1]);
      float* ga = want_a ? grad_of(n.inputs[0]).data() : nullptr;
      float* gb = want_b ? grad_of(n.inputs[1]).data() : nullptr;
      const int batch = a.dim(0);
      const int channels = a.dim(1);
      const std::size_t plane = std::size_t(a.dim(2)) * a.dim(3);
      for (int s = 0; s < batch; ++s) {
        const std::size_t base = std::size_t(s) * channels * plane;
        for (std::size_t p = 0; p < plane; ++p) {
          const float go = g[s * plane + p];
          if (go == 0.0f) continue;
          double dot = 0.0, na2 = 0.0, nb2 = 0.0;
          for (int c = 0; c < channels; ++c) {
            const double va = a[base + c * plane + p];
            const double vb = b[base + c * plane + p];
            dot += va * vb;
            na2 += va * va;
            nb2 += vb * vb;
          }
          const double na = std::sqrt(na2);
          const double nb = std::sqrt(nb2);
          if (na < kMinNorm || nb < kMinNorm) continue;
          const double inv = 1.0 / (na * nb);
          const double sim = dot * inv;
          for (int c = 0; c < channels; ++c) {
            const std::size_t k = base + c * plane + p;
            const double va = a[k];
            const double vb = b[k];
            if (ga) ga[k] += static_cast<float>(go * (vb * inv - sim * va / na2));
            if (gb) gb[k] += static_cast<float>(go * (va * inv - sim * vb / nb2));
          }
        }
      }
      return;
    }

    case Op::Hinge: {
      const Tensor& pos = value(Var{n.inputs[0]});
      const Tensor& neg = value(Var{n.inputs[1]});
      float* gp = wants(n.inputs[0]) ? grad_of(n.inputs[0]).data() : nullptr;
      float* gn = wants(n.inputs[1]) ? grad_of(n.inputs[1]).data() : nullptr;
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (n.scalar + neg[i] - pos[i] <= 0.0f) continue;
        if (gp) gp[i] -= g[i];
        if (gn) gn[i] += g[i];
      }
      return;
    }

    case Op::Sum: {
      auto& gx = grad_of(n.inputs[0]);
      const float d = g[0] * n.scalar;
      for (float& v : gx) v += d;
      return;
    }
  }
}

}  // namespace fcdcnn
