/**
 * Copyright 2026 The gradguard Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "gradguard/autodiff/ops.hpp"

#include <stdexcept>

#include "gradguard/autodiff/tape.hpp"
#include "internal.hpp"

namespace gradguard::ad {
namespace detail {

Tensor Apply(Op op, std::vector<Tensor> inputs, OpAttrs attrs) {
  Tensor value = Evaluate(op, attrs, inputs);
  TapeState* tape = TapeOf(inputs);
  if (tape == nullptr || !tape->recording()) return value;
  return tape->Push(op, std::move(inputs), std::move(attrs), std::move(value));
}

Tensor GatherShared(const Tensor& a, IndexPtr index, Shape shape) {
  OpAttrs attrs;
  attrs.index = std::move(index);
  attrs.shape = std::move(shape);
  return Apply(Op::kGather, {a}, std::move(attrs));
}

Tensor ScatterShared(const Tensor& g, IndexPtr index, Shape shape) {
  OpAttrs attrs;
  attrs.index = std::move(index);
  attrs.shape = std::move(shape);
  return Apply(Op::kScatter, {g}, std::move(attrs));
}

}  // namespace detail

namespace {

using detail::Apply;

OpAttrs WithScalar(double c) {
  OpAttrs attrs;
  attrs.scalar = c;
  return attrs;
}

OpAttrs WithShape(Shape shape) {
  OpAttrs attrs;
  attrs.shape = std::move(shape);
  return attrs;
}

// Broadcasts a one-element operand to the other's shape.
std::pair<Tensor, Tensor> Align(const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) return {a, b};
  if (b.size() == 1) return {a, BroadcastScalar(b, a.shape())};
  if (a.size() == 1) return {BroadcastScalar(a, b.shape()), b};
  throw std::invalid_argument("cannot broadcast " + ShapeToString(a.shape()) +
                              " with " + ShapeToString(b.shape()));
}

}  // namespace

Tensor Add(const Tensor& a, const Tensor& b) {
  auto [x, y] = Align(a, b);
  return Apply(Op::kAdd, {x, y}, {});
}

Tensor Sub(const Tensor& a, const Tensor& b) {
  auto [x, y] = Align(a, b);
  return Apply(Op::kSub, {x, y}, {});
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  auto [x, y] = Align(a, b);
  return Apply(Op::kMul, {x, y}, {});
}

Tensor Neg(const Tensor& a) { return Scale(a, -1.0); }

Tensor Scale(const Tensor& a, double c) {
  return Apply(Op::kScale, {a}, WithScalar(c));
}

Tensor AddScalar(const Tensor& a, double c) {
  return Apply(Op::kAddScalar, {a}, WithScalar(c));
}

Tensor Pow(const Tensor& a, double p) {
  return Apply(Op::kPow, {a}, WithScalar(p));
}

Tensor Exp(const Tensor& a) { return Apply(Op::kExp, {a}, {}); }
Tensor Log(const Tensor& a) { return Apply(Op::kLog, {a}, {}); }
Tensor Tanh(const Tensor& a) { return Apply(Op::kTanh, {a}, {}); }
Tensor Sigmoid(const Tensor& a) { return Apply(Op::kSigmoid, {a}, {}); }
Tensor Relu(const Tensor& a) { return Apply(Op::kRelu, {a}, {}); }
Tensor Abs(const Tensor& a) { return Apply(Op::kAbs, {a}, {}); }

Tensor MatMul(const Tensor& a, const Tensor& b) {
  return Apply(Op::kMatMul, {a, b}, {});
}

Tensor Transpose(const Tensor& a) { return Apply(Op::kTranspose, {a}, {}); }

Tensor Conv2d(const Tensor& x, const Tensor& w, std::size_t pad) {
  OpAttrs attrs;
  attrs.pad = pad;
  return Apply(Op::kConv2d, {x, w}, std::move(attrs));
}

Tensor Conv2dInputGrad(const Tensor& g, const Tensor& w, std::size_t pad,
                       const Shape& input_shape) {
  OpAttrs attrs = WithShape(input_shape);
  attrs.pad = pad;
  return Apply(Op::kConv2dInputGrad, {g, w}, std::move(attrs));
}

Tensor Conv2dWeightGrad(const Tensor& x, const Tensor& g, std::size_t pad,
                        const Shape& weight_shape) {
  OpAttrs attrs = WithShape(weight_shape);
  attrs.pad = pad;
  return Apply(Op::kConv2dWeightGrad, {x, g}, std::move(attrs));
}

Tensor ChannelSum(const Tensor& a) { return Apply(Op::kChannelSum, {a}, {}); }

Tensor ChannelBroadcast(const Tensor& b, std::size_t height,
                        std::size_t width) {
  return Apply(Op::kChannelBroadcast, {b},
               WithShape({b.size(), height, width}));
}

Tensor MaxPool2d(const Tensor& x) {
  if (x.shape().size() != 3) {
    throw std::invalid_argument("MaxPool2d expects [C,H,W], got " +
                                ShapeToString(x.shape()));
  }
  const std::size_t c = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
  const std::size_t oh = h / 2, ow = w / 2;
  if (oh == 0 || ow == 0) {
    throw std::invalid_argument("MaxPool2d: input smaller than 2x2");
  }
  // Argmax per window in row-major order; the first maximum wins.
  std::vector<std::size_t> index(c * oh * ow);
  const auto v = x.data();
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        const std::size_t base = (k * h + 2 * i) * w + 2 * j;
        std::size_t best = base;
        for (std::size_t cand : {base + 1, base + w, base + w + 1}) {
          if (v[cand] > v[best]) best = cand;
        }
        index[(k * oh + i) * ow + j] = best;
      }
    }
  }
  return Gather(x, std::move(index), {c, oh, ow});
}

Tensor AvgPool2d(const Tensor& x) { return Apply(Op::kAvgPool2d, {x}, {}); }

Tensor AvgUnpool2d(const Tensor& g, const Shape& input_shape) {
  return Apply(Op::kAvgUnpool2d, {g}, WithShape(input_shape));
}

Tensor Gather(const Tensor& a, std::vector<std::size_t> index, Shape shape) {
  return detail::GatherShared(
      a, std::make_shared<const std::vector<std::size_t>>(std::move(index)),
      std::move(shape));
}

Tensor Scatter(const Tensor& g, std::vector<std::size_t> index, Shape shape) {
  return detail::ScatterShared(
      g, std::make_shared<const std::vector<std::size_t>>(std::move(index)),
      std::move(shape));
}

Tensor Reshape(const Tensor& a, Shape shape) {
  if (a.shape() == shape) return a;
  return Apply(Op::kReshape, {a}, WithShape(std::move(shape)));
}

Tensor Flatten(const Tensor& a) { return Reshape(a, {a.size()}); }

Tensor Sum(const Tensor& a) { return Apply(Op::kSum, {a}, {}); }

Tensor Mean(const Tensor& a) {
  if (a.size() == 0) throw std::invalid_argument("Mean of empty tensor");
  return Scale(Sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor BroadcastScalar(const Tensor& s, const Shape& shape) {
  return Apply(Op::kBroadcastScalar, {s}, WithShape(shape));
}

Tensor Dot(const Tensor& a, const Tensor& b) { return Sum(Mul(a, b)); }

Tensor Slice(const Tensor& a, std::size_t offset, std::size_t count) {
  OpAttrs attrs = WithShape({count});
  attrs.offset = offset;
  return Apply(Op::kSlice, {a}, std::move(attrs));
}

Tensor Embed(const Tensor& a, std::size_t offset, std::size_t total) {
  OpAttrs attrs = WithShape({total});
  attrs.offset = offset;
  return Apply(Op::kEmbed, {a}, std::move(attrs));
}

Tensor Softmax(const Tensor& z) { return Apply(Op::kSoftmax, {z}, {}); }

Tensor LogSoftmax(const Tensor& z) { return Apply(Op::kLogSoftmax, {z}, {}); }

}  // namespace gradguard::ad
