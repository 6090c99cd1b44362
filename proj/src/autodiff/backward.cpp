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

// Backward rules. Every rule is written in terms of the public primitives so
// that, when the tape is recording, the gradient computation is itself
// differentiable.

#include "gradguard/autodiff/ops.hpp"
#include "internal.hpp"

namespace gradguard::ad::detail {
namespace {

// Constant mask derived from the input's values. Not differentiated: the
// derivative of a step function is zero almost everywhere.
Tensor ValueMask(const Tensor& a, double (*f)(double)) {
  std::vector<double> out(a.size());
  const auto v = a.data();
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = f(v[i]);
  return Tensor(a.shape(), std::move(out));
}

double Step(double x) { return x > 0.0 ? 1.0 : 0.0; }
double Sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

std::vector<Tensor> Backward(const Node& node, const Tensor& g,
                             const std::vector<bool>& want) {
  const auto& in = node.inputs;
  const Tensor& y = node.output;
  const OpAttrs& at = node.attrs;
  std::vector<Tensor> out(in.size());
  auto need = [&](std::size_t k) { return want[k]; };

  switch (node.op) {
    case Op::kLeaf:
      break;
    case Op::kAdd:
      if (need(0)) out[0] = g;
      if (need(1)) out[1] = g;
      break;
    case Op::kSub:
      if (need(0)) out[0] = g;
      if (need(1)) out[1] = Neg(g);
      break;
    case Op::kMul:
      if (need(0)) out[0] = Mul(g, in[1]);
      if (need(1)) out[1] = Mul(g, in[0]);
      break;
    case Op::kScale:
      out[0] = Scale(g, at.scalar);
      break;
    case Op::kAddScalar:
      out[0] = g;
      break;
    case Op::kPow:
      out[0] = at.scalar == 1.0
                   ? g
                   : Mul(g, Scale(Pow(in[0], at.scalar - 1.0), at.scalar));
      break;
    case Op::kExp:
      out[0] = Mul(g, y);
      break;
    case Op::kLog:
      out[0] = Mul(g, Pow(in[0], -1.0));
      break;
    case Op::kTanh:
      out[0] = Mul(g, AddScalar(Neg(Mul(y, y)), 1.0));
      break;
    case Op::kSigmoid:
      out[0] = Mul(g, Mul(y, AddScalar(Neg(y), 1.0)));
      break;
    case Op::kRelu:
      out[0] = Mul(g, ValueMask(in[0], Step));
      break;
    case Op::kAbs:
      out[0] = Mul(g, ValueMask(in[0], Sign));
      break;
    case Op::kMatMul:
      if (need(0)) out[0] = MatMul(g, Transpose(in[1]));
      if (need(1)) out[1] = MatMul(Transpose(in[0]), g);
      break;
    case Op::kTranspose:
      out[0] = Transpose(g);
      break;
    case Op::kConv2d:
      if (need(0)) out[0] = Conv2dInputGrad(g, in[1], at.pad, in[0].shape());
      if (need(1)) out[1] = Conv2dWeightGrad(in[0], g, at.pad, in[1].shape());
      break;
    case Op::kConv2dInputGrad:
      // y = Conv2d^T(in0; in1): linear in each argument.
      if (need(0)) out[0] = Conv2d(g, in[1], at.pad);
      if (need(1)) out[1] = Conv2dWeightGrad(g, in[0], at.pad, in[1].shape());
      break;
    case Op::kConv2dWeightGrad:
      if (need(0)) out[0] = Conv2dInputGrad(in[1], g, at.pad, in[0].shape());
      if (need(1)) out[1] = Conv2d(in[0], g, at.pad);
      break;
    case Op::kChannelSum:
      out[0] = ChannelBroadcast(g, in[0].shape()[1], in[0].shape()[2]);
      break;
    case Op::kChannelBroadcast:
      out[0] = ChannelSum(g);
      break;
    case Op::kAvgPool2d:
      out[0] = AvgUnpool2d(g, in[0].shape());
      break;
    case Op::kAvgUnpool2d:
      out[0] = AvgPool2d(g);
      break;
    case Op::kGather:
      out[0] = ScatterShared(g, at.index, in[0].shape());
      break;
    case Op::kScatter:
      out[0] = GatherShared(g, at.index, in[0].shape());
      break;
    case Op::kReshape:
      out[0] = Reshape(g, in[0].shape());
      break;
    case Op::kSum:
      out[0] = BroadcastScalar(g, in[0].shape());
      break;
    case Op::kBroadcastScalar:
      out[0] = Reshape(Sum(g), in[0].shape());
      break;
    case Op::kSlice:
      out[0] = Reshape(Embed(g, at.offset, in[0].size()), in[0].shape());
      break;
    case Op::kEmbed:
      out[0] = Reshape(Slice(g, at.offset, in[0].size()), in[0].shape());
      break;
    case Op::kSoftmax:
      out[0] = Mul(y, Sub(g, Sum(Mul(g, y))));
      break;
    case Op::kLogSoftmax:
      out[0] = Sub(g, Mul(Exp(y), Sum(g)));
      break;
  }
  return out;
}

}  // namespace gradguard::ad::detail
