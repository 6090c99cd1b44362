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

#ifndef GRADGUARD_AUTODIFF_OPS_HPP_
#define GRADGUARD_AUTODIFF_OPS_HPP_

#include <cstddef>
#include <vector>

#include "gradguard/autodiff/tensor.hpp"

namespace gradguard::ad {

// Elementwise binary ops take equal shapes, or one operand with a single
// element which is broadcast to the other's shape.
Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor Neg(const Tensor& a);
Tensor Scale(const Tensor& a, double c);
Tensor AddScalar(const Tensor& a, double c);
Tensor Pow(const Tensor& a, double p);

Tensor Exp(const Tensor& a);
Tensor Log(const Tensor& a);
Tensor Tanh(const Tensor& a);
Tensor Sigmoid(const Tensor& a);
Tensor Relu(const Tensor& a);
Tensor Abs(const Tensor& a);

// [m,k] x [k,n] -> [m,n].
Tensor MatMul(const Tensor& a, const Tensor& b);
Tensor Transpose(const Tensor& a);

// Stride-1 cross-correlation. x: [C,H,W], w: [O,C,KH,KW] -> [O,H',W'] with
// H' = H + 2*pad - KH + 1. pad = 0 is "valid".
Tensor Conv2d(const Tensor& x, const Tensor& w, std::size_t pad);
// Adjoint of Conv2d in x: g [O,H',W'], w -> [C,H,W] (`input_shape`).
Tensor Conv2dInputGrad(const Tensor& g, const Tensor& w, std::size_t pad,
                       const Shape& input_shape);
// Adjoint of Conv2d in w: x, g [O,H',W'] -> `weight_shape`.
Tensor Conv2dWeightGrad(const Tensor& x, const Tensor& g, std::size_t pad,
                        const Shape& weight_shape);

// [C,H,W] -> [C] and back.
Tensor ChannelSum(const Tensor& a);
Tensor ChannelBroadcast(const Tensor& b, std::size_t height, std::size_t width);

// 2x2 windows, stride 2; trailing odd rows/columns are dropped.
Tensor MaxPool2d(const Tensor& x);
Tensor AvgPool2d(const Tensor& x);
Tensor AvgUnpool2d(const Tensor& g, const Shape& input_shape);

// out[k] = a[index[k]] (flat indices), reshaped to `shape`.
Tensor Gather(const Tensor& a, std::vector<std::size_t> index, Shape shape);
// Adjoint of Gather: out = zeros(shape); out[index[k]] += g[k].
Tensor Scatter(const Tensor& g, std::vector<std::size_t> index, Shape shape);

Tensor Reshape(const Tensor& a, Shape shape);
Tensor Flatten(const Tensor& a);
Tensor Sum(const Tensor& a);
Tensor Mean(const Tensor& a);
Tensor BroadcastScalar(const Tensor& s, const Shape& shape);
Tensor Dot(const Tensor& a, const Tensor& b);

// Flat [offset, offset+count) of a, and its adjoint.
Tensor Slice(const Tensor& a, std::size_t offset, std::size_t count);
Tensor Embed(const Tensor& a, std::size_t offset, std::size_t total);

// 1-D.
Tensor Softmax(const Tensor& z);
Tensor LogSoftmax(const Tensor& z);

}  // namespace gradguard::ad

#endif  // GRADGUARD_AUTODIFF_OPS_HPP_
