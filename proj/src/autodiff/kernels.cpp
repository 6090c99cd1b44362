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

// Forward kernels for every primitive. Shapes are validated here so that
// replaying a tape goes through the same checks as eager evaluation.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "internal.hpp"

namespace gradguard::ad::detail {
namespace {

[[noreturn]] void Fail(Op op, const std::string& what) {
  throw std::invalid_argument(std::string(OpName(op)) + ": " + what);
}

void ExpectRank(Op op, const Tensor& t, std::size_t rank, const char* name) {
  if (t.shape().size() != rank) {
    Fail(op, std::string(name) + " must have rank " + std::to_string(rank) +
                 ", got " + ShapeToString(t.shape()));
  }
}

template <typename F>
Tensor Unary(const Tensor& a, F f) {
  std::vector<double> out(a.size());
  const auto in = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  return Tensor(a.shape(), std::move(out));
}

template <typename F>
Tensor Binary(Op op, const Tensor& a, const Tensor& b, F f) {
  if (a.shape() != b.shape()) {
    Fail(op, "shape mismatch " + ShapeToString(a.shape()) + " vs " +
                 ShapeToString(b.shape()));
  }
  std::vector<double> out(a.size());
  const auto x = a.data();
  const auto y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(x[i], y[i]);
  return Tensor(a.shape(), std::move(out));
}

struct ConvDims {
  std::size_t channels, height, width;
  std::size_t out_channels, kh, kw;
  std::size_t out_h, out_w;
  std::size_t pad;
};

ConvDims MakeConvDims(Op op, const Shape& x, const Shape& w, std::size_t pad) {
  if (x.size() != 3 || w.size() != 4) {
    Fail(op, "expects input [C,H,W] and weight [O,C,KH,KW], got " +
                 ShapeToString(x) + " and " + ShapeToString(w));
  }
  if (x[0] != w[1]) {
    Fail(op, "channel mismatch " + ShapeToString(x) + " vs " +
                 ShapeToString(w));
  }
  if (x[1] + 2 * pad < w[2] || x[2] + 2 * pad < w[3]) {
    Fail(op, "kernel larger than padded input");
  }
  return {x[0],
          x[1],
          x[2],
          w[0],
          w[2],
          w[3],
          x[1] + 2 * pad - w[2] + 1,
          x[2] + 2 * pad - w[3] + 1,
          pad};
}

// Calls body(o, c, a, b, i_lo, i_hi, j_lo, j_hi) for each kernel tap, with the
// output row/column ranges whose input position (i + a - pad) is in bounds.
template <typename Body>
void ForEachTap(const ConvDims& d, Body body) {
  for (std::size_t o = 0; o < d.out_channels; ++o) {
    for (std::size_t c = 0; c < d.channels; ++c) {
      for (std::size_t a = 0; a < d.kh; ++a) {
        const std::size_t i_lo = a < d.pad ? d.pad - a : 0;
        const std::size_t i_hi =
            std::min(d.out_h, d.height + d.pad > a ? d.height + d.pad - a : 0);
        for (std::size_t b = 0; b < d.kw; ++b) {
          const std::size_t j_lo = b < d.pad ? d.pad - b : 0;
          const std::size_t j_hi =
              std::min(d.out_w, d.width + d.pad > b ? d.width + d.pad - b : 0);
          body(o, c, a, b, i_lo, i_hi, j_lo, j_hi);
        }
      }
    }
  }
}

Tensor Conv2dKernel(const Tensor& x, const Tensor& w, std::size_t pad) {
  const ConvDims d = MakeConvDims(Op::kConv2d, x.shape(), w.shape(), pad);
  std::vector<double> y(d.out_channels * d.out_h * d.out_w, 0.0);
  const double* xv = x.data().data();
  const double* wv = w.data().data();
  ForEachTap(d, [&](std::size_t o, std::size_t c, std::size_t a, std::size_t b,
                    std::size_t i_lo, std::size_t i_hi, std::size_t j_lo,
                    std::size_t j_hi) {
    const double k = wv[((o * d.channels + c) * d.kh + a) * d.kw + b];
    for (std::size_t i = i_lo; i < i_hi; ++i) {
      double* yrow = &y[(o * d.out_h + i) * d.out_w];
      const double* xrow = &xv[(c * d.height + i + a - pad) * d.width];
      for (std::size_t j = j_lo; j < j_hi; ++j) {
        yrow[j] += k * xrow[j + b - pad];
      }
    }
  });
  return Tensor({d.out_channels, d.out_h, d.out_w}, std::move(y));
}

Tensor Conv2dInputGradKernel(const Tensor& g, const Tensor& w, std::size_t pad,
                             const Shape& input_shape) {
  const ConvDims d =
      MakeConvDims(Op::kConv2dInputGrad, input_shape, w.shape(), pad);
  if (g.shape() != Shape{d.out_channels, d.out_h, d.out_w}) {
    Fail(Op::kConv2dInputGrad, "gradient shape " + ShapeToString(g.shape()) +
                                   " does not match convolution output");
  }
  std::vector<double> gx(Numel(input_shape), 0.0);
  const double* gv = g.data().data();
  const double* wv = w.data().data();
  ForEachTap(d, [&](std::size_t o, std::size_t c, std::size_t a, std::size_t b,
                    std::size_t i_lo, std::size_t i_hi, std::size_t j_lo,
                    std::size_t j_hi) {
    const double k = wv[((o * d.channels + c) * d.kh + a) * d.kw + b];
    for (std::size_t i = i_lo; i < i_hi; ++i) {
      const double* grow = &gv[(o * d.out_h + i) * d.out_w];
      double* xrow = &gx[(c * d.height + i + a - pad) * d.width];
      for (std::size_t j = j_lo; j < j_hi; ++j) {
        xrow[j + b - pad] += k * grow[j];
      }
    }
  });
  return Tensor(input_shape, std::move(gx));
}

Tensor Conv2dWeightGradKernel(const Tensor& x, const Tensor& g,
                              std::size_t pad, const Shape& weight_shape) {
  const ConvDims d =
      MakeConvDims(Op::kConv2dWeightGrad, x.shape(), weight_shape, pad);
  if (g.shape() != Shape{d.out_channels, d.out_h, d.out_w}) {
    Fail(Op::kConv2dWeightGrad, "gradient shape " + ShapeToString(g.shape()) +
                                    " does not match convolution output");
  }
  std::vector<double> gw(Numel(weight_shape), 0.0);
  const double* gv = g.data().data();
  const double* xv = x.data().data();
  ForEachTap(d, [&](std::size_t o, std::size_t c, std::size_t a, std::size_t b,
                    std::size_t i_lo, std::size_t i_hi, std::size_t j_lo,
                    std::size_t j_hi) {
    double acc = 0.0;
    for (std::size_t i = i_lo; i < i_hi; ++i) {
      const double* grow = &gv[(o * d.out_h + i) * d.out_w];
      const double* xrow = &xv[(c * d.height + i + a - pad) * d.width];
      for (std::size_t j = j_lo; j < j_hi; ++j) {
        acc += grow[j] * xrow[j + b - pad];
      }
    }
    gw[((o * d.channels + c) * d.kh + a) * d.kw + b] = acc;
  });
  return Tensor(weight_shape, std::move(gw));
}

Tensor MatMulKernel(const Tensor& a, const Tensor& b) {
  ExpectRank(Op::kMatMul, a, 2, "lhs");
  ExpectRank(Op::kMatMul, b, 2, "rhs");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    Fail(Op::kMatMul, "inner dimension mismatch " + ShapeToString(a.shape()) +
                          " x " + ShapeToString(b.shape()));
  }
  std::vector<double> out(m * n, 0.0);
  const double* av = a.data().data();
  const double* bv = b.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = &out[i * n];
    for (std::size_t p = 0; p < k; ++p) {
      const double s = av[i * k + p];
      const double* brow = &bv[p * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += s * brow[j];
    }
  }
  return Tensor({m, n}, std::move(out));
}

Tensor TransposeKernel(const Tensor& a) {
  ExpectRank(Op::kTranspose, a, 2, "input");
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  std::vector<double> out(m * n);
  const auto v = a.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = v[i * n + j];
  }
  return Tensor({n, m}, std::move(out));
}

Tensor ChannelSumKernel(const Tensor& a) {
  ExpectRank(Op::kChannelSum, a, 3, "input");
  const std::size_t c = a.shape()[0], hw = a.shape()[1] * a.shape()[2];
  std::vector<double> out(c, 0.0);
  const auto v = a.data();
  for (std::size_t k = 0; k < c; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < hw; ++i) acc += v[k * hw + i];
    out[k] = acc;
  }
  return Tensor({c}, std::move(out));
}

Tensor ChannelBroadcastKernel(const Tensor& b, const Shape& shape) {
  ExpectRank(Op::kChannelBroadcast, b, 1, "input");
  if (shape.size() != 3 || shape[0] != b.size()) {
    Fail(Op::kChannelBroadcast, "target shape " + ShapeToString(shape) +
                                    " incompatible with " +
                                    ShapeToString(b.shape()));
  }
  const std::size_t hw = shape[1] * shape[2];
  std::vector<double> out(Numel(shape));
  const auto v = b.data();
  for (std::size_t k = 0; k < shape[0]; ++k) {
    std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(k * hw), hw, v[k]);
  }
  return Tensor(shape, std::move(out));
}

Tensor AvgPoolKernel(const Tensor& x) {
  ExpectRank(Op::kAvgPool2d, x, 3, "input");
  const std::size_t c = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
  const std::size_t oh = h / 2, ow = w / 2;
  if (oh == 0 || ow == 0) Fail(Op::kAvgPool2d, "input smaller than 2x2");
  std::vector<double> out(c * oh * ow);
  const auto v = x.data();
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        const std::size_t base = (k * h + 2 * i) * w + 2 * j;
        out[(k * oh + i) * ow + j] =
            0.25 * (v[base] + v[base + 1] + v[base + w] + v[base + w + 1]);
      }
    }
  }
  return Tensor({c, oh, ow}, std::move(out));
}

Tensor AvgUnpoolKernel(const Tensor& g, const Shape& shape) {
  ExpectRank(Op::kAvgUnpool2d, g, 3, "input");
  if (shape.size() != 3 || shape[0] != g.shape()[0] ||
      shape[1] / 2 != g.shape()[1] || shape[2] / 2 != g.shape()[2]) {
    Fail(Op::kAvgUnpool2d, "target shape " + ShapeToString(shape) +
                               " incompatible with " +
                               ShapeToString(g.shape()));
  }
  const std::size_t c = shape[0], h = shape[1], w = shape[2];
  const std::size_t oh = h / 2, ow = w / 2;
  std::vector<double> out(Numel(shape), 0.0);
  const auto v = g.data();
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        const double q = 0.25 * v[(k * oh + i) * ow + j];
        const std::size_t base = (k * h + 2 * i) * w + 2 * j;
        out[base] = q;
        out[base + 1] = q;
        out[base + w] = q;
        out[base + w + 1] = q;
      }
    }
  }
  return Tensor(shape, std::move(out));
}

Tensor GatherKernel(const Tensor& a, const OpAttrs& attrs) {
  const auto& index = *attrs.index;
  if (Numel(attrs.shape) != index.size()) {
    Fail(Op::kGather, "index count does not match output shape");
  }
  std::vector<double> out(index.size());
  const auto v = a.data();
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] >= v.size()) Fail(Op::kGather, "index out of range");
    out[k] = v[index[k]];
  }
  return Tensor(attrs.shape, std::move(out));
}

Tensor ScatterKernel(const Tensor& g, const OpAttrs& attrs) {
  const auto& index = *attrs.index;
  if (g.size() != index.size()) {
    Fail(Op::kScatter, "index count does not match gradient size");
  }
  std::vector<double> out(Numel(attrs.shape), 0.0);
  const auto v = g.data();
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] >= out.size()) Fail(Op::kScatter, "index out of range");
    out[index[k]] += v[k];
  }
  return Tensor(attrs.shape, std::move(out));
}

Tensor SoftmaxKernel(const Tensor& z, bool log_space) {
  const Op op = log_space ? Op::kLogSoftmax : Op::kSoftmax;
  ExpectRank(op, z, 1, "input");
  if (z.size() == 0) Fail(op, "empty input");
  const auto v = z.data();
  const double mx = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (double e : v) total += std::exp(e - mx);
  std::vector<double> out(v.size());
  if (log_space) {
    const double lse = mx + std::log(total);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - lse;
  } else {
    for (std::size_t i = 0; i < v.size(); ++i) {
      out[i] = std::exp(v[i] - mx) / total;
    }
  }
  return Tensor(z.shape(), std::move(out));
}

}  // namespace

Tensor Evaluate(Op op, const OpAttrs& attrs, std::span<const Tensor> in) {
  switch (op) {
    case Op::kLeaf:
      Fail(op, "leaves have no kernel");
    case Op::kAdd:
      return Binary(op, in[0], in[1], [](double x, double y) { return x + y; });
    case Op::kSub:
      return Binary(op, in[0], in[1], [](double x, double y) { return x - y; });
    case Op::kMul:
      return Binary(op, in[0], in[1], [](double x, double y) { return x * y; });
    case Op::kScale: {
      const double c = attrs.scalar;
      return Unary(in[0], [c](double x) { return c * x; });
    }
    case Op::kAddScalar: {
      const double c = attrs.scalar;
      return Unary(in[0], [c](double x) { return x + c; });
    }
    case Op::kPow: {
      const double p = attrs.scalar;
      return Unary(in[0], [p](double x) { return std::pow(x, p); });
    }
    case Op::kExp:
      return Unary(in[0], [](double x) { return std::exp(x); });
    case Op::kLog:
      return Unary(in[0], [](double x) { return std::log(x); });
    case Op::kTanh:
      return Unary(in[0], [](double x) { return std::tanh(x); });
    case Op::kSigmoid:
      return Unary(in[0], [](double x) { return 1.0 / (1.0 + std::exp(-x)); });
    case Op::kRelu:
      return Unary(in[0], [](double x) { return x > 0.0 ? x : 0.0; });
    case Op::kAbs:
      return Unary(in[0], [](double x) { return std::fabs(x); });
    case Op::kMatMul:
      return MatMulKernel(in[0], in[1]);
    case Op::kTranspose:
      return TransposeKernel(in[0]);
    case Op::kConv2d:
      return Conv2dKernel(in[0], in[1], attrs.pad);
    case Op::kConv2dInputGrad:
      return Conv2dInputGradKernel(in[0], in[1], attrs.pad, attrs.shape);
    case Op::kConv2dWeightGrad:
      return Conv2dWeightGradKernel(in[0], in[1], attrs.pad, attrs.shape);
    case Op::kChannelSum:
      return ChannelSumKernel(in[0]);
    case Op::kChannelBroadcast:
      return ChannelBroadcastKernel(in[0], attrs.shape);
    case Op::kAvgPool2d:
      return AvgPoolKernel(in[0]);
    case Op::kAvgUnpool2d:
      return AvgUnpoolKernel(in[0], attrs.shape);
    case Op::kGather:
      return GatherKernel(in[0], attrs);
    case Op::kScatter:
      return ScatterKernel(in[0], attrs);
    case Op::kReshape:
      if (Numel(attrs.shape) != in[0].size()) {
        Fail(op, "cannot reshape " + ShapeToString(in[0].shape()) + " to " +
                     ShapeToString(attrs.shape));
      }
      return Tensor(attrs.shape, in[0].values());
    case Op::kSum: {
      double acc = 0.0;
      for (double v : in[0].data()) acc += v;
      return Tensor::Scalar(acc);
    }
    case Op::kBroadcastScalar:
      if (in[0].size() != 1) Fail(op, "input must have one element");
      return Tensor::Full(attrs.shape, in[0][0]);
    case Op::kSlice: {
      if (attrs.offset + attrs.shape[0] > in[0].size()) {
        Fail(op, "range exceeds input of size " + std::to_string(in[0].size()));
      }
      const auto v = in[0].data();
      const auto first = v.begin() + static_cast<std::ptrdiff_t>(attrs.offset);
      return Tensor(attrs.shape,
                    std::vector<double>(
                        first, first + static_cast<std::ptrdiff_t>(
                                           attrs.shape[0])));
    }
    case Op::kEmbed: {
      if (attrs.offset + in[0].size() > attrs.shape[0]) {
        Fail(op, "range exceeds target of size " +
                     std::to_string(attrs.shape[0]));
      }
      std::vector<double> out(attrs.shape[0], 0.0);
      std::copy(in[0].data().begin(), in[0].data().end(),
                out.begin() + static_cast<std::ptrdiff_t>(attrs.offset));
      return Tensor(attrs.shape, std::move(out));
    }
    case Op::kSoftmax:
      return SoftmaxKernel(in[0], false);
    case Op::kLogSoftmax:
      return SoftmaxKernel(in[0], true);
  }
  Fail(op, "unknown primitive");
}

}  // namespace gradguard::ad::detail
