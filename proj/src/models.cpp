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

#include "gradguard/models.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "gradguard/autodiff/ops.hpp"

namespace gradguard::models {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

const char* ActivationName(Activation a) {
  switch (a) {
    case Activation::kTanh: return "tanh";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kRelu: return "relu";
  }
  return "?";
}

}  // namespace

std::string Describe(const Layer& layer) {
  return std::visit(
      Overloaded{
          [](const DenseLayer& d) {
            return "dense{" + std::to_string(d.in) + "," +
                   std::to_string(d.out) + "}";
          },
          [](const ConvLayer& c) {
            return "conv{" + std::to_string(c.in_channels) + "," +
                   std::to_string(c.out_channels) + ",k" +
                   std::to_string(c.kernel) + ",p" + std::to_string(c.pad) +
                   "}";
          },
          [](const PoolLayer& p) {
            return std::string(p.kind == PoolKind::kMax ? "maxpool" : "avgpool");
          },
          [](const ActivationLayer& a) {
            return std::string(ActivationName(a.fn));
          }},
      layer);
}

ModelSpec LenetSmall(Shape input_shape, std::size_t num_classes,
                     LenetOptions o) {
  if (input_shape.size() != 3) {
    throw std::invalid_argument("lenet-small expects a [C,H,W] input");
  }
  const std::size_t flat =
      o.conv2_channels * (input_shape[1] / 4) * (input_shape[2] / 4);
  return ModelSpec{
      "lenet-small",
      input_shape,
      num_classes,
      {ConvLayer{input_shape[0], o.conv1_channels, 5, 2},
       ActivationLayer{Activation::kTanh}, PoolLayer{PoolKind::kAvg},
       ConvLayer{o.conv1_channels, o.conv2_channels, 5, 2},
       ActivationLayer{Activation::kTanh}, PoolLayer{PoolKind::kAvg},
       DenseLayer{flat, o.hidden}, ActivationLayer{Activation::kTanh},
       DenseLayer{o.hidden, num_classes}}};
}

ModelSpec CnnSmall(Shape input_shape, std::size_t num_classes, CnnOptions o) {
  if (input_shape.size() != 3) {
    throw std::invalid_argument("cnn-small expects a [C,H,W] input");
  }
  const std::size_t flat =
      o.conv2_channels * (input_shape[1] / 4) * (input_shape[2] / 4);
  return ModelSpec{
      "cnn-small",
      input_shape,
      num_classes,
      {ConvLayer{input_shape[0], o.conv1_channels, 5, 2},
       ActivationLayer{Activation::kRelu}, PoolLayer{PoolKind::kMax},
       ConvLayer{o.conv1_channels, o.conv2_channels, 5, 2},
       ActivationLayer{Activation::kRelu}, PoolLayer{PoolKind::kMax},
       DenseLayer{flat, o.hidden}, ActivationLayer{Activation::kRelu},
       DenseLayer{o.hidden, num_classes}}};
}

ModelSpec LinearSoftmax(Shape input_shape, std::size_t num_classes) {
  const std::size_t n = ad::Numel(input_shape);
  return ModelSpec{"linear", std::move(input_shape), num_classes,
                   {DenseLayer{n, num_classes}}};
}

ModelSpec Mlp(Shape input_shape, std::size_t hidden, std::size_t num_classes,
              Activation activation) {
  const std::size_t n = ad::Numel(input_shape);
  return ModelSpec{"mlp",
                   std::move(input_shape),
                   num_classes,
                   {DenseLayer{n, hidden}, ActivationLayer{activation},
                    DenseLayer{hidden, num_classes}}};
}

ModelSpec BuiltinSpec(const std::string& name, Shape input_shape,
                      std::size_t num_classes) {
  if (name == "lenet-small") return LenetSmall(input_shape, num_classes);
  if (name == "cnn-small") return CnnSmall(input_shape, num_classes);
  if (name == "linear") return LinearSoftmax(input_shape, num_classes);
  if (name == "mlp") return Mlp(input_shape, 16, num_classes);
  throw std::invalid_argument("unknown model '" + name + "'");
}

ParamLayout::ParamLayout(std::vector<ParamRange> ranges)
    : ranges_(std::move(ranges)) {
  for (const ParamRange& r : ranges_) {
    if (r.offset != total_) {
      throw std::invalid_argument("parameter ranges must be contiguous");
    }
    total_ += r.count;
    num_param_layers_ = std::max(num_param_layers_, r.param_layer + 1);
  }
}

std::pair<std::size_t, std::size_t> ParamLayout::LayerSpan(
    std::size_t param_layer) const {
  std::size_t begin = total_, end = 0;
  for (const ParamRange& r : ranges_) {
    if (r.param_layer != param_layer) continue;
    begin = std::min(begin, r.offset);
    end = std::max(end, r.offset + r.count);
  }
  if (begin >= end) {
    throw std::out_of_range("no parameterized layer " +
                            std::to_string(param_layer));
  }
  return {begin, end};
}

const ParamRange& ParamLayout::RangeOf(std::size_t flat_index) const {
  for (const ParamRange& r : ranges_) {
    if (flat_index >= r.offset && flat_index < r.offset + r.count) return r;
  }
  throw std::out_of_range("flat index " + std::to_string(flat_index) +
                          " outside parameter layout");
}

ParamVector ParamVector::Scaled(double factor) const {
  ParamVector out = *this;
  for (double& v : out.theta) v *= factor;
  return out;
}

Model::Model(ModelSpec spec) : spec_(std::move(spec)) {
  if (spec_.num_classes < 2) {
    throw std::invalid_argument("model needs at least 2 classes");
  }
  if (spec_.layers.empty()) throw std::invalid_argument("model has no layers");
  std::vector<ParamRange> ranges;
  std::size_t offset = 0, param_layer = 0;
  Shape shape = spec_.input_shape;
  auto incompatible = [&](std::size_t i, const std::string& why) {
    const std::string prev =
        i == 0 ? "input " + ad::ShapeToString(spec_.input_shape)
               : "layer " + std::to_string(i - 1) + " " +
                     Describe(spec_.layers[i - 1]);
    return std::invalid_argument("incompatible layers: " + prev +
                                 " -> layer " + std::to_string(i) + " " +
                                 Describe(spec_.layers[i]) + " (" + why + ")");
  };
  auto add_range = [&](std::size_t layer, ParamRole role, Shape s) {
    const std::size_t count = ad::Numel(s);
    ranges.push_back({layer, param_layer, role, offset, count, std::move(s)});
    offset += count;
  };

  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    shapes_.push_back(shape);
    const Layer& layer = spec_.layers[i];
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      if (ad::Numel(shape) != d->in || d->out == 0) {
        throw incompatible(i, "expects " + std::to_string(d->in) +
                                  " inputs, got " + ad::ShapeToString(shape));
      }
      add_range(i, ParamRole::kWeight, {d->out, d->in});
      add_range(i, ParamRole::kBias, {d->out});
      ++param_layer;
      shape = {d->out};
    } else if (const auto* c = std::get_if<ConvLayer>(&layer)) {
      if (shape.size() != 3 || shape[0] != c->in_channels || c->kernel == 0 ||
          shape[1] + 2 * c->pad < c->kernel ||
          shape[2] + 2 * c->pad < c->kernel) {
        throw incompatible(i, "input " + ad::ShapeToString(shape));
      }
      add_range(i, ParamRole::kWeight,
                {c->out_channels, c->in_channels, c->kernel, c->kernel});
      add_range(i, ParamRole::kBias, {c->out_channels});
      ++param_layer;
      shape = {c->out_channels, shape[1] + 2 * c->pad - c->kernel + 1,
               shape[2] + 2 * c->pad - c->kernel + 1};
    } else if (std::holds_alternative<PoolLayer>(layer)) {
      if (shape.size() != 3 || shape[1] < 2 || shape[2] < 2) {
        throw incompatible(i, "input " + ad::ShapeToString(shape));
      }
      shape = {shape[0], shape[1] / 2, shape[2] / 2};
    }
  }
  if (shape != Shape{spec_.num_classes}) {
    throw std::invalid_argument("model output " + ad::ShapeToString(shape) +
                                " does not match " +
                                std::to_string(spec_.num_classes) + " classes");
  }
  layout_ = std::make_shared<const ParamLayout>(std::move(ranges));
}

ParamVector Model::Build(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  ParamVector p{std::vector<double>(num_params()), layout_};
  for (const ParamRange& r : layout_->ranges()) {
    const Layer& layer = spec_.layers[r.layer];
    std::size_t fan_in = 1;
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      fan_in = d->in;
    } else if (const auto* c = std::get_if<ConvLayer>(&layer)) {
      fan_in = c->in_channels * c->kernel * c->kernel;
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (std::size_t i = 0; i < r.count; ++i) p.theta[r.offset + i] = u(rng);
  }
  return p;
}

ParamVector Model::Zeros() const {
  return ParamVector{std::vector<double>(num_params(), 0.0), layout_};
}

void Model::CheckParams(const Tensor& theta) const {
  if (theta.shape() != Shape{num_params()}) {
    throw std::invalid_argument("parameter vector " +
                                ad::ShapeToString(theta.shape()) +
                                " does not match model with " +
                                std::to_string(num_params()) + " parameters");
  }
}

Tensor Model::Forward(const Tensor& theta, const Tensor& x) const {
  CheckParams(theta);
  if (x.shape() != spec_.input_shape) {
    throw std::invalid_argument("input " + ad::ShapeToString(x.shape()) +
                                " does not match model input " +
                                ad::ShapeToString(spec_.input_shape));
  }
  const auto& ranges = layout_->ranges();
  std::size_t next_range = 0;
  auto take = [&]() {
    const ParamRange& r = ranges[next_range++];
    return ad::Reshape(ad::Slice(theta, r.offset, r.count), r.shape);
  };

  Tensor h = x;
  for (const Layer& layer : spec_.layers) {
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      const Tensor w = take();
      const Tensor b = take();
      h = ad::Add(
          ad::Reshape(ad::MatMul(w, ad::Reshape(h, {d->in, 1})), {d->out}), b);
    } else if (const auto* c = std::get_if<ConvLayer>(&layer)) {
      const Tensor w = take();
      const Tensor b = take();
      h = ad::Conv2d(h, w, c->pad);
      h = ad::Add(h, ad::ChannelBroadcast(b, h.shape()[1], h.shape()[2]));
    } else if (const auto* p = std::get_if<PoolLayer>(&layer)) {
      h = p->kind == PoolKind::kMax ? ad::MaxPool2d(h) : ad::AvgPool2d(h);
    } else if (const auto* a = std::get_if<ActivationLayer>(&layer)) {
      switch (a->fn) {
        case Activation::kTanh: h = ad::Tanh(h); break;
        case Activation::kSigmoid: h = ad::Sigmoid(h); break;
        case Activation::kRelu: h = ad::Relu(h); break;
      }
    }
  }
  return h;
}

Tensor Model::Forward(const ParamVector& params, const Tensor& x) const {
  return Forward(params.AsTensor(), x);
}

Tensor Model::Loss(const Tensor& theta, const Tensor& x, const Tensor& y) const {
  CheckOneHot(y, spec_.num_classes);
  return ad::Neg(ad::Dot(y, ad::LogSoftmax(Forward(theta, x))));
}

LossAndGradient Model::LossAndGrad(ad::Tape& tape, const ParamVector& params,
                                   const Tensor& x, const Tensor& y,
                                   bool create_graph) const {
  const Tensor theta = tape.Variable(params.AsTensor());
  Tensor loss = Loss(theta, x, y);
  Tensor g = ad::Grad(loss, theta, create_graph);
  return {std::move(loss), std::move(g)};
}

FlatGradient Model::Gradient(const ParamVector& params, const Tensor& x,
                             const Tensor& y, double* loss) const {
  ad::Tape tape;
  const LossAndGradient r = LossAndGrad(tape, params, x.detach(), y, false);
  if (loss != nullptr) *loss = r.loss.item();
  return FlatGradient{r.gradient.values(), layout_};
}

Tensor OneHot(std::size_t label, std::size_t num_classes) {
  if (label >= num_classes) {
    throw std::invalid_argument("label " + std::to_string(label) +
                                " out of range for " +
                                std::to_string(num_classes) + " classes");
  }
  std::vector<double> v(num_classes, 0.0);
  v[label] = 1.0;
  return Tensor::Vector(std::move(v));
}

std::size_t CheckOneHot(const Tensor& y, std::size_t num_classes) {
  if (y.shape() != Shape{num_classes}) {
    throw std::invalid_argument("label vector " + ad::ShapeToString(y.shape()) +
                                " is not one-hot over " +
                                std::to_string(num_classes) + " classes");
  }
  std::size_t hot = num_classes, ones = 0;
  for (std::size_t i = 0; i < num_classes; ++i) {
    if (y[i] == 1.0) {
      hot = i;
      ++ones;
    } else if (y[i] != 0.0) {
      throw std::invalid_argument("label vector has non-binary entry at " +
                                  std::to_string(i));
    }
  }
  if (ones != 1) {
    throw std::invalid_argument("label vector must have exactly one hot entry");
  }
  return hot;
}

}  // namespace gradguard::models
