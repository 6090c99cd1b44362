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

#ifndef GRADGUARD_MODELS_HPP_
#define GRADGUARD_MODELS_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gradguard/autodiff/tape.hpp"
#include "gradguard/autodiff/tensor.hpp"

namespace gradguard::models {

using ad::Shape;
using ad::Tensor;

enum class Activation { kTanh, kSigmoid, kRelu };
enum class PoolKind { kMax, kAvg };

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
};
struct ConvLayer {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 0;
  std::size_t pad = 0;
};
struct PoolLayer {
  PoolKind kind = PoolKind::kMax;
};
struct ActivationLayer {
  Activation fn = Activation::kTanh;
};

using Layer = std::variant<DenseLayer, ConvLayer, PoolLayer, ActivationLayer>;

std::string Describe(const Layer& layer);

// Images are [channels, height, width].
struct ModelSpec {
  std::string name;
  Shape input_shape;
  std::size_t num_classes = 0;
  std::vector<Layer> layers;
};

// Built-in architectures. Channel and width defaults are chosen so that a
// second-order attack runs in seconds per restart on one core.
struct LenetOptions {
  std::size_t conv1_channels = 6;
  std::size_t conv2_channels = 12;
  std::size_t hidden = 64;
};
ModelSpec LenetSmall(Shape input_shape, std::size_t num_classes,
                     LenetOptions options = {});

struct CnnOptions {
  std::size_t conv1_channels = 8;
  std::size_t conv2_channels = 16;
  std::size_t hidden = 64;
};
ModelSpec CnnSmall(Shape input_shape, std::size_t num_classes,
                   CnnOptions options = {});

// One dense layer from the flattened input to the logits.
ModelSpec LinearSoftmax(Shape input_shape, std::size_t num_classes);
// Dense -> activation -> dense.
ModelSpec Mlp(Shape input_shape, std::size_t hidden, std::size_t num_classes,
              Activation activation = Activation::kTanh);

// "lenet-small", "cnn-small", "linear" or "mlp" (hidden width 16).
ModelSpec BuiltinSpec(const std::string& name, Shape input_shape,
                      std::size_t num_classes);

enum class ParamRole { kWeight, kBias };

struct ParamRange {
  std::size_t layer = 0;        // index into ModelSpec::layers
  std::size_t param_layer = 0;  // ordinal among layers that own parameters
  ParamRole role = ParamRole::kWeight;
  std::size_t offset = 0;
  std::size_t count = 0;
  Shape shape;
};

// Maps flat parameter indices back to layers. Ranges are contiguous, ordered
// and partition [0, size()).
class ParamLayout {
 public:
  ParamLayout() = default;
  explicit ParamLayout(std::vector<ParamRange> ranges);

  std::size_t size() const { return total_; }
  const std::vector<ParamRange>& ranges() const { return ranges_; }
  std::size_t num_param_layers() const { return num_param_layers_; }
  // Flat [begin, end) owned by a parameterized layer (weights then bias).
  std::pair<std::size_t, std::size_t> LayerSpan(std::size_t param_layer) const;
  const ParamRange& RangeOf(std::size_t flat_index) const;

 private:
  std::vector<ParamRange> ranges_;
  std::size_t total_ = 0;
  std::size_t num_param_layers_ = 0;
};

struct ParamVector {
  std::vector<double> theta;
  std::shared_ptr<const ParamLayout> layout;

  std::size_t size() const { return theta.size(); }
  Tensor AsTensor() const { return Tensor::Vector(theta); }
  ParamVector Scaled(double factor) const;
};

// Gradient of the loss with respect to all parameters, in layout order.
struct FlatGradient {
  std::vector<double> values;
  std::shared_ptr<const ParamLayout> layout;

  std::size_t size() const { return values.size(); }
};

struct LossAndGradient {
  Tensor loss;      // scalar
  Tensor gradient;  // [m]; recorded on the tape when create_graph is set
};

class Model {
 public:
  // Throws std::invalid_argument naming the first incompatible layer pair.
  explicit Model(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  std::size_t num_classes() const { return spec_.num_classes; }
  const Shape& input_shape() const { return spec_.input_shape; }
  std::size_t num_params() const { return layout_->size(); }
  const std::shared_ptr<const ParamLayout>& layout() const { return layout_; }

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  ParamVector Build(std::uint64_t seed) const;
  ParamVector Zeros() const;

  // theta: flat [m], x: input_shape. Either may be recorded on a tape.
  Tensor Forward(const Tensor& theta, const Tensor& x) const;
  Tensor Forward(const ParamVector& params, const Tensor& x) const;

  // Cross-entropy -<y, log softmax(logits)>; y must be one-hot of length k.
  Tensor Loss(const Tensor& theta, const Tensor& x, const Tensor& y) const;

  // Registers theta as a variable on `tape` and differentiates the loss.
  LossAndGradient LossAndGrad(ad::Tape& tape, const ParamVector& params,
                              const Tensor& x, const Tensor& y,
                              bool create_graph) const;
  // Plain first-order gradient on a private tape.
  FlatGradient Gradient(const ParamVector& params, const Tensor& x,
                        const Tensor& y, double* loss = nullptr) const;

 private:
  void CheckParams(const Tensor& theta) const;

  ModelSpec spec_;
  std::shared_ptr<const ParamLayout> layout_;
  std::vector<Shape> shapes_;  // shapes_[i] is the input shape of layer i
};

Tensor OneHot(std::size_t label, std::size_t num_classes);
// Index of the hot entry; throws std::invalid_argument unless y is one-hot.
std::size_t CheckOneHot(const Tensor& y, std::size_t num_classes);

}  // namespace gradguard::models

#endif  // GRADGUARD_MODELS_HPP_
