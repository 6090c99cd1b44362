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

#ifndef GRADGUARD_AUTODIFF_TENSOR_HPP_
#define GRADGUARD_AUTODIFF_TENSOR_HPP_

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace gradguard::ad {

using Shape = std::vector<std::size_t>;

std::size_t Numel(const Shape& shape);
std::string ShapeToString(const Shape& shape);

namespace detail {
class TapeState;
}  // namespace detail

// Dense row-major array of doubles. Values are immutable once constructed and
// shared between copies. A tensor produced while a tape is recording carries a
// reference to the node that produced it; everything else is a constant.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data);

  static Tensor Scalar(double value);
  static Tensor Zeros(Shape shape);
  static Tensor Full(Shape shape, double value);
  static Tensor Vector(std::vector<double> data);

  bool defined() const { return data_ != nullptr; }
  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_ ? data_->size() : 0; }
  std::span<const double> data() const;
  const std::vector<double>& values() const { return *data_; }
  double operator[](std::size_t i) const { return (*data_)[i]; }
  // Value of a one-element tensor.
  double item() const;

  bool attached() const { return tape_ != nullptr; }
  std::size_t node() const { return node_; }
  detail::TapeState* tape() const { return tape_; }
  Tensor detach() const;

 private:
  friend class detail::TapeState;

  Shape shape_;
  std::shared_ptr<const std::vector<double>> data_;
  detail::TapeState* tape_ = nullptr;
  std::size_t node_ = 0;
};

bool BitwiseEqual(const Tensor& a, const Tensor& b);

}  // namespace gradguard::ad

#endif  // GRADGUARD_AUTODIFF_TENSOR_HPP_
