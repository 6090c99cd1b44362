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

#ifndef GRADGUARD_SRC_AUTODIFF_INTERNAL_HPP_
#define GRADGUARD_SRC_AUTODIFF_INTERNAL_HPP_

#include <memory>
#include <span>
#include <vector>

#include "gradguard/autodiff/tape.hpp"
#include "gradguard/autodiff/tensor.hpp"

namespace gradguard::ad::detail {

using IndexPtr = std::shared_ptr<const std::vector<std::size_t>>;

// Computes a primitive's value from input values. Never records.
Tensor Evaluate(Op op, const OpAttrs& attrs, std::span<const Tensor> inputs);

// Evaluate, then record on the inputs' tape if it is recording.
Tensor Apply(Op op, std::vector<Tensor> inputs, OpAttrs attrs);

// Gradients of a node's inputs given the gradient of its output. Entries with
// want[k] == false may be left undefined.
std::vector<Tensor> Backward(const Node& node, const Tensor& grad_out,
                             const std::vector<bool>& want);

Tensor GatherShared(const Tensor& a, IndexPtr index, Shape shape);
Tensor ScatterShared(const Tensor& g, IndexPtr index, Shape shape);

}  // namespace gradguard::ad::detail

#endif  // GRADGUARD_SRC_AUTODIFF_INTERNAL_HPP_
