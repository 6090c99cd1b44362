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

#ifndef GRADGUARD_AUTODIFF_TAPE_HPP_
#define GRADGUARD_AUTODIFF_TAPE_HPP_

#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gradguard/autodiff/tensor.hpp"

namespace gradguard::ad {

// A recorded primitive produced a NaN or infinity.
class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(std::size_t node, const std::string& op);
  std::size_t node() const { return node_; }

 private:
  std::size_t node_;
};

// Misuse of the tape: differentiating with respect to a tensor that was never
// recorded, mixing tapes, non-scalar outputs.
class TapeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class Op {
  kLeaf,
  kAdd,
  kSub,
  kMul,
  kScale,
  kAddScalar,
  kPow,
  kExp,
  kLog,
  kTanh,
  kSigmoid,
  kRelu,
  kAbs,
  kMatMul,
  kTranspose,
  kConv2d,
  kConv2dInputGrad,
  kConv2dWeightGrad,
  kChannelSum,
  kChannelBroadcast,
  kAvgPool2d,
  kAvgUnpool2d,
  kGather,
  kScatter,
  kReshape,
  kSum,
  kBroadcastScalar,
  kSlice,
  kEmbed,
  kSoftmax,
  kLogSoftmax,
};

const char* OpName(Op op);

// Non-tensor arguments of a primitive.
struct OpAttrs {
  double scalar = 0.0;
  std::size_t pad = 0;
  std::size_t offset = 0;
  Shape shape;
  std::shared_ptr<const std::vector<std::size_t>> index;
};

namespace detail {

struct Node {
  Op op = Op::kLeaf;
  OpAttrs attrs;
  std::vector<Tensor> inputs;
  Tensor output;
};

class TapeState {
 public:
  Tensor Leaf(const Tensor& value);
  // Evaluates a primitive and records it when any input belongs to this tape
  // and recording is enabled.
  Tensor Push(Op op, std::vector<Tensor> inputs, OpAttrs attrs, Tensor value);

  std::vector<Tensor> Gradients(const Tensor& output,
                                std::span<const Tensor> wrt,
                                bool create_graph);
  std::vector<Tensor> Replay(std::span<const Tensor> leaves) const;

  bool recording() const { return recording_; }
  void set_recording(bool on) { recording_ = on; }
  std::size_t size() const { return nodes_.size(); }
  const Node& node(std::size_t i) const { return nodes_[i]; }

 private:
  // Deque keeps node references stable while the backward pass appends.
  std::deque<Node> nodes_;
  bool recording_ = true;
};

TapeState* TapeOf(std::span<const Tensor> inputs);

}  // namespace detail

// Owns one recorded computation. Tensors produced under a tape refer to it and
// must not outlive it. Movable; not copyable.
class Tape {
 public:
  Tape();
  Tape(Tape&&) noexcept = default;
  Tape& operator=(Tape&&) noexcept = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  ~Tape();

  // Registers a differentiable input.
  Tensor Variable(const Tensor& value);

  std::size_t size() const;
  // Monotone node counter: index the next recorded node will get.
  std::size_t watermark() const { return size(); }
  Op op_at(std::size_t node) const;

  // Re-evaluates every node from the recorded leaves (or from `leaves` when
  // given, in Variable() order) and returns each node's value.
  std::vector<Tensor> Replay(std::span<const Tensor> leaves = {}) const;

  detail::TapeState* state() const { return state_.get(); }

 private:
  std::unique_ptr<detail::TapeState> state_;
};

// d output / d wrt for each element of `wrt`. With create_graph the returned
// tensors are recorded on the same tape and can be differentiated again.
std::vector<Tensor> Grad(const Tensor& output, std::span<const Tensor> wrt,
                         bool create_graph = false);
Tensor Grad(const Tensor& output, const Tensor& wrt, bool create_graph = false);

// Records f over fresh variables for `inputs`.
template <typename F>
std::pair<Tensor, Tape> Record(F&& f, std::span<const Tensor> inputs,
                               std::vector<Tensor>* variables = nullptr) {
  Tape tape;
  std::vector<Tensor> vars;
  vars.reserve(inputs.size());
  for (const Tensor& t : inputs) vars.push_back(tape.Variable(t));
  Tensor out = std::invoke(std::forward<F>(f), std::span<const Tensor>(vars));
  if (variables != nullptr) *variables = std::move(vars);
  return {std::move(out), std::move(tape)};
}

}  // namespace gradguard::ad

#endif  // GRADGUARD_AUTODIFF_TAPE_HPP_
