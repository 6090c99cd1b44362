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

#include "gradguard/autodiff/tape.hpp"

#include <cmath>

#include "gradguard/autodiff/ops.hpp"
#include "internal.hpp"

namespace gradguard::ad {

NonFiniteError::NonFiniteError(std::size_t node, const std::string& op)
    : std::runtime_error("non-finite value produced by " + op +
                         " at tape node " + std::to_string(node)),
      node_(node) {}

const char* OpName(Op op) {
  switch (op) {
    case Op::kLeaf: return "leaf";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kScale: return "scale";
    case Op::kAddScalar: return "add_scalar";
    case Op::kPow: return "pow";
    case Op::kExp: return "exp";
    case Op::kLog: return "log";
    case Op::kTanh: return "tanh";
    case Op::kSigmoid: return "sigmoid";
    case Op::kRelu: return "relu";
    case Op::kAbs: return "abs";
    case Op::kMatMul: return "matmul";
    case Op::kTranspose: return "transpose";
    case Op::kConv2d: return "conv2d";
    case Op::kConv2dInputGrad: return "conv2d_input_grad";
    case Op::kConv2dWeightGrad: return "conv2d_weight_grad";
    case Op::kChannelSum: return "channel_sum";
    case Op::kChannelBroadcast: return "channel_broadcast";
    case Op::kAvgPool2d: return "avg_pool2d";
    case Op::kAvgUnpool2d: return "avg_unpool2d";
    case Op::kGather: return "gather";
    case Op::kScatter: return "scatter";
    case Op::kReshape: return "reshape";
    case Op::kSum: return "sum";
    case Op::kBroadcastScalar: return "broadcast_scalar";
    case Op::kSlice: return "slice";
    case Op::kEmbed: return "embed";
    case Op::kSoftmax: return "softmax";
    case Op::kLogSoftmax: return "log_softmax";
  }
  return "unknown";
}

namespace detail {

Tensor TapeState::Leaf(const Tensor& value) {
  for (double v : value.data()) {
    if (!std::isfinite(v)) throw NonFiniteError(nodes_.size(), OpName(Op::kLeaf));
  }
  Tensor out = value.detach();
  out.tape_ = this;
  out.node_ = nodes_.size();
  nodes_.push_back(Node{Op::kLeaf, {}, {}, out});
  return out;
}

Tensor TapeState::Push(Op op, std::vector<Tensor> inputs, OpAttrs attrs,
                       Tensor value) {
  const std::size_t id = nodes_.size();
  for (double v : value.data()) {
    if (!std::isfinite(v)) throw NonFiniteError(id, OpName(op));
  }
  value.tape_ = this;
  value.node_ = id;
  nodes_.push_back(Node{op, std::move(attrs), std::move(inputs), value});
  return value;
}

TapeState* TapeOf(std::span<const Tensor> inputs) {
  TapeState* tape = nullptr;
  for (const Tensor& t : inputs) {
    TapeState* other = t.tape();
    if (other == nullptr) continue;
    if (tape != nullptr && tape != other) {
      throw TapeError("operands recorded on different tapes");
    }
    tape = other;
  }
  return tape;
}

// Restores the recording flag on scope exit.
class RecordingScope {
 public:
  RecordingScope(TapeState* tape, bool on)
      : tape_(tape), saved_(tape->recording()) {
    tape_->set_recording(on);
  }
  ~RecordingScope() { tape_->set_recording(saved_); }
  RecordingScope(const RecordingScope&) = delete;
  RecordingScope& operator=(const RecordingScope&) = delete;

 private:
  TapeState* tape_;
  bool saved_;
};

std::vector<Tensor> TapeState::Gradients(const Tensor& output,
                                         std::span<const Tensor> wrt,
                                         bool create_graph) {
  if (output.size() != 1) {
    throw TapeError("gradient requested of non-scalar output " +
                    ShapeToString(output.shape()));
  }
  for (const Tensor& w : wrt) {
    if (w.tape_ != this) {
      throw TapeError("tensor passed as wrt is not recorded on this tape");
    }
  }
  const std::size_t end = output.node_ + 1;

  // Nodes that depend on some wrt tensor; only these receive gradients.
  std::vector<char> live(end, 0);
  std::vector<char> keep(end, 0);
  for (const Tensor& w : wrt) {
    if (w.node_ < end) live[w.node_] = keep[w.node_] = 1;
  }
  for (std::size_t n = 0; n < end; ++n) {
    if (live[n]) continue;
    for (const Tensor& t : nodes_[n].inputs) {
      if (t.tape_ == this && live[t.node_]) {
        live[n] = 1;
        break;
      }
    }
  }

  std::vector<Tensor> adjoint(end);
  adjoint[output.node_] = Tensor::Full(output.shape(), 1.0);
  RecordingScope scope(this, create_graph);
  for (std::size_t n = end; n-- > 0;) {
    if (!live[n] || !adjoint[n].defined()) continue;
    const Node& node = nodes_[n];
    if (node.op == Op::kLeaf) continue;
    std::vector<bool> want(node.inputs.size());
    bool any = false;
    for (std::size_t k = 0; k < want.size(); ++k) {
      const Tensor& t = node.inputs[k];
      want[k] = t.tape_ == this && live[t.node_];
      any = any || want[k];
    }
    if (!any) continue;
    std::vector<Tensor> grads = Backward(node, adjoint[n], want);
    for (std::size_t k = 0; k < want.size(); ++k) {
      if (!want[k] || !grads[k].defined()) continue;
      Tensor& slot = adjoint[node.inputs[k].node_];
      slot = slot.defined() ? Add(slot, grads[k]) : std::move(grads[k]);
    }
    // Interior adjoints are no longer needed once propagated.
    if (!keep[n]) adjoint[n] = Tensor();
  }

  std::vector<Tensor> result;
  result.reserve(wrt.size());
  for (const Tensor& w : wrt) {
    if (w.node_ < end && adjoint[w.node_].defined()) {
      result.push_back(adjoint[w.node_]);
    } else {
      result.push_back(Tensor::Zeros(w.shape()));
    }
  }
  return result;
}

std::vector<Tensor> TapeState::Replay(std::span<const Tensor> leaves) const {
  std::vector<Tensor> values(nodes_.size());
  std::size_t leaf_ordinal = 0;
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    const Node& node = nodes_[n];
    if (node.op == Op::kLeaf) {
      if (leaf_ordinal < leaves.size()) {
        const Tensor& v = leaves[leaf_ordinal];
        if (v.shape() != node.output.shape()) {
          throw TapeError("replay leaf shape mismatch at node " +
                          std::to_string(n));
        }
        values[n] = v.detach();
      } else {
        values[n] = node.output.detach();
      }
      ++leaf_ordinal;
      continue;
    }
    std::vector<Tensor> inputs;
    inputs.reserve(node.inputs.size());
    for (const Tensor& t : node.inputs) {
      inputs.push_back(t.tape_ == this ? values[t.node_] : t);
    }
    values[n] = Evaluate(node.op, node.attrs, inputs);
  }
  return values;
}

}  // namespace detail

Tape::Tape() : state_(std::make_unique<detail::TapeState>()) {}
Tape::~Tape() = default;

Tensor Tape::Variable(const Tensor& value) { return state_->Leaf(value); }

std::size_t Tape::size() const { return state_->size(); }

Op Tape::op_at(std::size_t node) const { return state_->node(node).op; }

std::vector<Tensor> Tape::Replay(std::span<const Tensor> leaves) const {
  return state_->Replay(leaves);
}

std::vector<Tensor> Grad(const Tensor& output, std::span<const Tensor> wrt,
                         bool create_graph) {
  if (!output.attached()) {
    throw TapeError("output is not recorded on a tape");
  }
  return detail::TapeOf(std::span<const Tensor>(&output, 1))
      ->Gradients(output, wrt, create_graph);
}

Tensor Grad(const Tensor& output, const Tensor& wrt, bool create_graph) {
  return Grad(output, std::span<const Tensor>(&wrt, 1), create_graph).front();
}

}  // namespace gradguard::ad
