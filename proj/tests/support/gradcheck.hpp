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

// Test-only finite-difference oracles for the autodiff engine. These evaluate
// functions eagerly (no tape) and never call Grad, so they stay independent of
// the reverse-mode path they check.

#ifndef GRADGUARD_TESTS_SUPPORT_GRADCHECK_HPP_
#define GRADGUARD_TESTS_SUPPORT_GRADCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gradguard/autodiff/ops.hpp"
#include "gradguard/autodiff/tape.hpp"

namespace gradguard::testing {

using ad::Shape;
using ad::Tensor;
using TensorFn = std::function<Tensor(const std::vector<Tensor>&)>;

inline Tensor RandomTensor(std::mt19937_64& rng, Shape shape, double lo = -1.0,
                           double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(ad::Numel(shape));
  for (double& x : v) x = u(rng);
  return Tensor(std::move(shape), std::move(v));
}

inline Tensor WithValue(const Tensor& t, std::size_t i, double value) {
  std::vector<double> v = t.values();
  v[i] = value;
  return Tensor(t.shape(), std::move(v));
}

inline double Norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double RelativeError(const std::vector<double>& got,
                            const std::vector<double>& want) {
  std::vector<double> diff(got.size());
  for (std::size_t i = 0; i < got.size(); ++i) diff[i] = got[i] - want[i];
  const double scale = std::max({Norm(got), Norm(want), 1e-12});
  return Norm(diff) / scale;
}

// Central differences of a scalar-valued eager function, per input tensor.
inline std::vector<std::vector<double>> CentralDifferences(
    const std::function<double(const std::vector<Tensor>&)>& f,
    const std::vector<Tensor>& inputs, double step) {
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    std::vector<double> g(inputs[k].size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      std::vector<Tensor> plus = inputs, minus = inputs;
      plus[k] = WithValue(inputs[k], i, inputs[k][i] + step);
      minus[k] = WithValue(inputs[k], i, inputs[k][i] - step);
      g[i] = (f(plus) - f(minus)) / (2.0 * step);
    }
    out.push_back(std::move(g));
  }
  return out;
}

struct GradCheckResult {
  double first_order = 0.0;   // max relative error over inputs
  double second_order = 0.0;  // max relative error of a Hessian-vector product
};

// Projects F's output onto fixed random weights, then compares reverse-mode
// gradients with central differences. When `second_order` is set, also
// compares d/dx <grad F, v> (create_graph) against differences of the
// first-order AD gradient.
inline GradCheckResult CheckGradient(const TensorFn& fn,
                                     const std::vector<Tensor>& inputs,
                                     std::mt19937_64& rng, bool second_order,
                                     double step = 1e-5) {
  const Tensor probe_out = fn(inputs);
  const Tensor weights = RandomTensor(rng, probe_out.shape());
  auto scalar = [&](const std::vector<Tensor>& xs) {
    return ad::Dot(fn(xs), weights).item();
  };
  auto ad_grad = [&](const std::vector<Tensor>& xs, bool create_graph,
                     ad::Tape& tape, std::vector<Tensor>& vars) {
    vars.clear();
    for (const Tensor& x : xs) vars.push_back(tape.Variable(x));
    Tensor s = ad::Dot(fn(vars), weights);
    return ad::Grad(s, vars, create_graph);
  };

  GradCheckResult result;
  {
    ad::Tape tape;
    std::vector<Tensor> vars;
    const auto grads = ad_grad(inputs, false, tape, vars);
    const auto fd = CentralDifferences(scalar, inputs, step);
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      result.first_order =
          std::max(result.first_order, RelativeError(grads[k].values(), fd[k]));
    }
  }
  if (!second_order) return result;

  std::vector<Tensor> directions;
  for (const Tensor& x : inputs) directions.push_back(RandomTensor(rng, x.shape()));
  // h(x) = sum_k <dF/dx_k, v_k>, evaluated with first-order AD only.
  auto directional = [&](const std::vector<Tensor>& xs) {
    ad::Tape tape;
    std::vector<Tensor> vars;
    const auto grads = ad_grad(xs, false, tape, vars);
    double h = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      h += ad::Dot(grads[k], directions[k]).item();
    }
    return h;
  };
  ad::Tape tape;
  std::vector<Tensor> vars;
  const auto grads = ad_grad(inputs, true, tape, vars);
  Tensor h = Tensor::Scalar(0.0);
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    h = ad::Add(h, ad::Dot(grads[k], directions[k]));
  }
  const auto fd = CentralDifferences(directional, inputs, step);
  std::vector<Tensor> hv;
  if (h.attached()) {
    hv = ad::Grad(h, vars);
  } else {
    // Gradient is constant in the inputs: second derivative is zero.
    for (const Tensor& x : inputs) hv.push_back(Tensor::Zeros(x.shape()));
  }
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const double fd_norm = Norm(fd[k]);
    const double err = fd_norm < 1e-7 && Norm(hv[k].values()) < 1e-7
                           ? 0.0
                           : RelativeError(hv[k].values(), fd[k]);
    result.second_order = std::max(result.second_order, err);
  }
  return result;
}

}  // namespace gradguard::testing

#endif  // GRADGUARD_TESTS_SUPPORT_GRADCHECK_HPP_
