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

#ifndef GRADGUARD_SIGNIFICANCE_HPP_
#define GRADGUARD_SIGNIFICANCE_HPP_

#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradguard/models.hpp"

namespace gradguard::significance {

enum class Metric { kSens, kSensDiscrete, kProdSig, kGrad, kParam, kLayerSlice };

const char* MetricName(Metric metric);
Metric ParseMetric(const std::string& name);

struct SignificanceScores {
  std::vector<double> scores;
  Metric metric = Metric::kGrad;
  double compute_seconds = 0.0;
  std::size_t gradient_evaluations = 0;

  std::size_t size() const { return scores.size(); }
};

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultSensitivityBudget = 5'000'000;

// |g[i] * theta[i]|
SignificanceScores ProdSig(std::span<const double> g,
                           std::span<const double> theta);
SignificanceScores GradMagnitude(std::span<const double> g);
SignificanceScores ParamMagnitude(std::span<const double> theta);

// scores[i] = mean_j |d g[i] / d x[j]|, one reverse pass per input coordinate
// through the twice-differentiated graph. Throws BudgetExceeded when
// m * n exceeds the budget.
// Scalar loss of (theta [m], x); both may be recorded on a tape.
using LossFn = std::function<ad::Tensor(const ad::Tensor&, const ad::Tensor&)>;

SignificanceScores SensitivityExact(
    const LossFn& loss, std::span<const double> theta, const ad::Tensor& x,
    std::size_t budget = kDefaultSensitivityBudget);
SignificanceScores SensitivityExact(
    const models::Model& model, const models::ParamVector& params,
    const ad::Tensor& x, const ad::Tensor& y,
    std::size_t budget = kDefaultSensitivityBudget);

// Central differences of the gradient along each input coordinate, 2n
// gradient evaluations.
SignificanceScores SensitivityDiscrete(const LossFn& loss,
                                       std::span<const double> theta,
                                       const ad::Tensor& x, double step);
SignificanceScores SensitivityDiscrete(const models::Model& model,
                                       const models::ParamVector& params,
                                       const ad::Tensor& x, const ad::Tensor& y,
                                       double step);

// 1 on every parameter of a selected parameterized layer, else 0.
SignificanceScores LayerSlice(const models::ParamLayout& layout,
                              const std::function<bool(std::size_t)>& selector);

// Parameterized layers split into 5 contiguous groups, sizes as equal as
// possible with earlier groups larger. part is 1-based.
std::vector<std::size_t> OneFifthLayers(std::size_t num_layers, int part);
SignificanceScores OneFifth(const models::ParamLayout& layout, int part);

template <typename F>
SignificanceScores Timed(F&& compute) {
  const auto start = std::chrono::steady_clock::now();
  SignificanceScores s = compute();
  s.compute_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return s;
}

// A metric as named in configs: "Sens", "SensDiscrete", "ProdSig", "Grad",
// "Param" or "OneFifth-1" .. "OneFifth-5".
struct MetricSpec {
  Metric metric = Metric::kGrad;
  int part = 0;  // OneFifth group for kLayerSlice
  double discrete_step = 1e-3;
  std::size_t budget = kDefaultSensitivityBudget;

  std::string Name() const;
  static MetricSpec Parse(const std::string& name);
};

// Timed scores for one sample; g is the transmitted gradient at (x, params).
SignificanceScores ComputeScores(const MetricSpec& spec,
                                 const models::Model& model,
                                 const models::ParamVector& params,
                                 const ad::Tensor& x, const ad::Tensor& y,
                                 std::span<const double> g);

// Extra cost a metric adds on top of the gradient the client computes anyway.
double ReportedCost(const SignificanceScores& scores);

// "index,score" rows with 17 significant digits.
void WriteScoresCsv(std::ostream& out, const SignificanceScores& scores);
// 8-byte little-endian count followed by little-endian IEEE doubles.
void WriteScoresBinary(std::ostream& out, const SignificanceScores& scores);
std::vector<double> ReadScoresBinary(std::istream& in);

}  // namespace gradguard::significance

#endif  // GRADGUARD_SIGNIFICANCE_HPP_
