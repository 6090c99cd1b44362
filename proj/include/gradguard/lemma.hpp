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

#ifndef GRADGUARD_LEMMA_HPP_
#define GRADGUARD_LEMMA_HPP_

#include <span>
#include <string>
#include <vector>

#include "gradguard/models.hpp"

namespace gradguard::lemma {

// Compares log f(x, theta)[k0] - log f(x, 0)[k0] with the line integral
// -int_0^1 g(x, t theta) . theta dt and with its endpoint value
// -g(x, theta) . theta.
struct LemmaReport {
  std::string model_id;
  std::vector<double> x;
  std::size_t label = 0;
  int panels = 0;
  double theta_scale = 1.0;
  double exact_lhs = 0.0;
  double quadrature_rhs = 0.0;
  double endpoint_rhs = 0.0;
  double abs_gap_quadrature = 0.0;
  double abs_gap_endpoint = 0.0;
};

// Composite Simpson over `panels` (even, >= 2) sub-intervals of [0,1].
LemmaReport VerifyIntegral(const models::Model& model,
                           const models::ParamVector& params,
                           const ad::Tensor& x, const ad::Tensor& y,
                           int panels);

// Same report with theta multiplied by theta_scale (> 0).
LemmaReport VerifyLemmaApprox(const models::Model& model,
                              const models::ParamVector& params,
                              const ad::Tensor& x, const ad::Tensor& y,
                              double theta_scale, int panels = 256);

// Least-squares slope of log(gap) against log(panels).
double ConvergenceSlope(std::span<const int> panels,
                        std::span<const double> gaps);

}  // namespace gradguard::lemma

#endif  // GRADGUARD_LEMMA_HPP_
