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

#ifndef GRADGUARD_EVALMETRICS_HPP_
#define GRADGUARD_EVALMETRICS_HPP_

#include "gradguard/autodiff/tensor.hpp"

namespace gradguard::evalmetrics {

struct QualityReport {
  double mse = 0.0;
  double psnr = 0.0;  // dB; +infinity when mse == 0
  double ssim = 1.0;

  bool operator==(const QualityReport&) const = default;
};

// Mean of squared differences; shapes must match.
double Mse(const ad::Tensor& a, const ad::Tensor& b);
double PsnrFromMse(double mse, double peak = 1.0);
double Psnr(const ad::Tensor& a, const ad::Tensor& b, double peak = 1.0);

// Mean SSIM over non-overlapping 8x8 windows of the channel-mean image
// ([C,H,W] or [H,W] input). Images smaller than a window use one global
// window. Population statistics; C1 = (0.01 peak)^2, C2 = (0.03 peak)^2.
double Ssim(const ad::Tensor& a, const ad::Tensor& b, double peak = 1.0);

QualityReport Evaluate(const ad::Tensor& reconstruction,
                       const ad::Tensor& ground_truth);

}  // namespace gradguard::evalmetrics

#endif  // GRADGUARD_EVALMETRICS_HPP_
