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

#include "gradguard/lemma.hpp"

#include <cmath>
#include <stdexcept>

namespace gradguard::lemma {

namespace {

double LogProbability(const models::Model& model, const models::ParamVector& p,
                      const ad::Tensor& x, const ad::Tensor& y) {
  return -model.Loss(p.AsTensor(), x, y).item();
}

// g(x, t theta) . theta
double Integrand(const models::Model& model, const models::ParamVector& theta,
                 const ad::Tensor& x, const ad::Tensor& y, double t) {
  const auto g = model.Gradient(theta.Scaled(t), x, y);
  double dot = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) dot += g.values[i] * theta.theta[i];
  return dot;
}

}  // namespace

LemmaReport VerifyIntegral(const models::Model& model,
                           const models::ParamVector& params,
                           const ad::Tensor& x, const ad::Tensor& y,
                           int panels) {
  if (panels < 2 || panels % 2 != 0) {
    throw std::invalid_argument("Simpson quadrature needs an even panel count >= 2");
  }
  LemmaReport r;
  r.model_id = model.spec().name;
  r.x = x.values();
  r.label = models::CheckOneHot(y, model.num_classes());
  r.panels = panels;
  r.exact_lhs = LogProbability(model, params, x, y) -
                LogProbability(model, model.Zeros(), x, y);

  const double h = 1.0 / panels;
  double sum = 0.0;
  double endpoint = 0.0;
  for (int k = 0; k <= panels; ++k) {
    const double value = Integrand(model, params, x, y, k * h);
    const double weight = (k == 0 || k == panels) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    sum += weight * value;
    if (k == panels) endpoint = value;
  }
  r.quadrature_rhs = -sum * h / 3.0;
  r.endpoint_rhs = -endpoint;
  r.abs_gap_quadrature = std::fabs(r.exact_lhs - r.quadrature_rhs);
  r.abs_gap_endpoint = std::fabs(r.exact_lhs - r.endpoint_rhs);
  return r;
}

LemmaReport VerifyLemmaApprox(const models::Model& model,
                              const models::ParamVector& params,
                              const ad::Tensor& x, const ad::Tensor& y,
                              double theta_scale, int panels) {
  if (!(theta_scale > 0.0)) throw std::invalid_argument("theta_scale must be > 0");
  LemmaReport r = VerifyIntegral(model, params.Scaled(theta_scale), x, y, panels);
  r.theta_scale = theta_scale;
  return r;
}

double ConvergenceSlope(std::span<const int> panels,
                        std::span<const double> gaps) {
  if (panels.size() != gaps.size() || panels.size() < 2) {
    throw std::invalid_argument("slope needs at least two matching points");
  }
  const double n = static_cast<double>(panels.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const double lx = std::log(static_cast<double>(panels[i]));
    const double ly = std::log(gaps[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace gradguard::lemma
