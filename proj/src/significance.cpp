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

#include "gradguard/significance.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <istream>
#include <ostream>

#include "gradguard/autodiff/ops.hpp"

namespace gradguard::significance {

namespace {

void CheckScores(const SignificanceScores& s) {
  for (std::size_t i = 0; i < s.scores.size(); ++i) {
    if (!std::isfinite(s.scores[i])) {
      throw std::runtime_error(std::string(MetricName(s.metric)) +
                               ": non-finite score at index " +
                               std::to_string(i));
    }
  }
}

SignificanceScores Abs(std::span<const double> v, Metric metric) {
  SignificanceScores s{std::vector<double>(v.size()), metric};
  for (std::size_t i = 0; i < v.size(); ++i) s.scores[i] = std::fabs(v[i]);
  CheckScores(s);
  return s;
}

}  // namespace

const char* MetricName(Metric metric) {
  switch (metric) {
    case Metric::kSens: return "Sens";
    case Metric::kSensDiscrete: return "SensDiscrete";
    case Metric::kProdSig: return "ProdSig";
    case Metric::kGrad: return "Grad";
    case Metric::kParam: return "Param";
    case Metric::kLayerSlice: return "LayerSlice";
  }
  return "?";
}

Metric ParseMetric(const std::string& name) {
  for (Metric m : {Metric::kSens, Metric::kSensDiscrete, Metric::kProdSig,
                   Metric::kGrad, Metric::kParam, Metric::kLayerSlice}) {
    if (name == MetricName(m)) return m;
  }
  throw std::invalid_argument("unknown significance metric '" + name + "'");
}

SignificanceScores ProdSig(std::span<const double> g,
                           std::span<const double> theta) {
  if (g.size() != theta.size()) {
    throw std::invalid_argument("ProdSig: gradient length " +
                                std::to_string(g.size()) +
                                " != parameter length " +
                                std::to_string(theta.size()));
  }
  SignificanceScores s{std::vector<double>(g.size()), Metric::kProdSig};
  for (std::size_t i = 0; i < g.size(); ++i) s.scores[i] = std::fabs(g[i] * theta[i]);
  CheckScores(s);
  return s;
}

SignificanceScores GradMagnitude(std::span<const double> g) {
  return Abs(g, Metric::kGrad);
}

SignificanceScores ParamMagnitude(std::span<const double> theta) {
  return Abs(theta, Metric::kParam);
}

SignificanceScores SensitivityExact(const LossFn& loss,
                                    std::span<const double> theta_values,
                                    const ad::Tensor& x, std::size_t budget) {
  const std::size_t m = theta_values.size();
  const std::size_t n = x.size();
  if (m * n > budget) {
    throw BudgetExceeded("exact sensitivity needs " + std::to_string(m) +
                         " x " + std::to_string(n) +
                         " second-order entries, budget is " +
                         std::to_string(budget));
  }
  ad::Tape tape;
  const ad::Tensor xv = tape.Variable(x);
  const ad::Tensor theta = tape.Variable(ad::Tensor::Vector(
      std::vector<double>(theta_values.begin(), theta_values.end())));
  const ad::Tensor g = ad::Grad(loss(theta, xv), theta, true);
  // h(u) = J^T u with J = dg/dx; each coordinate of h is linear in u, so its
  // gradient with respect to u is one column of J.
  const ad::Tensor u = tape.Variable(ad::Tensor::Zeros({m}));
  const ad::Tensor h = ad::Flatten(ad::Grad(ad::Dot(g, u), xv, true));

  SignificanceScores s{std::vector<double>(m, 0.0), Metric::kSens};
  for (std::size_t j = 0; j < n; ++j) {
    const ad::Tensor column = ad::Grad(ad::Sum(ad::Slice(h, j, 1)), u);
    const auto c = column.data();
    for (std::size_t i = 0; i < m; ++i) s.scores[i] += std::fabs(c[i]);
  }
  for (double& v : s.scores) v /= static_cast<double>(n);
  s.gradient_evaluations = n;
  CheckScores(s);
  return s;
}

SignificanceScores SensitivityExact(const models::Model& model,
                                    const models::ParamVector& params,
                                    const ad::Tensor& x, const ad::Tensor& y,
                                    std::size_t budget) {
  return SensitivityExact(
      [&](const ad::Tensor& theta, const ad::Tensor& xv) {
        return model.Loss(theta, xv, y);
      },
      params.theta, x, budget);
}

SignificanceScores SensitivityDiscrete(const LossFn& loss,
                                       std::span<const double> theta,
                                       const ad::Tensor& x, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("step must be > 0");
  const std::size_t m = theta.size();
  const std::size_t n = x.size();
  const ad::Tensor theta_t =
      ad::Tensor::Vector(std::vector<double>(theta.begin(), theta.end()));
  auto gradient = [&](const ad::Tensor& xs) {
    ad::Tape tape;
    const ad::Tensor t = tape.Variable(theta_t);
    return ad::Grad(loss(t, xs), t).values();
  };
  SignificanceScores s{std::vector<double>(m, 0.0), Metric::kSensDiscrete};
  std::vector<double> shifted = x.values();
  for (std::size_t j = 0; j < n; ++j) {
    shifted[j] = x[j] + step;
    const auto plus = gradient(ad::Tensor(x.shape(), shifted));
    shifted[j] = x[j] - step;
    const auto minus = gradient(ad::Tensor(x.shape(), shifted));
    shifted[j] = x[j];
    for (std::size_t i = 0; i < m; ++i) {
      s.scores[i] += std::fabs((plus[i] - minus[i]) / (2.0 * step));
    }
    s.gradient_evaluations += 2;
  }
  for (double& v : s.scores) v /= static_cast<double>(n);
  CheckScores(s);
  return s;
}

SignificanceScores SensitivityDiscrete(const models::Model& model,
                                       const models::ParamVector& params,
                                       const ad::Tensor& x, const ad::Tensor& y,
                                       double step) {
  return SensitivityDiscrete(
      [&](const ad::Tensor& theta, const ad::Tensor& xv) {
        return model.Loss(theta, xv, y);
      },
      params.theta, x, step);
}

SignificanceScores LayerSlice(const models::ParamLayout& layout,
                              const std::function<bool(std::size_t)>& selector) {
  SignificanceScores s{std::vector<double>(layout.size(), 0.0),
                       Metric::kLayerSlice};
  bool any = false;
  for (std::size_t p = 0; p < layout.num_param_layers(); ++p) {
    if (!selector(p)) continue;
    any = true;
    const auto [begin, end] = layout.LayerSpan(p);
    for (std::size_t i = begin; i < end; ++i) s.scores[i] = 1.0;
  }
  if (!any) throw std::invalid_argument("layer selection is empty");
  return s;
}

std::vector<std::size_t> OneFifthLayers(std::size_t num_layers, int part) {
  if (part < 1 || part > 5) {
    throw std::invalid_argument("OneFifth part must be in 1..5");
  }
  const std::size_t base = num_layers / 5, extra = num_layers % 5;
  std::size_t begin = 0;
  for (int g = 1; g < part; ++g) begin += base + (static_cast<std::size_t>(g) <= extra ? 1 : 0);
  const std::size_t count = base + (static_cast<std::size_t>(part) <= extra ? 1 : 0);
  if (count == 0) {
    throw std::invalid_argument("OneFifth-" + std::to_string(part) +
                                " is empty for " + std::to_string(num_layers) +
                                " parameterized layers");
  }
  std::vector<std::size_t> layers(count);
  for (std::size_t k = 0; k < count; ++k) layers[k] = begin + k;
  return layers;
}

SignificanceScores OneFifth(const models::ParamLayout& layout, int part) {
  const auto layers = OneFifthLayers(layout.num_param_layers(), part);
  return LayerSlice(layout, [&](std::size_t p) {
    return p >= layers.front() && p <= layers.back();
  });
}

std::string MetricSpec::Name() const {
  if (metric == Metric::kLayerSlice) return "OneFifth-" + std::to_string(part);
  return MetricName(metric);
}

MetricSpec MetricSpec::Parse(const std::string& name) {
  MetricSpec spec;
  const std::string prefix = "OneFifth-";
  if (name.rfind(prefix, 0) == 0 && name.size() == prefix.size() + 1 &&
      name.back() >= '1' && name.back() <= '5') {
    spec.metric = Metric::kLayerSlice;
    spec.part = name.back() - '0';
    return spec;
  }
  spec.metric = ParseMetric(name);
  if (spec.metric == Metric::kLayerSlice) {
    throw std::invalid_argument("layer slices are named OneFifth-1 .. OneFifth-5");
  }
  return spec;
}

SignificanceScores ComputeScores(const MetricSpec& spec,
                                 const models::Model& model,
                                 const models::ParamVector& params,
                                 const ad::Tensor& x, const ad::Tensor& y,
                                 std::span<const double> g) {
  return Timed([&] {
    switch (spec.metric) {
      case Metric::kSens:
        return SensitivityExact(model, params, x, y, spec.budget);
      case Metric::kSensDiscrete:
        return SensitivityDiscrete(model, params, x, y, spec.discrete_step);
      case Metric::kProdSig:
        return ProdSig(g, params.theta);
      case Metric::kGrad:
        return GradMagnitude(g);
      case Metric::kParam:
        return ParamMagnitude(params.theta);
      case Metric::kLayerSlice:
        return OneFifth(*model.layout(), spec.part);
    }
    throw std::logic_error("unhandled metric");
  });
}

double ReportedCost(const SignificanceScores& scores) {
  return scores.metric == Metric::kGrad ? 0.0 : scores.compute_seconds;
}

void WriteScoresCsv(std::ostream& out, const SignificanceScores& scores) {
  out << "index,score\n" << std::setprecision(17);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out << i << ',' << scores.scores[i] << '\n';
  }
}

void WriteScoresBinary(std::ostream& out, const SignificanceScores& scores) {
  static_assert(std::endian::native == std::endian::little,
                "score dumps assume a little-endian host");
  const std::uint64_t count = scores.size();
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  out.write(reinterpret_cast<const char*>(scores.scores.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
  if (!out) throw std::runtime_error("failed to write score dump");
}

std::vector<double> ReadScoresBinary(std::istream& in) {
  std::uint64_t count = 0;
  if (!in.read(reinterpret_cast<char*>(&count), sizeof count)) {
    throw std::runtime_error("score dump: missing count header");
  }
  std::vector<double> v(count);
  if (!in.read(reinterpret_cast<char*>(v.data()),
               static_cast<std::streamsize>(count * sizeof(double)))) {
    throw std::runtime_error("score dump: truncated payload");
  }
  return v;
}

}  // namespace gradguard::significance
