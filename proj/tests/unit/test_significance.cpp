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

#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "gradguard/autodiff/ops.hpp"
#include "gradguard/encryption.hpp"
#include "gradguard/significance.hpp"
#include "support/gradcheck.hpp"

namespace ad = gradguard::ad;
namespace models = gradguard::models;
namespace sig = gradguard::significance;
using ad::Tensor;

namespace {

std::vector<double> RandomVector(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

// L = sum(theta * x^power), elementwise.
sig::LossFn Monomial(double power) {
  return [power](const Tensor& theta, const Tensor& x) {
    return ad::Dot(theta, ad::Pow(x, power));
  };
}

}  // namespace

TEST_CASE("magnitude metrics") {
  CHECK(sig::ProdSig(std::vector<double>{1, -2, 0}, std::vector<double>{3, 1, 5}).scores ==
        std::vector<double>{3, 2, 0});
  CHECK(sig::ProdSig(std::vector<double>{1, 2}, std::vector<double>{0, 0}).scores ==
        std::vector<double>{0, 0});
  CHECK(sig::GradMagnitude(std::vector<double>{-3, 0, 2}).scores ==
        std::vector<double>{3, 0, 2});
  CHECK(sig::ParamMagnitude(std::vector<double>{-1, 4}).scores == std::vector<double>{1, 4});
  CHECK_THROWS_AS(sig::ProdSig(std::vector<double>{1}, std::vector<double>{1, 2}),
                  std::invalid_argument);

  std::mt19937_64 rng(1);
  const auto g = RandomVector(rng, 10);
  const auto theta = RandomVector(rng, 10);
  const auto prod = sig::ProdSig(g, theta);
  const auto mag = sig::GradMagnitude(g);
  const auto par = sig::ParamMagnitude(theta);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(prod.scores[i] == std::fabs(g[i] * theta[i]));
    CHECK(mag.scores[i] == std::fabs(g[i]));
    CHECK(par.scores[i] == std::fabs(theta[i]));
  }
}

TEST_CASE("scaling the gradient keeps the selected set") {
  std::mt19937_64 rng(2);
  const auto g = RandomVector(rng, 40);
  const auto theta = RandomVector(rng, 40);
  std::vector<double> scaled(g);
  for (double& v : scaled) v *= -4.0;
  const auto a = sig::ProdSig(g, theta);
  const auto b = sig::ProdSig(scaled, theta);
  for (std::size_t i = 0; i < 40; ++i) {
    CHECK(b.scores[i] == doctest::Approx(4.0 * a.scores[i]).epsilon(1e-15));
  }
  namespace enc = gradguard::encryption;
  CHECK(enc::TopSMask(a.scores, 0.3).indices == enc::TopSMask(b.scores, 0.3).indices);
  CHECK(enc::TopSMask(sig::GradMagnitude(g).scores, 0.3).indices ==
        enc::TopSMask(sig::GradMagnitude(scaled).scores, 0.3).indices);
}

TEST_CASE("sensitivity on analytic models") {
  const Tensor x3 = Tensor::Vector({3.0});
  const std::vector<double> theta{0.7};
  CHECK(sig::SensitivityExact(Monomial(1), theta, x3).scores[0] ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sig::SensitivityExact(Monomial(2), theta, x3).scores[0] ==
        doctest::Approx(6.0).epsilon(1e-15));
  CHECK(sig::SensitivityDiscrete(Monomial(1), theta, x3, 0.01).scores[0] ==
        doctest::Approx(1.0).epsilon(1e-12));
  const auto d = sig::SensitivityDiscrete(Monomial(2), theta, x3, 1e-3);
  CHECK(std::fabs(d.scores[0] - 6.0) < 1e-5);
  CHECK(d.gradient_evaluations == 2);
}

TEST_CASE("exact and discrete sensitivity agree on a small net") {
  std::mt19937_64 rng(3);
  const models::Model m(models::Mlp({6}, 8, 3));
  const auto p = m.Build(4);
  const Tensor x = gradguard::testing::RandomTensor(rng, {6}, 0.0, 1.0);
  const Tensor y = models::OneHot(2, 3);
  const auto exact = sig::SensitivityExact(m, p, x, y);
  const auto discrete = sig::SensitivityDiscrete(m, p, x, y, 1e-4);
  CHECK(discrete.gradient_evaluations == 12);
  CHECK(gradguard::testing::RelativeError(exact.scores, discrete.scores) < 1e-3);
  CHECK(sig::SensitivityExact(m, p, x, y).scores == exact.scores);
}

TEST_CASE("discrete sensitivity converges at second order") {
  std::mt19937_64 rng(4);
  const models::Model m(models::Mlp({3}, 4, 2));
  const auto p = m.Build(5);
  const Tensor x = gradguard::testing::RandomTensor(rng, {3}, 0.0, 1.0);
  const Tensor y = models::OneHot(0, 2);
  const auto exact = sig::SensitivityExact(m, p, x, y);
  const double e1 = gradguard::testing::RelativeError(
      exact.scores, sig::SensitivityDiscrete(m, p, x, y, 1e-2).scores);
  const double e2 = gradguard::testing::RelativeError(
      exact.scores, sig::SensitivityDiscrete(m, p, x, y, 5e-3).scores);
  CHECK(e2 < e1);
  CHECK(std::log2(e1 / e2) > 1.8);
}

TEST_CASE("sensitivity budget") {
  const models::Model m(models::Mlp({6}, 8, 3));
  const auto p = m.Build(1);
  CHECK_THROWS_AS(sig::SensitivityExact(m, p, Tensor::Zeros({6}), models::OneHot(0, 3), 100),
                  sig::BudgetExceeded);
}

TEST_CASE("layer slices") {
  const models::Model two(models::ModelSpec{
      "two", {4}, 2,
      {models::DenseLayer{4, 3}, models::ActivationLayer{}, models::DenseLayer{3, 2}}});
  const auto first = sig::LayerSlice(*two.layout(), [](std::size_t p) { return p == 0; });
  for (std::size_t i = 0; i < two.num_params(); ++i) {
    CHECK(first.scores[i] == (i < 15 ? 1.0 : 0.0));
  }
  const auto all = sig::LayerSlice(*two.layout(), [](std::size_t) { return true; });
  for (double v : all.scores) CHECK(v == 1.0);
  CHECK_THROWS_AS(sig::LayerSlice(*two.layout(), [](std::size_t) { return false; }),
                  std::invalid_argument);
}

TEST_CASE("one-fifth partition") {
  // Oracle: deal layers to groups one at a time, then lay groups out in order.
  for (std::size_t layers = 5; layers <= 23; ++layers) {
    std::vector<std::size_t> sizes(5, 0);
    for (std::size_t l = 0; l < layers; ++l) ++sizes[l % 5];
    std::size_t begin = 0;
    for (int part = 1; part <= 5; ++part) {
      std::vector<std::size_t> expected(sizes[part - 1]);
      for (std::size_t k = 0; k < expected.size(); ++k) expected[k] = begin + k;
      CHECK(sig::OneFifthLayers(layers, part) == expected);
      begin += sizes[part - 1];
    }
  }
  CHECK_THROWS_AS(sig::OneFifthLayers(3, 5), std::invalid_argument);
  CHECK_THROWS_AS(sig::OneFifthLayers(10, 0), std::invalid_argument);

  std::vector<models::Layer> layers;
  for (int i = 0; i < 9; ++i) {
    layers.push_back(models::DenseLayer{4, 4});
    layers.push_back(models::ActivationLayer{});
  }
  layers.push_back(models::DenseLayer{4, 3});
  const models::Model deep(models::ModelSpec{"deep", {4}, 3, layers});
  const auto s = sig::OneFifth(*deep.layout(), 2);
  const auto [lo, mid] = deep.layout()->LayerSpan(2);
  const auto [mid2, hi] = deep.layout()->LayerSpan(3);
  CHECK(mid == mid2);
  for (std::size_t i = 0; i < deep.num_params(); ++i) {
    CHECK(s.scores[i] == ((i >= lo && i < hi) ? 1.0 : 0.0));
  }
}

TEST_CASE("timing and dumps") {
  std::mt19937_64 rng(6);
  const auto g = RandomVector(rng, 100000);
  const auto theta = RandomVector(rng, 100000);
  const auto timed = sig::Timed([&] { return sig::ProdSig(g, theta); });
  CHECK(timed.compute_seconds > 0.0);
  CHECK(timed.compute_seconds < 0.1);
  const auto grad = sig::Timed([&] { return sig::GradMagnitude(g); });
  CHECK(sig::ReportedCost(grad) == 0.0);
  CHECK(sig::ReportedCost(timed) == timed.compute_seconds);

  const auto small = sig::ProdSig(std::vector<double>{0.1, -2}, std::vector<double>{3, 1});
  std::ostringstream csv;
  sig::WriteScoresCsv(csv, small);
  CHECK(csv.str() == "index,score\n0,0.30000000000000004\n1,2\n");
  std::stringstream bin;
  sig::WriteScoresBinary(bin, small);
  CHECK(sig::ReadScoresBinary(bin) == small.scores);
}

TEST_CASE("metric names") {
  for (auto m : {sig::Metric::kSens, sig::Metric::kSensDiscrete, sig::Metric::kProdSig,
                 sig::Metric::kGrad, sig::Metric::kParam, sig::Metric::kLayerSlice}) {
    CHECK(sig::ParseMetric(sig::MetricName(m)) == m);
  }
  CHECK_THROWS_AS(sig::ParseMetric("Attn"), std::invalid_argument);
}

TEST_CASE("metric specs") {
  CHECK(sig::MetricSpec::Parse("OneFifth-3").part == 3);
  CHECK(sig::MetricSpec::Parse("OneFifth-3").Name() == "OneFifth-3");
  CHECK(sig::MetricSpec::Parse("ProdSig").metric == sig::Metric::kProdSig);
  CHECK_THROWS_AS(sig::MetricSpec::Parse("OneFifth-6"), std::invalid_argument);
  CHECK_THROWS_AS(sig::MetricSpec::Parse("LayerSlice"), std::invalid_argument);

  const models::Model m(models::Mlp({3}, 4, 2));
  const auto p = m.Build(1);
  const Tensor x = Tensor::Vector({0.1, 0.5, 0.9});
  const Tensor y = models::OneHot(1, 2);
  const auto g = m.Gradient(p, x, y).values;
  const auto prod = sig::ComputeScores(sig::MetricSpec::Parse("ProdSig"), m, p, x, y, g);
  CHECK(prod.scores == sig::ProdSig(g, p.theta).scores);
  const auto slice = sig::ComputeScores(sig::MetricSpec::Parse("OneFifth-1"), m, p, x, y, g);
  CHECK(slice.scores == sig::OneFifth(*m.layout(), 1).scores);
  CHECK_THROWS_AS(sig::ComputeScores(sig::MetricSpec::Parse("OneFifth-3"), m, p, x, y, g),
                  std::invalid_argument);
}
