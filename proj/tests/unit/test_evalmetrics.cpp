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

#include "doctest.h"
#include "gradguard/evalmetrics.hpp"
#include "support/gradcheck.hpp"

namespace ev = gradguard::evalmetrics;
using gradguard::ad::Tensor;
using gradguard::testing::RandomTensor;

TEST_CASE("mse") {
  std::mt19937_64 rng(1);
  const Tensor a = RandomTensor(rng, {8, 8}, 0.0, 1.0);
  const Tensor b = RandomTensor(rng, {8, 8}, 0.0, 1.0);
  CHECK(ev::Mse(a, a) == 0.0);
  CHECK(ev::Mse(Tensor::Zeros({2, 3, 5}), Tensor::Full({2, 3, 5}, 1.0)) == 1.0);
  double oracle = 0.0;
  for (std::size_t i = 0; i < 64; ++i) oracle += (a[i] - b[i]) * (a[i] - b[i]);
  CHECK(ev::Mse(a, b) == doctest::Approx(oracle / 64).epsilon(1e-14));
  CHECK(ev::Mse(a, b) == ev::Mse(b, a));
  CHECK_THROWS_AS(ev::Mse(a, Tensor::Zeros({4, 16})), std::invalid_argument);
}

TEST_CASE("psnr") {
  CHECK(ev::PsnrFromMse(0.01) == doctest::Approx(20.0).epsilon(1e-14));
  CHECK(std::isinf(ev::PsnrFromMse(0.0)));
  std::mt19937_64 rng(2);
  const Tensor a = RandomTensor(rng, {3, 4, 4}, 0.0, 1.0);
  const Tensor b = RandomTensor(rng, {3, 4, 4}, 0.0, 1.0);
  CHECK(ev::Psnr(a, b) == doctest::Approx(10 * std::log10(1.0 / ev::Mse(a, b))));
  CHECK(ev::PsnrFromMse(0.02) < ev::PsnrFromMse(0.01));
}

TEST_CASE("ssim") {
  std::mt19937_64 rng(3);
  const Tensor a = RandomTensor(rng, {3, 16, 16}, 0.0, 1.0);
  CHECK(ev::Ssim(a, a) == doctest::Approx(1.0).epsilon(1e-14));

  // Checkerboard of 0/1 against its negative.
  std::vector<double> board(16 * 16), negative(16 * 16);
  for (std::size_t i = 0; i < 16; ++i) {
    for (std::size_t j = 0; j < 16; ++j) {
      board[i * 16 + j] = static_cast<double>((i + j) % 2);
      negative[i * 16 + j] = 1.0 - board[i * 16 + j];
    }
  }
  CHECK(ev::Ssim(Tensor({1, 16, 16}, board), Tensor({1, 16, 16}, negative)) < 0.2);

  // Constant images at 0.2 and 0.6: variances vanish, so only luminance is left.
  const double c1 = 1e-4, c2 = 9e-4;
  const double expected = ((2 * 0.2 * 0.6 + c1) * c2) /
                          ((0.2 * 0.2 + 0.6 * 0.6 + c1) * c2);
  CHECK(ev::Ssim(Tensor::Full({1, 4, 4}, 0.2), Tensor::Full({1, 4, 4}, 0.6)) ==
        doctest::Approx(expected).epsilon(1e-14));
  CHECK(ev::Ssim(Tensor::Full({1, 16, 16}, 0.2), Tensor::Full({1, 16, 16}, 0.6)) ==
        doctest::Approx(expected).epsilon(1e-14));
}
