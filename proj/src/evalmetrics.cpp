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

#include "gradguard/evalmetrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace gradguard::evalmetrics {

namespace {

constexpr std::size_t kWindow = 8;

void CheckSameShape(const ad::Tensor& a, const ad::Tensor& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument("image shapes differ: " +
                                ad::ShapeToString(a.shape()) + " vs " +
                                ad::ShapeToString(b.shape()));
  }
  if (a.size() == 0) throw std::invalid_argument("empty image");
}

struct Gray {
  std::size_t height, width;
  std::vector<double> px;
};

Gray ToGray(const ad::Tensor& t) {
  const auto& s = t.shape();
  if (s.size() == 2) return {s[0], s[1], t.values()};
  if (s.size() != 3) {
    throw std::invalid_argument("SSIM expects [C,H,W] or [H,W], got " +
                                ad::ShapeToString(s));
  }
  const std::size_t c = s[0], hw = s[1] * s[2];
  Gray g{s[1], s[2], std::vector<double>(hw, 0.0)};
  const auto v = t.data();
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t i = 0; i < hw; ++i) g.px[i] += v[k * hw + i];
  }
  for (double& p : g.px) p /= static_cast<double>(c);
  return g;
}

double WindowSsim(const Gray& a, const Gray& b, std::size_t r0, std::size_t c0,
                  std::size_t rows, std::size_t cols, double c1, double c2) {
  const double n = static_cast<double>(rows * cols);
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = r0; i < r0 + rows; ++i) {
    for (std::size_t j = c0; j < c0 + cols; ++j) {
      ma += a.px[i * a.width + j];
      mb += b.px[i * b.width + j];
    }
  }
  ma /= n;
  mb /= n;
  double va = 0.0, vb = 0.0, cov = 0.0;
  for (std::size_t i = r0; i < r0 + rows; ++i) {
    for (std::size_t j = c0; j < c0 + cols; ++j) {
      const double da = a.px[i * a.width + j] - ma;
      const double db = b.px[i * b.width + j] - mb;
      va += da * da;
      vb += db * db;
      cov += da * db;
    }
  }
  va /= n;
  vb /= n;
  cov /= n;
  return ((2 * ma * mb + c1) * (2 * cov + c2)) /
         ((ma * ma + mb * mb + c1) * (va + vb + c2));
}

}  // namespace

double Mse(const ad::Tensor& a, const ad::Tensor& b) {
  CheckSameShape(a, b);
  const auto x = a.data();
  const auto y = b.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc / static_cast<double>(x.size());
}

double PsnrFromMse(double mse, double peak) {
  if (mse <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

double Psnr(const ad::Tensor& a, const ad::Tensor& b, double peak) {
  return PsnrFromMse(Mse(a, b), peak);
}

double Ssim(const ad::Tensor& a, const ad::Tensor& b, double peak) {
  CheckSameShape(a, b);
  const Gray ga = ToGray(a);
  const Gray gb = ToGray(b);
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);
  if (ga.height < kWindow || ga.width < kWindow) {
    return WindowSsim(ga, gb, 0, 0, ga.height, ga.width, c1, c2);
  }
  double total = 0.0;
  std::size_t windows = 0;
  for (std::size_t r = 0; r + kWindow <= ga.height; r += kWindow) {
    for (std::size_t c = 0; c + kWindow <= ga.width; c += kWindow) {
      total += WindowSsim(ga, gb, r, c, kWindow, kWindow, c1, c2);
      ++windows;
    }
  }
  return total / static_cast<double>(windows);
}

QualityReport Evaluate(const ad::Tensor& reconstruction,
                       const ad::Tensor& ground_truth) {
  QualityReport q;
  q.mse = Mse(reconstruction, ground_truth);
  q.psnr = PsnrFromMse(q.mse);
  q.ssim = Ssim(reconstruction, ground_truth);
  return q;
}

}  // namespace gradguard::evalmetrics
