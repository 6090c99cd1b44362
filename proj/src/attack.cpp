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

#include "gradguard/attack.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "gradguard/autodiff/ops.hpp"

namespace gradguard::attack {

namespace {

std::uint64_t SplitMix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

const std::vector<std::size_t>& Usable(const encryption::AttackerView& view) {
  if (!view.usable || view.usable->empty()) {
    throw AttackInfeasible(
        "attacker view has no known gradient coordinates to match");
  }
  return *view.usable;
}

double LearningRate(const AttackConfig& cfg, int iteration) {
  if (!cfg.decay_schedule) return cfg.step_size;
  const double t = static_cast<double>(iteration) / cfg.iterations;
  double lr = cfg.step_size;
  for (double milestone : {3.0 / 8.0, 5.0 / 8.0, 7.0 / 8.0}) {
    if (t >= milestone) lr *= 0.1;
  }
  return lr;
}

struct Restart {
  std::vector<double> trace;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_x;
};

}  // namespace

const char* MatchingName(Matching matching) {
  return matching == Matching::kL2 ? "l2" : "cosine";
}

Matching ParseMatching(const std::string& name) {
  if (name == "l2") return Matching::kL2;
  if (name == "cosine") return Matching::kCosine;
  throw std::invalid_argument("unknown matching '" + name + "'");
}

void AttackConfig::Validate() const {
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  if (!(alpha_tv >= 0.0)) throw std::invalid_argument("alpha_tv must be >= 0");
  if (!(step_size > 0.0)) throw std::invalid_argument("step_size must be > 0");
}

ad::Tensor MatchingLoss(const encryption::AttackerView& view,
                        const ad::Tensor& g_candidate, Matching matching) {
  const auto& idx = Usable(view);
  if (g_candidate.size() != view.size()) {
    throw std::invalid_argument("candidate gradient length " +
                                std::to_string(g_candidate.size()) +
                                " does not match view length " +
                                std::to_string(view.size()));
  }
  const std::size_t k = idx.size();
  std::vector<double> target(k);
  for (std::size_t i = 0; i < k; ++i) target[i] = view.values[idx[i]];
  const ad::Tensor v = ad::Tensor::Vector(std::move(target));
  const ad::Tensor flat = ad::Flatten(g_candidate);
  const ad::Tensor u = k == view.size() ? flat : ad::Gather(flat, idx, {k});

  if (matching == Matching::kL2) {
    const ad::Tensor d = ad::Sub(u, v);
    return ad::Dot(d, d);
  }
  double vv = 0.0;
  for (double t : v.data()) vv += t * t;
  double uu = 0.0;
  for (double t : u.data()) uu += t * t;
  if (vv == 0.0 || uu == 0.0) return ad::Tensor::Scalar(1.0);
  const ad::Tensor inv_norm_u = ad::Pow(ad::Dot(u, u), -0.5);
  return ad::AddScalar(
      ad::Scale(ad::Mul(ad::Dot(u, v), inv_norm_u), -1.0 / std::sqrt(vv)), 1.0);
}

double MatchingLoss(const encryption::AttackerView& view,
                    std::span<const double> g_candidate, Matching matching) {
  return MatchingLoss(view,
                      ad::Tensor::Vector(std::vector<double>(
                          g_candidate.begin(), g_candidate.end())),
                      matching)
      .item();
}

ad::Tensor TotalVariation(const ad::Tensor& x) {
  const auto& s = x.shape();
  if (s.size() != 3) {
    throw std::invalid_argument("total variation expects [C,H,W], got " +
                                ad::ShapeToString(s));
  }
  const std::size_t c = s[0], h = s[1], w = s[2];
  std::vector<std::size_t> left, right, up, down;
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t j = 0; j < w; ++j) {
        const std::size_t at = (ch * h + i) * w + j;
        if (j + 1 < w) {
          left.push_back(at);
          right.push_back(at + 1);
        }
        if (i + 1 < h) {
          up.push_back(at);
          down.push_back(at + w);
        }
      }
    }
  }
  ad::Tensor total = ad::Tensor::Scalar(0.0);
  if (!left.empty()) {
    const std::size_t n = left.size();
    total = ad::Add(total, ad::Sum(ad::Abs(ad::Sub(ad::Gather(x, right, {n}),
                                                   ad::Gather(x, left, {n})))));
  }
  if (!up.empty()) {
    const std::size_t n = up.size();
    total = ad::Add(total, ad::Sum(ad::Abs(ad::Sub(ad::Gather(x, down, {n}),
                                                   ad::Gather(x, up, {n})))));
  }
  return total;
}

std::uint64_t RestartSeed(std::uint64_t seed, std::uint64_t restart,
                          std::uint64_t sample) {
  return SplitMix(SplitMix(SplitMix(seed) ^ restart) ^ (sample * 0x632be59bd9b4e019ULL));
}

ReconstructionResult Invert(const models::Model& model,
                            const models::ParamVector& params,
                            const ad::Tensor& y0,
                            const encryption::AttackerView& view,
                            const AttackConfig& cfg,
                            std::uint64_t sample_index) {
  cfg.Validate();
  if (view.size() != params.size()) {
    throw std::invalid_argument("attacker view length " +
                                std::to_string(view.size()) +
                                " does not match model with " +
                                std::to_string(params.size()) + " parameters");
  }
  (void)Usable(view);
  models::CheckOneHot(y0, model.num_classes());

  const auto start = std::chrono::steady_clock::now();
  const ad::Shape& shape = model.input_shape();
  const std::size_t n = ad::Numel(shape);
  const ad::Tensor theta0 = params.AsTensor();
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

  ReconstructionResult result;
  result.final_rec_loss = std::numeric_limits<double>::infinity();
  Restart winner;
  bool have_winner = false;

  for (int r = 0; r < cfg.restarts; ++r) {
    std::mt19937_64 rng(RestartSeed(cfg.seed, static_cast<std::uint64_t>(r),
                                    sample_index));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> x(n);
    for (double& v : x) v = normal(rng);
    std::vector<double> m1(n, 0.0), m2(n, 0.0);
    Restart run;
    run.trace.reserve(static_cast<std::size_t>(cfg.iterations));
    bool aborted = false;

    for (int it = 0; it < cfg.iterations; ++it) {
      double rec = 0.0;
      std::vector<double> grad;
      try {
        ad::Tape tape;
        const ad::Tensor xv = tape.Variable(ad::Tensor(shape, x));
        const ad::Tensor theta = tape.Variable(theta0);
        const ad::Tensor g = ad::Grad(model.Loss(theta, xv, y0), theta, true);
        const ad::Tensor match = MatchingLoss(view, g, cfg.matching);
        ad::Tensor total = match;
        if (cfg.alpha_tv > 0.0) {
          total = ad::Add(total, ad::Scale(TotalVariation(xv), cfg.alpha_tv));
        }
        rec = match.item();
        if (!std::isfinite(total.item())) {
          throw std::runtime_error("non-finite objective");
        }
        grad = ad::Grad(total, xv).values();
      } catch (const ad::NonFiniteError& e) {
        result.aborted.push_back({r, it, e.what()});
        aborted = true;
      } catch (const std::runtime_error& e) {
        result.aborted.push_back({r, it, e.what()});
        aborted = true;
      }
      if (aborted) break;

      run.trace.push_back(rec);
      if (rec < run.best) {
        run.best = rec;
        run.best_x = x;
      }
      const double lr = LearningRate(cfg, it);
      const double c1 = 1.0 - std::pow(kBeta1, it + 1);
      const double c2 = 1.0 - std::pow(kBeta2, it + 1);
      for (std::size_t i = 0; i < n; ++i) {
        const double d = cfg.signed_gradients
                             ? static_cast<double>((grad[i] > 0.0) - (grad[i] < 0.0))
                             : grad[i];
        m1[i] = kBeta1 * m1[i] + (1.0 - kBeta1) * d;
        m2[i] = kBeta2 * m2[i] + (1.0 - kBeta2) * d * d;
        x[i] -= lr * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + kEps);
        x[i] = std::clamp(x[i], 0.0, 1.0);
      }
    }
    if (aborted || run.trace.empty()) continue;
    if (!have_winner || run.best < winner.best) {
      winner = std::move(run);
      result.restart_index = r;
      have_winner = true;
    }
  }
  if (!have_winner) {
    throw std::runtime_error("every attack restart aborted; first reason: " +
                             result.aborted.front().reason);
  }
  result.x_star = ad::Tensor(shape, std::move(winner.best_x));
  result.final_rec_loss = winner.best;
  result.loss_trace = std::move(winner.trace);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

void ExportTrace(std::ostream& out, const ReconstructionResult& result) {
  out << "iter,rec_loss\n" << std::setprecision(17);
  for (std::size_t i = 0; i < result.loss_trace.size(); ++i) {
    out << i << ',' << result.loss_trace[i] << '\n';
  }
}

std::vector<double> ImportTrace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "iter,rec_loss") {
    throw std::runtime_error("trace CSV: missing 'iter,rec_loss' header");
  }
  std::vector<double> trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error("trace CSV: malformed row '" + line + "'");
    }
    const std::size_t iter = std::stoul(line.substr(0, comma));
    if (iter != trace.size()) {
      throw std::runtime_error("trace CSV: rows out of order at " + line);
    }
    trace.push_back(std::strtod(line.c_str() + comma + 1, nullptr));
  }
  return trace;
}

}  // namespace gradguard::attack
