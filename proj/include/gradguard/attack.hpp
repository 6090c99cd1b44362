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

#ifndef GRADGUARD_ATTACK_HPP_
#define GRADGUARD_ATTACK_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradguard/encryption.hpp"
#include "gradguard/models.hpp"

namespace gradguard::attack {

enum class Matching { kL2, kCosine };

const char* MatchingName(Matching matching);
Matching ParseMatching(const std::string& name);

struct AttackConfig {
  Matching matching = Matching::kCosine;
  double alpha_tv = 1e-2;
  int iterations = 2000;
  int restarts = 5;
  double step_size = 0.1;
  bool signed_gradients = true;
  // Multiply the step by 0.1 at 3/8, 5/8 and 7/8 of the iterations.
  bool decay_schedule = true;
  std::uint64_t seed = 0;

  void Validate() const;
};

// The view leaves nothing to match against.
class AttackInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AbortedRestart {
  int restart = 0;
  int iteration = 0;
  std::string reason;
};

struct ReconstructionResult {
  ad::Tensor x_star;
  double final_rec_loss = 0.0;
  std::vector<double> loss_trace;  // matching loss at every iteration
  int restart_index = 0;
  double wall_seconds = 0.0;
  std::vector<AbortedRestart> aborted;
};

// Gradient-matching objective over the coordinates the view exposes.
// g_candidate may be recorded on a tape. Throws AttackInfeasible when the view
// has no usable coordinates.
ad::Tensor MatchingLoss(const encryption::AttackerView& view,
                        const ad::Tensor& g_candidate, Matching matching);
double MatchingLoss(const encryption::AttackerView& view,
                    std::span<const double> g_candidate, Matching matching);

// Anisotropic total variation of a [C,H,W] image.
ad::Tensor TotalVariation(const ad::Tensor& x);

// Stream seed for one restart of one sample.
std::uint64_t RestartSeed(std::uint64_t seed, std::uint64_t restart,
                          std::uint64_t sample);

ReconstructionResult Invert(const models::Model& model,
                            const models::ParamVector& params,
                            const ad::Tensor& y0,
                            const encryption::AttackerView& view,
                            const AttackConfig& cfg,
                            std::uint64_t sample_index = 0);

// "iter,rec_loss" followed by one row per iteration, 17 significant digits.
void ExportTrace(std::ostream& out, const ReconstructionResult& result);
std::vector<double> ImportTrace(std::istream& in);

}  // namespace gradguard::attack

#endif  // GRADGUARD_ATTACK_HPP_
