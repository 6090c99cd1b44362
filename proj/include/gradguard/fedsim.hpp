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

#ifndef GRADGUARD_FEDSIM_HPP_
#define GRADGUARD_FEDSIM_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gradguard/attack.hpp"
#include "gradguard/dataio.hpp"
#include "gradguard/encryption.hpp"
#include "gradguard/evalmetrics.hpp"
#include "gradguard/models.hpp"
#include "gradguard/significance.hpp"

namespace gradguard::fedsim {

struct Client {
  std::size_t id = 0;
  std::vector<dataio::LabeledImage> shard;
  double weight = 0.0;
};

struct EncryptionPolicy {
  significance::MetricSpec metric;
  double ratio = 0.0;
};

struct FedRound {
  std::vector<Client> clients;
  models::ParamVector global;
  int local_epochs = 1;
  double learning_rate = 0.1;
  EncryptionPolicy policy;
};

// What one client puts on the wire.
struct Transmission {
  std::size_t client = 0;
  std::vector<double> plaintext;  // zero on encrypted coordinates
  encryption::MockCiphertext ciphertext;  // zero on plaintext coordinates
};

struct RoundResult {
  models::ParamVector new_global;
  encryption::EncryptionMask mask;
  std::vector<Transmission> transmissions;
  // One per client: its first local gradient as the eavesdropper sees it.
  std::vector<encryption::AttackerView> intercepts;
};

inline constexpr const char* kRoundKey = "fedavg-round";

// Each client runs local_epochs passes of single-sample gradient steps over
// its shard and sends its local model split by one round-wide mask (top-s of
// the weight-averaged client scores at the global model). The server adds
// plaintext parts and ciphertexts in client order, decrypts, and reassembles.
// threads > 1 computes the clients concurrently; the aggregate is unchanged.
RoundResult RunRound(const models::Model& model, const FedRound& round,
                     std::uint64_t seed, int threads = 1);

struct InterceptOutcome {
  std::size_t client = 0;
  std::string status;  // "ok", "infeasible" or "error"
  std::string message;
  std::optional<attack::ReconstructionResult> reconstruction;
  std::optional<evalmetrics::QualityReport> quality;
};

// Runs the attack on every intercept against the first image of the matching
// client's shard.
std::vector<InterceptOutcome> AdversaryPipeline(
    const models::Model& model, const FedRound& round,
    const RoundResult& result, const attack::AttackConfig& cfg);

void WriteTranscriptJson(std::ostream& out, const RoundResult& result);

}  // namespace gradguard::fedsim

#endif  // GRADGUARD_FEDSIM_HPP_
