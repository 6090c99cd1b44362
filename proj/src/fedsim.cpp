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

#include "gradguard/fedsim.hpp"

#include <cmath>
#include <future>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace gradguard::fedsim {

namespace {

struct LocalUpdate {
  std::vector<double> weights;
  std::vector<double> first_gradient;
  std::vector<double> scores;
};

LocalUpdate TrainLocally(const models::Model& model, const FedRound& round,
                         const Client& client) {
  if (client.shard.empty()) {
    throw std::invalid_argument("client " + std::to_string(client.id) +
                                " has no data");
  }
  LocalUpdate u;
  models::ParamVector local = round.global;
  const auto& first = client.shard.front();
  const ad::Tensor y0 = models::OneHot(first.label, model.num_classes());
  u.first_gradient = model.Gradient(round.global, first.pixels, y0).values;
  u.scores = significance::ComputeScores(round.policy.metric, model,
                                         round.global, first.pixels, y0,
                                         u.first_gradient)
                 .scores;
  for (int epoch = 0; epoch < round.local_epochs; ++epoch) {
    for (const auto& sample : client.shard) {
      const auto g = model.Gradient(
          local, sample.pixels, models::OneHot(sample.label, model.num_classes()));
      for (std::size_t i = 0; i < local.theta.size(); ++i) {
        local.theta[i] -= round.learning_rate * g.values[i];
      }
    }
  }
  u.weights = std::move(local.theta);
  return u;
}

}  // namespace

RoundResult RunRound(const models::Model& model, const FedRound& round,
                     std::uint64_t seed, int threads) {
  if (round.clients.empty()) throw std::invalid_argument("round has no clients");
  if (round.local_epochs < 1) throw std::invalid_argument("local_epochs must be >= 1");
  double total = 0.0;
  for (const auto& c : round.clients) {
    if (!(c.weight >= 0.0)) throw std::invalid_argument("client weights must be >= 0");
    total += c.weight;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("client weights sum to " + std::to_string(total) +
                                ", expected 1");
  }
  if (round.global.size() != model.num_params()) {
    throw std::invalid_argument("global parameters do not match the model");
  }

  const std::size_t n = round.clients.size();
  const std::size_t m = model.num_params();
  std::vector<LocalUpdate> updates(n);
  if (threads > 1) {
    std::vector<std::future<LocalUpdate>> pending;
    for (std::size_t start = 0; start < n; start += threads) {
      pending.clear();
      for (std::size_t c = start; c < std::min(n, start + threads); ++c) {
        pending.push_back(std::async(std::launch::async, TrainLocally,
                                     std::cref(model), std::cref(round),
                                     std::cref(round.clients[c])));
      }
      for (std::size_t k = 0; k < pending.size(); ++k) updates[start + k] = pending[k].get();
    }
  } else {
    for (std::size_t c = 0; c < n; ++c) updates[c] = TrainLocally(model, round, round.clients[c]);
  }

  std::vector<double> combined(m, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < m; ++i) {
      combined[i] += round.clients[c].weight * updates[c].scores[i];
    }
  }
  RoundResult result;
  result.mask = encryption::TopSMask(combined, round.policy.ratio);

  for (std::size_t c = 0; c < n; ++c) {
    std::vector<double> plain(m, 0.0), secret(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      (result.mask.encrypted(i) ? secret : plain)[i] = updates[c].weights[i];
    }
    result.transmissions.push_back(
        {round.clients[c].id, std::move(plain),
         encryption::MockEncrypt(secret, kRoundKey)});
    result.intercepts.push_back(encryption::MakeAttackerView(
        updates[c].first_gradient, result.mask, encryption::SubstitutionMode::kExclude,
        0.0, seed + c));
  }

  // Server side.
  std::vector<double> plain_sum(m, 0.0);
  encryption::MockCiphertext cipher_sum =
      encryption::MockEncrypt(std::vector<double>(m, 0.0), kRoundKey);
  for (std::size_t c = 0; c < n; ++c) {
    const double alpha = round.clients[c].weight;
    const auto& t = result.transmissions[c];
    for (std::size_t i = 0; i < m; ++i) plain_sum[i] += alpha * t.plaintext[i];
    cipher_sum = encryption::MockAdd(cipher_sum, encryption::MockScale(t.ciphertext, alpha));
  }
  const std::vector<double> decrypted = encryption::MockDecrypt(cipher_sum, kRoundKey);
  result.new_global = round.global;
  for (std::size_t i = 0; i < m; ++i) {
    result.new_global.theta[i] = result.mask.encrypted(i) ? decrypted[i] : plain_sum[i];
  }
  return result;
}

std::vector<InterceptOutcome> AdversaryPipeline(const models::Model& model,
                                                const FedRound& round,
                                                const RoundResult& result,
                                                const attack::AttackConfig& cfg) {
  std::vector<InterceptOutcome> out;
  for (std::size_t c = 0; c < result.intercepts.size(); ++c) {
    InterceptOutcome o;
    o.client = round.clients[c].id;
    const auto& truth = round.clients[c].shard.front();
    try {
      auto r = attack::Invert(model, round.global,
                              models::OneHot(truth.label, model.num_classes()),
                              result.intercepts[c], cfg, c);
      o.quality = evalmetrics::Evaluate(r.x_star, truth.pixels);
      o.reconstruction = std::move(r);
      o.status = "ok";
    } catch (const attack::AttackInfeasible& e) {
      o.status = "infeasible";
      o.message = e.what();
    } catch (const std::exception& e) {
      o.status = "error";
      o.message = e.what();
    }
    out.push_back(std::move(o));
  }
  return out;
}

void WriteTranscriptJson(std::ostream& out, const RoundResult& result) {
  nlohmann::json j;
  j["mask"] = {{"ratio", result.mask.ratio},
               {"size", result.mask.size()},
               {"indices", result.mask.indices}};
  j["transmissions"] = nlohmann::json::array();
  for (const auto& t : result.transmissions) {
    j["transmissions"].push_back({{"client", t.client},
                                  {"plaintext", t.plaintext},
                                  {"ciphertext_key", t.ciphertext.key_id()},
                                  {"ciphertext_length", t.ciphertext.size()}});
  }
  j["new_global"] = result.new_global.theta;
  out << j.dump(2) << '\n';
}

}  // namespace gradguard::fedsim
