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

#include "gradguard/encryption.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

namespace gradguard::encryption {

std::size_t MaskCount(double ratio, std::size_t m) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw std::invalid_argument("encryption ratio must be in [0,1], got " +
                                std::to_string(ratio));
  }
  const double product = ratio * static_cast<double>(m);
  const double count = std::ceil(product - 1e-9 * std::max(1.0, product));
  return std::min(m, static_cast<std::size_t>(std::max(0.0, count)));
}

EncryptionMask MaskFromBits(std::vector<std::uint8_t> bits, double ratio) {
  EncryptionMask mask;
  mask.ratio = ratio;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] > 1) throw std::invalid_argument("mask bits must be 0 or 1");
    if (bits[i]) mask.indices.push_back(i);
  }
  mask.bits = std::move(bits);
  return mask;
}

EncryptionMask TopSMask(std::span<const double> scores, double ratio) {
  const std::size_t m = scores.size();
  const std::size_t s = MaskCount(ratio, m);
  for (std::size_t i = 0; i < m; ++i) {
    if (std::isnan(scores[i])) {
      throw std::invalid_argument("NaN significance score at index " +
                                  std::to_string(i));
    }
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + s, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  std::vector<std::uint8_t> bits(m, 0);
  for (std::size_t k = 0; k < s; ++k) bits[order[k]] = 1;
  return MaskFromBits(std::move(bits), ratio);
}

void WriteMask(std::ostream& out, const EncryptionMask& mask) {
  const std::uint64_t m = mask.size();
  unsigned char header[8];
  for (int b = 0; b < 8; ++b) header[b] = static_cast<unsigned char>(m >> (8 * b));
  out.write(reinterpret_cast<const char*>(header), 8);
  std::vector<unsigned char> packed((m + 7) / 8, 0);
  for (std::size_t i = 0; i < m; ++i) {
    if (mask.bits[i]) packed[i / 8] |= static_cast<unsigned char>(1u << (i % 8));
  }
  out.write(reinterpret_cast<const char*>(packed.data()),
            static_cast<std::streamsize>(packed.size()));
  if (!out) throw std::runtime_error("failed to write mask");
}

EncryptionMask ReadMask(std::istream& in) {
  unsigned char header[8];
  if (!in.read(reinterpret_cast<char*>(header), 8)) {
    throw std::runtime_error("mask file: missing 8-byte length header");
  }
  std::uint64_t m = 0;
  for (int b = 0; b < 8; ++b) m |= static_cast<std::uint64_t>(header[b]) << (8 * b);
  std::vector<unsigned char> packed((m + 7) / 8);
  if (!in.read(reinterpret_cast<char*>(packed.data()),
               static_cast<std::streamsize>(packed.size()))) {
    throw std::runtime_error("mask file: truncated bit payload for " +
                             std::to_string(m) + " elements");
  }
  std::vector<std::uint8_t> bits(m);
  for (std::size_t i = 0; i < m; ++i) bits[i] = (packed[i / 8] >> (i % 8)) & 1u;
  EncryptionMask mask = MaskFromBits(std::move(bits), 0.0);
  mask.ratio = m == 0 ? 0.0 : static_cast<double>(mask.count()) / m;
  return mask;
}

void SaveMask(const std::filesystem::path& path, const EncryptionMask& mask) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  WriteMask(out, mask);
}

EncryptionMask LoadMask(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return ReadMask(in);
}

const char* ModeName(SubstitutionMode mode) {
  return mode == SubstitutionMode::kExclude ? "exclude" : "bounded_noise";
}

SubstitutionMode ParseMode(const std::string& name) {
  if (name == "exclude") return SubstitutionMode::kExclude;
  if (name == "bounded_noise") return SubstitutionMode::kBoundedNoise;
  throw std::invalid_argument("unknown substitution mode '" + name + "'");
}

std::size_t AttackerView::num_known() const {
  return static_cast<std::size_t>(std::count(known.begin(), known.end(), 1));
}

AttackerView MakeAttackerView(std::span<const double> g0,
                              const EncryptionMask& mask,
                              SubstitutionMode mode, double xi,
                              std::uint64_t seed) {
  if (g0.size() != mask.size()) {
    throw std::invalid_argument("gradient length " + std::to_string(g0.size()) +
                                " does not match mask length " +
                                std::to_string(mask.size()));
  }
  if (mode == SubstitutionMode::kBoundedNoise && !(xi >= 0.0)) {
    throw std::invalid_argument("bounded noise requires xi >= 0");
  }
  const std::size_t m = g0.size();
  AttackerView view;
  view.mode = mode;
  view.xi = mode == SubstitutionMode::kBoundedNoise ? xi : 0.0;
  view.values.assign(m, 0.0);
  view.known.assign(m, 1);
  auto usable = std::make_shared<std::vector<std::size_t>>();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-xi, xi);
  for (std::size_t i = 0; i < m; ++i) {
    if (!mask.encrypted(i)) {
      view.values[i] = g0[i];
      usable->push_back(i);
      continue;
    }
    view.known[i] = 0;
    if (mode == SubstitutionMode::kBoundedNoise) {
      view.values[i] = xi > 0.0 ? noise(rng) : 0.0;
      usable->push_back(i);
    }
  }
  view.usable = std::move(usable);
  return view;
}

MockCiphertext::MockCiphertext(std::vector<double> payload, std::string key_id)
    : payload_(std::move(payload)), key_id_(std::move(key_id)) {}

MockCiphertext MockEncrypt(std::span<const double> v, const std::string& key_id) {
  return MockCiphertext(std::vector<double>(v.begin(), v.end()), key_id);
}

MockCiphertext MockAdd(const MockCiphertext& a, const MockCiphertext& b) {
  if (a.key_id_ != b.key_id_) {
    throw KeyMismatchError("cannot add ciphertexts under keys '" + a.key_id_ +
                           "' and '" + b.key_id_ + "'");
  }
  if (a.size() != b.size()) {
    throw std::invalid_argument("ciphertext lengths differ");
  }
  std::vector<double> sum(a.size());
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = a.payload_[i] + b.payload_[i];
  return MockCiphertext(std::move(sum), a.key_id_);
}

MockCiphertext MockScale(const MockCiphertext& c, double factor) {
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c.payload_[i] * factor;
  return MockCiphertext(std::move(out), c.key_id_);
}

std::vector<double> MockDecrypt(const MockCiphertext& c,
                                const std::string& key_id) {
  if (c.key_id_ != key_id) {
    throw KeyMismatchError("ciphertext under key '" + c.key_id_ +
                           "' cannot be decrypted with key '" + key_id + "'");
  }
  return c.payload_;
}

}  // namespace gradguard::encryption
