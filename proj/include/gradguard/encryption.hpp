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

#ifndef GRADGUARD_ENCRYPTION_HPP_
#define GRADGUARD_ENCRYPTION_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gradguard::encryption {

// |M| = ceil(ratio * m), computed so that exact products such as 0.3 * 10 do
// not round up to the next integer.
std::size_t MaskCount(double ratio, std::size_t m);

struct EncryptionMask {
  std::vector<std::uint8_t> bits;     // bits[i] == 1: element i is encrypted
  double ratio = 0.0;
  std::vector<std::size_t> indices;   // sorted positions of the set bits

  std::size_t size() const { return bits.size(); }
  std::size_t count() const { return indices.size(); }
  bool encrypted(std::size_t i) const { return bits[i] != 0; }
};

EncryptionMask MaskFromBits(std::vector<std::uint8_t> bits, double ratio);

// Selects the ceil(ratio * m) largest scores; ties go to the lower index.
// Throws std::invalid_argument on NaN scores or a ratio outside [0,1].
EncryptionMask TopSMask(std::span<const double> scores, double ratio);

// 8-byte little-endian element count, then the bits packed LSB-first.
void WriteMask(std::ostream& out, const EncryptionMask& mask);
EncryptionMask ReadMask(std::istream& in);
void SaveMask(const std::filesystem::path& path, const EncryptionMask& mask);
EncryptionMask LoadMask(const std::filesystem::path& path);

enum class SubstitutionMode { kExclude, kBoundedNoise };

const char* ModeName(SubstitutionMode mode);
SubstitutionMode ParseMode(const std::string& name);

// What an eavesdropper holds. In exclude mode masked entries carry no value
// (stored as 0) and are absent from known_indices; in bounded-noise mode every
// coordinate is usable and masked entries hold noise in [-xi, xi].
struct AttackerView {
  std::vector<double> values;
  std::vector<std::uint8_t> known;
  SubstitutionMode mode = SubstitutionMode::kExclude;
  double xi = 0.0;
  // Coordinates the matching loss reads, ascending.
  std::shared_ptr<const std::vector<std::size_t>> usable;

  std::size_t size() const { return values.size(); }
  std::size_t num_known() const;
};

AttackerView MakeAttackerView(std::span<const double> g0,
                              const EncryptionMask& mask,
                              SubstitutionMode mode = SubstitutionMode::kExclude,
                              double xi = 1e-3, std::uint64_t seed = 0);

class KeyMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Stand-in for an additively homomorphic ciphertext. The payload is kept in
// clear; the key tag only enforces which operations are allowed.
class MockCiphertext {
 public:
  MockCiphertext(std::vector<double> payload, std::string key_id);

  const std::string& key_id() const { return key_id_; }
  std::size_t size() const { return payload_.size(); }

  friend MockCiphertext MockAdd(const MockCiphertext& a,
                                const MockCiphertext& b);
  friend MockCiphertext MockScale(const MockCiphertext& c, double factor);
  friend std::vector<double> MockDecrypt(const MockCiphertext& c,
                                         const std::string& key_id);

 private:
  std::vector<double> payload_;
  std::string key_id_;
};

MockCiphertext MockEncrypt(std::span<const double> v, const std::string& key_id);
MockCiphertext MockAdd(const MockCiphertext& a, const MockCiphertext& b);
// Ciphertext times a plaintext scalar.
MockCiphertext MockScale(const MockCiphertext& c, double factor);
std::vector<double> MockDecrypt(const MockCiphertext& c,
                                const std::string& key_id);

}  // namespace gradguard::encryption

#endif  // GRADGUARD_ENCRYPTION_HPP_
