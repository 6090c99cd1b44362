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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "doctest.h"
#include "gradguard/encryption.hpp"

namespace enc = gradguard::encryption;
using Indices = std::vector<std::size_t>;

TEST_CASE("top-s examples") {
  CHECK(enc::TopSMask(std::vector<double>{5, 1, 9, 9}, 0.5).indices == Indices{2, 3});
  const std::vector<double> s{3, 1, 4, 1, 5};
  CHECK(enc::TopSMask(s, 0.0).indices.empty());
  CHECK(enc::TopSMask(s, 1.0).indices == Indices{0, 1, 2, 3, 4});
  CHECK(enc::TopSMask(std::vector<double>(8, 2.0), 0.25).indices == Indices{0, 1});
}

TEST_CASE("mask count uses the ceiling without float spill") {
  CHECK(enc::MaskCount(0.3, 10) == 3);
  CHECK(enc::MaskCount(0.31, 10) == 4);
  CHECK(enc::MaskCount(0.1, 3) == 1);
  CHECK(enc::MaskCount(1.0, 7) == 7);
  CHECK(enc::MaskCount(0.0, 7) == 0);
  CHECK_THROWS_AS(enc::MaskCount(1.5, 7), std::invalid_argument);
}

TEST_CASE("top-s rejects NaN") {
  const std::vector<double> s{1.0, std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(enc::TopSMask(s, 0.5), std::invalid_argument);
}

TEST_CASE("masks are nested in the ratio") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> level(0, 3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(37);
    for (double& v : s) v = level(rng);
    Indices prev;
    for (double r = 0.0; r <= 1.0; r += 0.05) {
      const auto mask = enc::TopSMask(s, std::min(r, 1.0));
      CHECK(std::includes(mask.indices.begin(), mask.indices.end(),
                          prev.begin(), prev.end()));
      prev = mask.indices;
    }
  }
}

TEST_CASE("mask file round trip") {
  std::mt19937_64 rng(2);
  for (std::size_t m : {0, 1, 7, 8, 9, 100}) {
    std::vector<double> s(m);
    for (double& v : s) v = std::uniform_real_distribution<double>()(rng);
    const auto mask = enc::TopSMask(s, 0.4);
    std::stringstream buf;
    enc::WriteMask(buf, mask);
    CHECK(buf.str().size() == 8 + (m + 7) / 8);
    const auto back = enc::ReadMask(buf);
    CHECK(back.bits == mask.bits);
    CHECK(back.indices == mask.indices);
  }
  // 10 elements, bits 0 and 9 set.
  std::stringstream raw(std::string("\x0a\0\0\0\0\0\0\0\x01\x02", 10));
  CHECK(enc::ReadMask(raw).indices == Indices{0, 9});
  std::stringstream truncated(std::string("\x0a\0\0\0\0\0\0\0\x01", 9));
  CHECK_THROWS(enc::ReadMask(truncated));
}

TEST_CASE("attacker view") {
  const std::vector<double> g{0.5, -1.5, 2.0, 3.0};
  const auto none = enc::MakeAttackerView(g, enc::TopSMask(g, 0.0));
  CHECK(none.values == g);
  CHECK(none.num_known() == 4);

  const auto all = enc::MakeAttackerView(g, enc::TopSMask(g, 1.0));
  CHECK(all.num_known() == 0);
  CHECK(all.usable->empty());

  const auto mask = enc::MaskFromBits({0, 1, 0, 0}, 0.25);
  const auto a = enc::MakeAttackerView(g, mask, enc::SubstitutionMode::kBoundedNoise, 0.1, 11);
  const auto b = enc::MakeAttackerView(g, mask, enc::SubstitutionMode::kBoundedNoise, 0.1, 11);
  CHECK(std::fabs(a.values[1]) <= 0.1);
  CHECK(a.values[1] != g[1]);
  CHECK(a.values[0] == g[0]);
  CHECK(a.values[2] == g[2]);
  CHECK(a.values[3] == g[3]);
  CHECK(a.values == b.values);
  CHECK(a.usable->size() == 4);

  const auto ex = enc::MakeAttackerView(g, mask);
  CHECK(ex.values[1] == 0.0);
  CHECK(*ex.usable == Indices{0, 2, 3});
  CHECK_THROWS_AS(enc::MakeAttackerView(std::vector<double>{1.0}, mask),
                  std::invalid_argument);
}

TEST_CASE("mock cipher") {
  CHECK(enc::MockDecrypt(enc::MockEncrypt(std::vector<double>{1, 2}, "k"), "k") ==
        std::vector<double>{1, 2});
  CHECK(enc::MockDecrypt(enc::MockAdd(enc::MockEncrypt(std::vector<double>{1}, "k"),
                                      enc::MockEncrypt(std::vector<double>{2}, "k")),
                         "k") == std::vector<double>{3});
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  std::vector<double> plain(16, 0.0);
  std::optional<enc::MockCiphertext> acc;
  for (int client = 0; client < 5; ++client) {
    std::vector<double> v(16);
    for (double& x : v) x = normal(rng);
    for (std::size_t i = 0; i < 16; ++i) plain[i] += v[i];
    const auto c = enc::MockEncrypt(v, "round");
    acc = acc ? enc::MockAdd(*acc, c) : c;
  }
  CHECK(enc::MockDecrypt(*acc, "round") == plain);
  CHECK_THROWS_AS(enc::MockAdd(enc::MockEncrypt(std::vector<double>{1}, "a"),
                               enc::MockEncrypt(std::vector<double>{1}, "b")),
                  enc::KeyMismatchError);
  CHECK_THROWS_AS(enc::MockDecrypt(enc::MockEncrypt(std::vector<double>{1}, "a"), "b"),
                  enc::KeyMismatchError);
}
