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

// Acceptance suite: one PASS/FAIL line per criterion, with wall time.
//
//   acceptance            run everything
//   acceptance 2 9 11     run the listed criteria only
//
// Exit status is 0 only when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gradguard/attack.hpp"
#include "gradguard/dataio.hpp"
#include "gradguard/encryption.hpp"
#include "gradguard/fedsim.hpp"
#include "gradguard/harness.hpp"
#include "gradguard/lemma.hpp"
#include "gradguard/models.hpp"
#include "gradguard/significance.hpp"
#include "support/primitive_cases.hpp"

namespace ad = gradguard::ad;
namespace attack = gradguard::attack;
namespace dataio = gradguard::dataio;
namespace enc = gradguard::encryption;
namespace fed = gradguard::fedsim;
namespace harness = gradguard::harness;
namespace lemma = gradguard::lemma;
namespace models = gradguard::models;
namespace sig = gradguard::significance;
using ad::Tensor;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int Workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

// ---------------------------------------------------------------------------
// Attack experiments share one setup; cells are cached per (metric, ratio) so
// criteria that need the same cell do not rerun it.

harness::ExperimentConfig AttackSetup() {
  harness::ExperimentConfig cfg;
  cfg.model = "lenet-small";
  cfg.input_shape = {3, 16, 16};
  cfg.num_classes = 10;
  cfg.model_seed = 1;
  cfg.samples = 5;
  cfg.data_seed = 5;
  cfg.attack.matching = attack::Matching::kCosine;
  cfg.attack.alpha_tv = 1e-2;
  cfg.attack.iterations = 2000;
  cfg.attack.restarts = 5;
  cfg.attack.seed = 0;
  cfg.record_timing = false;
  cfg.threads = Workers();
  return cfg;
}

struct CellSummary {
  std::vector<double> mse;  // per sample
  double median = 0.0;
};

std::map<std::pair<std::string, double>, CellSummary>& SweepCache() {
  static std::map<std::pair<std::string, double>, CellSummary> cache;
  return cache;
}

CellSummary Sweep(const std::string& metric, double ratio) {
  auto& cache = SweepCache();
  const auto key = std::make_pair(metric, ratio);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  auto cfg = AttackSetup();
  cfg.metrics = {metric};
  cfg.ratios = {ratio};
  const auto report = harness::RunSweep(cfg);
  CellSummary s;
  for (const auto& cell : report.cells) {
    if (cell.status != harness::CellStatus::kOk) {
      throw std::runtime_error(metric + " cell failed: " + cell.message);
    }
    s.mse.push_back(cell.quality->mse);
  }
  s.median = report.aggregates.at(0).mse->median;
  cache[key] = s;
  return s;
}

std::string Join(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : " ") + Fmt("%.5f", x);
  return out;
}

// ---------------------------------------------------------------------------

Outcome AutodiffCorrectness() {
  std::mt19937_64 rng(20240601);
  double worst1 = 0.0, worst2 = 0.0;
  std::string worst_name;
  std::size_t cases = 0;
  std::map<std::string, int> per_name;
  for (const auto& [name, make] : gradguard::testing::PrimitiveFactories()) {
    for (int trial = 0; trial < 100; ++trial) {
      const auto c = make(rng);
      const auto r = gradguard::testing::CheckGradient(c.fn, c.inputs, rng, true);
      if (std::max(r.first_order, r.second_order) > std::max(worst1, worst2)) worst_name = name;
      worst1 = std::max(worst1, r.first_order);
      worst2 = std::max(worst2, r.second_order);
      ++per_name[name];
      ++cases;
    }
  }

  // f(x) = sum c x^3 + (sum x)(sum d x^2) + <a, x>^2, whose Hessian is
  // H_ij = 2 d_i x_i + 2 d_j x_j + 2 a_i a_j + [i == j](6 c_i x_i + 2 d_i sum x).
  double worst_poly = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 8;
    const Tensor c = gradguard::testing::RandomTensor(rng, {n});
    const Tensor d = gradguard::testing::RandomTensor(rng, {n});
    const Tensor a = gradguard::testing::RandomTensor(rng, {n});
    const Tensor x0 = gradguard::testing::RandomTensor(rng, {n});
    const Tensor v = gradguard::testing::RandomTensor(rng, {n});
    ad::Tape tape;
    const Tensor x = tape.Variable(x0);
    const Tensor ax = ad::Dot(a, x);
    const Tensor f = ad::Add(ad::Add(ad::Dot(c, ad::Pow(x, 3.0)),
                                     ad::Mul(ad::Sum(x), ad::Dot(d, ad::Mul(x, x)))),
                             ad::Mul(ax, ax));
    const Tensor g = ad::Grad(f, x, true);
    const Tensor hv = ad::Grad(ad::Dot(g, v), x);
    std::vector<double> want(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double h = 2.0 * d[j] * x0[j] + 2.0 * d[i] * x0[i] + 2.0 * a[i] * a[j];
        if (i == j) {
          double s1 = 0.0;
          for (std::size_t k = 0; k < n; ++k) s1 += x0[k];
          h += 6.0 * c[i] * x0[i] + 2.0 * d[i] * s1;
        }
        want[i] += h * v[j];
      }
    }
    worst_poly = std::max(worst_poly, gradguard::testing::RelativeError(hv.values(), want));
  }
  const bool pass = worst1 < 1e-5 && worst2 < 1e-5 && worst_poly < 1e-6;
  return {pass, Fmt("%zu primitive kinds, %zu cases; max rel err first %.2e second %.2e "
                    "(worst: %s); polynomial Hessian-vector %.2e",
                    per_name.size(), cases, worst1, worst2, worst_name.c_str(), worst_poly)};
}

struct LemmaSetup {
  models::Model model{models::LenetSmall({3, 16, 16}, 10)};
  models::ParamVector params = model.Build(1);
  std::vector<dataio::LabeledImage> images = dataio::SynthImages(5, 5, 10, {3, 16, 16});
};

Outcome LemmaIntegral() {
  const LemmaSetup s;
  const std::vector<int> panels{8, 32, 128};
  bool pass = true;
  double worst_gap = 0.0, worst_slope = -INFINITY;
  for (const auto& img : s.images) {
    const Tensor y = models::OneHot(img.label, 10);
    std::vector<double> gaps;
    for (int n : panels) {
      gaps.push_back(lemma::VerifyIntegral(s.model, s.params, img.pixels, y, n).abs_gap_quadrature);
    }
    const double slope = lemma::ConvergenceSlope(panels, gaps);
    const double gap = lemma::VerifyIntegral(s.model, s.params, img.pixels, y, 256).abs_gap_quadrature;
    worst_gap = std::max(worst_gap, gap);
    worst_slope = std::max(worst_slope, slope);
    pass = pass && gap < 1e-6 && slope <= -3.0;
  }
  return {pass, Fmt("lenet-small 3x16x16, 5 samples: max gap at 256 panels %.2e, "
                    "shallowest slope over {8,32,128} %.2f",
                    worst_gap, worst_slope)};
}

Outcome LemmaApproximation() {
  const LemmaSetup s;
  bool pass = true;
  std::string detail = "endpoint gaps at scales 1, 0.1, 0.01:";
  for (const auto& img : s.images) {
    const Tensor y = models::OneHot(img.label, 10);
    double prev = INFINITY;
    std::string row;
    for (double scale : {1.0, 0.1, 0.01}) {
      const double gap =
          lemma::VerifyLemmaApprox(s.model, s.params, img.pixels, y, scale, 64).abs_gap_endpoint;
      pass = pass && gap < prev;
      prev = gap;
      row += Fmt(" %.2e", gap);
    }
    detail += " [" + row.substr(1) + "]";
  }
  return {pass, detail};
}

Outcome BaselineAttack() {
  const auto s = Sweep("Grad", 0.0);
  return {s.median < 0.01, Fmt("empty mask, median MSE %.5f (per sample %s), bound 0.01",
                               s.median, Join(s.mse).c_str())};
}

Outcome DefenseOrdering() {
  const auto grad = Sweep("Grad", 0.3);
  const auto prodsig = Sweep("ProdSig", 0.3);
  const auto param = Sweep("Param", 0.3);
  const bool pass = param.median < grad.median && param.median < prodsig.median;
  return {pass, Fmt("median MSE at 30%%: Param %.5f, Grad %.5f, ProdSig %.5f", param.median,
                    grad.median, prodsig.median)};
}

Outcome Monotonicity() {
  const std::vector<double> ratios{0.0, 0.1, 0.2, 0.3, 0.4};
  std::vector<double> med;
  for (double r : ratios) med.push_back(Sweep("Grad", r).median);
  int inversions = 0;
  bool within = true;
  for (std::size_t i = 1; i < med.size(); ++i) {
    if (med[i] < med[i - 1]) {
      ++inversions;
      within = within && (med[i - 1] - med[i]) / med[i - 1] <= 0.10;
    }
  }
  const bool pass = inversions <= 1 && within;
  return {pass, Fmt("Grad median MSE over ratios 0..0.4: %s; %d inversion(s)",
                    Join(med).c_str(), inversions)};
}

Outcome SensitivityCost() {
  const models::Model m(models::LenetSmall({3, 16, 16}, 10));
  const auto p = m.Build(1);
  const auto img = dataio::SynthImages(1, 5, 10, {3, 16, 16})[0];
  const Tensor y = models::OneHot(img.label, 10);
  const auto g = m.Gradient(p, img.pixels, y).values;
  auto time_of = [&](const std::string& name) {
    return sig::ComputeScores(sig::MetricSpec::Parse(name), m, p, img.pixels, y, g)
        .compute_seconds;
  };
  const double discrete = time_of("SensDiscrete");
  // Best of several runs keeps the microsecond measurement stable.
  double prodsig = INFINITY;
  for (int i = 0; i < 5; ++i) prodsig = std::min(prodsig, time_of("ProdSig"));
  const bool pass = discrete >= 10.0 * prodsig && prodsig < 0.1;
  return {pass, Fmt("lenet-small (%zu params): SensDiscrete %.3f s, ProdSig %.2e s, ratio %.0f",
                    m.num_params(), discrete, prodsig, discrete / prodsig)};
}

// Average ranks, ties sharing the mean of their positions.
std::vector<double> Ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = 0.5 * (i + j) + 1.0;
    i = j + 1;
  }
  return rank;
}

double Spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = Ranks(a), rb = Ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (ra[i] - mean) * (rb[i] - mean);
    da += (ra[i] - mean) * (ra[i] - mean);
    db += (rb[i] - mean) * (rb[i] - mean);
  }
  return num / std::sqrt(da * db);
}

Outcome SensitivityAgreement() {
  const models::Model m(models::Mlp({16}, 12, 4));
  std::mt19937_64 rng(8);
  double worst = 1.0;
  for (int trial = 0; trial < 3; ++trial) {
    const auto p = m.Build(10 + trial);
    const Tensor x = gradguard::testing::RandomTensor(rng, {16}, 0.0, 1.0);
    const Tensor y = models::OneHot(trial % 4, 4);
    const auto exact = sig::SensitivityExact(m, p, x, y);
    const auto discrete = sig::SensitivityDiscrete(m, p, x, y, 1e-4);
    worst = std::min(worst, Spearman(exact.scores, discrete.scores));
  }
  return {worst >= 0.99 && m.num_params() <= 500,
          Fmt("dense 16-12-4 net (%zu params), 3 draws: min Spearman %.6f", m.num_params(), worst)};
}

// Brute force: sort every index by (score descending, index ascending) and
// take the first k.
std::vector<std::uint8_t> BruteTopK(const std::vector<double>& s, std::size_t k) {
  std::vector<std::size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return s[a] > s[b]; });
  std::vector<std::uint8_t> bits(s.size(), 0);
  for (std::size_t i = 0; i < k; ++i) bits[idx[i]] = 1;
  return bits;
}

Outcome MaskProperties() {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::size_t checked = 0, failures = 0;
  auto check_vector = [&](const std::vector<double>& s) {
    const std::size_t m = s.size();
    std::vector<std::uint8_t> prev(m, 0);
    for (std::size_t k = 0; k <= m; ++k) {
      const double ratio = static_cast<double>(k) / static_cast<double>(m);
      const auto mask = enc::TopSMask(s, ratio);
      const auto again = enc::TopSMask(s, ratio);
      bool ok = mask.count() == k && mask.bits == BruteTopK(s, k) && again.bits == mask.bits;
      for (std::size_t i = 0; i < m; ++i) ok = ok && (!prev[i] || mask.bits[i]);
      prev = mask.bits;
      ++checked;
      if (!ok) ++failures;
    }
  };
  for (std::size_t m = 1; m <= 12; ++m) {
    // Every 0/1 score pattern: maximal ties.
    for (std::size_t pattern = 0; pattern < (std::size_t{1} << m); ++pattern) {
      std::vector<double> s(m);
      for (std::size_t i = 0; i < m; ++i) s[i] = (pattern >> i) & 1;
      check_vector(s);
    }
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> s(m);
      for (double& v : s) v = unif(rng);
      check_vector(s);
    }
  }
  return {failures == 0, Fmt("%zu (scores, ratio) pairs for m = 1..12, %zu mismatches", checked,
                             failures)};
}

Outcome ThreatModelIsolation() {
  const models::Model m(models::LenetSmall({1, 8, 8}, 4));
  const auto p = m.Build(2);
  const auto img = dataio::SynthImages(1, 9, 4, {1, 8, 8})[0];
  const Tensor y = models::OneHot(img.label, 4);
  const auto g = m.Gradient(p, img.pixels, y).values;
  const auto mask = enc::TopSMask(sig::GradMagnitude(g).scores, 0.3);
  attack::AttackConfig cfg;
  cfg.iterations = 60;
  cfg.restarts = 2;
  const auto reference = attack::Invert(m, p, y, enc::MakeAttackerView(g, mask), cfg, 0);

  std::mt19937_64 rng(77);
  std::normal_distribution<double> normal(0.0, 10.0);
  int identical = 0;
  for (int trial = 0; trial < 10; ++trial) {
    // Odd trials perturb the gradient before the view is built, even trials
    // write into the view's masked slots directly.
    enc::AttackerView view;
    if (trial % 2 == 1) {
      auto g2 = g;
      for (std::size_t i : mask.indices) g2[i] = normal(rng);
      view = enc::MakeAttackerView(g2, mask);
    } else {
      view = enc::MakeAttackerView(g, mask);
      for (std::size_t i : mask.indices) view.values[i] = normal(rng);
    }
    const auto r = attack::Invert(m, p, y, view, cfg, 0);
    if (ad::BitwiseEqual(r.x_star, reference.x_star) && r.loss_trace == reference.loss_trace &&
        r.final_rec_loss == reference.final_rec_loss &&
        r.restart_index == reference.restart_index) {
      ++identical;
    }
  }
  return {identical == 10, Fmt("%d of 10 perturbed views gave a bitwise-identical result "
                               "(%zu of %zu coordinates masked)",
                               identical, mask.count(), mask.size())};
}

Outcome FedAvgEquivalence() {
  const models::Model m(models::LenetSmall({3, 16, 16}, 10));
  fed::FedRound round;
  round.global = m.Build(4);
  round.local_epochs = 2;
  round.policy = {sig::MetricSpec::Parse("Grad"), 0.3};
  const auto images = dataio::SynthImages(6, 21, 10, {3, 16, 16});
  const std::vector<double> weights{0.5, 0.25, 0.25};
  for (std::size_t c = 0; c < 3; ++c) {
    round.clients.push_back({c, {images[2 * c], images[2 * c + 1]}, weights[c]});
  }
  const auto result = fed::RunRound(m, round, 11);

  // Plaintext FedAvg: local SGD per client, then sum_c w_c theta_c in client order.
  std::vector<double> expected(m.num_params(), 0.0);
  for (const auto& client : round.clients) {
    std::vector<double> w = round.global.theta;
    for (int e = 0; e < round.local_epochs; ++e) {
      for (const auto& s : client.shard) {
        const auto g = m.Gradient({w, round.global.layout}, s.pixels,
                                  models::OneHot(s.label, 10));
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= round.learning_rate * g.values[i];
      }
    }
    for (std::size_t i = 0; i < w.size(); ++i) expected[i] += client.weight * w[i];
  }
  std::size_t differing = 0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (std::memcmp(&expected[i], &result.new_global.theta[i], sizeof(double)) != 0) ++differing;
  }
  return {differing == 0 && result.mask.count() == enc::MaskCount(0.3, m.num_params()),
          Fmt("3 clients, %zu of %zu coordinates encrypted; %zu coordinates differ from "
              "plaintext FedAvg",
              result.mask.count(), m.num_params(), differing)};
}

Outcome CifarParser() {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> byte(0, 255);
  bool round_trip = true;
  std::vector<std::uint8_t> fuzz_source;
  for (auto variant : {dataio::CifarVariant::kCifar10, dataio::CifarVariant::kCifar100}) {
    const std::size_t record = dataio::CifarRecordSize(variant);
    const std::size_t label_bytes = record - dataio::kCifarPixels;
    const int classes = static_cast<int>(dataio::CifarClassCount(variant));
    std::vector<std::uint8_t> bytes;
    for (int r = 0; r < 20; ++r) {
      for (std::size_t l = 0; l < label_bytes; ++l) {
        // CIFAR-100 coarse labels have 20 classes.
        const int limit = label_bytes == 2 && l == 0 ? 20 : classes;
        bytes.push_back(static_cast<std::uint8_t>(std::uniform_int_distribution<int>(0, limit - 1)(rng)));
      }
      for (std::size_t i = 0; i < dataio::kCifarPixels; ++i) bytes.push_back(byte(rng));
    }
    const auto images = dataio::ParseCifar(bytes, variant);
    round_trip = round_trip && images.size() == 20 && dataio::WriteCifar(images, variant) == bytes;
    if (variant == dataio::CifarVariant::kCifar10) fuzz_source = bytes;
  }

  std::size_t clean = 0, parsed = 0, other = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto variant = trial % 2 ? dataio::CifarVariant::kCifar100 : dataio::CifarVariant::kCifar10;
    std::size_t length = std::uniform_int_distribution<std::size_t>(0, fuzz_source.size())(rng);
    // Every tenth cut lands on a record boundary of the variant being parsed.
    if (trial % 10 == 0) length -= length % dataio::CifarRecordSize(variant);
    std::vector<std::uint8_t> cut(fuzz_source.begin(), fuzz_source.begin() + length);
    // A quarter of the cases also get a random label byte.
    if (trial % 4 == 3 && !cut.empty()) cut[0] = static_cast<std::uint8_t>(byte(rng));
    try {
      dataio::ParseCifar(cut, variant);
      ++parsed;
    } catch (const dataio::ParseError&) {
      ++clean;
    } catch (...) {
      ++other;
    }
  }
  return {round_trip && other == 0 && clean + parsed == 1000,
          Fmt("round trip %s for both variants; fuzz: %zu clean errors, %zu valid prefixes, "
              "%zu other failures",
              round_trip ? "byte-exact" : "MISMATCH", clean, parsed, other)};
}

std::string Slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome PipelineDeterminism() {
  const std::filesystem::path config = GRADGUARD_SOURCE_DIR "/configs/smoke.ini";
  const auto base = std::filesystem::temp_directory_path() / "gradguard-acceptance";
  std::filesystem::remove_all(base);
  std::vector<std::string> csv;
  for (const char* run : {"a", "b"}) {
    const auto cfg = harness::LoadConfig(config);
    harness::Emit(harness::RunSweep(cfg), base / run, true, false);
    csv.push_back(Slurp(base / run / "report.csv"));
  }
  std::filesystem::remove_all(base);
  const bool pass = !csv[0].empty() && csv[0] == csv[1];
  return {pass, Fmt("smoke config, two runs: %zu bytes each, %s", csv[0].size(),
                    csv[0] == csv[1] ? "identical" : "DIFFERENT")};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "autodiff finite-difference agreement", 60, AutodiffCorrectness},
      {2, "log-output line integral by quadrature", 120, LemmaIntegral},
      {3, "endpoint approximation improves as theta shrinks", 60, LemmaApproximation},
      {4, "baseline inversion succeeds without a mask", 900, BaselineAttack},
      {5, "Param is the weakest defense at 30%", 2700, DefenseOrdering},
      {6, "Grad reconstruction error grows with the ratio", 3600, Monotonicity},
      {7, "sensitivity costs far more than ProdSig", 300, SensitivityCost},
      {8, "discrete and exact sensitivity rank alike", 120, SensitivityAgreement},
      {9, "top-s mask properties against brute force", 1, MaskProperties},
      {10, "masked values never reach the attack", 300, ThreatModelIsolation},
      {11, "encrypted aggregation equals FedAvg", 60, FedAvgEquivalence},
      {12, "CIFAR round trip and truncation fuzz", 30, CifarParser},
      {13, "smoke sweep is byte-reproducible", 600, PipelineDeterminism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = Seconds(start);
    const bool in_budget = secs < c.budget_seconds;
    const bool pass = o.pass && in_budget;
    std::printf("%s  %2d  %-50s %8.1f s  %s%s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs,
                o.detail.c_str(),
                in_budget ? "" : Fmt(" [over the %.0f s budget]", c.budget_seconds).c_str());
    std::fflush(stdout);
    ++ran;
    if (!pass) ++failed;
  }
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
