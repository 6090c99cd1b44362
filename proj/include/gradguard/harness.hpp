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

#ifndef GRADGUARD_HARNESS_HPP_
#define GRADGUARD_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradguard/attack.hpp"
#include "gradguard/dataio.hpp"
#include "gradguard/encryption.hpp"
#include "gradguard/evalmetrics.hpp"
#include "gradguard/lemma.hpp"
#include "gradguard/models.hpp"
#include "gradguard/significance.hpp"

namespace gradguard::harness {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Direction { kAtLeast, kAtMost };

struct ProtectionThreshold {
  std::string metric = "mse";  // mse, psnr, ssim or rec_loss
  Direction direction = Direction::kAtLeast;
  double value = 0.05;
};

struct ExperimentConfig {
  // [model]
  std::string model = "lenet-small";
  models::Shape input_shape{3, 16, 16};
  std::size_t num_classes = 10;
  std::uint64_t model_seed = 1;
  // [data]
  std::string source = "synthetic";  // synthetic, cifar10 or cifar100
  std::filesystem::path data_path;
  std::size_t samples = 5;
  std::size_t sample_offset = 0;
  std::uint64_t data_seed = 5;
  // [sweep]
  std::vector<std::string> metrics{"Grad", "ProdSig", "Param"};
  std::vector<double> ratios{0.0, 0.1, 0.2, 0.3, 0.4};
  double distance_ratio = 0.3;
  ProtectionThreshold threshold;
  encryption::SubstitutionMode mode = encryption::SubstitutionMode::kExclude;
  double xi = 1e-3;
  double sens_step = 1e-3;
  std::size_t sens_budget = significance::kDefaultSensitivityBudget;
  int threads = 1;
  bool record_timing = true;
  // [lemma]
  bool lemma = false;
  int lemma_panels = 256;
  // [attack]
  attack::AttackConfig attack;
  // [output]
  std::filesystem::path output_dir = "gradguard-out";
  bool write_csv = true;
  bool write_json = true;

  // Throws ConfigError describing the first invalid field.
  void Validate() const;
};

// INI text: [section] headers and key = value lines; ';' or '#' comments.
// Unknown sections or keys are errors. GRADGUARD_OUTPUT_DIR, when set,
// replaces [output] dir.
ExperimentConfig ParseConfig(std::istream& in);
ExperimentConfig LoadConfig(const std::filesystem::path& path);

enum class CellStatus { kOk, kInfeasible, kError };

const char* StatusName(CellStatus status);
CellStatus ParseStatus(const std::string& name);

struct Cell {
  std::size_t sample = 0;
  std::string metric;
  double ratio = 0.0;
  CellStatus status = CellStatus::kOk;
  std::string message;
  std::optional<evalmetrics::QualityReport> quality;
  std::optional<double> rec_loss;
  std::optional<double> compute_seconds;  // absent when timing is disabled
  int restart_index = 0;
  std::vector<double> loss_trace;

  bool operator==(const Cell&) const = default;
};

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // population
  double median = 0.0;

  bool operator==(const Stat&) const = default;
};

struct Aggregate {
  std::string metric;
  double ratio = 0.0;
  std::size_t ok = 0;
  std::size_t infeasible = 0;
  std::size_t errors = 0;
  // Over the cells that produced a reconstruction.
  std::optional<Stat> mse, psnr, ssim, rec_loss;

  bool operator==(const Aggregate&) const = default;
};

struct MinimalRatio {
  std::string metric;
  std::optional<double> ratio;  // absent: never protected (NA)

  bool operator==(const MinimalRatio&) const = default;
};

struct ExperimentReport {
  std::string model;
  std::size_t num_params = 0;
  ProtectionThreshold threshold;
  double distance_ratio = 0.3;
  std::vector<Cell> cells;  // ordered by (sample, metric, ratio)
  std::vector<Aggregate> aggregates;  // ordered by (metric, ratio)
  std::vector<MinimalRatio> minimal_ratios;
  std::vector<lemma::LemmaReport> lemma_reports;

  std::size_t failed_cells() const;
  bool operator==(const ExperimentReport& other) const;
};

// Mean, population std and median.
Stat Summarize(std::vector<double> values);

// Aggregate rows for every (metric, ratio) present in cells.
std::vector<Aggregate> AggregateCells(const std::vector<Cell>& cells,
                                      const std::vector<std::string>& metrics,
                                      const std::vector<double>& ratios);

// Smallest ratio whose aggregate crosses the threshold. A ratio where every
// cell is infeasible counts as protected.
std::optional<double> MinimalProtectiveRatio(
    const std::vector<Aggregate>& aggregates, const std::string& metric,
    const ProtectionThreshold& threshold);

struct Sample {
  ad::Tensor x;
  std::size_t label = 0;
};

std::vector<Sample> LoadSamples(const ExperimentConfig& cfg);

ExperimentReport RunSweep(const ExperimentConfig& cfg);

// CSV columns: sample,metric,ratio,mse,psnr,ssim,rec_loss,compute_seconds,status
void WriteCsv(std::ostream& out, const ExperimentReport& report);
void WriteJson(std::ostream& out, const ExperimentReport& report);
ExperimentReport ReadJson(std::istream& in);
// Writes report.csv and/or report.json under dir, creating it if needed.
std::vector<std::filesystem::path> Emit(const ExperimentReport& report,
                                        const std::filesystem::path& dir,
                                        bool csv, bool json);

}  // namespace gradguard::harness

#endif  // GRADGUARD_HARNESS_HPP_
