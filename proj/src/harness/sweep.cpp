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
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include "gradguard/harness.hpp"

namespace gradguard::harness {

namespace {

// Runs body(0..n-1) on up to `threads` workers. Results go to caller-owned
// slots indexed by i, so collection order never depends on scheduling.
void ParallelFor(std::size_t n, int threads,
                 const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

bool Crosses(double value, const ProtectionThreshold& t) {
  return t.direction == Direction::kAtLeast ? value >= t.value : value <= t.value;
}

const std::optional<Stat>& Pick(const Aggregate& a, const std::string& metric) {
  if (metric == "mse") return a.mse;
  if (metric == "psnr") return a.psnr;
  if (metric == "ssim") return a.ssim;
  return a.rec_loss;
}

std::uint64_t ViewSeed(std::uint64_t data_seed, std::size_t sample) {
  return attack::RestartSeed(data_seed, 0x5eed, sample);
}

struct Prepared {
  std::vector<double> gradient;
  std::vector<std::optional<significance::SignificanceScores>> scores;
  std::vector<std::string> errors;
};

}  // namespace

const char* StatusName(CellStatus status) {
  switch (status) {
    case CellStatus::kOk: return "ok";
    case CellStatus::kInfeasible: return "AttackInfeasible";
    case CellStatus::kError: return "error";
  }
  return "?";
}

CellStatus ParseStatus(const std::string& name) {
  for (auto s : {CellStatus::kOk, CellStatus::kInfeasible, CellStatus::kError}) {
    if (name == StatusName(s)) return s;
  }
  throw std::invalid_argument("unknown cell status '" + name + "'");
}

std::size_t ExperimentReport::failed_cells() const {
  return static_cast<std::size_t>(std::count_if(
      cells.begin(), cells.end(),
      [](const Cell& c) { return c.status == CellStatus::kError; }));
}

bool ExperimentReport::operator==(const ExperimentReport& o) const {
  auto same_lemma = [](const lemma::LemmaReport& a, const lemma::LemmaReport& b) {
    return a.model_id == b.model_id && a.x == b.x && a.label == b.label &&
           a.panels == b.panels && a.theta_scale == b.theta_scale &&
           a.exact_lhs == b.exact_lhs && a.quadrature_rhs == b.quadrature_rhs &&
           a.endpoint_rhs == b.endpoint_rhs &&
           a.abs_gap_quadrature == b.abs_gap_quadrature &&
           a.abs_gap_endpoint == b.abs_gap_endpoint;
  };
  return model == o.model && num_params == o.num_params &&
         threshold.metric == o.threshold.metric &&
         threshold.direction == o.threshold.direction &&
         threshold.value == o.threshold.value &&
         distance_ratio == o.distance_ratio && cells == o.cells &&
         aggregates == o.aggregates && minimal_ratios == o.minimal_ratios &&
         std::equal(lemma_reports.begin(), lemma_reports.end(),
                    o.lemma_reports.begin(), o.lemma_reports.end(), same_lemma);
}

Stat Summarize(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("cannot summarize nothing");
  Stat s;
  const double n = static_cast<double>(values.size());
  for (double v : values) s.mean += v;
  s.mean /= n;
  if (std::isfinite(s.mean)) {
    for (double v : values) s.std += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(s.std / n);
  }
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  s.median = values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
  return s;
}

std::vector<Aggregate> AggregateCells(const std::vector<Cell>& cells,
                                      const std::vector<std::string>& metrics,
                                      const std::vector<double>& ratios) {
  std::vector<Aggregate> out;
  for (const auto& metric : metrics) {
    for (double ratio : ratios) {
      Aggregate a;
      a.metric = metric;
      a.ratio = ratio;
      std::vector<double> mse, psnr, ssim, rec;
      for (const Cell& c : cells) {
        if (c.metric != metric || c.ratio != ratio) continue;
        switch (c.status) {
          case CellStatus::kOk:
            ++a.ok;
            mse.push_back(c.quality->mse);
            psnr.push_back(c.quality->psnr);
            ssim.push_back(c.quality->ssim);
            rec.push_back(*c.rec_loss);
            break;
          case CellStatus::kInfeasible: ++a.infeasible; break;
          case CellStatus::kError: ++a.errors; break;
        }
      }
      if (a.ok > 0) {
        a.mse = Summarize(mse);
        a.psnr = Summarize(psnr);
        a.ssim = Summarize(ssim);
        a.rec_loss = Summarize(rec);
      }
      out.push_back(std::move(a));
    }
  }
  return out;
}

std::optional<double> MinimalProtectiveRatio(const std::vector<Aggregate>& aggregates,
                                             const std::string& metric,
                                             const ProtectionThreshold& threshold) {
  std::optional<double> best;
  for (const Aggregate& a : aggregates) {
    if (a.metric != metric) continue;
    bool protects = false;
    if (a.ok > 0) {
      protects = Crosses(Pick(a, threshold.metric)->mean, threshold);
    } else {
      protects = a.infeasible > 0;
    }
    if (protects && (!best || a.ratio < *best)) best = a.ratio;
  }
  return best;
}

std::vector<Sample> LoadSamples(const ExperimentConfig& cfg) {
  std::vector<dataio::LabeledImage> images;
  if (cfg.source == "synthetic") {
    images = dataio::SynthImages(cfg.sample_offset + cfg.samples, cfg.data_seed,
                                 cfg.num_classes, cfg.input_shape);
  } else {
    const auto variant = cfg.source == "cifar10" ? dataio::CifarVariant::kCifar10
                                                 : dataio::CifarVariant::kCifar100;
    images = dataio::ReadCifarFile(cfg.data_path, variant);
    if (cfg.input_shape != models::Shape{3, 32, 32}) {
      throw ConfigError("CIFAR data requires input_shape = 3,32,32");
    }
  }
  if (images.size() < cfg.sample_offset + cfg.samples) {
    throw ConfigError("data source has " + std::to_string(images.size()) +
                      " images, need " + std::to_string(cfg.sample_offset + cfg.samples));
  }
  std::vector<Sample> out;
  for (std::size_t i = cfg.sample_offset; i < cfg.sample_offset + cfg.samples; ++i) {
    if (images[i].label >= cfg.num_classes) {
      throw ConfigError("image " + std::to_string(i) + " has label " +
                        std::to_string(images[i].label) + " but the model has " +
                        std::to_string(cfg.num_classes) + " classes");
    }
    out.push_back({images[i].pixels, images[i].label});
  }
  return out;
}

ExperimentReport RunSweep(const ExperimentConfig& cfg) {
  cfg.Validate();
  const models::Model model(
      models::BuiltinSpec(cfg.model, cfg.input_shape, cfg.num_classes));
  const models::ParamVector params = model.Build(cfg.model_seed);
  const std::vector<Sample> samples = LoadSamples(cfg);

  std::vector<significance::MetricSpec> specs;
  for (const auto& name : cfg.metrics) {
    auto spec = significance::MetricSpec::Parse(name);
    spec.discrete_step = cfg.sens_step;
    spec.budget = cfg.sens_budget;
    specs.push_back(spec);
  }

  const std::size_t n_samples = samples.size();
  const std::size_t n_metrics = specs.size();
  const std::size_t n_ratios = cfg.ratios.size();
  std::vector<Prepared> prepared(n_samples);
  ParallelFor(n_samples, cfg.threads, [&](std::size_t s) {
    const Sample& sample = samples[s];
    const ad::Tensor y = models::OneHot(sample.label, cfg.num_classes);
    Prepared& p = prepared[s];
    p.gradient = model.Gradient(params, sample.x, y).values;
    p.scores.resize(n_metrics);
    p.errors.resize(n_metrics);
    for (std::size_t k = 0; k < n_metrics; ++k) {
      try {
        p.scores[k] = significance::ComputeScores(specs[k], model, params,
                                                  sample.x, y, p.gradient);
      } catch (const std::exception& e) {
        p.errors[k] = e.what();
      }
    }
  });

  ExperimentReport report;
  report.model = cfg.model;
  report.num_params = model.num_params();
  report.threshold = cfg.threshold;
  report.distance_ratio = cfg.distance_ratio;
  report.cells.resize(n_samples * n_metrics * n_ratios);
  ParallelFor(report.cells.size(), cfg.threads, [&](std::size_t index) {
    const std::size_t s = index / (n_metrics * n_ratios);
    const std::size_t k = (index / n_ratios) % n_metrics;
    const std::size_t r = index % n_ratios;
    Cell& cell = report.cells[index];
    cell.sample = s;
    cell.metric = cfg.metrics[k];
    cell.ratio = cfg.ratios[r];
    const Prepared& p = prepared[s];
    if (!p.scores[k]) {
      cell.status = CellStatus::kError;
      cell.message = p.errors[k];
      return;
    }
    if (cfg.record_timing) cell.compute_seconds = significance::ReportedCost(*p.scores[k]);
    try {
      const auto mask = encryption::TopSMask(p.scores[k]->scores, cell.ratio);
      const auto view = encryption::MakeAttackerView(p.gradient, mask, cfg.mode, cfg.xi,
                                                     ViewSeed(cfg.data_seed, s));
      auto result = attack::Invert(model, params,
                                   models::OneHot(samples[s].label, cfg.num_classes),
                                   view, cfg.attack, s);
      cell.quality = evalmetrics::Evaluate(result.x_star, samples[s].x);
      cell.rec_loss = result.final_rec_loss;
      cell.restart_index = result.restart_index;
      cell.loss_trace = std::move(result.loss_trace);
    } catch (const attack::AttackInfeasible& e) {
      cell.status = CellStatus::kInfeasible;
      cell.message = e.what();
    } catch (const std::exception& e) {
      cell.status = CellStatus::kError;
      cell.message = e.what();
    }
  });

  report.aggregates = AggregateCells(report.cells, cfg.metrics, cfg.ratios);
  for (const auto& metric : cfg.metrics) {
    report.minimal_ratios.push_back(
        {metric, MinimalProtectiveRatio(report.aggregates, metric, cfg.threshold)});
  }
  if (cfg.lemma) {
    report.lemma_reports.resize(n_samples);
    ParallelFor(n_samples, cfg.threads, [&](std::size_t s) {
      report.lemma_reports[s] = lemma::VerifyIntegral(
          model, params, samples[s].x, models::OneHot(samples[s].label, cfg.num_classes),
          cfg.lemma_panels);
    });
  }
  return report;
}

}  // namespace gradguard::harness
