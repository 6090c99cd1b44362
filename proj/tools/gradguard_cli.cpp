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

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gradguard/attack.hpp"
#include "gradguard/dataio.hpp"
#include "gradguard/encryption.hpp"
#include "gradguard/evalmetrics.hpp"
#include "gradguard/fedsim.hpp"
#include "gradguard/harness.hpp"
#include "gradguard/lemma.hpp"
#include "gradguard/models.hpp"
#include "gradguard/significance.hpp"

namespace gg = gradguard;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kConfigError = 2;
constexpr int kPartial = 3;

struct ModelArgs {
  std::string name = "lenet-small";
  std::vector<std::size_t> shape{3, 16, 16};
  std::size_t classes = 10;
  std::uint64_t seed = 1;

  void Register(CLI::App* app) {
    app->add_option("--model", name, "lenet-small, cnn-small, linear or mlp")
        ->capture_default_str();
    app->add_option("--input-shape", shape, "C H W")->delimiter(',')->expected(1, 3);
    app->add_option("--classes", classes)->capture_default_str();
    app->add_option("--model-seed", seed)->capture_default_str();
  }

  gg::models::Model Build() const {
    return gg::models::Model(gg::models::BuiltinSpec(name, shape, classes));
  }
};

struct AttackArgs {
  gg::attack::AttackConfig cfg;
  std::string matching = "cosine";

  void Register(CLI::App* app) {
    app->add_option("--iterations", cfg.iterations)->capture_default_str();
    app->add_option("--restarts", cfg.restarts)->capture_default_str();
    app->add_option("--step-size", cfg.step_size)->capture_default_str();
    app->add_option("--alpha-tv", cfg.alpha_tv)->capture_default_str();
    app->add_option("--matching", matching, "cosine or l2")->capture_default_str();
    app->add_option("--attack-seed", cfg.seed)->capture_default_str();
  }

  gg::attack::AttackConfig Resolve() {
    cfg.matching = gg::attack::ParseMatching(matching);
    cfg.Validate();
    return cfg;
  }
};

std::string Num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

int RunSweep(const std::string& config, const std::string& output_dir) {
  gg::harness::ExperimentConfig cfg = gg::harness::LoadConfig(config);
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  const auto report = gg::harness::RunSweep(cfg);
  for (const auto& path :
       gg::harness::Emit(report, cfg.output_dir, cfg.write_csv, cfg.write_json)) {
    std::cout << "wrote " << path.string() << '\n';
  }
  std::cout << "metric,ratio,ok,infeasible,errors,mse_mean,mse_std,ssim_mean\n";
  for (const auto& a : report.aggregates) {
    std::cout << a.metric << ',' << Num(a.ratio) << ',' << a.ok << ',' << a.infeasible
              << ',' << a.errors << ',' << (a.mse ? Num(a.mse->mean) : "NA") << ','
              << (a.mse ? Num(a.mse->std) : "NA") << ','
              << (a.ssim ? Num(a.ssim->mean) : "NA") << '\n';
  }
  for (const auto& m : report.minimal_ratios) {
    std::cout << "minimal protective ratio " << m.metric << ": "
              << (m.ratio ? Num(*m.ratio) : "NA") << '\n';
  }
  if (report.failed_cells() > 0) {
    std::cerr << report.failed_cells() << " cell(s) failed; see the report\n";
    return kPartial;
  }
  return kOk;
}

int AttackOne(const ModelArgs& margs, AttackArgs& aargs, double ratio,
              const std::string& metric, std::size_t sample, std::uint64_t data_seed,
              const std::string& trace_path, const std::string& mask_path) {
  const auto model = margs.Build();
  const auto params = model.Build(margs.seed);
  const auto images = gg::dataio::SynthImages(sample + 1, data_seed, margs.classes, margs.shape);
  const auto& truth = images[sample];
  const auto y = gg::models::OneHot(truth.label, margs.classes);
  const auto g = model.Gradient(params, truth.pixels, y).values;
  const auto scores = gg::significance::ComputeScores(
      gg::significance::MetricSpec::Parse(metric), model, params, truth.pixels, y, g);
  const auto mask = gg::encryption::TopSMask(scores.scores, ratio);
  if (!mask_path.empty()) gg::encryption::SaveMask(mask_path, mask);
  const auto view = gg::encryption::MakeAttackerView(g, mask);
  const auto cfg = aargs.Resolve();
  try {
    const auto r = gg::attack::Invert(model, params, y, view, cfg, sample);
    const auto q = gg::evalmetrics::Evaluate(r.x_star, truth.pixels);
    std::cout << "model " << margs.name << " (" << model.num_params() << " params), metric "
              << metric << ", ratio " << Num(ratio) << ", encrypted " << mask.count() << '\n'
              << "mse " << Num(q.mse) << "  psnr " << Num(q.psnr) << "  ssim " << Num(q.ssim)
              << "  rec_loss " << Num(r.final_rec_loss) << "  restart " << r.restart_index
              << "  seconds " << Num(r.wall_seconds) << '\n';
    for (const auto& a : r.aborted) {
      std::cerr << "restart " << a.restart << " aborted at iteration " << a.iteration << ": "
                << a.reason << '\n';
    }
    if (!trace_path.empty()) {
      std::ofstream out(trace_path);
      if (!out) throw std::runtime_error("cannot write " + trace_path);
      gg::attack::ExportTrace(out, r);
    }
  } catch (const gg::attack::AttackInfeasible& e) {
    std::cout << "AttackInfeasible: " << e.what() << '\n';
  }
  return kOk;
}

int VerifyLemma(const ModelArgs& margs, std::size_t samples, std::vector<int> panels,
                std::vector<double> scales, std::uint64_t data_seed) {
  const auto model = margs.Build();
  const auto params = model.Build(margs.seed);
  const auto images = gg::dataio::SynthImages(samples, data_seed, margs.classes, margs.shape);
  std::cout << "sample,panels,theta_scale,exact_lhs,quadrature_rhs,endpoint_rhs,"
               "abs_gap_quadrature,abs_gap_endpoint\n";
  auto row = [](std::size_t s, const gg::lemma::LemmaReport& r) {
    std::printf("%zu,%d,%g,%.17g,%.17g,%.17g,%.3e,%.3e\n", s, r.panels, r.theta_scale,
                r.exact_lhs, r.quadrature_rhs, r.endpoint_rhs, r.abs_gap_quadrature,
                r.abs_gap_endpoint);
  };
  for (std::size_t s = 0; s < samples; ++s) {
    const auto y = gg::models::OneHot(images[s].label, margs.classes);
    std::vector<double> gaps;
    for (int n : panels) {
      const auto r = gg::lemma::VerifyIntegral(model, params, images[s].pixels, y, n);
      gaps.push_back(r.abs_gap_quadrature);
      row(s, r);
    }
    for (double scale : scales) {
      row(s, gg::lemma::VerifyLemmaApprox(model, params, images[s].pixels, y, scale,
                                          panels.back()));
    }
    bool positive = panels.size() >= 2;
    for (double gap : gaps) positive = positive && gap > 0.0;
    if (positive) {
      std::printf("# sample %zu quadrature slope %.3f\n", s,
                  gg::lemma::ConvergenceSlope(panels, gaps));
    }
  }
  return kOk;
}

int FedSim(const ModelArgs& margs, AttackArgs& aargs, std::size_t clients, double ratio,
           const std::string& metric, int epochs, double lr, std::uint64_t seed,
           bool attack, const std::string& transcript) {
  if (clients == 0) throw std::invalid_argument("--clients must be >= 1");
  const auto model = margs.Build();
  gg::fedsim::FedRound round;
  round.global = model.Build(margs.seed);
  round.local_epochs = epochs;
  round.learning_rate = lr;
  round.policy = {gg::significance::MetricSpec::Parse(metric), ratio};
  const auto images = gg::dataio::SynthImages(clients, seed, margs.classes, margs.shape);
  for (std::size_t c = 0; c < clients; ++c) {
    round.clients.push_back({c, {images[c]}, 1.0 / static_cast<double>(clients)});
  }
  // Equal weights must sum to one within the round's tolerance.
  double total = 0.0;
  for (const auto& c : round.clients) total += c.weight;
  round.clients.back().weight += 1.0 - total;

  const auto result = gg::fedsim::RunRound(model, round, seed);
  std::cout << "clients " << clients << ", metric " << metric << ", ratio " << Num(ratio)
            << ", encrypted " << result.mask.count() << " of " << result.mask.size() << '\n';
  if (!transcript.empty()) {
    std::ofstream out(transcript);
    if (!out) throw std::runtime_error("cannot write " + transcript);
    gg::fedsim::WriteTranscriptJson(out, result);
  }
  if (!attack) return kOk;
  int status = kOk;
  for (const auto& o : gg::fedsim::AdversaryPipeline(model, round, result, aargs.Resolve())) {
    std::cout << "client " << o.client << ": " << o.status;
    if (o.quality) {
      std::cout << "  mse " << Num(o.quality->mse) << "  ssim " << Num(o.quality->ssim);
    } else {
      std::cout << "  " << o.message;
    }
    std::cout << '\n';
    if (o.status == "error") status = kPartial;
  }
  return status;
}

int BenchMetrics(const ModelArgs& margs, std::size_t samples,
                 const std::vector<std::string>& metrics, double sens_step,
                 std::uint64_t data_seed) {
  const auto model = margs.Build();
  const auto params = model.Build(margs.seed);
  const auto images = gg::dataio::SynthImages(samples, data_seed, margs.classes, margs.shape);
  std::cout << "model " << margs.name << " (" << model.num_params() << " params, "
            << samples << " samples)\nmetric,mean_seconds,std_seconds,reported_cost\n";
  for (const auto& name : metrics) {
    auto spec = gg::significance::MetricSpec::Parse(name);
    spec.discrete_step = sens_step;
    std::vector<double> secs, cost;
    std::string failure;
    for (std::size_t s = 0; s < samples && failure.empty(); ++s) {
      const auto y = gg::models::OneHot(images[s].label, margs.classes);
      const auto g = model.Gradient(params, images[s].pixels, y).values;
      try {
        const auto r = gg::significance::ComputeScores(spec, model, params, images[s].pixels, y, g);
        secs.push_back(r.compute_seconds);
        cost.push_back(gg::significance::ReportedCost(r));
      } catch (const gg::significance::BudgetExceeded& e) {
        failure = e.what();
      }
    }
    if (!failure.empty()) {
      std::cout << name << ",-,-,-  # " << failure << '\n';
      continue;
    }
    const auto st = gg::harness::Summarize(secs);
    std::cout << name << ',' << Num(st.mean) << ',' << Num(st.std) << ','
              << Num(gg::harness::Summarize(cost).mean) << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Selective gradient encryption against gradient inversion"};
  app.require_subcommand(1);

  std::string config, output_dir;
  auto* sweep = app.add_subcommand("sweep", "Run a configured ratio sweep");
  sweep->add_option("--config", config, "INI experiment config")->required();
  sweep->add_option("--output-dir", output_dir, "Overrides [output] dir");

  ModelArgs attack_model;
  AttackArgs attack_args;
  double ratio = 0.3;
  std::string metric = "Grad", trace_path, mask_path;
  std::size_t sample = 0;
  std::uint64_t data_seed = 5;
  auto* attack_one = app.add_subcommand("attack-one", "Attack one synthetic sample");
  attack_model.Register(attack_one);
  attack_args.Register(attack_one);
  attack_one->add_option("--ratio", ratio)->capture_default_str();
  attack_one->add_option("--metric", metric)->capture_default_str();
  attack_one->add_option("--sample", sample)->capture_default_str();
  attack_one->add_option("--data-seed", data_seed)->capture_default_str();
  attack_one->add_option("--trace", trace_path, "Write the loss trace CSV");
  attack_one->add_option("--mask-out", mask_path, "Write the encryption mask");

  ModelArgs lemma_model;
  lemma_model.name = "linear";
  std::size_t lemma_samples = 5;
  std::vector<int> panels{8, 32, 128, 256};
  std::vector<double> scales{1.0, 0.1, 0.01};
  auto* lemma = app.add_subcommand("verify-lemma", "Check the log-output line integral");
  lemma_model.Register(lemma);
  lemma->add_option("--samples", lemma_samples)->capture_default_str();
  lemma->add_option("--panels", panels)->delimiter(',');
  lemma->add_option("--scales", scales)->delimiter(',');
  lemma->add_option("--data-seed", data_seed)->capture_default_str();

  ModelArgs fed_model;
  AttackArgs fed_attack;
  std::size_t clients = 3;
  int epochs = 1;
  double lr = 0.1;
  std::uint64_t fed_seed = 7;
  bool run_attack = false;
  std::string transcript;
  auto* fed = app.add_subcommand("fedsim", "Simulate one FedAvg round");
  fed_model.Register(fed);
  fed_attack.Register(fed);
  fed->add_option("--clients", clients)->capture_default_str();
  fed->add_option("--ratio", ratio)->capture_default_str();
  fed->add_option("--metric", metric)->capture_default_str();
  fed->add_option("--epochs", epochs)->capture_default_str();
  fed->add_option("--lr", lr)->capture_default_str();
  fed->add_option("--seed", fed_seed)->capture_default_str();
  fed->add_flag("--attack", run_attack, "Attack every intercepted gradient");
  fed->add_option("--transcript", transcript, "Write the round transcript JSON");

  ModelArgs bench_model;
  std::size_t bench_samples = 3;
  std::vector<std::string> bench_metrics{"Sens", "SensDiscrete", "ProdSig", "Grad", "Param"};
  double sens_step = 1e-3;
  auto* bench = app.add_subcommand("bench-metrics", "Time every significance metric");
  bench_model.Register(bench);
  bench->add_option("--samples", bench_samples)->capture_default_str();
  bench->add_option("--metrics", bench_metrics)->delimiter(',');
  bench->add_option("--sens-step", sens_step)->capture_default_str();
  bench->add_option("--data-seed", data_seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kConfigError;
  }

  try {
    if (*sweep) return RunSweep(config, output_dir);
    if (*attack_one) {
      return AttackOne(attack_model, attack_args, ratio, metric, sample, data_seed, trace_path,
                       mask_path);
    }
    if (*lemma) return VerifyLemma(lemma_model, lemma_samples, panels, scales, data_seed);
    if (*fed) {
      return FedSim(fed_model, fed_attack, clients, ratio, metric, epochs, lr, fed_seed,
                    run_attack, transcript);
    }
    if (*bench) {
      return BenchMetrics(bench_model, bench_samples, bench_metrics, sens_step, data_seed);
    }
  } catch (const gg::harness::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}
