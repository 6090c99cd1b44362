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
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "gradguard/harness.hpp"

namespace gradguard::harness {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& KnownKeys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"model", {"name", "input_shape", "num_classes", "seed"}},
      {"data", {"source", "path", "samples", "offset", "seed"}},
      {"sweep",
       {"metrics", "ratios", "distance_ratio", "threshold_metric",
        "threshold_direction", "threshold_value", "mode", "xi", "sens_step",
        "sens_budget", "threads", "record_timing"}},
      {"lemma", {"enabled", "panels"}},
      {"attack",
       {"matching", "alpha_tv", "iterations", "restarts", "step_size",
        "signed_gradients", "decay_schedule", "seed"}},
      {"output", {"dir", "formats"}},
  };
  return keys;
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  for (auto& p : parts) boost::trim(p);
  parts.erase(std::remove(parts.begin(), parts.end(), ""), parts.end());
  return parts;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  const std::string* Raw(const std::string& section, const std::string& key) const {
    const auto s = tree_.get_child_optional(section);
    if (!s) return nullptr;
    const auto v = s->get_child_optional(key);
    if (!v) return nullptr;
    return &v->data();
  }

  void String(const std::string& section, const std::string& key, std::string& out) const {
    if (const auto* raw = Raw(section, key)) out = boost::trim_copy(*raw);
  }

  template <typename T>
  void Number(const std::string& section, const std::string& key, T& out) const {
    const auto* raw = Raw(section, key);
    if (!raw) return;
    std::istringstream in(boost::trim_copy(*raw));
    T value{};
    in >> value;
    if (!in || !in.eof()) Fail(section, key, *raw, "a number");
    out = value;
  }

  void Bool(const std::string& section, const std::string& key, bool& out) const {
    const auto* raw = Raw(section, key);
    if (!raw) return;
    const std::string v = boost::to_lower_copy(boost::trim_copy(*raw));
    if (v == "true" || v == "yes" || v == "1") {
      out = true;
    } else if (v == "false" || v == "no" || v == "0") {
      out = false;
    } else {
      Fail(section, key, *raw, "true or false");
    }
  }

  void Doubles(const std::string& section, const std::string& key,
               std::vector<double>& out) const {
    const auto* raw = Raw(section, key);
    if (!raw) return;
    std::vector<double> values;
    for (const auto& part : SplitList(*raw)) {
      char* end = nullptr;
      const double v = std::strtod(part.c_str(), &end);
      if (end != part.c_str() + part.size()) Fail(section, key, *raw, "a list of numbers");
      values.push_back(v);
    }
    out = std::move(values);
  }

  [[noreturn]] static void Fail(const std::string& section, const std::string& key,
                                const std::string& raw, const std::string& expected) {
    throw ConfigError("[" + section + "] " + key + " = '" + raw + "': expected " +
                      expected);
  }

 private:
  const pt::ptree& tree_;
};

}  // namespace

void ExperimentConfig::Validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (input_shape.empty()) fail("[model] input_shape is empty");
  if (num_classes < 2) fail("[model] num_classes must be >= 2");
  if (source != "synthetic" && source != "cifar10" && source != "cifar100") {
    fail("[data] source must be synthetic, cifar10 or cifar100");
  }
  if (source != "synthetic" && data_path.empty()) fail("[data] path is required for CIFAR");
  if (samples == 0) fail("[data] samples must be >= 1");
  if (metrics.empty()) fail("[sweep] metrics is empty");
  for (const auto& m : metrics) {
    try {
      (void)significance::MetricSpec::Parse(m);
    } catch (const std::invalid_argument& e) {
      fail(std::string("[sweep] metrics: ") + e.what());
    }
  }
  if (ratios.empty()) fail("[sweep] ratios is empty");
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (!(ratios[i] >= 0.0 && ratios[i] <= 1.0)) fail("[sweep] ratios must lie in [0,1]");
    if (i > 0 && !(ratios[i] > ratios[i - 1])) {
      fail("[sweep] ratios must be sorted ascending without repeats");
    }
  }
  if (!(distance_ratio >= 0.0 && distance_ratio <= 1.0)) {
    fail("[sweep] distance_ratio must lie in [0,1]");
  }
  const auto& t = threshold.metric;
  if (t != "mse" && t != "psnr" && t != "ssim" && t != "rec_loss") {
    fail("[sweep] threshold_metric must be mse, psnr, ssim or rec_loss");
  }
  if (!(xi >= 0.0)) fail("[sweep] xi must be >= 0");
  if (!(sens_step > 0.0)) fail("[sweep] sens_step must be > 0");
  if (threads < 1) fail("[sweep] threads must be >= 1");
  if (lemma_panels < 2 || lemma_panels % 2 != 0) fail("[lemma] panels must be even and >= 2");
  try {
    attack.Validate();
  } catch (const std::invalid_argument& e) {
    fail(std::string("[attack] ") + e.what());
  }
  if (!write_csv && !write_json) fail("[output] formats selects nothing");
}

ExperimentConfig ParseConfig(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    const auto known = KnownKeys().find(section);
    if (known == KnownKeys().end()) {
      throw ConfigError(body.empty() && !body.data().empty()
                            ? "key '" + section + "' outside of a section"
                            : "unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      if (!known->second.count(key)) {
        throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      }
    }
  }

  const Reader r(tree);
  ExperimentConfig cfg;
  std::string text;

  r.String("model", "name", cfg.model);
  if (const auto* raw = r.Raw("model", "input_shape")) {
    cfg.input_shape.clear();
    for (const auto& part : SplitList(*raw)) {
      try {
        std::size_t used = 0;
        const unsigned long v = std::stoul(part, &used);
        if (used != part.size() || v == 0) throw std::invalid_argument(part);
        cfg.input_shape.push_back(v);
      } catch (const std::exception&) {
        Reader::Fail("model", "input_shape", *raw, "positive integers separated by commas");
      }
    }
  }
  r.Number("model", "num_classes", cfg.num_classes);
  r.Number("model", "seed", cfg.model_seed);

  r.String("data", "source", cfg.source);
  text.clear();
  r.String("data", "path", text);
  if (!text.empty()) cfg.data_path = text;
  r.Number("data", "samples", cfg.samples);
  r.Number("data", "offset", cfg.sample_offset);
  r.Number("data", "seed", cfg.data_seed);

  if (const auto* raw = r.Raw("sweep", "metrics")) cfg.metrics = SplitList(*raw);
  r.Doubles("sweep", "ratios", cfg.ratios);
  r.Number("sweep", "distance_ratio", cfg.distance_ratio);
  r.String("sweep", "threshold_metric", cfg.threshold.metric);
  text.clear();
  r.String("sweep", "threshold_direction", text);
  if (text == "at_least" || text == ">=") {
    cfg.threshold.direction = Direction::kAtLeast;
  } else if (text == "at_most" || text == "<=") {
    cfg.threshold.direction = Direction::kAtMost;
  } else if (!text.empty()) {
    Reader::Fail("sweep", "threshold_direction", text, "at_least or at_most");
  }
  r.Number("sweep", "threshold_value", cfg.threshold.value);
  text.clear();
  r.String("sweep", "mode", text);
  if (!text.empty()) {
    try {
      cfg.mode = encryption::ParseMode(text);
    } catch (const std::invalid_argument&) {
      Reader::Fail("sweep", "mode", text, "exclude or bounded_noise");
    }
  }
  r.Number("sweep", "xi", cfg.xi);
  r.Number("sweep", "sens_step", cfg.sens_step);
  r.Number("sweep", "sens_budget", cfg.sens_budget);
  r.Number("sweep", "threads", cfg.threads);
  r.Bool("sweep", "record_timing", cfg.record_timing);

  r.Bool("lemma", "enabled", cfg.lemma);
  r.Number("lemma", "panels", cfg.lemma_panels);

  text.clear();
  r.String("attack", "matching", text);
  if (!text.empty()) {
    try {
      cfg.attack.matching = attack::ParseMatching(text);
    } catch (const std::invalid_argument&) {
      Reader::Fail("attack", "matching", text, "l2 or cosine");
    }
  }
  r.Number("attack", "alpha_tv", cfg.attack.alpha_tv);
  r.Number("attack", "iterations", cfg.attack.iterations);
  r.Number("attack", "restarts", cfg.attack.restarts);
  r.Number("attack", "step_size", cfg.attack.step_size);
  r.Bool("attack", "signed_gradients", cfg.attack.signed_gradients);
  r.Bool("attack", "decay_schedule", cfg.attack.decay_schedule);
  r.Number("attack", "seed", cfg.attack.seed);

  text.clear();
  r.String("output", "dir", text);
  if (!text.empty()) cfg.output_dir = text;
  if (const auto* raw = r.Raw("output", "formats")) {
    cfg.write_csv = cfg.write_json = false;
    for (const auto& f : SplitList(*raw)) {
      if (f == "csv") {
        cfg.write_csv = true;
      } else if (f == "json") {
        cfg.write_json = true;
      } else {
        Reader::Fail("output", "formats", *raw, "csv and/or json");
      }
    }
  }
  if (const char* dir = std::getenv("GRADGUARD_OUTPUT_DIR"); dir && *dir) {
    cfg.output_dir = dir;
  }
  cfg.Validate();
  return cfg;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  ExperimentConfig cfg = ParseConfig(in);
  if (!cfg.data_path.empty() && cfg.data_path.is_relative()) {
    cfg.data_path = path.parent_path() / cfg.data_path;
  }
  return cfg;
}

}  // namespace gradguard::harness
