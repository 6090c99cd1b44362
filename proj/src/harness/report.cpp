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

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "gradguard/harness.hpp"
#include "json.hpp"

namespace gradguard::harness {

namespace {

using nlohmann::json;

// Shortest decimal that reads back to the same double.
std::string Format(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string Format(const std::optional<double>& v) {
  return v ? Format(*v) : "NA";
}

json Num(double v) {
  if (std::isfinite(v)) return v;
  return Format(v);
}

double NumFrom(const json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw std::runtime_error("report JSON: bad number '" + s + "'");
}

json OptNum(const std::optional<double>& v) { return v ? Num(*v) : json(nullptr); }

std::optional<double> OptNumFrom(const json& j) {
  if (j.is_null()) return std::nullopt;
  return NumFrom(j);
}

json Nums(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(Num(x));
  return a;
}

std::vector<double> NumsFrom(const json& j) {
  std::vector<double> v;
  for (const auto& x : j) v.push_back(NumFrom(x));
  return v;
}

json StatJson(const std::optional<Stat>& s) {
  if (!s) return nullptr;
  return {{"mean", Num(s->mean)}, {"std", Num(s->std)}, {"median", Num(s->median)}};
}

std::optional<Stat> StatFrom(const json& j) {
  if (j.is_null()) return std::nullopt;
  return Stat{NumFrom(j.at("mean")), NumFrom(j.at("std")), NumFrom(j.at("median"))};
}

json ThresholdJson(const ProtectionThreshold& t) {
  return {{"metric", t.metric},
          {"direction", t.direction == Direction::kAtLeast ? "at_least" : "at_most"},
          {"value", Num(t.value)}};
}

json LemmaJson(const lemma::LemmaReport& r) {
  return {{"model_id", r.model_id},
          {"x", Nums(r.x)},
          {"label", r.label},
          {"panels", r.panels},
          {"theta_scale", Num(r.theta_scale)},
          {"exact_lhs", Num(r.exact_lhs)},
          {"quadrature_rhs", Num(r.quadrature_rhs)},
          {"endpoint_rhs", Num(r.endpoint_rhs)},
          {"abs_gap_quadrature", Num(r.abs_gap_quadrature)},
          {"abs_gap_endpoint", Num(r.abs_gap_endpoint)}};
}

lemma::LemmaReport LemmaFrom(const json& j) {
  lemma::LemmaReport r;
  r.model_id = j.at("model_id").get<std::string>();
  r.x = NumsFrom(j.at("x"));
  r.label = j.at("label").get<std::size_t>();
  r.panels = j.at("panels").get<int>();
  r.theta_scale = NumFrom(j.at("theta_scale"));
  r.exact_lhs = NumFrom(j.at("exact_lhs"));
  r.quadrature_rhs = NumFrom(j.at("quadrature_rhs"));
  r.endpoint_rhs = NumFrom(j.at("endpoint_rhs"));
  r.abs_gap_quadrature = NumFrom(j.at("abs_gap_quadrature"));
  r.abs_gap_endpoint = NumFrom(j.at("abs_gap_endpoint"));
  return r;
}

}  // namespace

void WriteCsv(std::ostream& out, const ExperimentReport& report) {
  out << "sample,metric,ratio,mse,psnr,ssim,rec_loss,compute_seconds,status\n";
  for (const Cell& c : report.cells) {
    const auto& q = c.quality;
    out << c.sample << ',' << c.metric << ',' << Format(c.ratio) << ','
        << (q ? Format(q->mse) : "NA") << ',' << (q ? Format(q->psnr) : "NA") << ','
        << (q ? Format(q->ssim) : "NA") << ',' << Format(c.rec_loss) << ','
        << Format(c.compute_seconds) << ',' << StatusName(c.status) << '\n';
  }
}

void WriteJson(std::ostream& out, const ExperimentReport& report) {
  json j;
  j["model"] = report.model;
  j["num_params"] = report.num_params;
  j["threshold"] = ThresholdJson(report.threshold);
  j["distance_ratio"] = Num(report.distance_ratio);

  json cells = json::array();
  for (const Cell& c : report.cells) {
    json q = nullptr;
    if (c.quality) {
      q = {{"mse", Num(c.quality->mse)},
           {"psnr", Num(c.quality->psnr)},
           {"ssim", Num(c.quality->ssim)}};
    }
    cells.push_back({{"sample", c.sample},
                     {"metric", c.metric},
                     {"ratio", Num(c.ratio)},
                     {"status", StatusName(c.status)},
                     {"message", c.message},
                     {"quality", q},
                     {"rec_loss", OptNum(c.rec_loss)},
                     {"compute_seconds", OptNum(c.compute_seconds)},
                     {"restart_index", c.restart_index},
                     {"loss_trace", Nums(c.loss_trace)}});
  }
  j["cells"] = std::move(cells);

  json aggs = json::array();
  json distance = json::array();
  for (const Aggregate& a : report.aggregates) {
    aggs.push_back({{"metric", a.metric},
                    {"ratio", Num(a.ratio)},
                    {"ok", a.ok},
                    {"infeasible", a.infeasible},
                    {"errors", a.errors},
                    {"mse", StatJson(a.mse)},
                    {"psnr", StatJson(a.psnr)},
                    {"ssim", StatJson(a.ssim)},
                    {"rec_loss", StatJson(a.rec_loss)}});
    if (a.ratio == report.distance_ratio) {
      distance.push_back({{"metric", a.metric}, {"mse", StatJson(a.mse)},
                          {"ssim", StatJson(a.ssim)}});
    }
  }
  j["aggregates"] = std::move(aggs);
  json minimal = json::array();
  for (const auto& m : report.minimal_ratios) {
    minimal.push_back({{"metric", m.metric},
                       {"ratio", m.ratio ? json(Num(*m.ratio)) : json("NA")}});
  }
  j["minimal_ratios"] = std::move(minimal);
  // Derived view of the aggregates at distance_ratio; not read back.
  j["distance_table"] = std::move(distance);
  json lemmas = json::array();
  for (const auto& r : report.lemma_reports) lemmas.push_back(LemmaJson(r));
  j["lemma_reports"] = std::move(lemmas);
  out << j.dump(2) << '\n';
}

ExperimentReport ReadJson(std::istream& in) {
  const json j = json::parse(in);
  ExperimentReport r;
  r.model = j.at("model").get<std::string>();
  r.num_params = j.at("num_params").get<std::size_t>();
  const auto& t = j.at("threshold");
  r.threshold.metric = t.at("metric").get<std::string>();
  r.threshold.direction = t.at("direction").get<std::string>() == "at_least"
                              ? Direction::kAtLeast
                              : Direction::kAtMost;
  r.threshold.value = NumFrom(t.at("value"));
  r.distance_ratio = NumFrom(j.at("distance_ratio"));
  for (const auto& c : j.at("cells")) {
    Cell cell;
    cell.sample = c.at("sample").get<std::size_t>();
    cell.metric = c.at("metric").get<std::string>();
    cell.ratio = NumFrom(c.at("ratio"));
    cell.status = ParseStatus(c.at("status").get<std::string>());
    cell.message = c.at("message").get<std::string>();
    if (const auto& q = c.at("quality"); !q.is_null()) {
      cell.quality = evalmetrics::QualityReport{NumFrom(q.at("mse")), NumFrom(q.at("psnr")),
                                                NumFrom(q.at("ssim"))};
    }
    cell.rec_loss = OptNumFrom(c.at("rec_loss"));
    cell.compute_seconds = OptNumFrom(c.at("compute_seconds"));
    cell.restart_index = c.at("restart_index").get<int>();
    cell.loss_trace = NumsFrom(c.at("loss_trace"));
    r.cells.push_back(std::move(cell));
  }
  for (const auto& a : j.at("aggregates")) {
    Aggregate agg;
    agg.metric = a.at("metric").get<std::string>();
    agg.ratio = NumFrom(a.at("ratio"));
    agg.ok = a.at("ok").get<std::size_t>();
    agg.infeasible = a.at("infeasible").get<std::size_t>();
    agg.errors = a.at("errors").get<std::size_t>();
    agg.mse = StatFrom(a.at("mse"));
    agg.psnr = StatFrom(a.at("psnr"));
    agg.ssim = StatFrom(a.at("ssim"));
    agg.rec_loss = StatFrom(a.at("rec_loss"));
    r.aggregates.push_back(std::move(agg));
  }
  for (const auto& m : j.at("minimal_ratios")) {
    MinimalRatio mr{m.at("metric").get<std::string>(), std::nullopt};
    if (!(m.at("ratio").is_string() && m.at("ratio") == "NA")) mr.ratio = NumFrom(m.at("ratio"));
    r.minimal_ratios.push_back(std::move(mr));
  }
  for (const auto& l : j.at("lemma_reports")) r.lemma_reports.push_back(LemmaFrom(l));
  return r;
}

std::vector<std::filesystem::path> Emit(const ExperimentReport& report,
                                        const std::filesystem::path& dir, bool csv,
                                        bool json_out) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory " + dir.string() + ": " +
                             ec.message());
  }
  std::vector<std::filesystem::path> written;
  auto write = [&](const std::string& name, auto&& fn) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    fn(out);
    out.close();
    if (!out) throw std::runtime_error("failed writing " + path.string());
    written.push_back(path);
  };
  if (csv) write("report.csv", [&](std::ostream& o) { WriteCsv(o, report); });
  if (json_out) write("report.json", [&](std::ostream& o) { WriteJson(o, report); });
  return written;
}

}  // namespace gradguard::harness
