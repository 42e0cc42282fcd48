// Copyright 2026 The TEA Robustness Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "tea/estimator.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <tuple>

#include "tea/error.h"

namespace tea {
namespace {

std::string format_number(double v) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

nlohmann::json stats_json(const MetricStats& s) {
  nlohmann::json j = {{"count", s.count}};
  j["mean"] = s.mean ? nlohmann::json(*s.mean) : nlohmann::json(nullptr);
  j["std"] = s.std ? nlohmann::json(*s.std) : nlohmann::json(nullptr);
  return j;
}

// Collects metric values for a group of samples.
class MetricCollector {
 public:
  void add(const SampleRobustness& s) {
    values_["rho"].push_back(s.rho);
    if (!s.has_flag(kFlagConstantAttribution)) {
      values_["pcc"].push_back(s.pcc);
      values_["d_attr"].push_back(s.d_attr);
      for (const auto& [key, k] : s.k_by_distance) {
        values_["k_" + key].push_back(k);
      }
    }
    for (const auto& [key, sim] : s.sts) values_[key].push_back(sim);
    if (s.delta_pp) values_["delta_pp"].push_back(*s.delta_pp);
    if (s.ge) values_["ge"].push_back(static_cast<double>(*s.ge));
  }

  std::map<std::string, MetricStats> finish() {
    std::map<std::string, MetricStats> out;
    for (auto& [key, values] : values_) out[key] = summarize(std::move(values));
    return out;
  }

 private:
  std::map<std::string, std::vector<double>> values_;
};

// Mean over the inputs that have a mean; count summed.
MetricStats average_stats(const std::vector<const MetricStats*>& stats) {
  MetricStats out;
  std::vector<double> means, stds;
  for (const MetricStats* s : stats) {
    out.count += s->count;
    if (s->mean) means.push_back(*s->mean);
    if (s->std) stds.push_back(*s->std);
  }
  if (!means.empty()) out.mean = summarize(means).mean;
  if (!stds.empty()) out.std = summarize(stds).mean;
  return out;
}

std::map<std::string, MetricStats> average_metric_maps(
    const std::vector<const std::map<std::string, MetricStats>*>& maps) {
  std::set<std::string> keys;
  for (const auto* m : maps) {
    for (const auto& [key, unused] : *m) keys.insert(key);
  }
  std::map<std::string, MetricStats> out;
  for (const std::string& key : keys) {
    std::vector<const MetricStats*> stats;
    for (const auto* m : maps) {
      const auto it = m->find(key);
      if (it != m->end()) stats.push_back(&it->second);
    }
    out[key] = average_stats(stats);
  }
  return out;
}

void check_edges(std::span<const double> edges) {
  if (edges.size() < 2) throw Error("rho buckets need at least two edges");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) {
      throw Error("rho bucket edges must be strictly increasing");
    }
  }
}

}  // namespace

std::vector<double> default_rho_edges() {
  return {0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4};
}

KValue sample_k(double d_attr, double d_s, const DistanceConfig& config) {
  KValue out;
  if (d_s < config.eps_ds) out.floored = true;
  out.k = d_attr == 0.0 ? 0.0 : d_attr / std::max(d_s, config.eps_ds);
  return out;
}

KValue sample_k(const AttackTrace& trace, double d_attr, double d_s,
                const DistanceConfig& config) {
  if (!trace.prediction_preserved) {
    throw Error("sample_k: trace '" + trace.sample_id +
                "' changed the predicted class");
  }
  return sample_k(d_attr, d_s, config);
}

bool SampleRobustness::has_flag(std::string_view flag) const {
  return flags.count(std::string(flag)) > 0;
}

SampleRobustness evaluate_trace(const AttackTrace& trace,
                                const InputDistanceModels& models,
                                const DistanceConfig& config) {
  SampleRobustness s;
  s.sample_id = trace.sample_id;
  s.seed = trace.seed;
  s.rho_max = trace.rho_max;
  s.rho = trace.rho;
  s.d_attr = trace.d_max;
  s.pcc = trace.pcc;
  if (trace.constant_attribution) {
    s.flags.insert(std::string(kFlagConstantAttribution));
  }
  if (trace.aborted) s.flags.insert(std::string(kFlagAttackAborted));

  const std::string& adv = trace.adversarial.original_text;
  const std::string& orig = trace.original.original_text;
  auto add_k = [&](const std::string& key, double d_s) {
    const KValue k = sample_k(trace, s.d_attr, d_s, config);
    s.k_by_distance[key] = k.k;
    if (k.floored) {
      s.flags.insert(std::string(kFlagDsFloored));
      s.flags.insert(std::string(kFlagDsFloored) + ":" + key);
    }
  };
  for (const auto& [key, encoder] : models.encoders) {
    if (!encoder) continue;
    const double d_s = semantic_distance(*encoder, adv, orig);
    s.sts[key] = 1.0 - d_s;
    add_k(key, d_s);
  }
  if (models.perplexity) {
    s.delta_pp = perplexity_increase(*models.perplexity, adv, orig, config);
    add_k(std::string(kPerplexityKey), *s.delta_pp);
  }
  if (models.grammar) {
    s.ge = grammar_error_increase(*models.grammar, adv, orig);
  }
  return s;
}

nlohmann::json to_json(const SampleRobustness& s) {
  nlohmann::json j = {{"sample", s.sample_id},
                      {"seed", s.seed},
                      {"rho_max", s.rho_max},
                      {"rho", s.rho},
                      {"d_attr", s.d_attr},
                      {"pcc", s.pcc},
                      {"k", s.k_by_distance},
                      {"sts", s.sts},
                      {"flags", s.flags}};
  j["delta_pp"] = s.delta_pp ? nlohmann::json(*s.delta_pp) : nlohmann::json(nullptr);
  j["ge"] = s.ge ? nlohmann::json(*s.ge) : nlohmann::json(nullptr);
  return j;
}

SampleRobustness sample_robustness_from_json(const nlohmann::json& j) {
  SampleRobustness s;
  s.sample_id = j.at("sample").get<std::string>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.rho_max = j.at("rho_max").get<double>();
  s.rho = j.at("rho").get<double>();
  s.d_attr = j.at("d_attr").get<double>();
  s.pcc = j.at("pcc").get<double>();
  s.k_by_distance = j.at("k").get<std::map<std::string, double>>();
  s.sts = j.at("sts").get<std::map<std::string, double>>();
  s.flags = j.at("flags").get<std::set<std::string>>();
  if (!j.at("delta_pp").is_null()) s.delta_pp = j.at("delta_pp").get<double>();
  if (!j.at("ge").is_null()) s.ge = j.at("ge").get<int>();
  return s;
}

void write_samples_jsonl(const std::string& path,
                         std::span<const SampleRobustness> samples) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write samples to '" + path + "'");
  for (const SampleRobustness& s : samples) out << to_json(s).dump() << '\n';
}

std::vector<SampleRobustness> read_samples_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ResolutionError("cannot open sample file '" + path + "'");
  std::vector<SampleRobustness> samples;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    samples.push_back(sample_robustness_from_json(nlohmann::json::parse(line)));
  }
  return samples;
}

std::optional<std::size_t> bucket_index(double rho,
                                        std::span<const double> edges) {
  check_edges(edges);
  if (rho < edges.front() || rho > edges.back()) return std::nullopt;
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    if (rho <= edges[b + 1]) return b;
  }
  return std::nullopt;
}

std::vector<SampleRobustness> select_per_bucket_max(
    std::span<const SampleRobustness> samples, std::span<const double> edges,
    std::string_view k_key) {
  using Key = std::tuple<std::string, std::uint64_t, std::size_t>;
  std::map<Key, std::size_t> best;
  std::vector<std::size_t> unbucketed;
  auto score = [&](const SampleRobustness& s) {
    const auto it = s.k_by_distance.find(std::string(k_key));
    return it == s.k_by_distance.end() ? s.d_attr : it->second;
  };
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto b = bucket_index(samples[i].rho, edges);
    if (!b) {
      unbucketed.push_back(i);
      continue;
    }
    const Key key{samples[i].sample_id, samples[i].seed, *b};
    const auto it = best.find(key);
    if (it == best.end() || score(samples[i]) > score(samples[it->second])) {
      best[key] = i;
    }
  }
  std::vector<std::size_t> keep = unbucketed;
  for (const auto& [key, index] : best) keep.push_back(index);
  std::sort(keep.begin(), keep.end());
  std::vector<SampleRobustness> out;
  out.reserve(keep.size());
  for (const std::size_t i : keep) out.push_back(samples[i]);
  return out;
}

MetricStats summarize(std::vector<double> values) {
  MetricStats s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (const double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  std::vector<double> squares;
  squares.reserve(values.size());
  for (const double v : values) squares.push_back((v - mean) * (v - mean));
  std::sort(squares.begin(), squares.end());
  double ss = 0.0;
  for (const double v : squares) ss += v;
  s.mean = mean;
  s.std = std::sqrt(ss / static_cast<double>(values.size()));
  return s;
}

RobustnessReport aggregate(std::span<const SampleRobustness> samples,
                           std::span<const double> edges) {
  if (samples.empty()) throw Error("aggregate: no samples");
  check_edges(edges);
  RobustnessReport report;
  report.edges.assign(edges.begin(), edges.end());
  report.sample_count = samples.size();
  std::vector<MetricCollector> per_bucket(edges.size() - 1);
  std::vector<std::size_t> counts(edges.size() - 1, 0);
  std::vector<std::size_t> constant(edges.size() - 1, 0);
  MetricCollector overall;
  for (const SampleRobustness& s : samples) {
    overall.add(s);
    const auto b = bucket_index(s.rho, edges);
    if (!b) {
      ++report.out_of_range;
      continue;
    }
    per_bucket[*b].add(s);
    ++counts[*b];
    if (s.has_flag(kFlagConstantAttribution)) ++constant[*b];
  }
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    BucketStats bucket;
    bucket.lo = edges[b];
    bucket.hi = edges[b + 1];
    bucket.count = counts[b];
    bucket.constant_attribution = constant[b];
    bucket.metrics = per_bucket[b].finish();
    report.buckets.push_back(std::move(bucket));
  }
  report.overall = overall.finish();
  for (const auto& [metric, unused] : report.overall) {
    if (metric.rfind("k_", 0) != 0) continue;
    const auto curve = k_curve(report, metric);
    if (curve.size() >= 2) report.auc_k[metric] = auc_k(curve);
  }
  return report;
}

RobustnessReport average_reports(std::span<const RobustnessReport> reports) {
  if (reports.empty()) throw Error("average_reports: no reports");
  RobustnessReport out;
  const RobustnessReport& first = reports.front();
  out.dataset = first.dataset;
  out.model = first.model;
  out.attribution = first.attribution;
  out.attack = first.attack;
  out.edges = first.edges;
  out.seed_count = 0;
  for (const RobustnessReport& r : reports) {
    if (r.edges != first.edges) {
      throw Error("average_reports: reports use different rho buckets");
    }
    out.sample_count += r.sample_count;
    out.out_of_range += r.out_of_range;
    out.seed_count += r.seed_count;
  }
  for (std::size_t b = 0; b < first.buckets.size(); ++b) {
    BucketStats bucket;
    bucket.lo = first.buckets[b].lo;
    bucket.hi = first.buckets[b].hi;
    std::vector<const std::map<std::string, MetricStats>*> maps;
    for (const RobustnessReport& r : reports) {
      bucket.count += r.buckets[b].count;
      bucket.constant_attribution += r.buckets[b].constant_attribution;
      maps.push_back(&r.buckets[b].metrics);
    }
    bucket.metrics = average_metric_maps(maps);
    out.buckets.push_back(std::move(bucket));
  }
  std::vector<const std::map<std::string, MetricStats>*> overall;
  for (const RobustnessReport& r : reports) overall.push_back(&r.overall);
  out.overall = average_metric_maps(overall);
  std::map<std::string, std::vector<double>> aucs;
  for (const RobustnessReport& r : reports) {
    for (const auto& [key, value] : r.auc_k) aucs[key].push_back(value);
  }
  for (auto& [key, values] : aucs) out.auc_k[key] = *summarize(values).mean;
  return out;
}

double auc_k(std::span<const std::pair<double, double>> curve) {
  if (curve.size() < 2) throw Error("auc_k: needs at least two points");
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double width = curve[i].first - curve[i - 1].first;
    if (!(width > 0.0)) throw Error("auc_k: rho must be strictly increasing");
    area += 0.5 * width * (curve[i].second + curve[i - 1].second);
  }
  return area;
}

double relative_auc_increase(double auc_tea, double auc_baseline) {
  if (!(auc_baseline > 0.0)) {
    throw Error("relative_auc_increase: baseline AUC must be positive");
  }
  return (auc_tea - auc_baseline) / auc_baseline;
}

std::vector<std::pair<double, double>> k_curve(const RobustnessReport& report,
                                               std::string_view k_metric) {
  std::vector<std::pair<double, double>> curve;
  for (const BucketStats& b : report.buckets) {
    const auto rho = b.metrics.find("rho");
    const auto k = b.metrics.find(std::string(k_metric));
    if (rho == b.metrics.end() || k == b.metrics.end()) continue;
    if (!rho->second.mean || !k->second.mean) continue;
    if (!curve.empty() && !(*rho->second.mean > curve.back().first)) continue;
    curve.emplace_back(*rho->second.mean, *k->second.mean);
  }
  return curve;
}

nlohmann::json to_json(const RobustnessReport& report) {
  nlohmann::json buckets = nlohmann::json::array();
  for (const BucketStats& b : report.buckets) {
    nlohmann::json metrics = nlohmann::json::object();
    for (const auto& [key, stats] : b.metrics) metrics[key] = stats_json(stats);
    buckets.push_back({{"lo", b.lo},
                       {"hi", b.hi},
                       {"count", b.count},
                       {"constant_attribution", b.constant_attribution},
                       {"metrics", metrics}});
  }
  nlohmann::json overall = nlohmann::json::object();
  for (const auto& [key, stats] : report.overall) {
    overall[key] = stats_json(stats);
  }
  return {{"dataset", report.dataset},
          {"model", report.model},
          {"attribution", report.attribution},
          {"attack", report.attack},
          {"edges", report.edges},
          {"sample_count", report.sample_count},
          {"out_of_range", report.out_of_range},
          {"seed_count", report.seed_count},
          {"auc_k", report.auc_k},
          {"overall", overall},
          {"buckets", buckets}};
}

std::string report_csv(const RobustnessReport& report) {
  std::ostringstream out;
  out << "dataset,model,attribution,attack,bucket_lo,bucket_hi,metric,count,"
         "mean,std\n";
  const std::string prefix = report.dataset + "," + report.model + "," +
                             report.attribution + "," + report.attack + ",";
  auto row = [&](const std::string& lo, const std::string& hi,
                 const std::string& metric, const MetricStats& s) {
    out << prefix << lo << ',' << hi << ',' << metric << ',' << s.count << ','
        << (s.mean ? format_number(*s.mean) : "") << ','
        << (s.std ? format_number(*s.std) : "") << '\n';
  };
  for (const BucketStats& b : report.buckets) {
    const std::string lo = format_number(b.lo), hi = format_number(b.hi);
    if (b.metrics.empty()) {
      row(lo, hi, "rho", MetricStats{});
      continue;
    }
    for (const auto& [metric, stats] : b.metrics) row(lo, hi, metric, stats);
  }
  for (const auto& [metric, stats] : report.overall) {
    row("all", "all", metric, stats);
  }
  for (const auto& [metric, value] : report.auc_k) {
    MetricStats s;
    s.mean = value;
    row("all", "all", "auc_" + metric, s);
  }
  return out.str();
}

}  // namespace tea
