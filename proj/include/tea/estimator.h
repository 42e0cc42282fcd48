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


// Per-sample robustness constants and their dataset-level aggregates.
//
// k = d_attr / max(d_s, eps_ds) for every input distance d_s. Samples are
// bucketed by the perturbed ratio they actually reached; the first bucket is
// [0, e1] and the rest are (e_i, e_i+1].

#ifndef TEA_ESTIMATOR_H_
#define TEA_ESTIMATOR_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tea/attack.h"
#include "tea/distances.h"
#include "tea/models.h"

namespace tea {

inline constexpr std::string_view kFlagConstantAttribution =
    "constant-attribution";
inline constexpr std::string_view kFlagDsFloored = "ds-floored";
inline constexpr std::string_view kFlagAttackAborted = "attack-aborted";

std::vector<double> default_rho_edges();  // 0, .05, .1, .15, .2, .3, .4

struct KValue {
  double k = 0.0;
  bool floored = false;  // d_s was below eps_ds (or negative)
};

KValue sample_k(double d_attr, double d_s, const DistanceConfig& config);
// Same, after checking that the trace preserved the prediction.
KValue sample_k(const AttackTrace& trace, double d_attr, double d_s,
                const DistanceConfig& config);

// The input-distance models a trace is scored with. Encoders are keyed by
// their distance key ("sts_use_like", ...). Null members are skipped.
struct InputDistanceModels {
  std::map<std::string, std::shared_ptr<const SentenceEncoder>> encoders;
  std::shared_ptr<const PerplexityModel> perplexity;
  std::shared_ptr<const GrammarChecker> grammar;
};

struct SampleRobustness {
  std::string sample_id;
  std::uint64_t seed = 0;
  double rho_max = 0.0;
  double rho = 0.0;
  double d_attr = 0.0;
  double pcc = 1.0;
  // k per input-distance key: the semantic keys and "pp".
  std::map<std::string, double> k_by_distance;
  // Similarity 1 - d_s per semantic key.
  std::map<std::string, double> sts;
  std::optional<double> delta_pp;
  std::optional<int> ge;
  // Flag names; a floored key is recorded as "ds-floored:<key>".
  std::set<std::string> flags;

  bool has_flag(std::string_view flag) const;
};

SampleRobustness evaluate_trace(const AttackTrace& trace,
                                const InputDistanceModels& models,
                                const DistanceConfig& config);

nlohmann::json to_json(const SampleRobustness& sample);
SampleRobustness sample_robustness_from_json(const nlohmann::json& j);
void write_samples_jsonl(const std::string& path,
                         std::span<const SampleRobustness> samples);
std::vector<SampleRobustness> read_samples_jsonl(const std::string& path);

// Index of the bucket holding `rho`, or nullopt outside [e0, e_last].
std::optional<std::size_t> bucket_index(double rho,
                                        std::span<const double> edges);

// When one sample was attacked under several budgets, keeps per
// (sample, seed, bucket) the record with the largest k under `k_key`.
std::vector<SampleRobustness> select_per_bucket_max(
    std::span<const SampleRobustness> samples, std::span<const double> edges,
    std::string_view k_key);

struct MetricStats {
  std::size_t count = 0;
  std::optional<double> mean;
  std::optional<double> std;  // population
};

// Values are sorted before summation so the result does not depend on the
// input order.
MetricStats summarize(std::vector<double> values);

struct BucketStats {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  std::size_t constant_attribution = 0;  // excluded from pcc and k
  // Keys: rho, pcc, d_attr, delta_pp, ge, <sts key>, k_<distance key>.
  std::map<std::string, MetricStats> metrics;
};

struct RobustnessReport {
  std::string dataset;
  std::string model;
  std::string attribution;
  std::string attack;
  std::vector<double> edges;
  std::vector<BucketStats> buckets;
  std::map<std::string, MetricStats> overall;
  // AUC of each k_<key> curve over the non-empty buckets.
  std::map<std::string, double> auc_k;
  std::size_t sample_count = 0;
  std::size_t out_of_range = 0;
  std::size_t seed_count = 1;
};

RobustnessReport aggregate(std::span<const SampleRobustness> samples,
                           std::span<const double> edges);

// Mean over seeds of the per-seed means and stds; counts are summed.
RobustnessReport average_reports(std::span<const RobustnessReport> reports);

// Trapezoidal integral; rho must be strictly increasing, two points at least.
double auc_k(std::span<const std::pair<double, double>> curve);

// (auc_tea - auc_baseline) / auc_baseline; baseline must be positive.
double relative_auc_increase(double auc_tea, double auc_baseline);

// (mean rho, mean k) of every bucket with a k mean.
std::vector<std::pair<double, double>> k_curve(const RobustnessReport& report,
                                               std::string_view k_metric);

nlohmann::json to_json(const RobustnessReport& report);

// One row per bucket and metric, plus "all" rows for the overall stats.
std::string report_csv(const RobustnessReport& report);

}  // namespace tea

#endif  // TEA_ESTIMATOR_H_
