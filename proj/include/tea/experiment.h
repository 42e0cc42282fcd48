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


// Configuration-driven experiments: attack a test split under a sweep of
// budgets and seeds, score every trace, aggregate per rho bucket, average
// over seeds and write traces, per-sample records, CSV/JSON reports and an
// SVG plot. Also the runtime comparison of the attack variants.

#ifndef TEA_EXPERIMENT_H_
#define TEA_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tea/attack.h"
#include "tea/attribution.h"
#include "tea/classifier.h"
#include "tea/distances.h"
#include "tea/estimator.h"
#include "tea/language.h"
#include "tea/text.h"

namespace tea {

enum class AttackKind { kTea, kBaseline };

std::string to_string(AttackKind kind);
AttackKind parse_attack_kind(std::string_view name);

// "full", "distilled", "full+batch" or "distilled+batch". Without "+batch"
// every query masks a single position.
struct MlmVariant {
  std::string model = "distilled";
  bool batch = true;

  std::string name() const;
};

MlmVariant parse_mlm_variant(std::string_view name);

struct ExperimentConfig {
  // Dataset.
  std::string dataset_path;
  std::string dataset_name;
  std::size_t max_tokens = 32;
  std::size_t test_limit = 0;  // 0 keeps the whole test split
  SplitSpec split;

  // Model: either an architecture trained per seed or a checkpoint.
  std::optional<Architecture> architecture = Architecture::kCnn;
  std::string checkpoint;
  ClassifierShape shape;
  int max_epochs = 40;
  int patience = 6;
  double learning_rate = 0.01;

  AttributionMethod attribution = AttributionMethod::kSaliency;
  int ig_steps = kDefaultIgSteps;
  std::vector<AttackKind> attacks = {AttackKind::kTea};
  std::vector<double> rho_max = {0.1};
  // "min(rho_max,0.15)", "rho_max/3" or a number.
  std::string rho_b_rule = "min(rho_max,0.15)";
  std::size_t candidates_per_token = kDefaultCandidatesPerToken;
  std::vector<std::string> distances = {"pcc", "sts_use_like",
                                        "sts_minilm_like", "pp", "ge"};
  std::string perplexity_model = "bigram";
  DistanceConfig eps;
  std::vector<std::uint64_t> seeds = {0};
  MlmVariant mlm;
  std::string synonyms_path;
  std::string stop_words_path;
  std::string output_dir = "tea_output";
  std::size_t workers = 1;
  std::vector<double> rho_edges = default_rho_edges();

  // Throws ConfigError on any schema violation.
  void validate() const;

  double rho_b(double rho_max) const;
  // Key whose k selects among several budgets landing in one bucket.
  std::string primary_k_key() const;
  std::string model_name() const;
};

// Relative paths inside `j` are resolved against `base_dir`. Unknown keys
// and wrongly typed values raise ConfigError.
ExperimentConfig parse_experiment_config(const nlohmann::json& j,
                                         const std::string& base_dir = "");
ExperimentConfig load_experiment_config(const std::string& path);
// Every field, defaults included.
nlohmann::json to_json(const ExperimentConfig& config);

struct PreparedSeed {
  std::uint64_t seed = 0;
  std::shared_ptr<const Classifier> classifier;
  double validation_accuracy = 0.0;
  double baseline_accuracy = 0.0;
  std::vector<std::string> test_ids;
  std::vector<TokenizedText> test;
  std::vector<int> test_labels;
};

// Resolves every reference of a config up front (ConfigError,
// ResolutionError) and then hands out the pieces an experiment needs.
class ExperimentRunner {
 public:
  explicit ExperimentRunner(ExperimentConfig config);

  const ExperimentConfig& config() const { return config_; }
  const LanguageResources& resources() const { return resources_; }
  const RawCorpus& corpus() const { return corpus_; }

  // Splits with the seed and trains (or loads) the classifier.
  PreparedSeed prepare_seed(std::uint64_t seed) const;

  AttackConfig attack_config(double rho_max, std::uint64_t seed,
                             const MlmVariant& variant) const;

  std::unique_ptr<CandidateSource> candidate_source(
      AttackKind kind, const MlmVariant& variant) const;

  // Attacks every test sample of `prepared` with a pool of `workers`
  // threads. Results are in sample order.
  std::vector<AttackTrace> run_attacks(const PreparedSeed& prepared,
                                       AttackKind kind, double rho_max,
                                       const MlmVariant& variant,
                                       std::size_t workers) const;

  InputDistanceModels input_distance_models() const;

 private:
  ExperimentConfig config_;
  RawCorpus corpus_;
  LanguageResources resources_;
  std::shared_ptr<const SynonymTable> synonyms_;
  std::shared_ptr<ReferenceClassifier> checkpoint_model_;
  CheckpointManifest checkpoint_manifest_;
};

struct ExperimentResult {
  // Keyed by attack name ("tea", "baseline").
  std::map<std::string, RobustnessReport> reports;
  std::map<std::string, std::vector<RobustnessReport>> seed_reports;
  std::map<std::uint64_t, double> validation_accuracy;
  std::vector<std::string> artifacts;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

// Rebuilds reports, CSV, JSON and SVG from the per-sample records listed in
// output_dir/manifest.json.
ExperimentResult regenerate_reports(const std::string& output_dir);

struct TimingRecord {
  int variant = 0;  // 0 baseline, 1 full, 2 distilled, 3 distilled+batch
  std::string sample_id;
  double seconds = 0.0;
  std::uint64_t mlm_queries = 0;
  std::uint64_t predicted_queries = 0;
};

struct VariantSummary {
  int variant = 0;
  std::string label;
  double mean_seconds = 0.0;
  double std_seconds = 0.0;
  double median_seconds = 0.0;
  double mean_queries = 0.0;
  std::uint64_t total_queries = 0;
  std::uint64_t total_predicted_queries = 0;
};

struct BenchmarkResult {
  std::vector<TimingRecord> records;
  std::vector<VariantSummary> summaries;  // indexed by variant
};

// Runs variants 0-3 on the first `samples` test samples of the first seed at
// the first rho_max, with a single worker and `repeats` passes.
BenchmarkResult benchmark_variants(const ExperimentRunner& runner,
                                   std::size_t samples, int repeats = 1);

nlohmann::json to_json(const BenchmarkResult& result);

}  // namespace tea

#endif  // TEA_EXPERIMENT_H_
