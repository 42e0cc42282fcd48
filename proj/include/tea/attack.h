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


// Greedy attribution attack with masked-language-model candidates and a
// synonym-table baseline that shares the same greedy core.
//
// The attack ranks tokens by how much zeroing their embedding moves the
// attribution map, masks the ranked tokens in batches, and for each position
// keeps the candidate that moves the map furthest from the original while
// the predicted class stays put. Substitutions accumulate in the adversarial
// sample; distances are always taken against the original map.

#ifndef TEA_ATTACK_H_
#define TEA_ATTACK_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <nlohmann/json_fwd.hpp>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tea/attribution.h"
#include "tea/distances.h"
#include "tea/models.h"
#include "tea/text.h"

namespace tea {

inline constexpr std::size_t kDefaultCandidatesPerToken = 15;
inline constexpr double kDefaultBatchRatioCap = 0.15;

struct AttackConfig {
  double rho_max = 0.1;
  double rho_b = 0.1;
  // Mask one position per query regardless of rho_b.
  bool per_token_masking = false;
  std::size_t candidates_per_token = kDefaultCandidatesPerToken;
  AttributionMethod attribution_method = AttributionMethod::kSaliency;
  std::string attribution_distance_key = std::string(kPccKey);
  int ig_steps = kDefaultIgSteps;
  std::uint64_t seed = 0;

  // Throws ConfigError.
  void validate() const;
};

// min(rho_max, 0.15).
double rho_b_rule(double rho_max);

// Number of ranked positions the attack may visit: floor(|s| rho_max).
std::size_t position_budget(std::size_t num_tokens, double rho_max);

// Positions per batch: ceil(|s| rho_b), at least one.
std::size_t batch_size(std::size_t num_tokens, double rho_b);

// Candidate queries an attack issues when no query fails.
std::size_t predicted_queries(std::size_t num_tokens, double rho_max,
                              double rho_b);

// Importance I_i = d(A(s with token i zeroed), A(s)) for every token.
std::vector<double> importance_scores(const Classifier& classifier,
                                      const Attributor& attributor,
                                      const TokenizedText& text, int label,
                                      const AttributionMap& original);

// Token indices by descending importance, ties by ascending position.
std::vector<std::size_t> rank_by_importance(std::span<const double> scores);

std::vector<std::size_t> importance_ranking(const Classifier& classifier,
                                            const Attributor& attributor,
                                            const TokenizedText& text,
                                            int label);

// Splits the ranked prefix of length position_budget(|s|, rho_max) into
// consecutive batches of batch_size(|s|, rho_b) indices.
std::vector<std::vector<std::size_t>> make_batches(
    std::span<const std::size_t> ranked, std::size_t num_tokens,
    double rho_max, double rho_b);

// Where substitution candidates come from.
class CandidateSource {
 public:
  virtual ~CandidateSource() = default;
  virtual CandidateSet candidates(const TokenizedText& text,
                                  std::span<const std::size_t> positions,
                                  std::size_t per_position) const = 0;
  // Whether a call costs a model query (and is counted in the trace).
  virtual bool counts_queries() const = 0;
  virtual std::string name() const = 0;
};

class MlmCandidateSource final : public CandidateSource {
 public:
  explicit MlmCandidateSource(std::shared_ptr<const MaskedLanguageModel> mlm)
      : mlm_(std::move(mlm)) {}

  CandidateSet candidates(const TokenizedText& text,
                          std::span<const std::size_t> positions,
                          std::size_t per_position) const override {
    return mlm_->propose(text, positions, per_position);
  }
  bool counts_queries() const override { return true; }
  std::string name() const override { return mlm_->name(); }

 private:
  std::shared_ptr<const MaskedLanguageModel> mlm_;
};

// Static word -> neighbours table.
class SynonymTable {
 public:
  SynonymTable() = default;
  explicit SynonymTable(
      std::unordered_map<std::string, std::vector<std::string>> entries);

  // JSON object mapping each word to a list of words. Throws
  // ResolutionError for a missing file and ConfigError for a bad shape.
  static SynonymTable load(const std::string& path);
  static SynonymTable from_json(const nlohmann::json& j);

  // Empty when the word is absent.
  const std::vector<std::string>& neighbours(std::string_view word) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::vector<std::string>> entries_;
};

// Candidates in table order, scored by negative rank.
class SynonymCandidateSource final : public CandidateSource {
 public:
  explicit SynonymCandidateSource(std::shared_ptr<const SynonymTable> table)
      : table_(std::move(table)) {}

  CandidateSet candidates(const TokenizedText& text,
                          std::span<const std::size_t> positions,
                          std::size_t per_position) const override;
  bool counts_queries() const override { return false; }
  std::string name() const override { return "synonyms"; }

 private:
  std::shared_ptr<const SynonymTable> table_;
};

struct Substitution {
  std::size_t position = 0;
  std::string old_token;
  std::string new_token;
  double d_after = 0.0;
};

struct AttackTrace {
  std::string sample_id;
  std::string attack;  // "tea" or "baseline"
  std::string candidate_source;
  TokenizedText original;
  TokenizedText adversarial;
  std::vector<Substitution> substitutions;
  int label = 0;
  std::vector<double> original_probs;
  std::vector<double> adversarial_probs;
  AttributionMap original_attribution;
  AttributionMap adversarial_attribution;
  double rho = 0.0;
  double rho_max = 0.0;
  double rho_b = 0.0;
  double d_max = 0.0;
  double pcc = 1.0;
  bool constant_attribution = false;
  bool prediction_preserved = true;
  bool aborted = false;
  std::string abort_reason;
  std::uint64_t mlm_queries = 0;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const TokenizedText& text);
TokenizedText tokenized_text_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AttackTrace& trace);
AttackTrace attack_trace_from_json(const nlohmann::json& j);

// One trace per line.
void write_traces_jsonl(const std::string& path,
                        std::span<const AttackTrace> traces);
std::vector<AttackTrace> read_traces_jsonl(const std::string& path);

// The greedy core. Holds read-only handles; run() is safe to call from
// several threads at once.
class Attacker {
 public:
  Attacker(std::shared_ptr<const Classifier> classifier,
           std::shared_ptr<const TextAligner> aligner, AttackConfig config);

  const AttackConfig& config() const { return config_; }

  AttackTrace run(const TokenizedText& text, const CandidateSource& source,
                  std::string_view attack_name,
                  std::string_view sample_id = "") const;

 private:
  std::shared_ptr<const Classifier> classifier_;
  std::shared_ptr<const TextAligner> aligner_;
  AttackConfig config_;
  Attributor attributor_;
};

AttackTrace attack(std::shared_ptr<const Classifier> classifier,
                   std::shared_ptr<const MaskedLanguageModel> mlm,
                   std::shared_ptr<const TextAligner> aligner,
                   const TokenizedText& text, const AttackConfig& config);

AttackTrace baseline_synonym_attack(
    std::shared_ptr<const Classifier> classifier,
    std::shared_ptr<const TextAligner> aligner, const TokenizedText& text,
    const AttackConfig& config, std::shared_ptr<const SynonymTable> synonyms);

}  // namespace tea

#endif  // TEA_ATTACK_H_
