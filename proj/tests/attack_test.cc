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


#include "tea/attack.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <nlohmann/json.hpp>

#include "support.h"
#include "tea/classifier.h"
#include "tea/error.h"

namespace tea {
namespace {

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

std::shared_ptr<const Classifier> cnn() {
  return testing::fixture_classifier(Architecture::kCnn);
}

std::shared_ptr<const TextAligner> aligner() {
  return testing::fixture_resources().aligner;
}

TEST(BatchArithmetic, HundredTokens) {
  const auto ranked = iota(100);
  const auto batches = make_batches(ranked, 100, 0.15, 0.05);
  ASSERT_EQ(batches.size(), 3u);
  for (std::size_t b = 0; b < 3; ++b) {
    ASSERT_EQ(batches[b].size(), 5u);
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(batches[b][j], 5 * b + j);
  }
  EXPECT_EQ(predicted_queries(100, 0.15, 0.05), 3u);
  EXPECT_EQ(predicted_queries(100, 0.15, 0.01), 15u);
  EXPECT_EQ(position_budget(100, 0.15), 15u);
  EXPECT_EQ(batch_size(100, 0.05), 5u);
}

TEST(BatchArithmetic, SevenTokensHalfBatch) {
  EXPECT_EQ(batch_size(7, 0.5), 4u);
  const auto ranked = iota(7);
  const auto batches = make_batches(ranked, 7, 1.0, 0.5);
  ASSERT_EQ(batches.size(), 2u);
  EXPECT_EQ(batches[0], (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(batches[1], (std::vector<std::size_t>{4, 5, 6}));
}

TEST(BatchArithmetic, EdgeCases) {
  EXPECT_EQ(position_budget(9, 0.1), 0u);
  EXPECT_TRUE(make_batches(iota(9), 9, 0.1, 0.1).empty());
  EXPECT_EQ(predicted_queries(9, 0.1, 0.1), 0u);
  EXPECT_EQ(batch_size(3, 0.01), 1u);
  EXPECT_EQ(position_budget(10, 0.3), 3u);
  EXPECT_THROW(make_batches(iota(4), 4, 0.5, 0.0), Error);
  EXPECT_DOUBLE_EQ(rho_b_rule(0.1), 0.1);
  EXPECT_DOUBLE_EQ(rho_b_rule(0.4), 0.15);
}

TEST(BatchArithmetic, BatchesPartitionTheRankedPrefix) {
  for (std::size_t n = 1; n <= 60; ++n) {
    for (double rho_max : {0.05, 0.1, 0.25, 0.5, 1.0}) {
      for (double rho_b : {0.01, 0.05, 0.15, 0.5}) {
        if (rho_b > rho_max) continue;
        std::vector<std::size_t> ranked = iota(n);
        std::reverse(ranked.begin(), ranked.end());
        const auto batches = make_batches(ranked, n, rho_max, rho_b);
        EXPECT_EQ(batches.size(), predicted_queries(n, rho_max, rho_b));
        std::vector<std::size_t> flat;
        for (const auto& b : batches) {
          EXPECT_LE(b.size(), batch_size(n, rho_b));
          flat.insert(flat.end(), b.begin(), b.end());
        }
        ASSERT_EQ(flat.size(), std::min(n, position_budget(n, rho_max)));
        for (std::size_t j = 0; j < flat.size(); ++j) {
          EXPECT_EQ(flat[j], ranked[j]);
        }
      }
    }
  }
}

TEST(Ranking, DescendingWithPositionTieBreak) {
  const std::vector<double> scores = {0.1, 0.5, 0.1, 0.7, 0.5};
  EXPECT_EQ(rank_by_importance(scores),
            (std::vector<std::size_t>{3, 1, 4, 0, 2}));
}

TEST(Ranking, ImportanceIsAttributionShiftOfZeroedToken) {
  const auto model = cnn();
  const Attributor attributor(AttributionMethod::kSaliency);
  const TokenizedText t = testing::fixture_test_samples().front();
  const int label = model->predict(t);
  const AttributionMap original = attributor(*model, t, label);
  const auto scores =
      importance_scores(*model, attributor, t, label, original);
  ASSERT_EQ(scores.size(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Matrix zeroed = zero_token_embedding(*model, t, i);
    const auto probe = attributor.on_embedding(*model, zeroed,
                                               model->row_owners(t), t.size(),
                                               label);
    EXPECT_DOUBLE_EQ(scores[i],
                     attribution_distance(probe, original.scores).value);
    EXPECT_GE(scores[i], 0.0);
    EXPECT_LE(scores[i], 1.0);
  }
}

TEST(AttackConfig, Validation) {
  AttackConfig config;
  EXPECT_NO_THROW(config.validate());
  config.rho_max = 0.0;
  EXPECT_THROW(config.validate(), ConfigError);
  config.rho_max = 0.1;
  config.rho_b = 0.2;
  EXPECT_THROW(config.validate(), ConfigError);
  config.per_token_masking = true;
  EXPECT_NO_THROW(config.validate());
  config.attribution_distance_key = "spearman";
  EXPECT_THROW(config.validate(), ConfigError);
}

TEST(Attack, ContractHoldsOnFixtureSamples) {
  const auto& r = testing::fixture_resources();
  for (double rho_max : {0.1, 0.25}) {
    AttackConfig config;
    config.rho_max = rho_max;
    config.rho_b = rho_b_rule(rho_max);
    for (const TokenizedText& t : testing::fixture_test_samples()) {
      const AttackTrace trace = attack(cnn(), r.mlm("distilled"), aligner(),
                                       t, config);
      const auto violations = testing::trace_violations(trace, *cnn());
      EXPECT_TRUE(violations.empty())
          << t.original_text << ": " << violations.front();
      EXPECT_EQ(trace.mlm_queries, predicted_queries(t.size(), rho_max,
                                                     config.rho_b));
    }
  }
}

TEST(Attack, DeterministicUnderFixedSeed) {
  const auto& r = testing::fixture_resources();
  AttackConfig config;
  config.rho_max = 0.25;
  config.rho_b = 0.15;
  for (const TokenizedText& t : testing::fixture_test_samples()) {
    const AttackTrace a = attack(cnn(), r.mlm("distilled"), aligner(), t, config);
    const AttackTrace b = attack(cnn(), r.mlm("distilled"), aligner(), t, config);
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  }
}

TEST(Attack, SubstitutesSomething) {
  const auto& r = testing::fixture_resources();
  AttackConfig config;
  config.rho_max = 0.25;
  config.rho_b = 0.15;
  std::size_t edited = 0;
  for (const TokenizedText& t : testing::fixture_test_samples()) {
    edited += attack(cnn(), r.mlm("distilled"), aligner(), t, config)
                  .substitutions.empty()
                  ? 0
                  : 1;
  }
  EXPECT_GT(edited, testing::fixture_test_samples().size() / 2);
}

TEST(Attack, IdenticalCandidateSetsGiveIdenticalTraces) {
  const auto& r = testing::fixture_resources();
  AttackConfig config;
  config.rho_max = 0.25;
  config.rho_b = 0.25;
  config.candidates_per_token = 5;
  const Attacker attacker(cnn(), aligner(), config);
  for (const TokenizedText& t : testing::fixture_test_samples(12)) {
    const auto table = testing::scripted_table_for(t, *r.mlm("distilled"), 5);
    const auto mlm = std::make_shared<const testing::ScriptedMlm>(table);
    std::unordered_map<std::string, std::vector<std::string>> entries(
        table.begin(), table.end());
    const auto synonyms = std::make_shared<const SynonymTable>(entries);
    const AttackTrace a =
        attacker.run(t, MlmCandidateSource(mlm), "x", "id");
    const AttackTrace b =
        attacker.run(t, SynonymCandidateSource(synonyms), "x", "id");
    ASSERT_EQ(a.substitutions.size(), b.substitutions.size());
    for (std::size_t i = 0; i < a.substitutions.size(); ++i) {
      EXPECT_EQ(a.substitutions[i].position, b.substitutions[i].position);
      EXPECT_EQ(a.substitutions[i].new_token, b.substitutions[i].new_token);
      EXPECT_EQ(a.substitutions[i].d_after, b.substitutions[i].d_after);
    }
    EXPECT_EQ(a.adversarial.original_text, b.adversarial.original_text);
    EXPECT_EQ(b.mlm_queries, 0u);
  }
}

TEST(Attack, GreedyNeverBeatsExhaustiveSearch) {
  const auto& r = testing::fixture_resources();
  AttackConfig config;
  config.rho_max = 1.0;
  config.rho_b = 1.0;
  config.candidates_per_token = 2;
  const Attacker attacker(cnn(), aligner(), config);
  const Attributor attributor(AttributionMethod::kSaliency);
  std::size_t checked = 0;
  for (const TokenizedText& t : testing::fixture_test_samples(5)) {
    const auto table = testing::scripted_table_for(t, *r.mlm("distilled"), 2);
    const auto mlm = std::make_shared<const testing::ScriptedMlm>(table);
    const AttackTrace trace = attacker.run(t, MlmCandidateSource(mlm), "tea");
    const auto best =
        testing::exhaustive_d_max(*cnn(), *aligner(), attributor, t, table, 2);
    const double greedy =
        trace.substitutions.empty() ? 0.0 : trace.substitutions.back().d_after;
    EXPECT_LE(greedy, best.d_max + 1e-12) << t.original_text;
    if (++checked == 10) break;
  }
  EXPECT_EQ(checked, 10u);
}

TEST(Attack, MlmErrorAbortsWithFlag) {
  class FailingMlm final : public MaskedLanguageModel {
   public:
    std::string name() const override { return "failing"; }

   protected:
    CandidateSet do_propose(const TokenizedText&, std::span<const std::size_t>,
                            std::size_t) const override {
      throw MlmError("no capacity");
    }
  };
  AttackConfig config;
  config.rho_max = 0.25;
  config.rho_b = 0.15;
  const TokenizedText t = testing::fixture_test_samples().front();
  const AttackTrace trace = attack(cnn(), std::make_shared<FailingMlm>(),
                                   aligner(), t, config);
  EXPECT_TRUE(trace.aborted);
  EXPECT_NE(trace.abort_reason.find("no capacity"), std::string::npos);
  EXPECT_TRUE(trace.substitutions.empty());
  EXPECT_EQ(trace.adversarial.tokens, t.tokens);
}

TEST(Attack, PerTokenMaskingQueriesOncePerPosition) {
  const auto& r = testing::fixture_resources();
  AttackConfig config;
  config.rho_max = 0.25;
  config.rho_b = 0.25;
  config.per_token_masking = true;
  for (const TokenizedText& t : testing::fixture_test_samples()) {
    const AttackTrace trace =
        attack(cnn(), r.mlm("distilled"), aligner(), t, config);
    EXPECT_EQ(trace.mlm_queries, position_budget(t.size(), 0.25));
  }
}

TEST(Attack, BaselineUsesSynonymsOnly) {
  const auto synonyms = std::make_shared<const SynonymTable>(
      SynonymTable::load(testing::data_path("synonyms.json")));
  AttackConfig config;
  config.rho_max = 0.25;
  config.rho_b = 0.15;
  for (const TokenizedText& t : testing::fixture_test_samples()) {
    const AttackTrace trace =
        baseline_synonym_attack(cnn(), aligner(), t, config, synonyms);
    EXPECT_EQ(trace.attack, "baseline");
    EXPECT_EQ(trace.mlm_queries, 0u);
    EXPECT_TRUE(testing::trace_violations(trace, *cnn()).empty());
    for (const Substitution& s : trace.substitutions) {
      const auto& n = synonyms->neighbours(s.old_token);
      EXPECT_NE(std::find(n.begin(), n.end(), s.new_token), n.end());
    }
  }
}

TEST(SynonymTable, LoadErrors) {
  EXPECT_THROW(SynonymTable::load("/nonexistent/syn.json"), ResolutionError);
  EXPECT_THROW(SynonymTable::from_json(nlohmann::json::array()), ConfigError);
  EXPECT_THROW(SynonymTable::from_json({{"good", "fine"}}), ConfigError);
  const SynonymTable table = SynonymTable::from_json(
      {{"good", {"fine", "good", "fine", "great"}}});
  const auto source =
      SynonymCandidateSource(std::make_shared<const SynonymTable>(table));
  const TokenizedText t = aligner()->tokenize("good food .");
  const std::vector<std::size_t> positions = {0, 1};
  const CandidateSet set = source.candidates(t, positions, 5);
  ASSERT_EQ(set.per_position.at(0).size(), 2u);
  EXPECT_EQ(set.per_position.at(0)[0].token, "fine");
  EXPECT_EQ(set.per_position.at(0)[1].token, "great");
  EXPECT_TRUE(set.per_position.at(1).empty());
}

TEST(AttackTrace, JsonRoundTrip) {
  const auto& r = testing::fixture_resources();
  AttackConfig config;
  config.rho_max = 0.25;
  config.rho_b = 0.15;
  std::vector<AttackTrace> traces;
  for (const TokenizedText& t : testing::fixture_test_samples()) {
    traces.push_back(attack(cnn(), r.mlm("distilled"), aligner(), t, config));
    if (traces.size() == 5) break;
  }
  const auto path = std::filesystem::temp_directory_path() / "tea_traces.jsonl";
  write_traces_jsonl(path.string(), traces);
  const auto back = read_traces_jsonl(path.string());
  ASSERT_EQ(back.size(), traces.size());
  for (std::size_t i = 0; i < traces.size(); ++i) {
    EXPECT_EQ(to_json(back[i]).dump(), to_json(traces[i]).dump());
  }
  std::filesystem::remove(path);
  EXPECT_THROW(read_traces_jsonl(path.string()), ResolutionError);
}

}  // namespace
}  // namespace tea
