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


#include "tea/language.h"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "support.h"
#include "tea/error.h"
#include "tea/text.h"

namespace tea {
namespace {

TEST(BigramLanguageModel, HandComputedPerplexity) {
  // Vocabulary {a, b, c} plus <unk> and </s>; add-k 0.1.
  auto lm = std::make_shared<const BigramLanguageModel>(
      BigramLanguageModel::build({"a b", "a c"}, 0.1));
  EXPECT_EQ(lm->vocabulary_size(), 5u);
  const std::vector<double> lp = lm->token_log_probs("a b");
  ASSERT_EQ(lp.size(), 3u);
  const double p_a = 2.1 / 2.5;   // P(a | <s>)
  const double p_b = 1.1 / 2.5;   // P(b | a)
  const double p_end = 1.1 / 1.5; // P(</s> | b)
  EXPECT_NEAR(lp[0], std::log(p_a), 1e-12);
  EXPECT_NEAR(lp[1], std::log(p_b), 1e-12);
  EXPECT_NEAR(lp[2], std::log(p_end), 1e-12);

  const TokenPerplexity pp(lm);
  EXPECT_NEAR(pp.perplexity("a b"),
              std::exp(-(std::log(p_a) + std::log(p_b) + std::log(p_end)) / 3),
              1e-12);
  // Unseen words map to <unk>, which has no counts.
  EXPECT_NEAR(lm->probability("a", "zebra"), 0.1 / 2.5, 1e-12);
}

TEST(BigramLanguageModel, ProbabilitiesSumToOne) {
  const auto lm = BigramLanguageModel::build({"a b", "a c", "b a"}, 0.5);
  for (const char* previous : {"a", "b", "c"}) {
    double total = 0.0;
    for (const char* next : {"a", "b", "c", "<unk>", "</s>"}) {
      total += lm.probability(previous, next);
    }
    EXPECT_NEAR(total, 1.0, 1e-12) << previous;
  }
}

TEST(EntropyPerplexity, DiffersFromTokenPerplexity) {
  auto lm = std::make_shared<const BigramLanguageModel>(
      BigramLanguageModel::build({"a b", "a c"}, 0.1));
  const double token = TokenPerplexity(lm).perplexity("a b");
  const double entropy = EntropyPerplexity(lm).perplexity("a b");
  EXPECT_GT(entropy, 0.0);
  EXPECT_NE(token, entropy);
}

TEST(RuleBasedGrammarChecker, Rules) {
  const RuleBasedGrammarChecker checker;
  EXPECT_EQ(checker.error_count("the film was good ."), 0);
  EXPECT_EQ(checker.error_count("the film was good"), 1);
  EXPECT_EQ(checker.error_count("the the film was good ."), 1);
  EXPECT_EQ(checker.error_count("she said \"good ."), 1);
  EXPECT_EQ(checker.error_count("it was ( good ."), 1);
  EXPECT_EQ(checker.error_count("it was good ) ."), 1);
  EXPECT_EQ(checker.error_count("a films and these film ."), 2);
  EXPECT_EQ(checker.error_count("he said \"good .\""), 0);
  EXPECT_EQ(checker.error_count(""), 0);
}

TEST(SentenceEncoders, DeterministicAndUnitSimilarity) {
  const auto& r = testing::fixture_resources();
  const std::string text = "the battery is great .";
  for (const auto& enc : {r.use_like, r.minilm_like}) {
    const Vector a = enc->encode(text);
    const Vector b = enc->encode(text);
    EXPECT_EQ(a.size(), enc->dim());
    EXPECT_TRUE(a == b);
    EXPECT_GT(a.norm(), 0.0);
  }
  EXPECT_EQ(r.sentence_encoder("sts_use_like")->name(), "sts_use_like");
  EXPECT_EQ(r.sentence_encoder("sts_minilm_like")->name(), "sts_minilm_like");
  EXPECT_THROW(r.sentence_encoder("sts_other"), ConfigError);
}

TEST(ContextMaskedLanguageModel, CandidatesAreCleanWholeWords) {
  const auto& r = testing::fixture_resources();
  for (const auto& mlm : {r.mlm("distilled"), r.mlm("full")}) {
    for (const TokenizedText& t : testing::fixture_test_samples()) {
      std::vector<std::size_t> masked;
      for (std::size_t i = 0; i < t.size(); i += 3) masked.push_back(i);
      const CandidateSet set = mlm->propose(t, masked, 15);
      ASSERT_EQ(set.per_position.size(), masked.size());
      for (const auto& [position, list] : set.per_position) {
        EXPECT_LE(list.size(), 15u);
        for (std::size_t c = 0; c < list.size(); ++c) {
          const std::string& w = list[c].token;
          EXPECT_FALSE(WordPieceTokenizer::is_special(w)) << w;
          EXPECT_FALSE(WordPieceTokenizer::is_continuation(w)) << w;
          EXPECT_FALSE(is_punctuation(w)) << w;
          EXPECT_NE(w, t.tokens[position]);
          if (c > 0) EXPECT_GE(list[c - 1].score, list[c].score);
        }
      }
    }
  }
}

TEST(ContextMaskedLanguageModel, OneQueryPerProposeCall) {
  const auto& r = testing::fixture_resources();
  auto mlm = std::const_pointer_cast<MaskedLanguageModel>(r.mlm("distilled"));
  const TokenizedText t = testing::fixture_test_samples().front();
  mlm->reset_query_count();
  const std::vector<std::size_t> one = {0};
  const std::vector<std::size_t> many = {0, 1, 2};
  mlm->propose(t, one, 5);
  mlm->propose(t, many, 5);
  EXPECT_EQ(mlm->query_count(), 2u);
  mlm->reset_query_count();
  EXPECT_EQ(mlm->query_count(), 0u);
}

TEST(ContextMaskedLanguageModel, Deterministic) {
  const auto& r = testing::fixture_resources();
  const auto mlm = r.mlm("full");
  const TokenizedText t = testing::fixture_test_samples().front();
  const std::vector<std::size_t> masked = {1, 2};
  const CandidateSet a = mlm->propose(t, masked, 10);
  const CandidateSet b = mlm->propose(t, masked, 10);
  EXPECT_EQ(a.per_position, b.per_position);
}

TEST(ContextMaskedLanguageModel, FullIsDeeperThanDistilled) {
  EXPECT_GT(full_mlm_config().layers, distilled_mlm_config().layers);
  EXPECT_GE(full_mlm_config().window, distilled_mlm_config().window);
}

TEST(LanguageResources, RegistryLookups) {
  const auto& r = testing::fixture_resources();
  EXPECT_EQ(r.mlm("full")->name(), "mlm_full");
  EXPECT_EQ(r.mlm("distilled")->name(), "mlm_distilled");
  EXPECT_THROW(r.mlm("huge"), ConfigError);
  EXPECT_EQ(r.perplexity_model("bigram")->name(), "bigram");
  EXPECT_THROW(r.perplexity_model("gpt"), ConfigError);
}

}  // namespace
}  // namespace tea
