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

// Desk-scale language models: an add-k bigram causal LM with two perplexity
// readouts, two sentence encoders, a rule-based grammar checker, and a
// context masked language model with a full and a distilled configuration.

#ifndef TEA_LANGUAGE_H_
#define TEA_LANGUAGE_H_

#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tea/embeddings.h"
#include "tea/models.h"
#include "tea/text.h"

namespace tea {

// Causal LM interface: natural-log probability of every word token of
// `text` given its prefix, followed by the end-of-sequence token.
class CausalLanguageModel {
 public:
  virtual ~CausalLanguageModel() = default;
  virtual std::vector<double> token_log_probs(std::string_view text) const = 0;
};

// P(w | v) = (c(v, w) + k) / (c(v) + k |V|), where V holds the training
// words plus <unk> and </s>.
class BigramLanguageModel final : public CausalLanguageModel {
 public:
  static BigramLanguageModel build(const std::vector<std::string>& texts,
                                   double add_k = 0.1);

  std::vector<double> token_log_probs(std::string_view text) const override;
  double probability(std::string_view previous, std::string_view word) const;
  std::size_t vocabulary_size() const { return vocabulary_size_; }

 private:
  double add_k_ = 0.1;
  std::size_t vocabulary_size_ = 0;
  std::unordered_map<std::string, double> context_counts_;
  std::unordered_map<std::string, double> bigram_counts_;
  std::unordered_map<std::string, double> unigram_counts_;
};

// exp of the mean negative log-likelihood of the observed tokens.
class TokenPerplexity final : public PerplexityModel {
 public:
  explicit TokenPerplexity(std::shared_ptr<const CausalLanguageModel> lm)
      : lm_(std::move(lm)) {}
  double perplexity(std::string_view text) const override;
  std::string name() const override { return "bigram"; }

 private:
  std::shared_ptr<const CausalLanguageModel> lm_;
};

// The exponentiated-entropy form 2^(-sum p log2 p) over the per-token
// probabilities. Kept for comparison with TokenPerplexity.
class EntropyPerplexity final : public PerplexityModel {
 public:
  explicit EntropyPerplexity(std::shared_ptr<const CausalLanguageModel> lm)
      : lm_(std::move(lm)) {}
  double perplexity(std::string_view text) const override;
  std::string name() const override { return "bigram_entropy"; }

 private:
  std::shared_ptr<const CausalLanguageModel> lm_;
};

// Mean of word vectors over non-punctuation tokens. Unknown words use a
// hashed unit vector.
class MeanEmbeddingEncoder final : public SentenceEncoder {
 public:
  explicit MeanEmbeddingEncoder(std::shared_ptr<const EmbeddingTable> table)
      : table_(std::move(table)) {}
  Vector encode(std::string_view text) const override;
  int dim() const override { return table_->dim(); }
  std::string name() const override { return "sts_use_like"; }

 private:
  std::shared_ptr<const EmbeddingTable> table_;
};

// Smooth-inverse-frequency weighted average with the corpus' first
// principal component removed.
class SifEncoder final : public SentenceEncoder {
 public:
  static SifEncoder build(std::shared_ptr<const EmbeddingTable> table,
                          const std::vector<std::string>& texts,
                          double smoothing = 1e-3);
  Vector encode(std::string_view text) const override;
  int dim() const override { return table_->dim(); }
  std::string name() const override { return "sts_minilm_like"; }

 private:
  Vector weighted_average(std::string_view text) const;

  std::shared_ptr<const EmbeddingTable> table_;
  std::unordered_map<std::string, double> frequency_;
  double smoothing_ = 1e-3;
  Vector principal_;
};

// Rules: consecutive repeated word; text not ending in . ! ?; odd number of
// double quotes; each unmatched bracket; determiner and noun disagreeing in
// number for a closed word list.
class RuleBasedGrammarChecker final : public GrammarChecker {
 public:
  int error_count(std::string_view text) const override;
  std::string name() const override { return "rules"; }
};

struct MlmConfig {
  std::string name = "mlm_distilled";
  int layers = 2;
  int window = 2;
  double context_weight = 2.0;
  double bigram_weight = 0.97;  // interpolation with the unigram prior
};

MlmConfig full_mlm_config();
MlmConfig distilled_mlm_config();

// Scores each whole-word vocabulary entry at a masked slot by bigram fit to
// its unmasked neighbours plus cosine agreement with a contextual vector.
// The contextual vector comes from `layers` rounds of windowed averaging over
// the whole sequence, so the per-query cost grows with sequence length and
// depth the way a transformer's does.
//
// A masked classifier token is replaced by one [MASK] slot (its
// continuation subtokens are dropped) and candidates are proposed for that
// slot. Candidates equal to the original token, punctuation and special
// tokens are filtered out.
class ContextMaskedLanguageModel final : public MaskedLanguageModel {
 public:
  static std::shared_ptr<ContextMaskedLanguageModel> build(
      const std::vector<std::string>& texts,
      std::shared_ptr<const WordPieceTokenizer> tokenizer,
      std::shared_ptr<const EmbeddingTable> embeddings,
      const MlmConfig& config);

  std::string name() const override { return config_.name; }
  const MlmConfig& config() const { return config_; }

 protected:
  CandidateSet do_propose(const TokenizedText& text,
                          std::span<const std::size_t> masked,
                          std::size_t per_position) const override;

 private:
  ContextMaskedLanguageModel() = default;

  double log_bigram(std::string_view previous, std::string_view word) const;
  double log_unigram(std::string_view word) const;

  MlmConfig config_;
  std::shared_ptr<const WordPieceTokenizer> tokenizer_;
  std::shared_ptr<const EmbeddingTable> embeddings_;
  std::unordered_map<std::string, double> unigram_;
  std::unordered_map<std::string, double> context_;
  std::unordered_map<std::string, double> bigram_;
  double total_ = 0.0;
  std::vector<std::string> candidates_;
  Matrix candidate_vectors_;  // unit rows
};

// Everything derived from an unlabeled text collection: the frozen embedding
// table, the MLM tokenizer, and the registry of language models addressed by
// name in experiment configs.
struct LanguageResources {
  std::shared_ptr<const EmbeddingTable> embeddings;
  std::shared_ptr<const WordPieceTokenizer> mlm_tokenizer;
  std::shared_ptr<const StopWordList> stop_words;
  std::shared_ptr<const TextAligner> aligner;
  std::shared_ptr<const BigramLanguageModel> bigram;
  std::shared_ptr<const ContextMaskedLanguageModel> mlm_full;
  std::shared_ptr<const ContextMaskedLanguageModel> mlm_distilled;
  std::shared_ptr<const SentenceEncoder> use_like;
  std::shared_ptr<const SentenceEncoder> minilm_like;
  std::shared_ptr<const GrammarChecker> grammar;

  // `embeddings` may be supplied (e.g. from a checkpoint); otherwise it is
  // built from `texts`.
  static LanguageResources build(
      const std::vector<std::string>& texts,
      std::shared_ptr<const StopWordList> stop_words,
      std::shared_ptr<const EmbeddingTable> embeddings = nullptr);

  // Registry lookups; throw ConfigError on unknown names.
  std::shared_ptr<const MaskedLanguageModel> mlm(std::string_view name) const;
  std::shared_ptr<const SentenceEncoder> sentence_encoder(
      std::string_view name) const;
  std::shared_ptr<const PerplexityModel> perplexity_model(
      std::string_view name) const;
};

}  // namespace tea

#endif  // TEA_LANGUAGE_H_
