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

// Abstract model interfaces. Everything learned sits behind one of these,
// so the attack and the estimator never depend on a concrete model.
//
// All handles are read-only after construction and are safe to call from
// several threads at once.

#ifndef TEA_MODELS_H_
#define TEA_MODELS_H_

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tea/embeddings.h"
#include "tea/text.h"

namespace tea {

using AttentionHeads = std::vector<Matrix>;

// A text classifier split into an embedding step and a differentiable head:
// embed(t) = X with one row per internal unit, predict_probs(X) = o.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual int num_classes() const = 0;
  virtual int embedding_dim() const = 0;
  virtual Matrix embed(const TokenizedText& text) const = 0;
  virtual Vector predict_probs(const Matrix& embedding) const = 0;

  // d o_label / d X, same shape as X. Throws UnsupportedMethodError when
  // has_gradient() is false.
  virtual Matrix gradient(const Matrix& embedding, int label) const;
  virtual bool has_gradient() const { return false; }

  // Final attention layer as one (queries x keys) matrix per head, keys
  // being embedding rows; nullopt for models without attention.
  virtual std::optional<AttentionHeads> attention_weights(
      const Matrix& embedding) const;

  // Classifier token owning each embedding row. Identity unless the model
  // splits tokens into several rows.
  virtual std::vector<std::size_t> row_owners(const TokenizedText& text) const;

  Vector predict_probs(const TokenizedText& text) const;
  int predict(const TokenizedText& text) const;
  int predict(const Matrix& embedding) const;
};

// Embedding of `text` with every row owned by token `index` set to zero.
Matrix zero_token_embedding(const Classifier& classifier,
                            const TokenizedText& text, std::size_t index);

struct Candidate {
  std::string token;
  double score = 0.0;

  bool operator==(const Candidate&) const = default;
};

// Per classifier-token position, candidates sorted by descending score.
struct CandidateSet {
  std::map<std::size_t, std::vector<Candidate>> per_position;

  void validate() const;
};

class MaskedLanguageModel {
 public:
  virtual ~MaskedLanguageModel() = default;

  // Masks the given classifier tokens of `text` in a single query and
  // returns at most `per_position` whole-word candidates for each of them.
  // Each call counts as exactly one query.
  CandidateSet propose(const TokenizedText& text,
                       std::span<const std::size_t> masked,
                       std::size_t per_position) const;

  std::uint64_t query_count() const { return queries_.load(); }
  void reset_query_count() { queries_.store(0); }
  virtual std::string name() const = 0;

 protected:
  virtual CandidateSet do_propose(const TokenizedText& text,
                                  std::span<const std::size_t> masked,
                                  std::size_t per_position) const = 0;

 private:
  mutable std::atomic<std::uint64_t> queries_{0};
};

class SentenceEncoder {
 public:
  virtual ~SentenceEncoder() = default;
  virtual Vector encode(std::string_view text) const = 0;
  virtual int dim() const = 0;
  virtual std::string name() const = 0;
};

class PerplexityModel {
 public:
  virtual ~PerplexityModel() = default;
  virtual double perplexity(std::string_view text) const = 0;
  virtual std::string name() const = 0;
};

class GrammarChecker {
 public:
  virtual ~GrammarChecker() = default;
  virtual int error_count(std::string_view text) const = 0;
  virtual std::string name() const = 0;
};

}  // namespace tea

#endif  // TEA_MODELS_H_
