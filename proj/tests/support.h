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


// Fixtures shared by the unit tests and the acceptance binary: the bundled
// corpus, language resources and trained reference classifiers (built once
// and cached), plus a linear classifier and a scripted MLM with known
// behaviour.

#ifndef TEA_TESTS_SUPPORT_H_
#define TEA_TESTS_SUPPORT_H_

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tea/attack.h"
#include "tea/attribution.h"
#include "tea/classifier.h"
#include "tea/language.h"
#include "tea/models.h"
#include "tea/text.h"

namespace tea::testing {

std::string data_path(std::string_view name);

const RawCorpus& fixture_corpus();
const LanguageResources& fixture_resources();
const CorpusSplit& fixture_split();

// Trained on the fixture split with seed 0 and cached per architecture.
std::shared_ptr<const ReferenceClassifier> fixture_classifier(
    Architecture architecture);

// Tokenized fixture test samples, truncated to max_tokens.
std::vector<TokenizedText> fixture_test_samples(std::size_t max_tokens = 32);

// A text of exactly `tokens` classifier tokens made by joining fixture
// samples.
TokenizedText long_fixture_text(std::size_t tokens);

// Two classes: o_1 = 1/2 + sum_j w . x_j, o_0 = 1 - o_1. Linear, so its
// gradient is constant and integrated gradients are exact.
class LinearClassifier final : public Classifier {
 public:
  LinearClassifier(std::shared_ptr<const EmbeddingTable> table, Vector weights)
      : table_(std::move(table)), weights_(std::move(weights)) {}

  int num_classes() const override { return 2; }
  int embedding_dim() const override {
    return static_cast<int>(weights_.size());
  }
  Matrix embed(const TokenizedText& text) const override;
  Vector predict_probs(const Matrix& embedding) const override;
  Matrix gradient(const Matrix& embedding, int label) const override;
  bool has_gradient() const override { return true; }

 private:
  std::shared_ptr<const EmbeddingTable> table_;
  Vector weights_;
};

// Proposes fixed candidates looked up by the masked token's text,
// independent of context.
class ScriptedMlm final : public MaskedLanguageModel {
 public:
  explicit ScriptedMlm(std::map<std::string, std::vector<std::string>> table)
      : table_(std::move(table)) {}
  std::string name() const override { return "scripted"; }

 protected:
  CandidateSet do_propose(const TokenizedText& text,
                          std::span<const std::size_t> masked,
                          std::size_t per_position) const override;

 private:
  std::map<std::string, std::vector<std::string>> table_;
};

// Context-free candidate table for `text`: each attackable token maps to
// the top `per_position` proposals of `mlm` for its own position.
std::map<std::string, std::vector<std::string>> scripted_table_for(
    const TokenizedText& text, const MaskedLanguageModel& mlm,
    std::size_t per_position);

// Contract violations of a finished attack trace, empty when it holds:
// preserved prediction, strictly increasing d_after, the rho budget, no
// stop-word or punctuation edits, and tokens matching the substitution log.
std::vector<std::string> trace_violations(const AttackTrace& trace,
                                          const Classifier& classifier);

// Exhaustive maximum of the attribution distance over every combination of
// keep-or-substitute at each attackable position, with candidates taken
// from `table` and filtered as the attack filters them. Only combinations
// that keep the predicted class count. Also returns how many combinations
// were scored.
struct ExhaustiveResult {
  double d_max = 0.0;
  std::size_t combinations = 0;
};
ExhaustiveResult exhaustive_d_max(
    const Classifier& classifier, const TextAligner& aligner,
    const Attributor& attributor, const TokenizedText& text,
    const std::map<std::string, std::vector<std::string>>& table,
    std::size_t per_position);

}  // namespace tea::testing

#endif  // TEA_TESTS_SUPPORT_H_
