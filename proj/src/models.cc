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

#include "tea/models.h"

#include <set>

#include "tea/error.h"

namespace tea {

Matrix Classifier::gradient(const Matrix&, int) const {
  throw UnsupportedMethodError("classifier does not expose gradients");
}

std::optional<AttentionHeads> Classifier::attention_weights(
    const Matrix&) const {
  return std::nullopt;
}

std::vector<std::size_t> Classifier::row_owners(
    const TokenizedText& text) const {
  std::vector<std::size_t> owners(text.size());
  for (std::size_t i = 0; i < owners.size(); ++i) owners[i] = i;
  return owners;
}

Vector Classifier::predict_probs(const TokenizedText& text) const {
  return predict_probs(embed(text));
}

int Classifier::predict(const TokenizedText& text) const {
  return predict(embed(text));
}

int Classifier::predict(const Matrix& embedding) const {
  const Vector probs = predict_probs(embedding);
  Eigen::Index best = 0;
  probs.maxCoeff(&best);
  return static_cast<int>(best);
}

Matrix zero_token_embedding(const Classifier& classifier,
                            const TokenizedText& text, std::size_t index) {
  if (index >= text.size()) {
    throw Error("zero_token_embedding: index " + std::to_string(index) +
                " out of range for " + std::to_string(text.size()) +
                " tokens");
  }
  Matrix x = classifier.embed(text);
  const auto owners = classifier.row_owners(text);
  for (std::size_t r = 0; r < owners.size(); ++r) {
    if (owners[r] == index) x.row(static_cast<Eigen::Index>(r)).setZero();
  }
  return x;
}

void CandidateSet::validate() const {
  for (const auto& [position, candidates] : per_position) {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (!seen.insert(candidates[i].token).second) {
        throw Error("candidate set: duplicate candidate '" +
                    candidates[i].token + "' at position " +
                    std::to_string(position));
      }
      if (i > 0 && candidates[i].score > candidates[i - 1].score) {
        throw Error("candidate set: candidates at position " +
                    std::to_string(position) + " are not sorted by score");
      }
    }
  }
}

CandidateSet MaskedLanguageModel::propose(const TokenizedText& text,
                                          std::span<const std::size_t> masked,
                                          std::size_t per_position) const {
  queries_.fetch_add(1);
  for (const std::size_t i : masked) {
    if (i >= text.size()) {
      throw MlmError("masked position " + std::to_string(i) +
                     " out of range for " + std::to_string(text.size()) +
                     " tokens");
    }
  }
  return do_propose(text, masked, per_position);
}

}  // namespace tea
