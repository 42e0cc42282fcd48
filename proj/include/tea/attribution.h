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

// Per-token attribution maps.
//
// Gradient methods reduce over embedding dimensions by a signed sum, so a
// positive score means the token pushes towards the target class. Scores of
// embedding rows that belong to the same classifier token are summed.

#ifndef TEA_ATTRIBUTION_H_
#define TEA_ATTRIBUTION_H_

#include <cstddef>
#include <nlohmann/json_fwd.hpp>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tea/models.h"

namespace tea {

enum class AttributionMethod { kSaliency, kIntegratedGradients, kAttention };

// "S", "IG", "A".
std::string to_string(AttributionMethod method);
AttributionMethod parse_attribution_method(std::string_view name);

struct AttributionMap {
  std::vector<double> scores;
  AttributionMethod method = AttributionMethod::kSaliency;
  int label = 0;
  std::string sample_ref;

  std::size_t size() const { return scores.size(); }
};

nlohmann::json to_json(const AttributionMap& map);
AttributionMap attribution_map_from_json(const nlohmann::json& j);

inline constexpr int kDefaultIgSteps = 50;

AttributionMap saliency(const Classifier& classifier, const TokenizedText& text,
                        int label);

// Zero-embedding baseline, midpoint Riemann sum with `steps` points.
AttributionMap integrated_gradients(const Classifier& classifier,
                                    const TokenizedText& text, int label,
                                    int steps = kDefaultIgSteps);

// Attention received by each token, renormalised to sum to one.
AttributionMap attention_attribution(const Classifier& classifier,
                                     const TokenizedText& text, int label);

// Sums per-row scores into their owning classifier tokens.
std::vector<double> pool_rows(const Vector& row_scores,
                              std::span<const std::size_t> owners,
                              std::size_t num_tokens);

// Attribution on an explicit embedding matrix. The attack evaluates
// attributions of zeroed and substituted embeddings through this type.
class Attributor {
 public:
  explicit Attributor(AttributionMethod method, int ig_steps = kDefaultIgSteps);

  AttributionMethod method() const { return method_; }
  int ig_steps() const { return ig_steps_; }

  // Throws UnsupportedMethodError if the classifier lacks what the method
  // needs (gradients or attention).
  void check_supported(const Classifier& classifier) const;

  std::vector<double> on_embedding(const Classifier& classifier,
                                   const Matrix& embedding,
                                   std::span<const std::size_t> owners,
                                   std::size_t num_tokens, int label) const;

  AttributionMap operator()(const Classifier& classifier,
                            const TokenizedText& text, int label) const;

 private:
  AttributionMethod method_;
  int ig_steps_;
};

}  // namespace tea

#endif  // TEA_ATTRIBUTION_H_
