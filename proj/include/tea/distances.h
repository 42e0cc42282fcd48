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


// Attribution distance and input-perturbation distances.
//
// Every measure is addressed by a string key in configs and report columns:
// "pcc" for the attribution distance, "sts_use_like" and "sts_minilm_like"
// for the semantic distance under the matching encoder, "pp" for the
// relative perplexity increase and "ge" for the grammar-error increase.

#ifndef TEA_DISTANCES_H_
#define TEA_DISTANCES_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tea/attribution.h"
#include "tea/models.h"

namespace tea {

inline constexpr std::string_view kPccKey = "pcc";
inline constexpr std::string_view kPerplexityKey = "pp";
inline constexpr std::string_view kGrammarKey = "ge";

struct DistanceConfig {
  double eps_pp = 1e-6;  // denominator guard of the perplexity increase
  double eps_ds = 1e-3;  // floor for the input distance in the k ratio

  void validate() const;
};

// Pearson correlation, or nullopt when either vector is constant.
std::optional<double> pearson_correlation(std::span<const double> a,
                                          std::span<const double> b);

struct AttributionDistance {
  double value = 0.0;
  double pcc = 1.0;
  // Set when a map is constant and PCC is undefined; value is then 0.5.
  bool undefined = false;
};

// d = 1 - (1 + PCC) / 2. Needs equal lengths of at least two.
AttributionDistance attribution_distance(std::span<const double> a,
                                         std::span<const double> b);
AttributionDistance attribution_distance(const AttributionMap& a,
                                         const AttributionMap& b);

// Cosine of the two encodings. Exactly 1 for identical strings; throws
// Error on a zero-norm encoding.
double semantic_similarity(const SentenceEncoder& encoder,
                           std::string_view adversarial,
                           std::string_view original);

// d_s = 1 - (cos + 1) / 2.
double semantic_distance(const SentenceEncoder& encoder,
                         std::string_view adversarial,
                         std::string_view original);

// (PP(adv) - PP(s)) / (PP(s) + eps_pp). May be negative.
double perplexity_increase(const PerplexityModel& model,
                           std::string_view adversarial,
                           std::string_view original,
                           const DistanceConfig& config = {});

int grammar_error_increase(const GrammarChecker& checker,
                           std::string_view adversarial,
                           std::string_view original);

// Registry of distance keys.
bool is_attribution_distance_key(std::string_view key);
bool is_semantic_distance_key(std::string_view key);
bool is_distance_key(std::string_view key);
// Throws ConfigError naming the key if it is not registered.
void check_distance_key(std::string_view key);
std::vector<std::string> distance_keys();

}  // namespace tea

#endif  // TEA_DISTANCES_H_
