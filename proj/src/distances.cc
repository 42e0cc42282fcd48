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


#include "tea/distances.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>

#include "tea/error.h"

namespace tea {
namespace {

constexpr std::array<std::string_view, 2> kSemanticKeys = {"sts_use_like",
                                                           "sts_minilm_like"};

}  // namespace

void DistanceConfig::validate() const {
  if (!(eps_pp > 0.0)) throw ConfigError("eps_pp must be positive");
  if (!(eps_ds > 0.0)) throw ConfigError("eps_ds must be positive");
}

std::optional<double> pearson_correlation(std::span<const double> a,
                                          std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error("pearson_correlation: lengths differ (" +
                std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                ")");
  }
  if (a.size() < 2) throw Error("pearson_correlation: needs two entries");
  const auto n = static_cast<double>(a.size());
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= n;
  mean_b /= n;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a <= 0.0 || var_b <= 0.0) return std::nullopt;
  const double r = cov / std::sqrt(var_a * var_b);
  return std::clamp(r, -1.0, 1.0);
}

AttributionDistance attribution_distance(std::span<const double> a,
                                         std::span<const double> b) {
  AttributionDistance d;
  const auto r = pearson_correlation(a, b);
  if (!r) {
    d.undefined = true;
    d.pcc = 0.0;
    d.value = 0.5;
    return d;
  }
  d.pcc = *r;
  d.value = 1.0 - (1.0 + *r) / 2.0;
  return d;
}

AttributionDistance attribution_distance(const AttributionMap& a,
                                         const AttributionMap& b) {
  return attribution_distance(std::span<const double>(a.scores),
                              std::span<const double>(b.scores));
}

double semantic_similarity(const SentenceEncoder& encoder,
                           std::string_view adversarial,
                           std::string_view original) {
  const Vector u = encoder.encode(adversarial);
  const Vector v = encoder.encode(original);
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) {
    throw Error("sentence encoder '" + encoder.name() +
                "' returned a zero-norm embedding");
  }
  if (u.size() == v.size() &&
      std::memcmp(u.data(), v.data(), sizeof(double) * u.size()) == 0) {
    return 1.0;
  }
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

double semantic_distance(const SentenceEncoder& encoder,
                         std::string_view adversarial,
                         std::string_view original) {
  return 1.0 - (semantic_similarity(encoder, adversarial, original) + 1.0) /
                   2.0;
}

double perplexity_increase(const PerplexityModel& model,
                           std::string_view adversarial,
                           std::string_view original,
                           const DistanceConfig& config) {
  const double pp_original = model.perplexity(original);
  const double pp_adversarial =
      adversarial == original ? pp_original : model.perplexity(adversarial);
  return (pp_adversarial - pp_original) / (pp_original + config.eps_pp);
}

int grammar_error_increase(const GrammarChecker& checker,
                           std::string_view adversarial,
                           std::string_view original) {
  return checker.error_count(adversarial) - checker.error_count(original);
}

bool is_attribution_distance_key(std::string_view key) {
  return key == kPccKey;
}

bool is_semantic_distance_key(std::string_view key) {
  for (const auto k : kSemanticKeys) {
    if (key == k) return true;
  }
  return false;
}

bool is_distance_key(std::string_view key) {
  return is_attribution_distance_key(key) || is_semantic_distance_key(key) ||
         key == kPerplexityKey || key == kGrammarKey;
}

void check_distance_key(std::string_view key) {
  if (!is_distance_key(key)) {
    throw ConfigError("unknown distance key '" + std::string(key) +
                      "' (expected pcc, sts_use_like, sts_minilm_like, pp "
                      "or ge)");
  }
}

std::vector<std::string> distance_keys() {
  std::vector<std::string> keys = {std::string(kPccKey)};
  for (const auto k : kSemanticKeys) keys.emplace_back(k);
  keys.emplace_back(kPerplexityKey);
  keys.emplace_back(kGrammarKey);
  return keys;
}

}  // namespace tea
