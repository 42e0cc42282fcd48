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

#include "tea/attribution.h"

#include <cmath>
#include <nlohmann/json.hpp>

#include "tea/error.h"

namespace tea {
namespace {

void check_label(const Classifier& classifier, int label) {
  if (label < 0 || label >= classifier.num_classes()) {
    throw Error("attribution: label " + std::to_string(label) +
                " out of range for " +
                std::to_string(classifier.num_classes()) + " classes");
  }
}

Vector row_sums(const Matrix& m) { return m.rowwise().sum(); }

}  // namespace

std::string to_string(AttributionMethod method) {
  switch (method) {
    case AttributionMethod::kSaliency:
      return "S";
    case AttributionMethod::kIntegratedGradients:
      return "IG";
    case AttributionMethod::kAttention:
      return "A";
  }
  return "?";
}

AttributionMethod parse_attribution_method(std::string_view name) {
  if (name == "S" || name == "saliency") return AttributionMethod::kSaliency;
  if (name == "IG" || name == "integrated_gradients") {
    return AttributionMethod::kIntegratedGradients;
  }
  if (name == "A" || name == "attention") return AttributionMethod::kAttention;
  throw ConfigError("unknown attribution method '" + std::string(name) +
                    "' (expected S, IG or A)");
}

nlohmann::json to_json(const AttributionMap& map) {
  return {{"sample", map.sample_ref},
          {"method", to_string(map.method)},
          {"label", map.label},
          {"scores", map.scores}};
}

AttributionMap attribution_map_from_json(const nlohmann::json& j) {
  AttributionMap map;
  map.sample_ref = j.at("sample").get<std::string>();
  map.method = parse_attribution_method(j.at("method").get<std::string>());
  map.label = j.at("label").get<int>();
  map.scores = j.at("scores").get<std::vector<double>>();
  return map;
}

std::vector<double> pool_rows(const Vector& row_scores,
                              std::span<const std::size_t> owners,
                              std::size_t num_tokens) {
  if (static_cast<std::size_t>(row_scores.size()) != owners.size()) {
    throw Error("attribution: row count differs from row-owner count");
  }
  std::vector<double> scores(num_tokens, 0.0);
  for (std::size_t r = 0; r < owners.size(); ++r) {
    if (owners[r] >= num_tokens) {
      throw Error("attribution: row owner out of range");
    }
    scores[owners[r]] += row_scores(static_cast<Eigen::Index>(r));
  }
  return scores;
}

Attributor::Attributor(AttributionMethod method, int ig_steps)
    : method_(method), ig_steps_(ig_steps) {
  if (ig_steps_ < 1) throw Error("integrated gradients needs steps >= 1");
}

void Attributor::check_supported(const Classifier& classifier) const {
  if (method_ == AttributionMethod::kAttention) {
    const Matrix probe = Matrix::Zero(1, classifier.embedding_dim());
    if (!classifier.attention_weights(probe).has_value()) {
      throw UnsupportedMethodError(
          "attention attribution needs a classifier with attention weights");
    }
  } else if (!classifier.has_gradient()) {
    throw UnsupportedMethodError(to_string(method_) +
                                 " attribution needs classifier gradients");
  }
}

std::vector<double> Attributor::on_embedding(
    const Classifier& classifier, const Matrix& embedding,
    std::span<const std::size_t> owners, std::size_t num_tokens,
    int label) const {
  check_label(classifier, label);
  switch (method_) {
    case AttributionMethod::kSaliency:
      return pool_rows(row_sums(classifier.gradient(embedding, label)), owners,
                       num_tokens);
    case AttributionMethod::kIntegratedGradients: {
      Matrix mean_grad = Matrix::Zero(embedding.rows(), embedding.cols());
      for (int s = 0; s < ig_steps_; ++s) {
        const double alpha = (s + 0.5) / ig_steps_;
        mean_grad += classifier.gradient(alpha * embedding, label);
      }
      mean_grad /= ig_steps_;
      return pool_rows(row_sums(embedding.cwiseProduct(mean_grad)), owners,
                       num_tokens);
    }
    case AttributionMethod::kAttention: {
      const auto heads = classifier.attention_weights(embedding);
      if (!heads || heads->empty()) {
        throw UnsupportedMethodError(
            "attention attribution needs a classifier with attention weights");
      }
      Vector received = Vector::Zero(embedding.rows());
      for (const Matrix& head : *heads) {
        if (head.cols() != embedding.rows() || head.rows() == 0) {
          throw Error("attention head shape does not match the embedding");
        }
        received += head.colwise().mean().transpose();
      }
      received /= static_cast<double>(heads->size());
      std::vector<double> scores = pool_rows(received, owners, num_tokens);
      double total = 0.0;
      for (const double s : scores) total += s;
      if (total > 0) {
        for (double& s : scores) s /= total;
      }
      return scores;
    }
  }
  throw Error("unknown attribution method");
}

AttributionMap Attributor::operator()(const Classifier& classifier,
                                      const TokenizedText& text,
                                      int label) const {
  if (method_ != AttributionMethod::kAttention && !classifier.has_gradient()) {
    throw UnsupportedMethodError(to_string(method_) +
                                 " attribution needs classifier gradients");
  }
  const auto owners = classifier.row_owners(text);
  AttributionMap map;
  map.scores = on_embedding(classifier, classifier.embed(text), owners,
                            text.size(), label);
  map.method = method_;
  map.label = label;
  return map;
}

AttributionMap saliency(const Classifier& classifier, const TokenizedText& text,
                        int label) {
  return Attributor(AttributionMethod::kSaliency)(classifier, text, label);
}

AttributionMap integrated_gradients(const Classifier& classifier,
                                    const TokenizedText& text, int label,
                                    int steps) {
  return Attributor(AttributionMethod::kIntegratedGradients, steps)(
      classifier, text, label);
}

AttributionMap attention_attribution(const Classifier& classifier,
                                     const TokenizedText& text, int label) {
  return Attributor(AttributionMethod::kAttention)(classifier, text, label);
}

}  // namespace tea
