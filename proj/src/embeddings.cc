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

#include "tea/embeddings.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>

#include "tea/error.h"
#include "tea/rng.h"
#include "tea/text.h"

namespace tea {

EmbeddingTable::EmbeddingTable(std::vector<std::string> words, Matrix vectors,
                               Vector unknown)
    : words_(std::move(words)),
      vectors_(std::move(vectors)),
      unknown_(std::move(unknown)) {
  if (static_cast<Eigen::Index>(words_.size()) != vectors_.rows() ||
      unknown_.size() != vectors_.cols()) {
    throw Error("embedding table: word list and vector shapes disagree");
  }
  for (std::size_t i = 0; i < words_.size(); ++i) {
    index_.emplace(words_[i], static_cast<int>(i));
  }
}

EmbeddingTable EmbeddingTable::build(const std::vector<std::string>& texts,
                                     const EmbeddingBuildConfig& config) {
  WordTokenizer tokenizer;
  std::vector<std::vector<std::string>> tokenized;
  std::map<std::string, int> vocab_index;
  for (const auto& text : texts) {
    std::vector<std::string> seq;
    for (auto& token : tokenizer.tokenize(text)) {
      vocab_index.emplace(token.text, 0);
      seq.push_back(std::move(token.text));
    }
    tokenized.push_back(std::move(seq));
  }
  std::vector<std::string> words;
  for (auto& [word, id] : vocab_index) {
    id = static_cast<int>(words.size());
    words.push_back(word);
  }
  std::vector<std::vector<int>> sequences;
  for (const auto& seq : tokenized) {
    std::vector<int> ids;
    for (const auto& w : seq) ids.push_back(vocab_index.at(w));
    sequences.push_back(std::move(ids));
  }

  const auto v = static_cast<Eigen::Index>(words.size());
  if (v == 0) throw Error("embedding table: no words to build from");
  Matrix counts = Matrix::Zero(v, v);
  for (const auto& seq : sequences) {
    const auto n = static_cast<int>(seq.size());
    for (int i = 0; i < n; ++i) {
      for (int j = std::max(0, i - config.window);
           j <= std::min(n - 1, i + config.window); ++j) {
        if (j != i) counts(seq[i], seq[j]) += 1.0 / std::abs(i - j);
      }
    }
  }
  const double total = counts.sum();
  const Vector row_totals = counts.rowwise().sum();
  Vector context = counts.colwise().sum().transpose();
  for (Eigen::Index c = 0; c < v; ++c) {
    context(c) = std::pow(context(c), config.context_smoothing);
  }
  context /= context.sum();
  Matrix ppmi = Matrix::Zero(v, v);
  for (Eigen::Index w = 0; w < v; ++w) {
    for (Eigen::Index c = 0; c < v; ++c) {
      if (counts(w, c) <= 0.0) continue;
      const double pmi =
          std::log(counts(w, c) / total / (row_totals(w) / total * context(c)));
      ppmi(w, c) = std::max(0.0, pmi);
    }
  }

  const int k = std::min<int>(config.distributional_dim, static_cast<int>(v));
  Eigen::BDCSVD<Matrix> svd(ppmi, Eigen::ComputeThinU);
  const int dim = config.distributional_dim + config.identity_dim;
  Matrix vectors = Matrix::Zero(v, dim);
  for (Eigen::Index w = 0; w < v; ++w) {
    Vector dist = Vector::Zero(config.distributional_dim);
    for (int d = 0; d < k; ++d) {
      dist(d) = svd.matrixU()(w, d) * std::sqrt(svd.singularValues()(d));
    }
    const double norm = dist.norm();
    if (norm > 0) dist /= norm;
    vectors.row(w).head(config.distributional_dim) = dist.transpose();
    if (config.identity_dim > 0) {
      vectors.row(w).tail(config.identity_dim) =
          config.identity_scale *
          hashed_unit_vector(words[static_cast<std::size_t>(w)],
                             config.identity_dim)
              .transpose();
    }
    vectors.row(w).normalize();
  }
  Vector unknown = vectors.colwise().mean().transpose();
  return EmbeddingTable(std::move(words), std::move(vectors),
                        std::move(unknown));
}

bool EmbeddingTable::contains(std::string_view word) const {
  return index_.count(std::string(word)) > 0;
}

int EmbeddingTable::index_of(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? -1 : it->second;
}

Vector EmbeddingTable::lookup(std::string_view word) const {
  const int i = index_of(word);
  if (i < 0) return unknown_;
  return vectors_.row(i).transpose();
}

std::uint64_t EmbeddingTable::hash() const {
  std::uint64_t h = fnv1a("embedding-table");
  for (const auto& w : words_) h = fnv1a(w, fnv1a("\n", h));
  const Matrix row_major = vectors_;
  h = fnv1a_doubles(row_major.data(), static_cast<std::size_t>(row_major.size()),
                    h);
  return fnv1a_doubles(unknown_.data(), static_cast<std::size_t>(unknown_.size()),
                       h);
}

nlohmann::json EmbeddingTable::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < vectors_.rows(); ++r) {
    rows.push_back(std::vector<double>(vectors_.row(r).begin(),
                                       vectors_.row(r).end()));
  }
  return {{"words", words_},
          {"vectors", rows},
          {"unknown", std::vector<double>(unknown_.begin(), unknown_.end())}};
}

EmbeddingTable EmbeddingTable::from_json(const nlohmann::json& j) {
  auto words = j.at("words").get<std::vector<std::string>>();
  const auto unknown_values = j.at("unknown").get<std::vector<double>>();
  const auto dim = static_cast<Eigen::Index>(unknown_values.size());
  Matrix vectors(static_cast<Eigen::Index>(words.size()), dim);
  const auto& rows = j.at("vectors");
  if (rows.size() != words.size()) {
    throw Error("embedding table: vector count differs from word count");
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto row = rows[r].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != dim) {
      throw Error("embedding table: ragged vector rows");
    }
    for (Eigen::Index c = 0; c < dim; ++c) {
      vectors(static_cast<Eigen::Index>(r), c) = row[static_cast<std::size_t>(c)];
    }
  }
  Vector unknown = Eigen::Map<const Vector>(unknown_values.data(), dim);
  return EmbeddingTable(std::move(words), std::move(vectors),
                        std::move(unknown));
}

Vector hashed_unit_vector(std::string_view word, int dim) {
  Rng rng(fnv1a(word));
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = standard_normal(rng);
  const double norm = v.norm();
  return norm > 0 ? Vector(v / norm) : v;
}

}  // namespace tea
