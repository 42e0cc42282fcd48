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

#ifndef TEA_EMBEDDINGS_H_
#define TEA_EMBEDDINGS_H_

#include <Eigen/Dense>
#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tea {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct EmbeddingBuildConfig {
  int distributional_dim = 24;
  // Per-word pseudo-random dimensions, seeded by the word itself.
  int identity_dim = 8;
  double identity_scale = 0.6;
  int window = 6;
  double context_smoothing = 0.75;
};

// Frozen word-embedding table. Rows are unit length. Words outside the
// vocabulary map to a shared unknown vector.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::vector<std::string> words, Matrix vectors,
                 Vector unknown);

  // Positive PMI co-occurrence factorisation over word tokens of `texts`,
  // concatenated with the identity dimensions, then row-normalised.
  static EmbeddingTable build(const std::vector<std::string>& texts,
                              const EmbeddingBuildConfig& config = {});

  int dim() const { return static_cast<int>(vectors_.cols()); }
  std::size_t size() const { return words_.size(); }
  bool contains(std::string_view word) const;
  int index_of(std::string_view word) const;  // -1 when absent
  Vector lookup(std::string_view word) const;
  const std::vector<std::string>& words() const { return words_; }
  const Matrix& vectors() const { return vectors_; }
  const Vector& unknown() const { return unknown_; }

  // Content hash over words and vector bits.
  std::uint64_t hash() const;

  nlohmann::json to_json() const;
  static EmbeddingTable from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
  Matrix vectors_;
  Vector unknown_;
};

// Deterministic unit vector seeded by the word, for out-of-vocabulary words
// in the sentence encoders.
Vector hashed_unit_vector(std::string_view word, int dim);

}  // namespace tea

#endif  // TEA_EMBEDDINGS_H_
