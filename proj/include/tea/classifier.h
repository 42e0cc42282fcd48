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

// Desk-scale reference classifiers over a frozen embedding table.
//
//   cnn:        same-padded 1-D convolution, tanh, max-pool over time,
//               linear layer, softmax.
//   attention:  per-token tanh projection, additive attention pooling,
//               linear layer, softmax.
//
// Both expose exact gradients with respect to the input embedding, which is
// what the gradient-based attribution methods consume.

#ifndef TEA_CLASSIFIER_H_
#define TEA_CLASSIFIER_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tea/models.h"

namespace tea {

enum class Architecture { kCnn, kAttention };

std::string to_string(Architecture architecture);
Architecture parse_architecture(std::string_view name);

struct ClassifierShape {
  int num_classes = 2;
  int hidden = 16;        // filters (cnn) or attention width
  int kernel_width = 3;   // cnn only
};

class ReferenceClassifier : public Classifier {
 public:
  // Randomly initialised model; weights drawn from a seeded normal.
  static std::unique_ptr<ReferenceClassifier> create(
      Architecture architecture,
      std::shared_ptr<const EmbeddingTable> embeddings,
      const ClassifierShape& shape, std::uint64_t seed);

  Architecture architecture() const { return architecture_; }
  const ClassifierShape& shape() const { return shape_; }
  const EmbeddingTable& embeddings() const { return *embeddings_; }
  std::shared_ptr<const EmbeddingTable> shared_embeddings() const {
    return embeddings_;
  }

  int num_classes() const override { return shape_.num_classes; }
  int embedding_dim() const override { return embeddings_->dim(); }
  Matrix embed(const TokenizedText& text) const override;
  bool has_gradient() const override { return true; }

  std::span<const double> parameters() const { return parameters_; }
  std::span<double> mutable_parameters() { return parameters_; }

  // Cross-entropy at (embedding, label); adds d loss / d parameters into
  // `gradient`, which must have parameters().size() entries.
  virtual double loss_and_gradient(const Matrix& embedding, int label,
                                   std::span<double> gradient) const = 0;

  std::uint64_t weights_hash() const;

 protected:
  ReferenceClassifier(Architecture architecture,
                      std::shared_ptr<const EmbeddingTable> embeddings,
                      const ClassifierShape& shape, std::size_t num_parameters);

  std::vector<double> parameters_;

 private:
  Architecture architecture_;
  std::shared_ptr<const EmbeddingTable> embeddings_;
  ClassifierShape shape_;
};

struct TrainConfig {
  Architecture architecture = Architecture::kCnn;
  ClassifierShape shape;
  std::uint64_t seed = 0;
  int max_epochs = 40;
  int patience = 6;
  int batch_size = 16;
  double learning_rate = 0.01;
  double weight_decay = 1e-4;
  std::size_t max_tokens = 64;
  // Validation accuracy must beat the majority baseline by this many
  // binomial standard errors of the baseline rate. The best of up to
  // max_epochs validation checks is kept, so the margin is Bonferroni-sized
  // for about 40 looks at a 5% level rather than a single test.
  double min_margin_std_errors = 3.0;
};

struct TrainedClassifier {
  std::shared_ptr<ReferenceClassifier> model;
  double validation_accuracy = 0.0;
  double baseline_accuracy = 0.0;
  int epochs_run = 0;
};

// Throws TrainingError when validation accuracy does not clear the baseline
// margin after training.
TrainedClassifier train_reference_classifier(
    const RawCorpus& train, const RawCorpus& validation,
    const TextAligner& aligner,
    std::shared_ptr<const EmbeddingTable> embeddings,
    const TrainConfig& config);

double majority_baseline(const RawCorpus& corpus, int num_classes);

double accuracy(const Classifier& classifier, const RawCorpus& corpus,
                const TextAligner& aligner, std::size_t max_tokens);

struct CheckpointManifest {
  std::string architecture;
  std::uint64_t vocab_hash = 0;
  std::uint64_t weights_hash = 0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double baseline_accuracy = 0.0;
  std::size_t max_tokens = 64;
  ClassifierShape shape;
};

// Writes manifest.json, weights.json and embeddings.json into `directory`.
void save_checkpoint(const std::string& directory,
                     const ReferenceClassifier& model,
                     const CheckpointManifest& manifest);

// Throws ResolutionError for a missing directory or a vocabulary hash that
// does not match the stored embeddings.
std::shared_ptr<ReferenceClassifier> load_checkpoint(
    const std::string& directory, CheckpointManifest* manifest = nullptr);

}  // namespace tea

#endif  // TEA_CLASSIFIER_H_
