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

#include "tea/classifier.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "tea/error.h"
#include "tea/rng.h"

namespace tea {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixView = Eigen::Map<RowMatrix>;
using ConstMatrixView = Eigen::Map<const RowMatrix>;
using VectorView = Eigen::Map<Vector>;
using ConstVectorView = Eigen::Map<const Vector>;

Vector softmax(const Vector& logits) {
  const Vector shifted = (logits.array() - logits.maxCoeff()).exp();
  return shifted / shifted.sum();
}

void check_rows(const Matrix& x) {
  if (x.rows() == 0) throw Error("classifier: empty embedding matrix");
}

// Parameter blocks: conv weights (F x kD), conv bias (F), output weights
// (C x F), output bias (C).
class CnnClassifier final : public ReferenceClassifier {
 public:
  CnnClassifier(std::shared_ptr<const EmbeddingTable> embeddings,
                const ClassifierShape& shape)
      : ReferenceClassifier(Architecture::kCnn, embeddings, shape,
                            count(shape, embeddings->dim())) {}

  static std::size_t count(const ClassifierShape& s, int dim) {
    const std::size_t f = s.hidden, c = s.num_classes;
    return f * s.kernel_width * dim + f + c * f + c;
  }

  Vector predict_probs(const Matrix& x) const override {
    return softmax(forward(x).logits);
  }

  Matrix gradient(const Matrix& x, int label) const override {
    const Forward fw = forward(x);
    const Vector p = softmax(fw.logits);
    Vector dz = -p(label) * p;
    dz(label) += p(label);
    return backward_input(x, fw, dz);
  }

  double loss_and_gradient(const Matrix& x, int label,
                           std::span<double> grad) const override {
    const Forward fw = forward(x);
    const Vector p = softmax(fw.logits);
    Vector dz = p;
    dz(label) -= 1.0;
    const Blocks b = blocks();
    MatrixView g_conv(grad.data(), b.filters, b.width);
    VectorView g_conv_bias(grad.data() + b.conv_bias, b.filters);
    MatrixView g_out(grad.data() + b.out, b.classes, b.filters);
    VectorView g_out_bias(grad.data() + b.out_bias, b.classes);
    g_out.noalias() += dz * fw.pooled.transpose();
    g_out_bias += dz;
    const Vector d_pool = out_weights().transpose() * dz;
    const int dim = embedding_dim();
    const int k = shape().kernel_width;
    const int pad = (k - 1) / 2;
    const auto rows = static_cast<int>(x.rows());
    for (int f = 0; f < b.filters; ++f) {
      const int t = fw.argmax[f];
      const double act = fw.activations(t, f);
      const double d_pre = d_pool(f) * (1.0 - act * act);
      g_conv_bias(f) += d_pre;
      for (int j = 0; j < k; ++j) {
        const int r = t - pad + j;
        if (r < 0 || r >= rows) continue;
        g_conv.row(f).segment(j * dim, dim) += d_pre * x.row(r);
      }
    }
    return -std::log(std::max(p(label), 1e-300));
  }

 private:
  struct Blocks {
    int filters, width, classes;
    std::size_t conv_bias, out, out_bias;
  };
  struct Forward {
    Matrix activations;  // T x F
    Vector pooled;
    std::vector<int> argmax;
    Vector logits;
  };

  Blocks blocks() const {
    Blocks b{};
    b.filters = shape().hidden;
    b.width = shape().kernel_width * embedding_dim();
    b.classes = shape().num_classes;
    b.conv_bias = static_cast<std::size_t>(b.filters) * b.width;
    b.out = b.conv_bias + b.filters;
    b.out_bias = b.out + static_cast<std::size_t>(b.classes) * b.filters;
    return b;
  }

  ConstMatrixView conv_weights() const {
    const Blocks b = blocks();
    return ConstMatrixView(parameters_.data(), b.filters, b.width);
  }
  ConstMatrixView out_weights() const {
    const Blocks b = blocks();
    return ConstMatrixView(parameters_.data() + b.out, b.classes, b.filters);
  }

  Forward forward(const Matrix& x) const {
    check_rows(x);
    const Blocks b = blocks();
    const ConstVectorView conv_bias(parameters_.data() + b.conv_bias,
                                    b.filters);
    const ConstVectorView out_bias(parameters_.data() + b.out_bias, b.classes);
    const auto w = conv_weights();
    const int dim = embedding_dim();
    const int k = shape().kernel_width;
    const int pad = (k - 1) / 2;
    const auto rows = static_cast<int>(x.rows());

    Forward fw;
    fw.activations.resize(rows, b.filters);
    for (int t = 0; t < rows; ++t) {
      Vector pre = conv_bias;
      for (int j = 0; j < k; ++j) {
        const int r = t - pad + j;
        if (r < 0 || r >= rows) continue;
        pre.noalias() += w.middleCols(j * dim, dim) * x.row(r).transpose();
      }
      fw.activations.row(t) = pre.array().tanh().matrix().transpose();
    }
    fw.pooled.resize(b.filters);
    fw.argmax.resize(static_cast<std::size_t>(b.filters));
    for (int f = 0; f < b.filters; ++f) {
      Eigen::Index t = 0;
      fw.pooled(f) = fw.activations.col(f).maxCoeff(&t);
      fw.argmax[static_cast<std::size_t>(f)] = static_cast<int>(t);
    }
    fw.logits = out_weights() * fw.pooled + out_bias;
    return fw;
  }

  Matrix backward_input(const Matrix& x, const Forward& fw,
                        const Vector& dz) const {
    const Vector d_pool = out_weights().transpose() * dz;
    const auto w = conv_weights();
    const int dim = embedding_dim();
    const int k = shape().kernel_width;
    const int pad = (k - 1) / 2;
    const auto rows = static_cast<int>(x.rows());
    Matrix dx = Matrix::Zero(x.rows(), x.cols());
    for (int f = 0; f < shape().hidden; ++f) {
      const int t = fw.argmax[static_cast<std::size_t>(f)];
      const double act = fw.activations(t, f);
      const double d_pre = d_pool(f) * (1.0 - act * act);
      for (int j = 0; j < k; ++j) {
        const int r = t - pad + j;
        if (r < 0 || r >= rows) continue;
        dx.row(r) += d_pre * w.row(f).segment(j * dim, dim);
      }
    }
    return dx;
  }
};

// Parameter blocks: projection (H x D), projection bias (H), attention
// vector (H), output weights (C x H), output bias (C).
class AttentionClassifier final : public ReferenceClassifier {
 public:
  AttentionClassifier(std::shared_ptr<const EmbeddingTable> embeddings,
                      const ClassifierShape& shape)
      : ReferenceClassifier(Architecture::kAttention, embeddings, shape,
                            count(shape, embeddings->dim())) {}

  static std::size_t count(const ClassifierShape& s, int dim) {
    const std::size_t h = s.hidden, c = s.num_classes;
    return h * dim + h + h + c * h + c;
  }

  Vector predict_probs(const Matrix& x) const override {
    return softmax(forward(x).logits);
  }

  // A single head with a single (pooling) query.
  std::optional<AttentionHeads> attention_weights(
      const Matrix& x) const override {
    return AttentionHeads{forward(x).alpha.transpose()};
  }

  Matrix gradient(const Matrix& x, int label) const override {
    const Forward fw = forward(x);
    const Vector p = softmax(fw.logits);
    Vector dz = -p(label) * p;
    dz(label) += p(label);
    return backward(x, fw, dz, nullptr);
  }

  double loss_and_gradient(const Matrix& x, int label,
                           std::span<double> grad) const override {
    const Forward fw = forward(x);
    const Vector p = softmax(fw.logits);
    Vector dz = p;
    dz(label) -= 1.0;
    backward(x, fw, dz, grad.data());
    return -std::log(std::max(p(label), 1e-300));
  }

 private:
  struct Blocks {
    int hidden, dim, classes;
    std::size_t proj_bias, score, out, out_bias;
  };
  struct Forward {
    Matrix hidden;  // T x H
    Vector alpha;
    Vector context;
    Vector logits;
  };

  Blocks blocks() const {
    Blocks b{};
    b.hidden = shape().hidden;
    b.dim = embedding_dim();
    b.classes = shape().num_classes;
    b.proj_bias = static_cast<std::size_t>(b.hidden) * b.dim;
    b.score = b.proj_bias + b.hidden;
    b.out = b.score + b.hidden;
    b.out_bias = b.out + static_cast<std::size_t>(b.classes) * b.hidden;
    return b;
  }

  Forward forward(const Matrix& x) const {
    check_rows(x);
    const Blocks b = blocks();
    const ConstMatrixView proj(parameters_.data(), b.hidden, b.dim);
    const ConstVectorView proj_bias(parameters_.data() + b.proj_bias, b.hidden);
    const ConstVectorView score(parameters_.data() + b.score, b.hidden);
    const ConstMatrixView out(parameters_.data() + b.out, b.classes, b.hidden);
    const ConstVectorView out_bias(parameters_.data() + b.out_bias, b.classes);

    Forward fw;
    fw.hidden = ((x * proj.transpose()).rowwise() + proj_bias.transpose())
                    .array()
                    .tanh()
                    .matrix();
    fw.alpha = softmax(fw.hidden * score);
    fw.context = fw.hidden.transpose() * fw.alpha;
    fw.logits = out * fw.context + out_bias;
    return fw;
  }

  // Returns d/dX; also accumulates parameter gradients when `grad` is set.
  Matrix backward(const Matrix& x, const Forward& fw, const Vector& dz,
                  double* grad) const {
    const Blocks b = blocks();
    const ConstMatrixView proj(parameters_.data(), b.hidden, b.dim);
    const ConstVectorView score(parameters_.data() + b.score, b.hidden);
    const ConstMatrixView out(parameters_.data() + b.out, b.classes, b.hidden);

    const Vector d_context = out.transpose() * dz;
    const Vector d_alpha = fw.hidden * d_context;
    const double mean = fw.alpha.dot(d_alpha);
    const Vector d_score =
        (fw.alpha.array() * (d_alpha.array() - mean)).matrix();
    Matrix d_hidden = fw.alpha * d_context.transpose() + d_score * score.transpose();
    const Matrix d_pre =
        (d_hidden.array() * (1.0 - fw.hidden.array().square())).matrix();
    if (grad != nullptr) {
      MatrixView g_proj(grad, b.hidden, b.dim);
      VectorView g_proj_bias(grad + b.proj_bias, b.hidden);
      VectorView g_score(grad + b.score, b.hidden);
      MatrixView g_out(grad + b.out, b.classes, b.hidden);
      VectorView g_out_bias(grad + b.out_bias, b.classes);
      g_out.noalias() += dz * fw.context.transpose();
      g_out_bias += dz;
      g_score.noalias() += fw.hidden.transpose() * d_score;
      g_proj.noalias() += d_pre.transpose() * x;
      g_proj_bias += d_pre.colwise().sum().transpose();
    }
    return d_pre * proj;
  }
};

std::string checkpoint_file(const std::string& directory,
                            const std::string& name) {
  return (std::filesystem::path(directory) / name).string();
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ResolutionError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ResolutionError("malformed JSON in " + path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(1) << '\n';
}

}  // namespace

std::string to_string(Architecture architecture) {
  switch (architecture) {
    case Architecture::kCnn:
      return "cnn";
    case Architecture::kAttention:
      return "attention";
  }
  return "unknown";
}

Architecture parse_architecture(std::string_view name) {
  if (name == "cnn") return Architecture::kCnn;
  if (name == "attention") return Architecture::kAttention;
  throw ConfigError("unknown architecture '" + std::string(name) +
                    "' (expected cnn or attention)");
}

ReferenceClassifier::ReferenceClassifier(
    Architecture architecture, std::shared_ptr<const EmbeddingTable> embeddings,
    const ClassifierShape& shape, std::size_t num_parameters)
    : parameters_(num_parameters, 0.0),
      architecture_(architecture),
      embeddings_(std::move(embeddings)),
      shape_(shape) {}

std::unique_ptr<ReferenceClassifier> ReferenceClassifier::create(
    Architecture architecture, std::shared_ptr<const EmbeddingTable> embeddings,
    const ClassifierShape& shape, std::uint64_t seed) {
  if (shape.num_classes < 2 || shape.hidden < 1 || shape.kernel_width < 1) {
    throw Error("classifier shape needs >= 2 classes and positive sizes");
  }
  std::unique_ptr<ReferenceClassifier> model;
  double fan_in = 1.0;
  const int dim = embeddings->dim();
  if (architecture == Architecture::kCnn) {
    model = std::make_unique<CnnClassifier>(std::move(embeddings), shape);
    fan_in = static_cast<double>(shape.kernel_width * dim);
  } else {
    model = std::make_unique<AttentionClassifier>(std::move(embeddings), shape);
    fan_in = static_cast<double>(dim);
  }
  Rng rng(seed);
  const double first_scale = 1.0 / std::sqrt(fan_in);
  const double rest_scale = 1.0 / std::sqrt(static_cast<double>(shape.hidden));
  const std::size_t first_block =
      static_cast<std::size_t>(shape.hidden) *
      (architecture == Architecture::kCnn ? shape.kernel_width * dim : dim);
  auto params = model->mutable_parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i] =
        standard_normal(rng) * (i < first_block ? first_scale : rest_scale);
  }
  return model;
}

Matrix ReferenceClassifier::embed(const TokenizedText& text) const {
  Matrix x(static_cast<Eigen::Index>(text.size()), embeddings_->dim());
  for (std::size_t i = 0; i < text.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) =
        embeddings_->lookup(text.tokens[i]).transpose();
  }
  return x;
}

std::uint64_t ReferenceClassifier::weights_hash() const {
  return fnv1a_doubles(parameters_.data(), parameters_.size(),
                       fnv1a(to_string(architecture_)));
}

double majority_baseline(const RawCorpus& corpus, int num_classes) {
  if (corpus.size() == 0) return 0.0;
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (const auto& s : corpus.samples) {
    ++counts.at(static_cast<std::size_t>(s.label));
  }
  return static_cast<double>(*std::max_element(counts.begin(), counts.end())) /
         static_cast<double>(corpus.size());
}

double accuracy(const Classifier& classifier, const RawCorpus& corpus,
                const TextAligner& aligner, std::size_t max_tokens) {
  if (corpus.size() == 0) return 0.0;
  std::size_t correct = 0;
  for (const auto& s : corpus.samples) {
    const TokenizedText t = truncate(aligner.tokenize(s.text), max_tokens);
    if (classifier.predict(t) == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(corpus.size());
}

TrainedClassifier train_reference_classifier(
    const RawCorpus& train, const RawCorpus& validation,
    const TextAligner& aligner,
    std::shared_ptr<const EmbeddingTable> embeddings,
    const TrainConfig& config) {
  const int classes = static_cast<int>(train.label_names.size());
  if (classes < 2) throw Error("training needs at least two classes");
  if (train.size() + validation.size() < 100) {
    throw Error("training needs at least 100 samples, got " +
                std::to_string(train.size() + validation.size()));
  }
  if (validation.size() == 0) throw Error("training needs validation samples");
  ClassifierShape shape = config.shape;
  shape.num_classes = classes;
  auto model = std::shared_ptr<ReferenceClassifier>(ReferenceClassifier::create(
      config.architecture, std::move(embeddings), shape, config.seed));

  struct Example {
    Matrix x;
    int label;
  };
  auto embed_all = [&](const RawCorpus& corpus) {
    std::vector<Example> out;
    for (const auto& s : corpus.samples) {
      const TokenizedText t =
          truncate(aligner.tokenize(s.text), config.max_tokens);
      if (t.empty()) continue;
      out.push_back({model->embed(t), s.label});
    }
    return out;
  };
  const std::vector<Example> train_set = embed_all(train);
  const std::vector<Example> val_set = embed_all(validation);
  if (train_set.empty() || val_set.empty()) {
    throw Error("training: no non-empty samples after tokenization");
  }

  auto val_accuracy = [&]() {
    std::size_t correct = 0;
    for (const auto& e : val_set) {
      if (model->predict(e.x) == e.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(val_set.size());
  };

  const std::size_t n_params = model->parameters().size();
  std::vector<double> grad(n_params), m(n_params, 0.0), v(n_params, 0.0);
  std::vector<double> best(model->parameters().begin(),
                           model->parameters().end());
  double best_acc = val_accuracy();
  int since_best = 0;
  int epochs_run = 0;
  long step = 0;
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(config.seed ^ 0x9E3779B97F4A7C15ULL);

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    ++epochs_run;
    shuffle(order, rng);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = start; i < end; ++i) {
        const Example& e = train_set[order[i]];
        model->loss_and_gradient(e.x, e.label, grad);
      }
      ++step;
      const double scale = 1.0 / static_cast<double>(end - start);
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      auto params = model->mutable_parameters();
      for (std::size_t p = 0; p < n_params; ++p) {
        const double g = grad[p] * scale + config.weight_decay * params[p];
        m[p] = kBeta1 * m[p] + (1.0 - kBeta1) * g;
        v[p] = kBeta2 * v[p] + (1.0 - kBeta2) * g * g;
        params[p] -= config.learning_rate * (m[p] / c1) /
                     (std::sqrt(v[p] / c2) + kEps);
      }
    }
    const double acc = val_accuracy();
    if (acc > best_acc) {
      best_acc = acc;
      best.assign(model->parameters().begin(), model->parameters().end());
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  std::copy(best.begin(), best.end(), model->mutable_parameters().begin());

  const double baseline = majority_baseline(validation, classes);
  const double margin = config.min_margin_std_errors *
                        std::sqrt(baseline * (1.0 - baseline) /
                                  static_cast<double>(val_set.size()));
  if (!(best_acc > baseline + margin)) {
    throw TrainingError("training did not converge: validation accuracy " +
                            std::to_string(best_acc) + " vs baseline " +
                            std::to_string(baseline) + " (+" +
                            std::to_string(margin) + " margin)",
                        best_acc, baseline);
  }
  return {model, best_acc, baseline, epochs_run};
}

void save_checkpoint(const std::string& directory,
                     const ReferenceClassifier& model,
                     const CheckpointManifest& manifest) {
  std::filesystem::create_directories(directory);
  nlohmann::json m = {
      {"format_version", 1},
      {"architecture", to_string(model.architecture())},
      {"vocab_hash", model.embeddings().hash()},
      {"weights_hash", model.weights_hash()},
      {"seed", manifest.seed},
      {"accuracy", manifest.accuracy},
      {"baseline_accuracy", manifest.baseline_accuracy},
      {"max_tokens", manifest.max_tokens},
      {"num_classes", model.shape().num_classes},
      {"hidden", model.shape().hidden},
      {"kernel_width", model.shape().kernel_width},
      {"embedding_dim", model.embedding_dim()},
  };
  write_json_file(checkpoint_file(directory, "manifest.json"), m);
  const auto params = model.parameters();
  write_json_file(checkpoint_file(directory, "weights.json"),
                  {{"parameters",
                    std::vector<double>(params.begin(), params.end())}});
  write_json_file(checkpoint_file(directory, "embeddings.json"),
                  model.embeddings().to_json());
}

std::shared_ptr<ReferenceClassifier> load_checkpoint(
    const std::string& directory, CheckpointManifest* manifest) {
  if (!std::filesystem::is_directory(directory)) {
    throw ResolutionError("checkpoint directory not found: " + directory);
  }
  const nlohmann::json m =
      read_json_file(checkpoint_file(directory, "manifest.json"));
  const nlohmann::json w =
      read_json_file(checkpoint_file(directory, "weights.json"));
  auto table = std::make_shared<const EmbeddingTable>(EmbeddingTable::from_json(
      read_json_file(checkpoint_file(directory, "embeddings.json"))));
  CheckpointManifest info;
  try {
    info.architecture = m.at("architecture").get<std::string>();
    info.vocab_hash = m.at("vocab_hash").get<std::uint64_t>();
    info.weights_hash = m.at("weights_hash").get<std::uint64_t>();
    info.seed = m.at("seed").get<std::uint64_t>();
    info.accuracy = m.at("accuracy").get<double>();
    info.baseline_accuracy = m.value("baseline_accuracy", 0.0);
    info.max_tokens = m.value("max_tokens", std::size_t{64});
    info.shape.num_classes = m.at("num_classes").get<int>();
    info.shape.hidden = m.at("hidden").get<int>();
    info.shape.kernel_width = m.at("kernel_width").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ResolutionError("checkpoint manifest in " + directory +
                          " is incomplete: " + e.what());
  }
  if (table->hash() != info.vocab_hash) {
    throw ResolutionError("checkpoint " + directory +
                          ": embedding table does not match vocab_hash");
  }
  auto model = std::shared_ptr<ReferenceClassifier>(ReferenceClassifier::create(
      parse_architecture(info.architecture), table, info.shape, 0));
  const auto params = w.at("parameters").get<std::vector<double>>();
  if (params.size() != model->parameters().size()) {
    throw ResolutionError("checkpoint " + directory +
                          ": parameter count does not match the manifest");
  }
  std::copy(params.begin(), params.end(), model->mutable_parameters().begin());
  if (model->weights_hash() != info.weights_hash) {
    throw ResolutionError("checkpoint " + directory + ": weights hash mismatch");
  }
  if (manifest != nullptr) *manifest = info;
  return model;
}

}  // namespace tea
