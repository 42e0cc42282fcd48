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


#include "support.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>

#include "tea/error.h"

#ifndef TEA_DATA_DIR
#error "TEA_DATA_DIR must point at the bundled data directory"
#endif

namespace tea::testing {

std::string data_path(std::string_view name) {
  return (std::filesystem::path(TEA_DATA_DIR) / name).string();
}

const RawCorpus& fixture_corpus() {
  static const RawCorpus corpus = preprocess_corpus(
      load_corpus_jsonl(data_path("reviews_fixture.jsonl"), "fixture"));
  return corpus;
}

const LanguageResources& fixture_resources() {
  static const LanguageResources resources = [] {
    std::vector<std::string> texts;
    for (const auto& s : fixture_corpus().samples) texts.push_back(s.text);
    return LanguageResources::build(
        texts, std::make_shared<const StopWordList>(
                   StopWordList::load(data_path("stopwords_en.txt"))));
  }();
  return resources;
}

const CorpusSplit& fixture_split() {
  static const CorpusSplit parts = [] {
    SplitSpec spec;
    spec.seed = 0;
    return split(fixture_corpus(), spec);
  }();
  return parts;
}

std::shared_ptr<const ReferenceClassifier> fixture_classifier(
    Architecture architecture) {
  static std::map<Architecture, std::shared_ptr<const ReferenceClassifier>>
      cache;
  auto& slot = cache[architecture];
  if (!slot) {
    TrainConfig config;
    config.architecture = architecture;
    config.seed = 0;
    config.max_tokens = 32;
    slot = train_reference_classifier(fixture_split().train,
                                      fixture_split().validation,
                                      *fixture_resources().aligner,
                                      fixture_resources().embeddings, config)
               .model;
  }
  return slot;
}

std::vector<TokenizedText> fixture_test_samples(std::size_t max_tokens) {
  std::vector<TokenizedText> out;
  for (const auto& s : fixture_split().test.samples) {
    TokenizedText t =
        truncate(fixture_resources().aligner->tokenize(s.text), max_tokens);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

TokenizedText long_fixture_text(std::size_t tokens) {
  std::string text;
  for (const auto& s : fixture_corpus().samples) {
    if (!text.empty()) text += ' ';
    text += s.text;
    const TokenizedText t = fixture_resources().aligner->tokenize(text);
    if (t.size() >= tokens) return truncate(t, tokens);
  }
  throw Error("fixture corpus too small for a long text");
}

Matrix LinearClassifier::embed(const TokenizedText& text) const {
  Matrix x(static_cast<Eigen::Index>(text.size()), embedding_dim());
  for (std::size_t i = 0; i < text.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) =
        table_->lookup(text.tokens[i]).head(embedding_dim()).transpose();
  }
  return x;
}

Vector LinearClassifier::predict_probs(const Matrix& embedding) const {
  const double o1 = 0.5 + (embedding * weights_).sum();
  Vector p(2);
  p << 1.0 - o1, o1;
  return p;
}

Matrix LinearClassifier::gradient(const Matrix& embedding, int label) const {
  Matrix g(embedding.rows(), embedding.cols());
  for (Eigen::Index r = 0; r < g.rows(); ++r) {
    g.row(r) = (label == 1 ? 1.0 : -1.0) * weights_.transpose();
  }
  return g;
}

CandidateSet ScriptedMlm::do_propose(const TokenizedText& text,
                                     std::span<const std::size_t> masked,
                                     std::size_t per_position) const {
  CandidateSet out;
  for (const std::size_t i : masked) {
    std::vector<Candidate> list;
    const auto it = table_.find(text.tokens[i]);
    if (it != table_.end()) {
      for (const std::string& w : it->second) {
        if (list.size() >= per_position) break;
        list.push_back({w, -static_cast<double>(list.size())});
      }
    }
    out.per_position[i] = std::move(list);
  }
  return out;
}

std::map<std::string, std::vector<std::string>> scripted_table_for(
    const TokenizedText& text, const MaskedLanguageModel& mlm,
    std::size_t per_position) {
  std::map<std::string, std::vector<std::string>> table;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text.stop_word_mask[i] || is_punctuation(text.tokens[i]) ||
        table.count(text.tokens[i]) > 0) {
      continue;
    }
    const std::vector<std::size_t> one = {i};
    const CandidateSet proposed = mlm.propose(text, one, per_position);
    std::vector<std::string> words;
    for (const Candidate& c : proposed.per_position.at(i)) {
      words.push_back(c.token);
    }
    table[text.tokens[i]] = std::move(words);
  }
  return table;
}

std::vector<std::string> trace_violations(const AttackTrace& trace,
                                          const Classifier& classifier) {
  std::vector<std::string> out;
  const std::size_t n = trace.original.size();
  if (classifier.predict(trace.adversarial) != trace.label ||
      !trace.prediction_preserved) {
    out.push_back("prediction changed");
  }
  double previous = 0.0;
  for (const Substitution& s : trace.substitutions) {
    if (!(s.d_after > previous)) out.push_back("d_after not increasing");
    previous = s.d_after;
    if (s.position >= n) {
      out.push_back("substitution out of range");
      continue;
    }
    if (trace.original.stop_word_mask[s.position]) {
      out.push_back("stop word substituted: " + s.old_token);
    }
    if (is_punctuation(trace.original.tokens[s.position])) {
      out.push_back("punctuation substituted");
    }
  }
  if (trace.rho > trace.rho_max + 1.0 / static_cast<double>(n) + 1e-12) {
    out.push_back("budget exceeded");
  }
  if (std::abs(trace.rho - static_cast<double>(trace.substitutions.size()) /
                               static_cast<double>(n)) > 1e-12) {
    out.push_back("rho does not match the substitution count");
  }
  if (trace.adversarial.size() != n) {
    out.push_back("adversarial length differs");
    return out;
  }
  std::vector<std::string> expected = trace.original.tokens;
  for (const Substitution& s : trace.substitutions) {
    if (s.position < n) expected[s.position] = s.new_token;
  }
  if (expected != trace.adversarial.tokens) {
    out.push_back("adversarial tokens do not match the substitution log");
  }
  return out;
}

ExhaustiveResult exhaustive_d_max(
    const Classifier& classifier, const TextAligner& aligner,
    const Attributor& attributor, const TokenizedText& text,
    const std::map<std::string, std::vector<std::string>>& table,
    std::size_t per_position) {
  const int label = classifier.predict(text);
  const std::vector<double> reference = attributor(classifier, text, label).scores;
  std::vector<std::size_t> positions;
  std::vector<std::vector<std::string>> options;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text.stop_word_mask[i] || is_punctuation(text.tokens[i])) continue;
    const auto it = table.find(text.tokens[i]);
    if (it == table.end()) continue;
    std::vector<std::string> words;
    for (std::size_t c = 0; c < std::min(per_position, it->second.size());
         ++c) {
      const std::string& w = it->second[c];
      const auto pieces = aligner.classifier_tokenizer().tokenize(w);
      if (w == text.tokens[i] || is_punctuation(w) || pieces.size() != 1 ||
          pieces[0].text != w) {
        continue;
      }
      words.push_back(w);
    }
    if (words.empty()) continue;
    positions.push_back(i);
    options.push_back(std::move(words));
  }

  ExhaustiveResult result;
  std::function<void(std::size_t, const TokenizedText&)> visit =
      [&](std::size_t depth, const TokenizedText& current) {
        if (depth == positions.size()) {
          ++result.combinations;
          const Matrix x = classifier.embed(current);
          if (classifier.predict(x) != label) return;
          const std::vector<double> scores = attributor.on_embedding(
              classifier, x, classifier.row_owners(current), current.size(),
              label);
          result.d_max = std::max(
              result.d_max, attribution_distance(scores, reference).value);
          return;
        }
        visit(depth + 1, current);
        for (const std::string& w : options[depth]) {
          visit(depth + 1, aligner.substitute(current, positions[depth], w));
        }
      };
  visit(0, text);
  return result;
}

}  // namespace tea::testing
