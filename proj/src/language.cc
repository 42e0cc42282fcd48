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

#include "tea/language.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_set>

#include "tea/error.h"

namespace tea {
namespace {

constexpr std::string_view kBegin = "<s>";
constexpr std::string_view kEnd = "</s>";
constexpr std::string_view kUnknownWord = "<unk>";

std::string pair_key(std::string_view a, std::string_view b) {
  std::string key;
  key.reserve(a.size() + b.size() + 1);
  key.append(a);
  key.push_back('\x1f');
  key.append(b);
  return key;
}

double lookup(const std::unordered_map<std::string, double>& counts,
              const std::string& key) {
  auto it = counts.find(key);
  return it == counts.end() ? 0.0 : it->second;
}

bool is_word(std::string_view token) {
  return std::all_of(token.begin(), token.end(), [](char c) {
    return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '\'';
  }) && !token.empty();
}

// Singular/plural noun pairs checked against determiners.
const std::vector<std::pair<std::string_view, std::string_view>>& noun_pairs() {
  static const std::vector<std::pair<std::string_view, std::string_view>>
      pairs = {
          {"film", "films"},       {"movie", "movies"},
          {"picture", "pictures"}, {"story", "stories"},
          {"plot", "plots"},       {"script", "scripts"},
          {"actor", "actors"},     {"scene", "scenes"},
          {"character", "characters"}, {"ending", "endings"},
          {"minute", "minutes"},   {"hour", "hours"},
          {"friend", "friends"},   {"ticket", "tickets"},
          {"review", "reviews"},   {"book", "books"},
          {"song", "songs"},       {"novel", "novels"},
          {"trailer", "trailers"}, {"performance", "performances"},
          {"evening", "evenings"}, {"director", "directors"},
          {"villain", "villains"}, {"sister", "sisters"},
          {"family", "families"},  {"treat", "treats"},
          {"day", "days"},         {"year", "years"},
      };
  return pairs;
}

}  // namespace

BigramLanguageModel BigramLanguageModel::build(
    const std::vector<std::string>& texts, double add_k) {
  if (!(add_k > 0.0)) throw Error("bigram LM: add_k must be positive");
  BigramLanguageModel lm;
  lm.add_k_ = add_k;
  WordTokenizer tokenizer;
  std::unordered_set<std::string> vocab;
  for (const auto& text : texts) {
    std::string previous(kBegin);
    for (const auto& token : tokenizer.tokenize(text)) {
      vocab.insert(token.text);
      lm.unigram_counts_[token.text] += 1.0;
      lm.context_counts_[previous] += 1.0;
      lm.bigram_counts_[pair_key(previous, token.text)] += 1.0;
      previous = token.text;
    }
    lm.context_counts_[previous] += 1.0;
    lm.bigram_counts_[pair_key(previous, kEnd)] += 1.0;
  }
  lm.vocabulary_size_ = vocab.size() + 2;  // <unk> and </s>
  return lm;
}

double BigramLanguageModel::probability(std::string_view previous,
                                        std::string_view word) const {
  auto normalise = [this](std::string_view w) -> std::string {
    if (w == kBegin || w == kEnd) return std::string(w);
    return unigram_counts_.count(std::string(w)) > 0 ? std::string(w)
                                                      : std::string(kUnknownWord);
  };
  const std::string prev = normalise(previous);
  const std::string next = normalise(word);
  const double pair = lookup(bigram_counts_, pair_key(prev, next));
  const double context = lookup(context_counts_, prev);
  return (pair + add_k_) /
         (context + add_k_ * static_cast<double>(vocabulary_size_));
}

std::vector<double> BigramLanguageModel::token_log_probs(
    std::string_view text) const {
  std::vector<double> out;
  std::string previous(kBegin);
  for (const auto& token : WordTokenizer().tokenize(text)) {
    out.push_back(std::log(probability(previous, token.text)));
    previous = token.text;
  }
  out.push_back(std::log(probability(previous, kEnd)));
  return out;
}

double TokenPerplexity::perplexity(std::string_view text) const {
  const auto log_probs = lm_->token_log_probs(text);
  const double sum = std::accumulate(log_probs.begin(), log_probs.end(), 0.0);
  return std::exp(-sum / static_cast<double>(log_probs.size()));
}

double EntropyPerplexity::perplexity(std::string_view text) const {
  double entropy = 0.0;
  for (const double lp : lm_->token_log_probs(text)) {
    entropy -= std::exp(lp) * lp / std::log(2.0);
  }
  return std::pow(2.0, entropy);
}

Vector MeanEmbeddingEncoder::encode(std::string_view text) const {
  Vector sum = Vector::Zero(table_->dim());
  int count = 0;
  for (const auto& token : WordTokenizer().tokenize(text)) {
    if (is_punctuation(token.text)) continue;
    sum += table_->contains(token.text)
               ? table_->lookup(token.text)
               : hashed_unit_vector(token.text, table_->dim());
    ++count;
  }
  return count == 0 ? sum : Vector(sum / count);
}

SifEncoder SifEncoder::build(std::shared_ptr<const EmbeddingTable> table,
                             const std::vector<std::string>& texts,
                             double smoothing) {
  SifEncoder encoder;
  encoder.table_ = std::move(table);
  encoder.smoothing_ = smoothing;
  encoder.principal_ = Vector::Zero(encoder.table_->dim());
  double total = 0.0;
  for (const auto& text : texts) {
    for (const auto& token : WordTokenizer().tokenize(text)) {
      if (is_punctuation(token.text)) continue;
      encoder.frequency_[token.text] += 1.0;
      total += 1.0;
    }
  }
  for (auto& [word, f] : encoder.frequency_) f /= total;
  if (texts.empty()) return encoder;

  Matrix sentences(static_cast<Eigen::Index>(texts.size()),
                   encoder.table_->dim());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    sentences.row(static_cast<Eigen::Index>(i)) =
        encoder.weighted_average(texts[i]).transpose();
  }
  Eigen::BDCSVD<Matrix> svd(sentences, Eigen::ComputeThinV);
  encoder.principal_ = svd.matrixV().col(0);
  return encoder;
}

Vector SifEncoder::weighted_average(std::string_view text) const {
  Vector sum = Vector::Zero(table_->dim());
  double weight_total = 0.0;
  for (const auto& token : WordTokenizer().tokenize(text)) {
    if (is_punctuation(token.text)) continue;
    auto it = frequency_.find(token.text);
    const double p = it == frequency_.end() ? 0.0 : it->second;
    const double w = smoothing_ / (smoothing_ + p);
    sum += w * (table_->contains(token.text)
                    ? table_->lookup(token.text)
                    : hashed_unit_vector(token.text, table_->dim()));
    weight_total += w;
  }
  return weight_total > 0 ? Vector(sum / weight_total) : sum;
}

Vector SifEncoder::encode(std::string_view text) const {
  const Vector v = weighted_average(text);
  return v - principal_ * principal_.dot(v);
}

int RuleBasedGrammarChecker::error_count(std::string_view text) const {
  static const std::unordered_set<std::string_view> kSingularDeterminers = {
      "a", "an", "this", "that", "every", "each", "another", "one"};
  static const std::unordered_set<std::string_view> kPluralDeterminers = {
      "these", "those", "many", "several", "few", "both", "two", "three"};

  const auto tokens = WordTokenizer().tokenize(text);
  if (tokens.empty()) return 0;
  int errors = 0;

  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (is_word(tokens[i].text) && tokens[i].text == tokens[i - 1].text) {
      ++errors;
    }
  }

  std::size_t last = tokens.size();
  while (last > 0 &&
         (tokens[last - 1].text == "\"" || tokens[last - 1].text == ")")) {
    --last;
  }
  if (last == 0 || (tokens[last - 1].text != "." &&
                    tokens[last - 1].text != "!" &&
                    tokens[last - 1].text != "?")) {
    ++errors;
  }

  int quotes = 0, open = 0;
  for (const auto& token : tokens) {
    if (token.text == "\"") ++quotes;
    if (token.text == "(") ++open;
    if (token.text == ")") {
      if (open > 0) {
        --open;
      } else {
        ++errors;
      }
    }
  }
  errors += open + (quotes % 2);

  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    const std::string& det = tokens[i].text;
    const std::string& noun = tokens[i + 1].text;
    for (const auto& [singular, plural] : noun_pairs()) {
      if ((kSingularDeterminers.count(det) > 0 && noun == plural) ||
          (kPluralDeterminers.count(det) > 0 && noun == singular)) {
        ++errors;
      }
    }
  }
  return errors;
}

MlmConfig full_mlm_config() {
  MlmConfig c;
  c.name = "mlm_full";
  c.layers = 12;
  c.window = 4;
  return c;
}

MlmConfig distilled_mlm_config() {
  MlmConfig c;
  c.name = "mlm_distilled";
  c.layers = 6;
  c.window = 2;
  return c;
}

std::shared_ptr<ContextMaskedLanguageModel> ContextMaskedLanguageModel::build(
    const std::vector<std::string>& texts,
    std::shared_ptr<const WordPieceTokenizer> tokenizer,
    std::shared_ptr<const EmbeddingTable> embeddings, const MlmConfig& config) {
  if (config.layers < 0 || config.window < 1) {
    throw Error("MLM config needs layers >= 0 and window >= 1");
  }
  auto model = std::shared_ptr<ContextMaskedLanguageModel>(
      new ContextMaskedLanguageModel());
  model->config_ = config;
  model->tokenizer_ = std::move(tokenizer);
  model->embeddings_ = std::move(embeddings);
  for (const auto& text : texts) {
    std::string previous(kBegin);
    for (const auto& piece : model->tokenizer_->tokenize(text)) {
      model->unigram_[piece.text] += 1.0;
      model->total_ += 1.0;
      model->context_[previous] += 1.0;
      model->bigram_[pair_key(previous, piece.text)] += 1.0;
      previous = piece.text;
    }
    model->context_[previous] += 1.0;
    model->bigram_[pair_key(previous, kEnd)] += 1.0;
  }
  for (const auto& piece : model->tokenizer_->vocabulary()) {
    if (WordPieceTokenizer::is_special(piece) ||
        WordPieceTokenizer::is_continuation(piece) || !is_word(piece)) {
      continue;
    }
    model->candidates_.push_back(piece);
  }
  const int dim = model->embeddings_->dim();
  model->candidate_vectors_.resize(
      static_cast<Eigen::Index>(model->candidates_.size()), dim);
  for (std::size_t i = 0; i < model->candidates_.size(); ++i) {
    Vector v = model->embeddings_->lookup(model->candidates_[i]);
    const double norm = v.norm();
    if (norm > 0) v /= norm;
    model->candidate_vectors_.row(static_cast<Eigen::Index>(i)) = v.transpose();
  }
  return model;
}

double ContextMaskedLanguageModel::log_unigram(std::string_view word) const {
  const double vocab = static_cast<double>(tokenizer_->vocabulary().size());
  return std::log((lookup(unigram_, std::string(word)) + 1.0) /
                  (total_ + vocab));
}

double ContextMaskedLanguageModel::log_bigram(std::string_view previous,
                                              std::string_view word) const {
  const double prior = std::exp(log_unigram(word));
  const double context = lookup(context_, std::string(previous));
  if (context <= 0.0) return std::log(prior);
  const double pair = lookup(bigram_, pair_key(previous, word));
  return std::log(config_.bigram_weight * pair / context +
                  (1.0 - config_.bigram_weight) * prior);
}

CandidateSet ContextMaskedLanguageModel::do_propose(
    const TokenizedText& text, std::span<const std::size_t> masked,
    std::size_t per_position) const {
  const std::set<std::size_t> masked_set(masked.begin(), masked.end());
  struct Slot {
    std::string piece;
    bool is_mask = false;
    std::size_t owner = 0;
  };
  std::vector<Slot> slots;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (masked_set.count(i) > 0) {
      slots.push_back({std::string(WordPieceTokenizer::kMask), true, i});
      continue;
    }
    const IndexRange r = text.mlm_alignment[i];
    for (std::size_t m = r.begin; m < r.end; ++m) {
      slots.push_back({text.mlm_tokens[m], false, i});
    }
  }

  const int dim = embeddings_->dim();
  const auto n = static_cast<Eigen::Index>(slots.size());
  Matrix hidden = Matrix::Zero(n, dim);
  for (Eigen::Index t = 0; t < n; ++t) {
    const Slot& s = slots[static_cast<std::size_t>(t)];
    if (!s.is_mask) hidden.row(t) = embeddings_->lookup(s.piece).transpose();
  }
  for (int layer = 0; layer < config_.layers; ++layer) {
    Matrix next(n, dim);
    for (Eigen::Index t = 0; t < n; ++t) {
      Vector mix = Vector::Zero(dim);
      int count = 0;
      for (Eigen::Index u = std::max<Eigen::Index>(0, t - config_.window);
           u <= std::min<Eigen::Index>(n - 1, t + config_.window); ++u) {
        if (u == t) continue;
        mix += hidden.row(u).transpose();
        ++count;
      }
      next.row(t) = 0.5 * hidden.row(t);
      if (count > 0) next.row(t) += (0.5 / count) * mix.transpose();
    }
    hidden.swap(next);
  }

  CandidateSet out;
  for (Eigen::Index t = 0; t < n; ++t) {
    const Slot& slot = slots[static_cast<std::size_t>(t)];
    if (!slot.is_mask) continue;
    const bool has_left =
        t == 0 || !slots[static_cast<std::size_t>(t - 1)].is_mask;
    const bool has_right =
        t == n - 1 || !slots[static_cast<std::size_t>(t + 1)].is_mask;
    const std::string left =
        t == 0 ? std::string(kBegin) : slots[static_cast<std::size_t>(t - 1)].piece;
    const std::string right = t == n - 1
                                  ? std::string(kEnd)
                                  : slots[static_cast<std::size_t>(t + 1)].piece;
    Vector context = hidden.row(t).transpose();
    const double norm = context.norm();
    Vector cosine = Vector::Zero(static_cast<Eigen::Index>(candidates_.size()));
    if (norm > 0) cosine = candidate_vectors_ * (context / norm);

    const std::string& original = text.tokens[slot.owner];
    std::vector<Candidate> scored;
    scored.reserve(candidates_.size());
    for (std::size_t c = 0; c < candidates_.size(); ++c) {
      const std::string& word = candidates_[c];
      if (word == original) continue;
      double score = config_.context_weight * cosine(static_cast<Eigen::Index>(c));
      if (has_left) score += log_bigram(left, word);
      if (has_right) score += log_bigram(word, right);
      if (!has_left && !has_right) score += log_unigram(word);
      scored.push_back({word, score});
    }
    const std::size_t keep = std::min(per_position, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<long>(keep),
                      scored.end(), [](const Candidate& a, const Candidate& b) {
                        if (a.score != b.score) return a.score > b.score;
                        return a.token < b.token;
                      });
    scored.resize(keep);
    out.per_position[slot.owner] = std::move(scored);
  }
  return out;
}

LanguageResources LanguageResources::build(
    const std::vector<std::string>& texts,
    std::shared_ptr<const StopWordList> stop_words,
    std::shared_ptr<const EmbeddingTable> embeddings) {
  LanguageResources r;
  r.embeddings = embeddings ? std::move(embeddings)
                            : std::make_shared<const EmbeddingTable>(
                                  EmbeddingTable::build(texts));
  r.mlm_tokenizer = std::make_shared<const WordPieceTokenizer>(
      WordPieceTokenizer::build(texts));
  r.stop_words = std::move(stop_words);
  r.aligner = std::make_shared<const TextAligner>(
      std::make_shared<const WordTokenizer>(), r.mlm_tokenizer, r.stop_words);
  r.bigram = std::make_shared<const BigramLanguageModel>(
      BigramLanguageModel::build(texts));
  r.mlm_full = ContextMaskedLanguageModel::build(texts, r.mlm_tokenizer,
                                                 r.embeddings, full_mlm_config());
  r.mlm_distilled = ContextMaskedLanguageModel::build(
      texts, r.mlm_tokenizer, r.embeddings, distilled_mlm_config());
  r.use_like = std::make_shared<const MeanEmbeddingEncoder>(r.embeddings);
  r.minilm_like = std::make_shared<const SifEncoder>(
      SifEncoder::build(r.embeddings, texts));
  r.grammar = std::make_shared<const RuleBasedGrammarChecker>();
  return r;
}

std::shared_ptr<const MaskedLanguageModel> LanguageResources::mlm(
    std::string_view name) const {
  if (name == "full" || name == "mlm_full") return mlm_full;
  if (name == "distilled" || name == "mlm_distilled") return mlm_distilled;
  throw ConfigError("unknown MLM '" + std::string(name) +
                    "' (expected full or distilled)");
}

std::shared_ptr<const SentenceEncoder> LanguageResources::sentence_encoder(
    std::string_view name) const {
  if (name == "sts_use_like") return use_like;
  if (name == "sts_minilm_like") return minilm_like;
  throw ConfigError("unknown sentence encoder '" + std::string(name) + "'");
}

std::shared_ptr<const PerplexityModel> LanguageResources::perplexity_model(
    std::string_view name) const {
  if (name == "bigram" || name == "pp") {
    return std::make_shared<const TokenPerplexity>(bigram);
  }
  if (name == "bigram_entropy") {
    return std::make_shared<const EntropyPerplexity>(bigram);
  }
  throw ConfigError("unknown perplexity model '" + std::string(name) + "'");
}

}  // namespace tea
