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

#include "tea/text.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "tea/error.h"
#include "tea/rng.h"

namespace tea {
namespace {

constexpr std::string_view kKeptPunctuation = ".,!?;:'\"#|-()";

bool is_word_char(unsigned char c) {
  return std::isalnum(c) != 0 || c == '\'';
}

// Length of the UTF-8 sequence starting with lead byte c.
std::size_t utf8_length(unsigned char c) {
  if (c < 0x80) return 1;
  if ((c >> 5) == 0x6) return 2;
  if ((c >> 4) == 0xE) return 3;
  if ((c >> 3) == 0x1E) return 4;
  return 1;
}

std::vector<CharSpan> shifted(const std::vector<CharSpan>& spans,
                              std::size_t from, std::ptrdiff_t delta) {
  std::vector<CharSpan> out = spans;
  for (std::size_t i = from; i < out.size(); ++i) {
    out[i].begin = static_cast<std::size_t>(
        static_cast<std::ptrdiff_t>(out[i].begin) + delta);
    out[i].end = static_cast<std::size_t>(
        static_cast<std::ptrdiff_t>(out[i].end) + delta);
  }
  return out;
}

}  // namespace

void RawCorpus::validate() const {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.text.empty()) {
      throw Error("corpus '" + name + "': sample " + std::to_string(i) +
                  " has empty text");
    }
    if (s.label < 0 ||
        static_cast<std::size_t>(s.label) >= label_names.size()) {
      throw Error("corpus '" + name + "': sample " + std::to_string(i) +
                  " has label " + std::to_string(s.label) + " but only " +
                  std::to_string(label_names.size()) + " label names");
    }
  }
}

RawCorpus load_corpus_jsonl(const std::string& path, std::string name) {
  std::ifstream in(path);
  if (!in) throw ResolutionError("cannot open corpus file: " + path);
  RawCorpus corpus;
  corpus.name = name.empty() ? path : std::move(name);
  std::map<int, std::string> names;
  std::string line;
  std::size_t line_no = 0;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!row.contains("text") || !row["text"].is_string() ||
        !row.contains("label") || !row["label"].is_number_integer()) {
      throw Error(path + ":" + std::to_string(line_no) +
                  ": expected string 'text' and integer 'label'");
    }
    LabeledText sample{row["text"].get<std::string>(), row["label"].get<int>()};
    if (sample.label < 0) {
      throw Error(path + ":" + std::to_string(line_no) + ": negative label");
    }
    if (row.contains("label_name") && row["label_name"].is_string()) {
      names[sample.label] = row["label_name"].get<std::string>();
    }
    max_label = std::max(max_label, sample.label);
    corpus.samples.push_back(std::move(sample));
  }
  for (int c = 0; c <= max_label; ++c) {
    auto it = names.find(c);
    corpus.label_names.push_back(it != names.end() ? it->second
                                                   : std::to_string(c));
  }
  return corpus;
}

void save_corpus_jsonl(const RawCorpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write corpus file: " + path);
  for (const auto& s : corpus.samples) {
    out << nlohmann::json{{"text", s.text}, {"label", s.label}}.dump() << '\n';
  }
}

std::string preprocess(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < text.size();) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c >= 0x80) {
      i += utf8_length(c);
      continue;
    }
    ++i;
    if (std::isspace(c) != 0) {
      pending_space = true;
      continue;
    }
    char kept;
    if (std::isalpha(c) != 0) {
      kept = static_cast<char>(std::tolower(c));
    } else if (std::isdigit(c) != 0 ||
               kKeptPunctuation.find(static_cast<char>(c)) !=
                   std::string_view::npos) {
      kept = static_cast<char>(c);
    } else {
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out.push_back(kept);
  }
  return out;
}

RawCorpus preprocess_corpus(const RawCorpus& corpus) {
  RawCorpus out;
  out.name = corpus.name;
  out.label_names = corpus.label_names;
  for (const auto& s : corpus.samples) {
    std::string text = preprocess(s.text);
    if (!text.empty()) out.samples.push_back({std::move(text), s.label});
  }
  return out;
}

void SplitSpec::validate() const {
  for (double f : {train_fraction, validation_fraction, test_fraction}) {
    if (!(f > 0.0 && f < 1.0)) {
      throw Error("split fractions must lie in (0, 1)");
    }
  }
  if (std::abs(train_fraction + validation_fraction + test_fraction - 1.0) >
      1e-9) {
    throw Error("split fractions must sum to 1");
  }
}

CorpusSplit split(const RawCorpus& corpus, const SplitSpec& spec) {
  spec.validate();
  const std::size_t n = corpus.size();
  if (n < 3) {
    throw Error("corpus '" + corpus.name + "' has " + std::to_string(n) +
                " samples; at least 3 are needed to split");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(spec.seed);
  shuffle(order, rng);

  auto rounded = [n](double f) {
    return static_cast<std::size_t>(std::llround(static_cast<double>(n) * f));
  };
  std::size_t n_train = std::clamp<std::size_t>(rounded(spec.train_fraction),
                                                1, n - 2);
  std::size_t n_val = std::clamp<std::size_t>(
      rounded(spec.validation_fraction), 1, n - n_train - 1);

  CorpusSplit out;
  for (RawCorpus* part : {&out.train, &out.validation, &out.test}) {
    part->label_names = corpus.label_names;
  }
  out.train.name = corpus.name + "/train";
  out.validation.name = corpus.name + "/validation";
  out.test.name = corpus.name + "/test";
  for (std::size_t i = 0; i < n; ++i) {
    const auto& sample = corpus.samples[order[i]];
    if (i < n_train) {
      out.train.samples.push_back(sample);
    } else if (i < n_train + n_val) {
      out.validation.samples.push_back(sample);
    } else {
      out.test.samples.push_back(sample);
    }
  }
  return out;
}

std::vector<Token> WordTokenizer::tokenize(std::string_view text) const {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c) != 0) {
      ++i;
      continue;
    }
    std::size_t j = i;
    if (c < 0x80 && is_word_char(c)) {
      while (j < text.size() &&
             static_cast<unsigned char>(text[j]) < 0x80 &&
             is_word_char(static_cast<unsigned char>(text[j]))) {
        ++j;
      }
    } else {
      j = std::min(text.size(), i + utf8_length(c));
    }
    tokens.push_back({std::string(text.substr(i, j - i)), {i, j}});
    i = j;
  }
  return tokens;
}

WordPieceTokenizer::WordPieceTokenizer(std::vector<std::string> vocabulary)
    : vocabulary_(std::move(vocabulary)) {
  lookup_.insert(vocabulary_.begin(), vocabulary_.end());
}

WordPieceTokenizer WordPieceTokenizer::build(
    const std::vector<std::string>& texts, int min_word_count) {
  WordTokenizer words;
  std::map<std::string, int> counts;
  std::map<char, int> chars;
  for (const auto& text : texts) {
    for (const auto& token : words.tokenize(text)) {
      ++counts[token.text];
      for (char c : token.text) ++chars[c];
    }
  }
  std::vector<std::string> vocab = {std::string(kUnknown), std::string(kMask)};
  for (const auto& [word, count] : counts) {
    if (count >= min_word_count) vocab.push_back(word);
  }
  for (const auto& [c, count] : chars) {
    const std::string single(1, c);
    if (counts.count(single) == 0 || counts[single] < min_word_count) {
      vocab.push_back(single);
    }
    vocab.push_back(std::string(kContinuation) + single);
  }
  for (std::string_view suffix :
       {"s", "es", "ed", "ing", "ly", "er", "est", "ness", "ful", "able"}) {
    if (suffix.size() > 1) {
      vocab.push_back(std::string(kContinuation) + std::string(suffix));
    }
  }
  std::sort(vocab.begin() + 2, vocab.end());
  vocab.erase(std::unique(vocab.begin() + 2, vocab.end()), vocab.end());
  return WordPieceTokenizer(std::move(vocab));
}

bool WordPieceTokenizer::contains(std::string_view piece) const {
  return lookup_.count(std::string(piece)) > 0;
}

bool WordPieceTokenizer::is_special(std::string_view piece) {
  return piece.size() > 2 && piece.front() == '[' && piece.back() == ']';
}

bool WordPieceTokenizer::is_continuation(std::string_view piece) {
  return piece.substr(0, kContinuation.size()) == kContinuation;
}

std::vector<Token> WordPieceTokenizer::tokenize(std::string_view text) const {
  std::vector<Token> out;
  for (const auto& word : WordTokenizer().tokenize(text)) {
    if (contains(word.text)) {
      out.push_back(word);
      continue;
    }
    std::vector<Token> pieces;
    std::size_t start = 0;
    bool covered = true;
    while (start < word.text.size()) {
      std::size_t end = word.text.size();
      std::string match;
      for (; end > start; --end) {
        std::string piece = word.text.substr(start, end - start);
        if (start > 0) piece = std::string(kContinuation) + piece;
        if (contains(piece)) {
          match = std::move(piece);
          break;
        }
      }
      if (match.empty()) {
        covered = false;
        break;
      }
      pieces.push_back({std::move(match),
                        {word.span.begin + start, word.span.begin + end}});
      start = end;
    }
    if (covered) {
      out.insert(out.end(), pieces.begin(), pieces.end());
    } else {
      out.push_back({std::string(kUnknown), word.span});
    }
  }
  return out;
}

StopWordList::StopWordList(std::vector<std::string> words)
    : words_(words.begin(), words.end()) {}

StopWordList StopWordList::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ResolutionError("cannot open stop-word list: " + path);
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && std::isspace(static_cast<unsigned char>(
                                line.back())) != 0) {
      line.pop_back();
    }
    if (line.empty() || line.front() == '#') continue;
    words.push_back(line);
  }
  return StopWordList(std::move(words));
}

bool StopWordList::contains(std::string_view word) const {
  return words_.count(std::string(word)) > 0;
}

void TokenizedText::validate() const {
  const std::size_t n = tokens.size();
  if (char_spans.size() != n || stop_word_mask.size() != n ||
      mlm_alignment.size() != n) {
    throw Error("tokenized text: per-token views have mismatched lengths");
  }
  if (mlm_spans.size() != mlm_tokens.size()) {
    throw Error("tokenized text: MLM tokens and spans differ in length");
  }
  std::size_t last_end = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const CharSpan& s = char_spans[i];
    if (s.begin < last_end || s.end <= s.begin ||
        s.end > original_text.size()) {
      throw Error("tokenized text: span of token " + std::to_string(i) +
                  " is out of order or out of range");
    }
    if (original_text.compare(s.begin, s.length(), tokens[i]) != 0) {
      throw Error("tokenized text: token " + std::to_string(i) +
                  " does not match its span");
    }
    last_end = s.end;
    const IndexRange& r = mlm_alignment[i];
    if (r.size() == 0 || r.end > mlm_tokens.size() ||
        (i > 0 && r.begin < mlm_alignment[i - 1].end)) {
      throw Error("tokenized text: MLM alignment of token " +
                  std::to_string(i) + " is empty or out of order");
    }
  }
}

TokenizedText tokenize_aligned(std::string_view text,
                               const Tokenizer& classifier_tokenizer,
                               const Tokenizer& mlm_tokenizer,
                               const StopWordList& stop_words) {
  TokenizedText out;
  out.original_text = std::string(text);
  for (auto& token : classifier_tokenizer.tokenize(text)) {
    out.stop_word_mask.push_back(stop_words.contains(token.text));
    out.char_spans.push_back(token.span);
    out.tokens.push_back(std::move(token.text));
  }
  for (auto& token : mlm_tokenizer.tokenize(text)) {
    out.mlm_spans.push_back(token.span);
    out.mlm_tokens.push_back(std::move(token.text));
  }
  std::size_t m = 0;
  for (std::size_t i = 0; i < out.tokens.size(); ++i) {
    const CharSpan& span = out.char_spans[i];
    while (m < out.mlm_spans.size() && out.mlm_spans[m].end <= span.begin) ++m;
    IndexRange range{m, m};
    while (range.end < out.mlm_spans.size() &&
           out.mlm_spans[range.end].begin >= span.begin &&
           out.mlm_spans[range.end].end <= span.end) {
      ++range.end;
    }
    if (range.size() == 0) {
      throw AlignmentError("classifier token " + std::to_string(i) + " '" +
                           out.tokens[i] +
                           "' is not covered by any MLM subtoken");
    }
    out.mlm_alignment.push_back(range);
    m = range.end;
  }
  return out;
}

TokenizedText truncate(const TokenizedText& text, std::size_t max_tokens) {
  if (max_tokens == 0) throw Error("truncate: max_tokens must be >= 1");
  if (text.size() <= max_tokens) return text;
  TokenizedText out;
  const std::size_t cut = text.char_spans[max_tokens - 1].end;
  out.original_text = text.original_text.substr(0, cut);
  out.tokens.assign(text.tokens.begin(), text.tokens.begin() + max_tokens);
  out.char_spans.assign(text.char_spans.begin(),
                        text.char_spans.begin() + max_tokens);
  out.stop_word_mask.assign(text.stop_word_mask.begin(),
                            text.stop_word_mask.begin() + max_tokens);
  out.mlm_alignment.assign(text.mlm_alignment.begin(),
                           text.mlm_alignment.begin() + max_tokens);
  std::size_t keep = 0;
  while (keep < text.mlm_spans.size() && text.mlm_spans[keep].end <= cut) {
    ++keep;
  }
  out.mlm_tokens.assign(text.mlm_tokens.begin(),
                        text.mlm_tokens.begin() + keep);
  out.mlm_spans.assign(text.mlm_spans.begin(), text.mlm_spans.begin() + keep);
  return out;
}

TextAligner::TextAligner(std::shared_ptr<const Tokenizer> classifier_tokenizer,
                         std::shared_ptr<const Tokenizer> mlm_tokenizer,
                         std::shared_ptr<const StopWordList> stop_words)
    : classifier_(std::move(classifier_tokenizer)),
      mlm_(std::move(mlm_tokenizer)),
      stop_words_(std::move(stop_words)) {}

TokenizedText TextAligner::tokenize(std::string_view text) const {
  return tokenize_aligned(text, *classifier_, *mlm_, *stop_words_);
}

TokenizedText TextAligner::substitute(const TokenizedText& text,
                                      std::size_t index,
                                      std::string_view word) const {
  if (index >= text.size()) {
    throw Error("substitute: token index " + std::to_string(index) +
                " out of range for " + std::to_string(text.size()) +
                " tokens");
  }
  if (classifier_->tokenize(word).size() != 1) {
    throw Error("substitute: '" + std::string(word) +
                "' is not a single classifier token");
  }
  const CharSpan old_span = text.char_spans[index];
  const auto delta = static_cast<std::ptrdiff_t>(word.size()) -
                     static_cast<std::ptrdiff_t>(old_span.length());

  TokenizedText out;
  out.original_text = text.original_text.substr(0, old_span.begin) +
                      std::string(word) +
                      text.original_text.substr(old_span.end);
  out.tokens = text.tokens;
  out.tokens[index] = std::string(word);
  out.char_spans = shifted(text.char_spans, index + 1, delta);
  out.char_spans[index] = {old_span.begin, old_span.begin + word.size()};
  out.stop_word_mask = text.stop_word_mask;
  out.stop_word_mask[index] = stop_words_->contains(word);

  const IndexRange old_range = text.mlm_alignment[index];
  std::vector<Token> pieces = mlm_->tokenize(word);
  if (pieces.empty()) {
    throw AlignmentError("substitute: MLM tokenizer produced no subtokens for '" +
                         std::string(word) + "'");
  }
  out.mlm_tokens.assign(text.mlm_tokens.begin(),
                        text.mlm_tokens.begin() + old_range.begin);
  out.mlm_spans.assign(text.mlm_spans.begin(),
                       text.mlm_spans.begin() + old_range.begin);
  for (auto& piece : pieces) {
    out.mlm_tokens.push_back(std::move(piece.text));
    out.mlm_spans.push_back({piece.span.begin + old_span.begin,
                             piece.span.end + old_span.begin});
  }
  const std::vector<CharSpan> tail_spans =
      shifted(text.mlm_spans, old_range.end, delta);
  for (std::size_t m = old_range.end; m < text.mlm_tokens.size(); ++m) {
    out.mlm_tokens.push_back(text.mlm_tokens[m]);
    out.mlm_spans.push_back(tail_spans[m]);
  }

  const auto count_delta = static_cast<std::ptrdiff_t>(pieces.size()) -
                           static_cast<std::ptrdiff_t>(old_range.size());
  out.mlm_alignment = text.mlm_alignment;
  out.mlm_alignment[index] = {old_range.begin,
                              old_range.begin + pieces.size()};
  for (std::size_t i = index + 1; i < out.mlm_alignment.size(); ++i) {
    out.mlm_alignment[i].begin = static_cast<std::size_t>(
        static_cast<std::ptrdiff_t>(out.mlm_alignment[i].begin) + count_delta);
    out.mlm_alignment[i].end = static_cast<std::size_t>(
        static_cast<std::ptrdiff_t>(out.mlm_alignment[i].end) + count_delta);
  }
  return out;
}

bool is_punctuation(std::string_view token) {
  if (token.empty()) return false;
  return std::none_of(token.begin(), token.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
  });
}

}  // namespace tea
