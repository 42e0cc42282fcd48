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

// Corpus ingestion, preprocessing, splitting and tokenization.
//
// A TokenizedText carries two tokenizations of the same string: the
// classifier's word-level tokens, which are what attributions and
// substitutions refer to, and the masked language model's subword tokens.
// mlm_alignment maps every classifier token to the contiguous range of MLM
// subtokens that cover it.

#ifndef TEA_TEXT_H_
#define TEA_TEXT_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace tea {

struct LabeledText {
  std::string text;
  int label = 0;
};

struct RawCorpus {
  std::string name;
  std::vector<LabeledText> samples;
  std::vector<std::string> label_names;

  std::size_t size() const { return samples.size(); }
  // Throws Error on a label id outside label_names or an empty text.
  void validate() const;
};

// Reads one JSON object per line with fields "text" and "label". Label names
// default to the decimal class ids.
RawCorpus load_corpus_jsonl(const std::string& path, std::string name = "");
void save_corpus_jsonl(const RawCorpus& corpus, const std::string& path);

// Lowercases, keeps ASCII letters, digits and .,!?;:'"#|-() and collapses
// whitespace runs to one space. Everything else, emoji included, is dropped.
std::string preprocess(std::string_view text);

// Applies preprocess to every sample and drops samples that become empty.
RawCorpus preprocess_corpus(const RawCorpus& corpus);

struct SplitSpec {
  double train_fraction = 0.6;
  double validation_fraction = 0.2;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CorpusSplit {
  RawCorpus train;
  RawCorpus validation;
  RawCorpus test;
};

// Seeded uniform shuffle, then contiguous partition. Train and validation
// sizes are rounded to nearest; test takes the remainder. Every part gets at
// least one sample.
CorpusSplit split(const RawCorpus& corpus, const SplitSpec& spec);

struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - begin; }
  bool operator==(const CharSpan&) const = default;
};

struct Token {
  std::string text;
  CharSpan span;
};

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<Token> tokenize(std::string_view text) const = 0;
  virtual std::string name() const = 0;
};

// Runs of [a-z0-9'] form words; every other non-space character is a token
// of its own. "press the delete key ." gives five tokens.
class WordTokenizer final : public Tokenizer {
 public:
  std::vector<Token> tokenize(std::string_view text) const override;
  std::string name() const override { return "word"; }
};

// Greedy longest-match-first subword tokenizer over a fixed vocabulary.
// Continuation pieces carry the "##" prefix. A word that cannot be covered
// becomes a single [UNK] token spanning the whole word.
class WordPieceTokenizer final : public Tokenizer {
 public:
  static constexpr std::string_view kUnknown = "[UNK]";
  static constexpr std::string_view kMask = "[MASK]";
  static constexpr std::string_view kContinuation = "##";

  explicit WordPieceTokenizer(std::vector<std::string> vocabulary);

  // Whole words seen at least min_word_count times, plus single characters
  // and their continuation forms, plus frequent word suffixes.
  static WordPieceTokenizer build(const std::vector<std::string>& texts,
                                  int min_word_count = 2);

  std::vector<Token> tokenize(std::string_view text) const override;
  std::string name() const override { return "wordpiece"; }

  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  bool contains(std::string_view piece) const;
  static bool is_special(std::string_view piece);
  static bool is_continuation(std::string_view piece);

 private:
  std::vector<std::string> vocabulary_;
  std::unordered_set<std::string> lookup_;
};

class StopWordList {
 public:
  StopWordList() = default;
  explicit StopWordList(std::vector<std::string> words);

  // One word per line; blank lines and lines starting with '#' are skipped.
  static StopWordList load(const std::string& path);

  bool contains(std::string_view word) const;
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool operator==(const IndexRange&) const = default;
};

struct TokenizedText {
  std::string original_text;
  std::vector<std::string> tokens;
  std::vector<CharSpan> char_spans;
  std::vector<bool> stop_word_mask;
  std::vector<std::string> mlm_tokens;
  std::vector<CharSpan> mlm_spans;
  std::vector<IndexRange> mlm_alignment;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  // Throws Error if any structural invariant is broken.
  void validate() const;
};

// Throws AlignmentError naming the first classifier token that no MLM
// subtoken covers.
TokenizedText tokenize_aligned(std::string_view text,
                               const Tokenizer& classifier_tokenizer,
                               const Tokenizer& mlm_tokenizer,
                               const StopWordList& stop_words);

// Keeps the first max_tokens classifier tokens. original_text is cut right
// after the last kept token and MLM subtokens are re-sliced to match.
TokenizedText truncate(const TokenizedText& text, std::size_t max_tokens);

// Bundles both tokenizers and the stop-word list so callers can tokenize and
// edit samples without threading three objects around.
class TextAligner {
 public:
  TextAligner(std::shared_ptr<const Tokenizer> classifier_tokenizer,
              std::shared_ptr<const Tokenizer> mlm_tokenizer,
              std::shared_ptr<const StopWordList> stop_words);

  TokenizedText tokenize(std::string_view text) const;

  // Replaces classifier token `index` by `word`, splicing original_text and
  // re-tokenizing the replacement for the MLM view.
  TokenizedText substitute(const TokenizedText& text, std::size_t index,
                           std::string_view word) const;

  const Tokenizer& classifier_tokenizer() const { return *classifier_; }
  const Tokenizer& mlm_tokenizer() const { return *mlm_; }
  const StopWordList& stop_words() const { return *stop_words_; }

 private:
  std::shared_ptr<const Tokenizer> classifier_;
  std::shared_ptr<const Tokenizer> mlm_;
  std::shared_ptr<const StopWordList> stop_words_;
};

bool is_punctuation(std::string_view token);

}  // namespace tea

#endif  // TEA_TEXT_H_
