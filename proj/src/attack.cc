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


#include "tea/attack.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <optional>

#include "tea/error.h"

namespace tea {
namespace {

// Guards the floor/ceil of products such as 100 * 0.05 = 5.000000000000001.
constexpr double kRatioSlack = 1e-9;

const std::vector<std::string> kNoNeighbours;

double map_distance(std::string_view key, std::span<const double> a,
                    std::span<const double> b) {
  if (key == kPccKey) return attribution_distance(a, b).value;
  throw ConfigError("unknown attribution distance '" + std::string(key) + "'");
}

bool over_budget(std::size_t accepted, std::size_t num_tokens,
                 double rho_max) {
  return static_cast<double>(accepted + 1) / static_cast<double>(num_tokens) >
         rho_max + kRatioSlack;
}

std::vector<double> to_std(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

void AttackConfig::validate() const {
  if (!(rho_max > 0.0 && rho_max <= 1.0)) {
    throw ConfigError("rho_max must lie in (0, 1], got " +
                      std::to_string(rho_max));
  }
  if (!per_token_masking && !(rho_b > 0.0 && rho_b <= rho_max + kRatioSlack)) {
    throw ConfigError("rho_b must lie in (0, rho_max], got " +
                      std::to_string(rho_b));
  }
  if (candidates_per_token < 1) {
    throw ConfigError("candidates_per_token must be at least 1");
  }
  if (ig_steps < 1) throw ConfigError("ig_steps must be at least 1");
  if (!is_attribution_distance_key(attribution_distance_key)) {
    throw ConfigError("unknown attribution distance '" +
                      attribution_distance_key + "'");
  }
}

double rho_b_rule(double rho_max) {
  return std::min(rho_max, kDefaultBatchRatioCap);
}

std::size_t position_budget(std::size_t num_tokens, double rho_max) {
  return static_cast<std::size_t>(
      std::floor(static_cast<double>(num_tokens) * rho_max + kRatioSlack));
}

std::size_t batch_size(std::size_t num_tokens, double rho_b) {
  const auto n = static_cast<std::size_t>(
      std::ceil(static_cast<double>(num_tokens) * rho_b - kRatioSlack));
  return std::max<std::size_t>(n, 1);
}

std::size_t predicted_queries(std::size_t num_tokens, double rho_max,
                              double rho_b) {
  const std::size_t n = std::min(position_budget(num_tokens, rho_max),
                                 num_tokens);
  const std::size_t b = batch_size(num_tokens, rho_b);
  return (n + b - 1) / b;
}

std::vector<double> importance_scores(const Classifier& classifier,
                                      const Attributor& attributor,
                                      const TokenizedText& text, int label,
                                      const AttributionMap& original) {
  const auto owners = classifier.row_owners(text);
  std::vector<double> scores(text.size(), 0.0);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const Matrix zeroed = zero_token_embedding(classifier, text, i);
    const std::vector<double> probe =
        attributor.on_embedding(classifier, zeroed, owners, text.size(), label);
    scores[i] = text.size() < 2
                    ? 0.0
                    : attribution_distance(probe, original.scores).value;
  }
  return scores;
}

std::vector<std::size_t> rank_by_importance(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  return order;
}

std::vector<std::size_t> importance_ranking(const Classifier& classifier,
                                            const Attributor& attributor,
                                            const TokenizedText& text,
                                            int label) {
  const AttributionMap original = attributor(classifier, text, label);
  return rank_by_importance(
      importance_scores(classifier, attributor, text, label, original));
}

std::vector<std::vector<std::size_t>> make_batches(
    std::span<const std::size_t> ranked, std::size_t num_tokens,
    double rho_max, double rho_b) {
  if (!(rho_b > 0.0 && rho_b <= 1.0)) {
    throw Error("make_batches: rho_b must lie in (0, 1]");
  }
  const std::size_t n =
      std::min(position_budget(num_tokens, rho_max), ranked.size());
  const std::size_t b = batch_size(num_tokens, rho_b);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += b) {
    const std::size_t end = std::min(start + b, n);
    batches.emplace_back(ranked.begin() + static_cast<long>(start),
                         ranked.begin() + static_cast<long>(end));
  }
  return batches;
}

SynonymTable::SynonymTable(
    std::unordered_map<std::string, std::vector<std::string>> entries)
    : entries_(std::move(entries)) {}

SynonymTable SynonymTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ResolutionError("cannot open synonym table '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("synonym table '" + path + "': " + e.what());
  }
  return from_json(j);
}

SynonymTable SynonymTable::from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw ConfigError("synonym table must be a JSON object");
  }
  std::unordered_map<std::string, std::vector<std::string>> entries;
  for (const auto& [word, list] : j.items()) {
    if (!list.is_array()) {
      throw ConfigError("synonym table entry '" + word + "' is not a list");
    }
    std::vector<std::string> neighbours;
    for (const auto& w : list) {
      if (!w.is_string()) {
        throw ConfigError("synonym table entry '" + word +
                          "' holds a non-string");
      }
      neighbours.push_back(w.get<std::string>());
    }
    entries.emplace(word, std::move(neighbours));
  }
  return SynonymTable(std::move(entries));
}

const std::vector<std::string>& SynonymTable::neighbours(
    std::string_view word) const {
  const auto it = entries_.find(std::string(word));
  return it == entries_.end() ? kNoNeighbours : it->second;
}

CandidateSet SynonymCandidateSource::candidates(
    const TokenizedText& text, std::span<const std::size_t> positions,
    std::size_t per_position) const {
  CandidateSet out;
  for (const std::size_t i : positions) {
    if (i >= text.size()) throw Error("synonym source: position out of range");
    std::vector<Candidate> list;
    for (const std::string& word : table_->neighbours(text.tokens[i])) {
      if (list.size() >= per_position) break;
      if (word == text.tokens[i]) continue;
      const bool seen = std::any_of(list.begin(), list.end(),
                                    [&](const Candidate& c) {
                                      return c.token == word;
                                    });
      if (seen) continue;
      list.push_back({word, -static_cast<double>(list.size())});
    }
    out.per_position[i] = std::move(list);
  }
  return out;
}

Attacker::Attacker(std::shared_ptr<const Classifier> classifier,
                   std::shared_ptr<const TextAligner> aligner,
                   AttackConfig config)
    : classifier_(std::move(classifier)),
      aligner_(std::move(aligner)),
      config_(std::move(config)),
      attributor_(config_.attribution_method, config_.ig_steps) {
  config_.validate();
  attributor_.check_supported(*classifier_);
}

AttackTrace Attacker::run(const TokenizedText& text,
                          const CandidateSource& source,
                          std::string_view attack_name,
                          std::string_view sample_id) const {
  if (text.empty()) throw Error("attack: sample has no tokens");
  const Classifier& model = *classifier_;
  const std::size_t n = text.size();

  AttackTrace trace;
  trace.sample_id = std::string(sample_id);
  trace.attack = std::string(attack_name);
  trace.candidate_source = source.name();
  trace.original = text;
  trace.rho_max = config_.rho_max;
  const double rho_b = config_.per_token_masking
                           ? 1.0 / static_cast<double>(n)
                           : config_.rho_b;
  trace.rho_b = rho_b;
  trace.seed = config_.seed;

  const Vector probs = model.predict_probs(text);
  Eigen::Index top = 0;
  probs.maxCoeff(&top);
  const int label = static_cast<int>(top);
  trace.label = label;
  trace.original_probs = to_std(probs);

  AttributionMap original = attributor_(model, text, label);
  original.sample_ref = trace.sample_id;
  trace.original_attribution = original;
  const std::span<const double> reference(original.scores);
  const std::string& key = config_.attribution_distance_key;

  TokenizedText adversarial = text;
  std::vector<double> adversarial_scores = original.scores;
  double d_max = 0.0;
  std::size_t accepted = 0;

  if (n >= 2) {
    const auto ranked = rank_by_importance(
        importance_scores(model, attributor_, text, label, original));
    const auto batches = make_batches(ranked, n, config_.rho_max, rho_b);
    bool done = false;
    for (const auto& batch : batches) {
      if (done || over_budget(accepted, n, config_.rho_max)) break;
      CandidateSet candidates;
      try {
        if (source.counts_queries()) ++trace.mlm_queries;
        candidates = source.candidates(adversarial, batch,
                                       config_.candidates_per_token);
      } catch (const MlmError& e) {
        trace.aborted = true;
        trace.abort_reason = e.what();
        break;
      }
      for (const std::size_t i : batch) {
        if (over_budget(accepted, n, config_.rho_max)) {
          done = true;
          break;
        }
        if (text.stop_word_mask[i] || is_punctuation(text.tokens[i])) continue;
        const auto it = candidates.per_position.find(i);
        if (it == candidates.per_position.end()) continue;

        double best_d = d_max;
        std::optional<TokenizedText> best;
        std::vector<double> best_scores;
        std::string best_word;
        for (const Candidate& c : it->second) {
          if (c.token == adversarial.tokens[i] || is_punctuation(c.token)) {
            continue;
          }
          const auto pieces = aligner_->classifier_tokenizer().tokenize(c.token);
          if (pieces.size() != 1 || pieces[0].text != c.token) continue;
          TokenizedText probe = aligner_->substitute(adversarial, i, c.token);
          const Matrix x = model.embed(probe);
          if (model.predict(x) != label) continue;
          std::vector<double> scores = attributor_.on_embedding(
              model, x, model.row_owners(probe), probe.size(), label);
          const double d = map_distance(key, scores, reference);
          if (d > best_d) {
            best_d = d;
            best = std::move(probe);
            best_scores = std::move(scores);
            best_word = c.token;
          }
        }
        if (!best) continue;
        trace.substitutions.push_back(
            {i, adversarial.tokens[i], best_word, best_d});
        adversarial = std::move(*best);
        adversarial_scores = std::move(best_scores);
        d_max = best_d;
        ++accepted;
      }
    }
  }

  trace.adversarial = adversarial;
  const Vector adv_probs = model.predict_probs(adversarial);
  trace.adversarial_probs = to_std(adv_probs);
  Eigen::Index adv_top = 0;
  adv_probs.maxCoeff(&adv_top);
  trace.prediction_preserved = static_cast<int>(adv_top) == label;
  trace.adversarial_attribution = original;
  trace.adversarial_attribution.scores = adversarial_scores;
  trace.adversarial_attribution.sample_ref = trace.sample_id + "/adv";
  trace.rho = static_cast<double>(accepted) / static_cast<double>(n);
  if (n >= 2) {
    const AttributionDistance d =
        attribution_distance(adversarial_scores, original.scores);
    trace.d_max = d.value;
    trace.pcc = d.pcc;
    trace.constant_attribution = d.undefined;
  }
  return trace;
}

AttackTrace attack(std::shared_ptr<const Classifier> classifier,
                   std::shared_ptr<const MaskedLanguageModel> mlm,
                   std::shared_ptr<const TextAligner> aligner,
                   const TokenizedText& text, const AttackConfig& config) {
  const Attacker attacker(std::move(classifier), std::move(aligner), config);
  const MlmCandidateSource source(std::move(mlm));
  return attacker.run(text, source, "tea");
}

AttackTrace baseline_synonym_attack(
    std::shared_ptr<const Classifier> classifier,
    std::shared_ptr<const TextAligner> aligner, const TokenizedText& text,
    const AttackConfig& config, std::shared_ptr<const SynonymTable> synonyms) {
  const Attacker attacker(std::move(classifier), std::move(aligner), config);
  const SynonymCandidateSource source(std::move(synonyms));
  return attacker.run(text, source, "baseline");
}

nlohmann::json to_json(const TokenizedText& text) {
  nlohmann::json spans = nlohmann::json::array();
  for (const CharSpan& s : text.char_spans) spans.push_back({s.begin, s.end});
  nlohmann::json mlm_spans = nlohmann::json::array();
  for (const CharSpan& s : text.mlm_spans) mlm_spans.push_back({s.begin, s.end});
  nlohmann::json alignment = nlohmann::json::array();
  for (const IndexRange& r : text.mlm_alignment) {
    alignment.push_back({r.begin, r.end});
  }
  std::vector<int> stop(text.stop_word_mask.begin(), text.stop_word_mask.end());
  return {{"text", text.original_text}, {"tokens", text.tokens},
          {"spans", spans},             {"stop_words", stop},
          {"mlm_tokens", text.mlm_tokens}, {"mlm_spans", mlm_spans},
          {"mlm_alignment", alignment}};
}

TokenizedText tokenized_text_from_json(const nlohmann::json& j) {
  TokenizedText t;
  t.original_text = j.at("text").get<std::string>();
  t.tokens = j.at("tokens").get<std::vector<std::string>>();
  for (const auto& s : j.at("spans")) {
    t.char_spans.push_back({s.at(0).get<std::size_t>(),
                            s.at(1).get<std::size_t>()});
  }
  for (const auto& v : j.at("stop_words")) {
    t.stop_word_mask.push_back(v.get<int>() != 0);
  }
  t.mlm_tokens = j.at("mlm_tokens").get<std::vector<std::string>>();
  for (const auto& s : j.at("mlm_spans")) {
    t.mlm_spans.push_back({s.at(0).get<std::size_t>(),
                           s.at(1).get<std::size_t>()});
  }
  for (const auto& r : j.at("mlm_alignment")) {
    t.mlm_alignment.push_back({r.at(0).get<std::size_t>(),
                               r.at(1).get<std::size_t>()});
  }
  t.validate();
  return t;
}

nlohmann::json to_json(const AttackTrace& trace) {
  nlohmann::json subs = nlohmann::json::array();
  for (const Substitution& s : trace.substitutions) {
    subs.push_back({{"position", s.position},
                    {"old", s.old_token},
                    {"new", s.new_token},
                    {"d_after", s.d_after}});
  }
  return {{"sample", trace.sample_id},
          {"attack", trace.attack},
          {"candidate_source", trace.candidate_source},
          {"original", to_json(trace.original)},
          {"adversarial", to_json(trace.adversarial)},
          {"substitutions", subs},
          {"label", trace.label},
          {"original_probs", trace.original_probs},
          {"adversarial_probs", trace.adversarial_probs},
          {"original_attribution", to_json(trace.original_attribution)},
          {"adversarial_attribution", to_json(trace.adversarial_attribution)},
          {"rho", trace.rho},
          {"rho_max", trace.rho_max},
          {"rho_b", trace.rho_b},
          {"d_max", trace.d_max},
          {"pcc", trace.pcc},
          {"constant_attribution", trace.constant_attribution},
          {"prediction_preserved", trace.prediction_preserved},
          {"aborted", trace.aborted},
          {"abort_reason", trace.abort_reason},
          {"mlm_queries", trace.mlm_queries},
          {"seed", trace.seed}};
}

AttackTrace attack_trace_from_json(const nlohmann::json& j) {
  AttackTrace t;
  t.sample_id = j.at("sample").get<std::string>();
  t.attack = j.at("attack").get<std::string>();
  t.candidate_source = j.at("candidate_source").get<std::string>();
  t.original = tokenized_text_from_json(j.at("original"));
  t.adversarial = tokenized_text_from_json(j.at("adversarial"));
  for (const auto& s : j.at("substitutions")) {
    t.substitutions.push_back({s.at("position").get<std::size_t>(),
                               s.at("old").get<std::string>(),
                               s.at("new").get<std::string>(),
                               s.at("d_after").get<double>()});
  }
  t.label = j.at("label").get<int>();
  t.original_probs = j.at("original_probs").get<std::vector<double>>();
  t.adversarial_probs = j.at("adversarial_probs").get<std::vector<double>>();
  t.original_attribution =
      attribution_map_from_json(j.at("original_attribution"));
  t.adversarial_attribution =
      attribution_map_from_json(j.at("adversarial_attribution"));
  t.rho = j.at("rho").get<double>();
  t.rho_max = j.at("rho_max").get<double>();
  t.rho_b = j.at("rho_b").get<double>();
  t.d_max = j.at("d_max").get<double>();
  t.pcc = j.at("pcc").get<double>();
  t.constant_attribution = j.at("constant_attribution").get<bool>();
  t.prediction_preserved = j.at("prediction_preserved").get<bool>();
  t.aborted = j.at("aborted").get<bool>();
  t.abort_reason = j.at("abort_reason").get<std::string>();
  t.mlm_queries = j.at("mlm_queries").get<std::uint64_t>();
  t.seed = j.at("seed").get<std::uint64_t>();
  return t;
}

void write_traces_jsonl(const std::string& path,
                        std::span<const AttackTrace> traces) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write traces to '" + path + "'");
  for (const AttackTrace& t : traces) out << to_json(t).dump() << '\n';
}

std::vector<AttackTrace> read_traces_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ResolutionError("cannot open trace file '" + path + "'");
  std::vector<AttackTrace> traces;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    traces.push_back(attack_trace_from_json(nlohmann::json::parse(line)));
  }
  return traces;
}

}  // namespace tea
