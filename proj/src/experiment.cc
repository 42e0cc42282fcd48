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


#include "tea/experiment.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "tea/error.h"
#include "tea/report.h"

namespace tea {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::string_view kDefaultRhoB = "min(rho_max,0.15)";
constexpr std::string_view kThirdRhoB = "rho_max/3";

std::string resolve_path(const std::string& base, const std::string& path) {
  if (path.empty() || base.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base) / path).lexically_normal().string();
}

// Reads j[key] into `out` if present, turning type mismatches into
// ConfigError messages that name the field.
template <typename T>
void read_field(const json& j, const char* key, T& out,
                const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->template get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + where + key + "' has the wrong type");
  }
}

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!j.is_object()) {
    throw ConfigError("config section '" + where + "' must be an object");
  }
  for (const auto& [key, unused] : j.items()) {
    if (allowed.count(key) == 0) {
      throw ConfigError("unknown config field '" + where + key + "'");
    }
  }
}

// A scalar or a list of scalars.
template <typename T>
std::vector<T> read_list(const json& j, const char* key,
                         const std::string& where, std::vector<T> fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    if (it->is_array()) return it->template get<std::vector<T>>();
    return {it->template get<T>()};
  } catch (const json::exception&) {
    throw ConfigError("config field '" + where + key + "' has the wrong type");
  }
}

template <typename F>
void parallel_for(std::size_t n, std::size_t workers, F&& body) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string number_tag(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

std::string file_stem(const ExperimentConfig& c, std::string_view attack) {
  return c.dataset_name + "_" + c.model_name() + "_" +
         to_string(c.attribution) + "_" + std::string(attack);
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

// samples[attack][seed] -> reports, then written next to the records.
ExperimentResult build_and_write_reports(
    const ExperimentConfig& config,
    const std::map<std::string, std::map<std::uint64_t,
                                         std::vector<SampleRobustness>>>&
        samples) {
  ExperimentResult result;
  const fs::path dir(config.output_dir);
  const std::string k_key = config.primary_k_key();
  std::vector<RobustnessReport> series;
  for (const auto& [attack, by_seed] : samples) {
    std::vector<RobustnessReport> per_seed;
    for (const auto& [seed, records] : by_seed) {
      if (records.empty()) continue;
      const auto selected =
          select_per_bucket_max(records, config.rho_edges, k_key);
      RobustnessReport r = aggregate(selected, config.rho_edges);
      r.dataset = config.dataset_name;
      r.model = config.model_name();
      r.attribution = to_string(config.attribution);
      r.attack = attack;
      per_seed.push_back(std::move(r));
    }
    if (per_seed.empty()) continue;
    RobustnessReport averaged = average_reports(per_seed);
    const std::string stem = file_stem(config, attack);
    const fs::path csv = dir / ("report_" + stem + ".csv");
    const fs::path js = dir / ("report_" + stem + ".json");
    write_text(csv, report_csv(averaged));
    write_text(js, to_json(averaged).dump(2) + "\n");
    result.artifacts.push_back(csv.string());
    result.artifacts.push_back(js.string());
    series.push_back(averaged);
    result.seed_reports[attack] = std::move(per_seed);
    result.reports[attack] = std::move(averaged);
  }
  if (!series.empty()) {
    std::string sts_key = "sts_use_like";
    for (const std::string& d : config.distances) {
      if (is_semantic_distance_key(d)) {
        sts_key = d;
        break;
      }
    }
    const fs::path svg = dir / ("plot_" + config.dataset_name + "_" +
                                config.model_name() + "_" +
                                to_string(config.attribution) + ".svg");
    write_text(svg, render_svg(series, "k_" + k_key, sts_key));
    result.artifacts.push_back(svg.string());
  }
  const auto tea = result.reports.find("tea");
  const auto base = result.reports.find("baseline");
  if (tea != result.reports.end() && base != result.reports.end()) {
    json summary = json::object();
    for (const auto& [metric, auc] : tea->second.auc_k) {
      const auto other = base->second.auc_k.find(metric);
      if (other == base->second.auc_k.end() || !(other->second > 0)) continue;
      summary[metric] = {{"auc_tea", auc},
                         {"auc_baseline", other->second},
                         {"relative_increase",
                          relative_auc_increase(auc, other->second)}};
    }
    const fs::path path = dir / ("comparison_" + config.dataset_name + "_" +
                                 config.model_name() + "_" +
                                 to_string(config.attribution) + ".json");
    write_text(path, summary.dump(2) + "\n");
    result.artifacts.push_back(path.string());
  }
  return result;
}

}  // namespace

std::string to_string(AttackKind kind) {
  return kind == AttackKind::kTea ? "tea" : "baseline";
}

AttackKind parse_attack_kind(std::string_view name) {
  if (name == "tea") return AttackKind::kTea;
  if (name == "baseline") return AttackKind::kBaseline;
  throw ConfigError("unknown attack '" + std::string(name) +
                    "' (expected tea or baseline)");
}

std::string MlmVariant::name() const {
  return batch ? model + "+batch" : model;
}

MlmVariant parse_mlm_variant(std::string_view name) {
  MlmVariant v;
  std::string_view model = name;
  v.batch = false;
  const std::string_view suffix = "+batch";
  if (name.size() > suffix.size() &&
      name.substr(name.size() - suffix.size()) == suffix) {
    v.batch = true;
    model = name.substr(0, name.size() - suffix.size());
  }
  if (model != "full" && model != "distilled") {
    throw ConfigError("unknown mlm variant '" + std::string(name) +
                      "' (expected full, distilled or distilled+batch)");
  }
  v.model = std::string(model);
  return v;
}

void ExperimentConfig::validate() const {
  if (dataset_path.empty()) throw ConfigError("dataset.path is required");
  if (dataset_name.empty()) throw ConfigError("dataset.name is empty");
  if (max_tokens < 1) throw ConfigError("dataset.max_tokens must be >= 1");
  try {
    split.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (!architecture && checkpoint.empty()) {
    throw ConfigError("model needs an architecture or a checkpoint");
  }
  if (max_epochs < 1) throw ConfigError("model.max_epochs must be >= 1");
  if (shape.hidden < 1 || shape.kernel_width < 1) {
    throw ConfigError("model.hidden and model.kernel_width must be >= 1");
  }
  if (ig_steps < 1) throw ConfigError("ig_steps must be >= 1");
  if (attacks.empty()) throw ConfigError("attack list is empty");
  if (rho_max.empty()) throw ConfigError("rho_max list is empty");
  for (const double r : rho_max) {
    if (!(r > 0.0 && r <= 1.0)) {
      throw ConfigError("rho_max values must lie in (0, 1], got " +
                        number_tag(r));
    }
    const double b = rho_b(r);
    if (!(b > 0.0 && b <= r + 1e-12)) {
      throw ConfigError("rho_b rule '" + rho_b_rule + "' gives " +
                        number_tag(b) + " outside (0, rho_max] for rho_max " +
                        number_tag(r));
    }
  }
  if (candidates_per_token < 1) {
    throw ConfigError("candidates_per_token must be >= 1");
  }
  bool attribution_key = false, input_key = false;
  for (const std::string& d : distances) {
    check_distance_key(d);
    if (is_attribution_distance_key(d)) attribution_key = true;
    if (is_semantic_distance_key(d) || d == kPerplexityKey) input_key = true;
  }
  if (!attribution_key) throw ConfigError("distances must include 'pcc'");
  if (!input_key) {
    throw ConfigError(
        "distances need an input distance (sts_use_like, sts_minilm_like or "
        "pp)");
  }
  if (perplexity_model != "bigram" && perplexity_model != "bigram_entropy") {
    throw ConfigError("unknown perplexity_model '" + perplexity_model + "'");
  }
  eps.validate();
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() !=
      seeds.size()) {
    throw ConfigError("seeds must be distinct");
  }
  if (stop_words_path.empty()) throw ConfigError("stop_words is required");
  const bool baseline = std::find(attacks.begin(), attacks.end(),
                                  AttackKind::kBaseline) != attacks.end();
  if (baseline && synonyms_path.empty()) {
    throw ConfigError("the baseline attack needs a synonyms table");
  }
  if (output_dir.empty()) throw ConfigError("output_dir is empty");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (rho_edges.size() < 2) throw ConfigError("rho_edges needs two edges");
  for (std::size_t i = 1; i < rho_edges.size(); ++i) {
    if (!(rho_edges[i] > rho_edges[i - 1])) {
      throw ConfigError("rho_edges must be strictly increasing");
    }
  }
}

double ExperimentConfig::rho_b(double rho_max_value) const {
  if (rho_b_rule == kDefaultRhoB) return tea::rho_b_rule(rho_max_value);
  if (rho_b_rule == kThirdRhoB) return rho_max_value / 3.0;
  try {
    std::size_t used = 0;
    const double v = std::stod(rho_b_rule, &used);
    if (used == rho_b_rule.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("unknown rho_b rule '" + rho_b_rule +
                    "' (expected min(rho_max,0.15), rho_max/3 or a number)");
}

std::string ExperimentConfig::primary_k_key() const {
  for (const std::string& d : distances) {
    if (is_semantic_distance_key(d)) return d;
  }
  return std::string(kPerplexityKey);
}

std::string ExperimentConfig::model_name() const {
  if (!checkpoint.empty()) return fs::path(checkpoint).filename().string();
  return to_string(*architecture);
}

ExperimentConfig parse_experiment_config(const json& j,
                                         const std::string& base_dir) {
  reject_unknown(j,
                 {"dataset", "split", "model", "attribution", "ig_steps",
                  "attack", "rho_max", "rho_b", "candidates_per_token",
                  "distances", "perplexity_model", "eps_pp", "eps_ds", "seeds",
                  "mlm", "synonyms", "stop_words", "output_dir", "workers",
                  "rho_edges"},
                 "");
  ExperimentConfig c;
  if (!j.contains("dataset")) throw ConfigError("config needs a dataset");
  const json& d = j.at("dataset");
  reject_unknown(d, {"path", "name", "max_tokens", "test_limit"}, "dataset.");
  read_field(d, "path", c.dataset_path, "dataset.");
  c.dataset_path = resolve_path(base_dir, c.dataset_path);
  c.dataset_name = fs::path(c.dataset_path).stem().string();
  read_field(d, "name", c.dataset_name, "dataset.");
  read_field(d, "max_tokens", c.max_tokens, "dataset.");
  read_field(d, "test_limit", c.test_limit, "dataset.");

  if (j.contains("split")) {
    const json& s = j.at("split");
    reject_unknown(s, {"train", "validation", "test"}, "split.");
    read_field(s, "train", c.split.train_fraction, "split.");
    read_field(s, "validation", c.split.validation_fraction, "split.");
    read_field(s, "test", c.split.test_fraction, "split.");
  }
  if (j.contains("model")) {
    const json& m = j.at("model");
    reject_unknown(m,
                   {"architecture", "checkpoint", "hidden", "kernel_width",
                    "max_epochs", "patience", "learning_rate"},
                   "model.");
    std::string arch;
    read_field(m, "architecture", arch, "model.");
    read_field(m, "checkpoint", c.checkpoint, "model.");
    c.checkpoint = resolve_path(base_dir, c.checkpoint);
    if (!arch.empty()) {
      c.architecture = parse_architecture(arch);
    } else if (!c.checkpoint.empty()) {
      c.architecture.reset();
    }
    read_field(m, "hidden", c.shape.hidden, "model.");
    read_field(m, "kernel_width", c.shape.kernel_width, "model.");
    read_field(m, "max_epochs", c.max_epochs, "model.");
    read_field(m, "patience", c.patience, "model.");
    read_field(m, "learning_rate", c.learning_rate, "model.");
  }
  std::string attribution = to_string(c.attribution);
  read_field(j, "attribution", attribution, "");
  c.attribution = parse_attribution_method(attribution);
  read_field(j, "ig_steps", c.ig_steps, "");

  const auto attacks = read_list<std::string>(j, "attack", "", {"tea"});
  c.attacks.clear();
  for (const std::string& a : attacks) c.attacks.push_back(parse_attack_kind(a));
  c.rho_max = read_list<double>(j, "rho_max", "", c.rho_max);
  if (j.contains("rho_b")) {
    const json& rb = j.at("rho_b");
    if (rb.is_string()) {
      c.rho_b_rule = rb.get<std::string>();
    } else if (rb.is_number()) {
      c.rho_b_rule = number_tag(rb.get<double>());
    } else {
      throw ConfigError("config field 'rho_b' has the wrong type");
    }
  }
  read_field(j, "candidates_per_token", c.candidates_per_token, "");
  c.distances = read_list<std::string>(j, "distances", "", c.distances);
  read_field(j, "perplexity_model", c.perplexity_model, "");
  read_field(j, "eps_pp", c.eps.eps_pp, "");
  read_field(j, "eps_ds", c.eps.eps_ds, "");
  c.seeds = read_list<std::uint64_t>(j, "seeds", "", c.seeds);
  std::string mlm = c.mlm.name();
  read_field(j, "mlm", mlm, "");
  c.mlm = parse_mlm_variant(mlm);
  read_field(j, "synonyms", c.synonyms_path, "");
  c.synonyms_path = resolve_path(base_dir, c.synonyms_path);
  read_field(j, "stop_words", c.stop_words_path, "");
  c.stop_words_path = resolve_path(base_dir, c.stop_words_path);
  read_field(j, "output_dir", c.output_dir, "");
  c.output_dir = resolve_path(base_dir, c.output_dir);
  read_field(j, "workers", c.workers, "");
  c.rho_edges = read_list<double>(j, "rho_edges", "", c.rho_edges);
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " +
                      e.what());
  }
  return parse_experiment_config(j, fs::path(path).parent_path().string());
}

json to_json(const ExperimentConfig& c) {
  std::vector<std::string> attacks;
  for (const AttackKind a : c.attacks) attacks.push_back(to_string(a));
  json model = {{"hidden", c.shape.hidden},
                {"kernel_width", c.shape.kernel_width},
                {"max_epochs", c.max_epochs},
                {"patience", c.patience},
                {"learning_rate", c.learning_rate}};
  if (c.architecture) model["architecture"] = to_string(*c.architecture);
  if (!c.checkpoint.empty()) model["checkpoint"] = c.checkpoint;
  return {{"dataset",
           {{"path", c.dataset_path},
            {"name", c.dataset_name},
            {"max_tokens", c.max_tokens},
            {"test_limit", c.test_limit}}},
          {"split",
           {{"train", c.split.train_fraction},
            {"validation", c.split.validation_fraction},
            {"test", c.split.test_fraction}}},
          {"model", model},
          {"attribution", to_string(c.attribution)},
          {"ig_steps", c.ig_steps},
          {"attack", attacks},
          {"rho_max", c.rho_max},
          {"rho_b", c.rho_b_rule},
          {"candidates_per_token", c.candidates_per_token},
          {"distances", c.distances},
          {"perplexity_model", c.perplexity_model},
          {"eps_pp", c.eps.eps_pp},
          {"eps_ds", c.eps.eps_ds},
          {"seeds", c.seeds},
          {"mlm", c.mlm.name()},
          {"synonyms", c.synonyms_path},
          {"stop_words", c.stop_words_path},
          {"output_dir", c.output_dir},
          {"workers", c.workers},
          {"rho_edges", c.rho_edges}};
}

ExperimentRunner::ExperimentRunner(ExperimentConfig config)
    : config_(std::move(config)) {
  config_.validate();
  if (!fs::is_regular_file(config_.dataset_path)) {
    throw ResolutionError("dataset '" + config_.dataset_path + "' not found");
  }
  if (!fs::is_regular_file(config_.stop_words_path)) {
    throw ResolutionError("stop-word list '" + config_.stop_words_path +
                          "' not found");
  }
  if (!config_.synonyms_path.empty()) {
    synonyms_ = std::make_shared<const SynonymTable>(
        SynonymTable::load(config_.synonyms_path));
  }
  std::shared_ptr<const EmbeddingTable> embeddings;
  if (!config_.checkpoint.empty()) {
    checkpoint_model_ = load_checkpoint(config_.checkpoint,
                                        &checkpoint_manifest_);
    embeddings = checkpoint_model_->shared_embeddings();
  }
  corpus_ = preprocess_corpus(
      load_corpus_jsonl(config_.dataset_path, config_.dataset_name));
  corpus_.validate();
  auto stop_words = std::make_shared<const StopWordList>(
      StopWordList::load(config_.stop_words_path));
  std::vector<std::string> texts;
  texts.reserve(corpus_.size());
  for (const LabeledText& s : corpus_.samples) texts.push_back(s.text);
  resources_ = LanguageResources::build(texts, std::move(stop_words),
                                        std::move(embeddings));
  // Fail on unknown registry names before any work starts.
  input_distance_models();
}

PreparedSeed ExperimentRunner::prepare_seed(std::uint64_t seed) const {
  PreparedSeed p;
  p.seed = seed;
  SplitSpec spec = config_.split;
  spec.seed = seed;
  const CorpusSplit parts = split(corpus_, spec);
  if (checkpoint_model_) {
    p.classifier = checkpoint_model_;
    p.validation_accuracy = checkpoint_manifest_.accuracy;
    p.baseline_accuracy = checkpoint_manifest_.baseline_accuracy;
  } else {
    TrainConfig tc;
    tc.architecture = *config_.architecture;
    tc.shape = config_.shape;
    tc.seed = seed;
    tc.max_epochs = config_.max_epochs;
    tc.patience = config_.patience;
    tc.learning_rate = config_.learning_rate;
    tc.max_tokens = config_.max_tokens;
    TrainedClassifier trained = train_reference_classifier(
        parts.train, parts.validation, *resources_.aligner,
        resources_.embeddings, tc);
    p.classifier = trained.model;
    p.validation_accuracy = trained.validation_accuracy;
    p.baseline_accuracy = trained.baseline_accuracy;
  }
  for (std::size_t i = 0; i < parts.test.size(); ++i) {
    if (config_.test_limit > 0 && p.test.size() >= config_.test_limit) break;
    TokenizedText t = truncate(
        resources_.aligner->tokenize(parts.test.samples[i].text),
        config_.max_tokens);
    if (t.empty()) continue;
    p.test_ids.push_back(config_.dataset_name + "/seed" +
                         std::to_string(seed) + "/test/" + std::to_string(i));
    p.test.push_back(std::move(t));
    p.test_labels.push_back(parts.test.samples[i].label);
  }
  return p;
}

AttackConfig ExperimentRunner::attack_config(double rho_max,
                                             std::uint64_t seed,
                                             const MlmVariant& variant) const {
  AttackConfig a;
  a.rho_max = rho_max;
  a.rho_b = config_.rho_b(rho_max);
  a.per_token_masking = !variant.batch;
  a.candidates_per_token = config_.candidates_per_token;
  a.attribution_method = config_.attribution;
  a.ig_steps = config_.ig_steps;
  a.seed = seed;
  return a;
}

std::unique_ptr<CandidateSource> ExperimentRunner::candidate_source(
    AttackKind kind, const MlmVariant& variant) const {
  if (kind == AttackKind::kBaseline) {
    if (!synonyms_) throw ConfigError("the baseline attack needs synonyms");
    return std::make_unique<SynonymCandidateSource>(synonyms_);
  }
  return std::make_unique<MlmCandidateSource>(resources_.mlm(variant.model));
}

std::vector<AttackTrace> ExperimentRunner::run_attacks(
    const PreparedSeed& prepared, AttackKind kind, double rho_max,
    const MlmVariant& variant, std::size_t workers) const {
  const Attacker attacker(prepared.classifier, resources_.aligner,
                          attack_config(rho_max, prepared.seed, variant));
  const auto source = candidate_source(kind, variant);
  std::vector<AttackTrace> traces(prepared.test.size());
  parallel_for(prepared.test.size(), workers, [&](std::size_t i) {
    traces[i] = attacker.run(prepared.test[i], *source, to_string(kind),
                             prepared.test_ids[i]);
  });
  return traces;
}

InputDistanceModels ExperimentRunner::input_distance_models() const {
  InputDistanceModels m;
  for (const std::string& d : config_.distances) {
    if (is_semantic_distance_key(d)) {
      m.encoders[d] = resources_.sentence_encoder(d);
    } else if (d == kPerplexityKey) {
      m.perplexity = resources_.perplexity_model(config_.perplexity_model);
    } else if (d == kGrammarKey) {
      m.grammar = resources_.grammar;
    }
  }
  return m;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const ExperimentRunner runner(config);
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  const InputDistanceModels models = runner.input_distance_models();

  std::map<std::string, std::map<std::uint64_t, std::vector<SampleRobustness>>>
      samples;
  json files = json::object();
  json accuracy = json::object();
  std::vector<std::string> trace_files;
  std::map<std::uint64_t, double> validation_accuracy;
  for (const std::uint64_t seed : config.seeds) {
    const PreparedSeed prepared = runner.prepare_seed(seed);
    validation_accuracy[seed] = prepared.validation_accuracy;
    accuracy[std::to_string(seed)] = {
        {"validation", prepared.validation_accuracy},
        {"baseline", prepared.baseline_accuracy}};
    for (const AttackKind kind : config.attacks) {
      const std::string attack = to_string(kind);
      std::vector<SampleRobustness>& records = samples[attack][seed];
      for (const double rho_max : config.rho_max) {
        const auto traces =
            runner.run_attacks(prepared, kind, rho_max, config.mlm,
                               config.workers);
        const fs::path trace_path =
            dir / "traces" /
            (file_stem(config, attack) + "_seed" + std::to_string(seed) +
             "_rho" + number_tag(rho_max) + ".jsonl");
        write_traces_jsonl(trace_path.string(), traces);
        trace_files.push_back(trace_path.string());
        for (const AttackTrace& t : traces) {
          records.push_back(evaluate_trace(t, models, config.eps));
        }
      }
      const fs::path sample_path =
          dir / "samples" /
          (file_stem(config, attack) + "_seed" + std::to_string(seed) +
           ".jsonl");
      write_samples_jsonl(sample_path.string(), records);
      files[attack][std::to_string(seed)] =
          fs::relative(sample_path, dir).string();
    }
  }

  ExperimentResult result = build_and_write_reports(config, samples);
  result.validation_accuracy = validation_accuracy;
  result.artifacts.insert(result.artifacts.end(), trace_files.begin(),
                          trace_files.end());
  const json manifest = {{"config", to_json(config)},
                         {"sample_files", files},
                         {"accuracy", accuracy},
                         {"trace_files", trace_files}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  result.artifacts.push_back((dir / "manifest.json").string());
  return result;
}

ExperimentResult regenerate_reports(const std::string& output_dir) {
  const fs::path dir(output_dir);
  std::ifstream in(dir / "manifest.json");
  if (!in) {
    throw ResolutionError("no manifest.json in '" + output_dir + "'");
  }
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest.json is not valid JSON: ") +
                      e.what());
  }
  ExperimentConfig config = parse_experiment_config(manifest.at("config"));
  config.output_dir = output_dir;
  std::map<std::string, std::map<std::uint64_t, std::vector<SampleRobustness>>>
      samples;
  for (const auto& [attack, by_seed] : manifest.at("sample_files").items()) {
    for (const auto& [seed, file] : by_seed.items()) {
      samples[attack][std::stoull(seed)] =
          read_samples_jsonl((dir / file.get<std::string>()).string());
    }
  }
  return build_and_write_reports(config, samples);
}

BenchmarkResult benchmark_variants(const ExperimentRunner& runner,
                                   std::size_t samples, int repeats) {
  const ExperimentConfig& config = runner.config();
  const PreparedSeed prepared = runner.prepare_seed(config.seeds.front());
  const double rho_max = config.rho_max.front();
  const std::size_t count = std::min(samples, prepared.test.size());

  struct Variant {
    int id;
    std::string label;
    AttackKind kind;
    MlmVariant mlm;
  };
  const std::vector<Variant> variants = {
      {0, "baseline", AttackKind::kBaseline, {"distilled", false}},
      {1, "full", AttackKind::kTea, {"full", false}},
      {2, "distilled", AttackKind::kTea, {"distilled", false}},
      {3, "distilled+batch", AttackKind::kTea, {"distilled", true}}};

  std::vector<std::unique_ptr<Attacker>> attackers;
  std::vector<std::unique_ptr<CandidateSource>> sources;
  for (const Variant& v : variants) {
    attackers.push_back(std::make_unique<Attacker>(
        prepared.classifier, runner.resources().aligner,
        runner.attack_config(rho_max, prepared.seed, v.mlm)));
    sources.push_back(runner.candidate_source(v.kind, v.mlm));
  }

  BenchmarkResult result;
  for (int rep = 0; rep < repeats; ++rep) {
    for (std::size_t i = 0; i < count; ++i) {
      const TokenizedText& text = prepared.test[i];
      for (std::size_t v = 0; v < variants.size(); ++v) {
        const auto start = std::chrono::steady_clock::now();
        const AttackTrace trace = attackers[v]->run(
            text, *sources[v], to_string(variants[v].kind),
            prepared.test_ids[i]);
        const auto stop = std::chrono::steady_clock::now();
        TimingRecord r;
        r.variant = variants[v].id;
        r.sample_id = prepared.test_ids[i];
        r.seconds = std::max(
            std::chrono::duration<double>(stop - start).count(), 1e-9);
        r.mlm_queries = trace.mlm_queries;
        if (variants[v].kind == AttackKind::kTea && text.size() >= 2) {
          r.predicted_queries = predicted_queries(text.size(), rho_max,
                                                  trace.rho_b);
        }
        result.records.push_back(r);
      }
    }
  }
  for (const Variant& v : variants) {
    VariantSummary s;
    s.variant = v.id;
    s.label = v.label;
    std::vector<double> seconds;
    for (const TimingRecord& r : result.records) {
      if (r.variant != v.id) continue;
      seconds.push_back(r.seconds);
      s.total_queries += r.mlm_queries;
      s.total_predicted_queries += r.predicted_queries;
    }
    if (!seconds.empty()) {
      const MetricStats stats = summarize(seconds);
      s.mean_seconds = *stats.mean;
      s.std_seconds = *stats.std;
      std::sort(seconds.begin(), seconds.end());
      const std::size_t m = seconds.size() / 2;
      s.median_seconds = seconds.size() % 2 == 1
                             ? seconds[m]
                             : 0.5 * (seconds[m - 1] + seconds[m]);
      s.mean_queries = static_cast<double>(s.total_queries) /
                       static_cast<double>(seconds.size());
    }
    result.summaries.push_back(s);
  }
  return result;
}

json to_json(const BenchmarkResult& result) {
  json records = json::array();
  for (const TimingRecord& r : result.records) {
    records.push_back({{"variant", r.variant},
                       {"sample", r.sample_id},
                       {"seconds", r.seconds},
                       {"mlm_queries", r.mlm_queries},
                       {"predicted_queries", r.predicted_queries}});
  }
  json summaries = json::array();
  for (const VariantSummary& s : result.summaries) {
    summaries.push_back({{"variant", s.variant},
                         {"label", s.label},
                         {"mean_seconds", s.mean_seconds},
                         {"std_seconds", s.std_seconds},
                         {"median_seconds", s.median_seconds},
                         {"mean_queries", s.mean_queries},
                         {"total_queries", s.total_queries},
                         {"total_predicted_queries",
                          s.total_predicted_queries}});
  }
  return {{"summaries", summaries}, {"records", records}};
}

}  // namespace tea
