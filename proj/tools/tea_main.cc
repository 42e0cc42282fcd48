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


// tea: train reference classifiers, attack samples, estimate attribution
// robustness, time the attack variants and re-render reports.
//
// Exit codes: 0 success, 2 configuration error, 3 model or data resolution
// error, 1 anything else.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "tea/attack.h"
#include "tea/error.h"
#include "tea/estimator.h"
#include "tea/experiment.h"
#include "tea/report.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitResolution = 3;

// Flags that mirror experiment config fields. Unset flags leave the config
// file (or the defaults) alone.
struct ConfigFlags {
  std::string config;
  std::string data;
  std::string arch;
  std::string checkpoint;
  std::string attribution;
  std::vector<std::string> attacks;
  std::vector<double> rho_max;
  std::string rho_b;
  int candidates = 0;
  std::vector<std::uint64_t> seeds;
  std::string mlm;
  std::string output;
  int workers = 0;
  std::string synonyms;
  std::string stop_words;
  int test_limit = -1;
  int max_tokens = 0;
  int max_epochs = 0;

  void add_to(CLI::App* app) {
    app->add_option("-c,--config", config, "Experiment config (JSON)");
    app->add_option("--data", data, "Corpus JSON-lines file");
    app->add_option("--arch", arch, "Reference architecture: cnn, attention");
    app->add_option("--checkpoint", checkpoint, "Checkpoint directory");
    app->add_option("--attribution", attribution, "S, IG or A");
    app->add_option("--attack", attacks, "tea and/or baseline");
    app->add_option("--rho-max", rho_max, "Perturbation budgets");
    app->add_option("--rho-b", rho_b,
                    "min(rho_max,0.15), rho_max/3 or a number");
    app->add_option("--candidates", candidates, "Candidates per token");
    app->add_option("--seeds", seeds, "Seeds");
    app->add_option("--mlm", mlm, "full, distilled or distilled+batch");
    app->add_option("-o,--output", output, "Output directory");
    app->add_option("--workers", workers, "Worker threads");
    app->add_option("--synonyms", synonyms, "Synonym table (JSON)");
    app->add_option("--stop-words", stop_words, "Stop-word list");
    app->add_option("--test-limit", test_limit, "Test samples per seed");
    app->add_option("--max-tokens", max_tokens, "Tokens kept per sample");
    app->add_option("--max-epochs", max_epochs, "Training epochs");
  }

  tea::ExperimentConfig resolve() const {
    json j = json::object();
    std::string base;
    if (!config.empty()) {
      std::ifstream in(config);
      if (!in) throw tea::ConfigError("cannot open config file '" + config + "'");
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw tea::ConfigError("config file '" + config +
                               "' is not valid JSON: " + e.what());
      }
      base = fs::path(config).parent_path().string();
      if (base.empty()) base = ".";
    }
    auto abs = [](const std::string& p) { return fs::absolute(p).string(); };
    if (!j.contains("dataset")) j["dataset"] = json::object();
    if (!data.empty()) j["dataset"]["path"] = abs(data);
    if (test_limit >= 0) j["dataset"]["test_limit"] = test_limit;
    if (max_tokens > 0) j["dataset"]["max_tokens"] = max_tokens;
    if (!arch.empty() || !checkpoint.empty() || max_epochs > 0) {
      if (!j.contains("model")) j["model"] = json::object();
      if (!arch.empty()) {
        j["model"]["architecture"] = arch;
        j["model"].erase("checkpoint");
      }
      if (!checkpoint.empty()) {
        j["model"]["checkpoint"] = abs(checkpoint);
        j["model"].erase("architecture");
      }
      if (max_epochs > 0) j["model"]["max_epochs"] = max_epochs;
    }
    if (!attribution.empty()) j["attribution"] = attribution;
    if (!attacks.empty()) j["attack"] = attacks;
    if (!rho_max.empty()) j["rho_max"] = rho_max;
    if (!rho_b.empty()) j["rho_b"] = rho_b;
    if (candidates > 0) j["candidates_per_token"] = candidates;
    if (!seeds.empty()) j["seeds"] = seeds;
    if (!mlm.empty()) j["mlm"] = mlm;
    if (!output.empty()) j["output_dir"] = abs(output);
    if (workers > 0) j["workers"] = workers;
    if (!synonyms.empty()) j["synonyms"] = abs(synonyms);
    if (!stop_words.empty()) j["stop_words"] = abs(stop_words);
    return tea::parse_experiment_config(j, base);
  }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string mean_of(const tea::RobustnessReport& r, const std::string& key) {
  const auto it = r.overall.find(key);
  if (it == r.overall.end() || !it->second.mean) return "-";
  return fmt(*it->second.mean);
}

void print_summary(const tea::ExperimentConfig& config,
                   const tea::ExperimentResult& result) {
  const std::string k_key = "k_" + config.primary_k_key();
  std::cout << "attack      samples  PCC      STS      dPP      GE       "
            << k_key << "  AUC\n";
  for (const auto& [attack, report] : result.reports) {
    std::string sts = "-";
    for (const std::string& d : config.distances) {
      if (tea::is_semantic_distance_key(d)) {
        sts = mean_of(report, d);
        break;
      }
    }
    const auto auc = report.auc_k.find(k_key);
    std::printf("%-11s %-8zu %-8s %-8s %-8s %-8s %-8s %s\n", attack.c_str(),
                report.sample_count, mean_of(report, "pcc").c_str(),
                sts.c_str(), mean_of(report, "delta_pp").c_str(),
                mean_of(report, "ge").c_str(), mean_of(report, k_key).c_str(),
                auc == report.auc_k.end() ? "-" : fmt(auc->second).c_str());
  }
}

int run_train(const ConfigFlags& flags, const std::string& out) {
  const tea::ExperimentConfig config = flags.resolve();
  if (!config.architecture) {
    throw tea::ConfigError("train needs --arch or model.architecture");
  }
  const tea::ExperimentRunner runner(config);
  const std::uint64_t seed = config.seeds.front();
  const tea::PreparedSeed prepared = runner.prepare_seed(seed);
  const auto model =
      std::dynamic_pointer_cast<const tea::ReferenceClassifier>(
          prepared.classifier);
  tea::CheckpointManifest manifest;
  manifest.architecture = tea::to_string(*config.architecture);
  manifest.seed = seed;
  manifest.accuracy = prepared.validation_accuracy;
  manifest.baseline_accuracy = prepared.baseline_accuracy;
  manifest.max_tokens = config.max_tokens;
  manifest.shape = model->shape();
  tea::save_checkpoint(out, *model, manifest);
  std::cout << "validation accuracy " << fmt(prepared.validation_accuracy)
            << " (majority baseline " << fmt(prepared.baseline_accuracy)
            << "), checkpoint written to " << out << "\n";
  return kExitOk;
}

int run_attack(const ConfigFlags& flags, int sample, const std::string& text,
               const std::string& html) {
  const tea::ExperimentConfig config = flags.resolve();
  const tea::ExperimentRunner runner(config);
  const tea::PreparedSeed prepared = runner.prepare_seed(config.seeds.front());
  tea::TokenizedText input;
  std::string id;
  if (!text.empty()) {
    input = tea::truncate(
        runner.resources().aligner->tokenize(tea::preprocess(text)),
        config.max_tokens);
    id = "cli";
  } else {
    if (sample < 0 || static_cast<std::size_t>(sample) >= prepared.test.size()) {
      throw tea::ConfigError("--sample " + std::to_string(sample) +
                             " is outside the test split (" +
                             std::to_string(prepared.test.size()) +
                             " samples)");
    }
    input = prepared.test[static_cast<std::size_t>(sample)];
    id = prepared.test_ids[static_cast<std::size_t>(sample)];
  }
  if (input.empty()) throw tea::ConfigError("the text has no tokens");
  const tea::AttackKind kind = config.attacks.front();
  const tea::Attacker attacker(
      prepared.classifier, runner.resources().aligner,
      runner.attack_config(config.rho_max.front(), prepared.seed, config.mlm));
  const auto source = runner.candidate_source(kind, config.mlm);
  const tea::AttackTrace trace =
      attacker.run(input, *source, tea::to_string(kind), id);
  const tea::SampleRobustness record = tea::evaluate_trace(
      trace, runner.input_distance_models(), config.eps);

  tea::DiffHeader header;
  const std::string key = config.primary_k_key();
  if (const auto it = record.sts.find(key); it != record.sts.end()) {
    header.sems = it->second;
  }
  if (const auto it = record.k_by_distance.find(key);
      it != record.k_by_distance.end()) {
    header.k = it->second;
  }
  std::cout << tea::render_diff(trace, trace.original_attribution,
                                trace.adversarial_attribution, header,
                                tea::DiffFormat::kAnsi);
  std::cout << "substitutions " << trace.substitutions.size() << ", rho "
            << fmt(trace.rho) << ", queries " << trace.mlm_queries << "\n";
  if (!html.empty()) {
    std::ofstream out(html);
    if (!out) throw tea::Error("cannot write '" + html + "'");
    out << tea::render_diff(trace, trace.original_attribution,
                            trace.adversarial_attribution, header,
                            tea::DiffFormat::kHtml);
  }
  return kExitOk;
}

int run_estimate(const ConfigFlags& flags) {
  const tea::ExperimentConfig config = flags.resolve();
  const tea::ExperimentResult result = tea::run_experiment(config);
  print_summary(config, result);
  std::cout << "artifacts in " << config.output_dir << "\n";
  return kExitOk;
}

int run_bench(const ConfigFlags& flags, int samples, int repeats) {
  tea::ExperimentConfig config = flags.resolve();
  config.workers = 1;
  const tea::ExperimentRunner runner(config);
  const tea::BenchmarkResult result = tea::benchmark_variants(
      runner, static_cast<std::size_t>(samples), repeats);
  std::cout << "variant  label             median_s  mean_s    std_s     "
               "queries  predicted\n";
  for (const tea::VariantSummary& s : result.summaries) {
    std::printf("%-8d %-17s %-9s %-9s %-9s %-8llu %llu\n", s.variant,
                s.label.c_str(), fmt(s.median_seconds).c_str(),
                fmt(s.mean_seconds).c_str(), fmt(s.std_seconds).c_str(),
                static_cast<unsigned long long>(s.total_queries),
                static_cast<unsigned long long>(s.total_predicted_queries));
  }
  fs::create_directories(config.output_dir);
  const fs::path path = fs::path(config.output_dir) / "bench.json";
  std::ofstream(path) << tea::to_json(result).dump(2) << "\n";
  std::cout << "timings written to " << path.string() << "\n";
  return kExitOk;
}

int run_report(const std::string& dir) {
  const tea::ExperimentResult result = tea::regenerate_reports(dir);
  for (const std::string& a : result.artifacts) std::cout << a << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attribution robustness estimation for text classifiers"};
  app.require_subcommand(1);

  ConfigFlags train_flags, attack_flags, estimate_flags, bench_flags;
  std::string checkpoint_out;
  CLI::App* train = app.add_subcommand("train", "Train a reference classifier");
  train_flags.add_to(train);
  train->add_option("--out", checkpoint_out, "Checkpoint directory to write")
      ->required();

  int sample = 0;
  std::string text, html;
  CLI::App* attack = app.add_subcommand("attack", "Attack one sample");
  attack_flags.add_to(attack);
  attack->add_option("--sample", sample, "Index into the test split");
  attack->add_option("--text", text, "Attack this text instead");
  attack->add_option("--html", html, "Also write an HTML diff here");

  CLI::App* estimate = app.add_subcommand("estimate", "Run a full experiment");
  estimate_flags.add_to(estimate);

  int bench_samples = 20, repeats = 1;
  CLI::App* bench = app.add_subcommand("bench", "Time the attack variants");
  bench_flags.add_to(bench);
  bench->add_option("--samples", bench_samples, "Samples to time");
  bench->add_option("--repeats", repeats, "Passes over the samples");

  std::string report_dir;
  CLI::App* report = app.add_subcommand("report", "Re-render reports");
  report->add_option("dir", report_dir, "Experiment output directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*train) return run_train(train_flags, checkpoint_out);
    if (*attack) return run_attack(attack_flags, sample, text, html);
    if (*estimate) return run_estimate(estimate_flags);
    if (*bench) return run_bench(bench_flags, bench_samples, repeats);
    if (*report) return run_report(report_dir);
  } catch (const tea::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const tea::ResolutionError& e) {
    std::cerr << "resolution error: " << e.what() << "\n";
    return kExitResolution;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
