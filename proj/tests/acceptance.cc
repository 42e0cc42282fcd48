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


// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support.h"
#include "tea/attack.h"
#include "tea/attribution.h"
#include "tea/classifier.h"
#include "tea/distances.h"
#include "tea/error.h"
#include "tea/estimator.h"
#include "tea/experiment.h"

namespace tea {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      pass = false;
      notes.push_back("FAILED " + what);
    }
  }
  void note(const std::string& what) { notes.push_back(what); }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

ExperimentConfig config_at(const std::string& name, const fs::path& output) {
  const std::string path = std::string(TEA_CONFIG_DIR) + "/" + name;
  std::ifstream in(path);
  nlohmann::json j = nlohmann::json::parse(in);
  j["output_dir"] = fs::absolute(output).string();
  return parse_experiment_config(j, TEA_CONFIG_DIR);
}

// Metric identities: PCC distance, semantic distance, perplexity increase,
// IG completeness and saliency finite differences.
Outcome metric_identities() {
  Outcome out;
  const auto start = Clock::now();

  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst_affine = 0.0;
  bool bounded = true, symmetric = true;
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 30);
    std::vector<double> a(n), b(n), scaled(n);
    const double s = 0.1 + 5.0 * std::abs(normal(rng));
    const double shift = normal(rng);
    for (int i = 0; i < n; ++i) {
      a[i] = normal(rng);
      b[i] = normal(rng);
      scaled[i] = s * a[i] + shift;
    }
    const double d = attribution_distance(a, b).value;
    bounded = bounded && d >= 0.0 && d <= 1.0;
    symmetric = symmetric && d == attribution_distance(b, a).value;
    worst_affine = std::max(
        worst_affine, std::abs(attribution_distance(scaled, b).value - d));
  }
  out.require(bounded, "PCC distance outside [0, 1]");
  out.require(symmetric, "PCC distance not symmetric");
  out.require(worst_affine < 1e-12, "PCC distance not affine invariant");
  const std::vector<double> v = {1, 2, 3, 4};
  out.require(attribution_distance(v, v).value == 0.0, "d(a, a) != 0");

  const auto& r = testing::fixture_resources();
  bool semantic_ok = true, pp_ok = true;
  for (const auto& s : testing::fixture_corpus().samples) {
    semantic_ok = semantic_ok &&
                  semantic_distance(*r.use_like, s.text, s.text) == 0.0 &&
                  semantic_distance(*r.minilm_like, s.text, s.text) == 0.0;
    pp_ok = pp_ok && perplexity_increase(*r.perplexity_model("bigram"), s.text,
                                         s.text) == 0.0;
  }
  out.require(semantic_ok, "semantic distance of identical texts != 0");
  out.require(pp_ok, "perplexity increase of identical texts != 0");

  // IG completeness is measured where the prediction actually moves away
  // from the zero baseline; the relative error is meaningless otherwise.
  double worst_ig = 0.0, worst_saliency = 0.0;
  std::size_t ig_samples = 0, saliency_checks = 0;
  for (Architecture arch : {Architecture::kCnn, Architecture::kAttention}) {
    const auto model = testing::fixture_classifier(arch);
    for (const TokenizedText& t : testing::fixture_test_samples()) {
      const int label = model->predict(t);
      const Matrix x = model->embed(t);
      const double delta =
          model->predict_probs(x)(label) -
          model->predict_probs(Matrix::Zero(x.rows(), x.cols()))(label);
      const auto ig = integrated_gradients(*model, t, label, 50).scores;
      const double total = std::accumulate(ig.begin(), ig.end(), 0.0);
      if (std::abs(delta) >= 0.05) {
        worst_ig = std::max(worst_ig, std::abs(total - delta) / std::abs(delta));
        ++ig_samples;
      }
      const auto sal = saliency(*model, t, label).scores;
      constexpr double h = 1e-6;
      for (std::size_t i = 0; i < t.size(); ++i) {
        Matrix up = x, down = x;
        up.row(static_cast<Eigen::Index>(i)).array() += h;
        down.row(static_cast<Eigen::Index>(i)).array() -= h;
        const double fd = (model->predict_probs(up)(label) -
                           model->predict_probs(down)(label)) /
                          (2 * h);
        if (std::abs(fd) < 1e-6) continue;
        worst_saliency =
            std::max(worst_saliency, std::abs(sal[i] - fd) / std::abs(fd));
        ++saliency_checks;
      }
    }
  }
  out.require(ig_samples > 0, "no samples for the IG completeness check");
  out.require(worst_ig <= 0.02, "IG completeness error " + fmt(worst_ig));
  out.require(worst_saliency <= 1e-2,
              "saliency finite-difference error " + fmt(worst_saliency, 6));
  const double elapsed = seconds_since(start);
  out.require(elapsed < 120.0, "suite took " + fmt(elapsed, 1) + " s");
  out.note("IG max rel err " + fmt(worst_ig) + " over " +
           std::to_string(ig_samples) + " samples; saliency max rel err " +
           fmt(worst_saliency, 6) + " over " + std::to_string(saliency_checks) +
           " tokens; " + fmt(elapsed, 1) + " s");
  return out;
}

// Attack contract on 50 fixture samples.
Outcome attack_contract() {
  Outcome out;
  const auto& r = testing::fixture_resources();
  const auto model = testing::fixture_classifier(Architecture::kCnn);
  std::vector<TokenizedText> samples;
  for (const RawCorpus* part :
       {&testing::fixture_split().test, &testing::fixture_split().validation}) {
    for (const auto& s : part->samples) {
      if (samples.size() == 50) break;
      samples.push_back(truncate(r.aligner->tokenize(s.text), 32));
    }
  }
  out.require(samples.size() == 50, "fewer than 50 samples");
  std::size_t traces = 0, edits = 0, violations = 0, nondeterministic = 0;
  for (double rho_max : {0.1, 0.25}) {
    AttackConfig config;
    config.rho_max = rho_max;
    config.rho_b = rho_b_rule(rho_max);
    config.seed = 7;
    for (const TokenizedText& t : samples) {
      const AttackTrace a = attack(model, r.mlm("distilled"), r.aligner, t,
                                   config);
      const AttackTrace b = attack(model, r.mlm("distilled"), r.aligner, t,
                                   config);
      ++traces;
      edits += a.substitutions.size();
      const auto problems = testing::trace_violations(a, *model);
      if (!problems.empty()) {
        ++violations;
        out.note(t.original_text + ": " + problems.front());
      }
      if (to_json(a).dump() != to_json(b).dump()) ++nondeterministic;
    }
  }
  out.require(violations == 0, std::to_string(violations) + " traces broke "
                                   "the contract");
  out.require(nondeterministic == 0, "non-deterministic traces");
  out.note(std::to_string(traces) + " traces, " + std::to_string(edits) +
           " substitutions, no violations");
  return out;
}

// Greedy result against exhaustive search on tiny instances.
Outcome brute_force_oracle() {
  Outcome out;
  const auto& r = testing::fixture_resources();
  const auto model = testing::fixture_classifier(Architecture::kCnn);
  const Attributor attributor(AttributionMethod::kSaliency);
  AttackConfig config;
  config.rho_max = 1.0;
  config.rho_b = 1.0;
  config.candidates_per_token = 3;
  const Attacker attacker(model, r.aligner, config);

  std::vector<double> ratios;
  std::size_t instances = 0, exceeded = 0, combinations = 0;
  for (const auto& s : testing::fixture_corpus().samples) {
    if (instances == 25) break;
    const TokenizedText full = r.aligner->tokenize(s.text);
    // Keep tokens up to the fifth attackable position.
    std::size_t attackable = 0, keep = 0;
    for (; keep < full.size() && attackable < 5; ++keep) {
      if (!full.stop_word_mask[keep] && !is_punctuation(full.tokens[keep])) {
        ++attackable;
      }
    }
    if (keep < 2) continue;
    const TokenizedText t = truncate(full, keep);
    const auto table = testing::scripted_table_for(t, *r.mlm("distilled"), 3);
    const auto mlm = std::make_shared<const testing::ScriptedMlm>(table);
    const AttackTrace trace = attacker.run(t, MlmCandidateSource(mlm), "tea");
    const auto best =
        testing::exhaustive_d_max(*model, *r.aligner, attributor, t, table, 3);
    const double greedy =
        trace.substitutions.empty() ? 0.0 : trace.substitutions.back().d_after;
    ++instances;
    combinations += best.combinations;
    if (greedy > best.d_max + 1e-12) ++exceeded;
    ratios.push_back(best.d_max > 0 ? greedy / best.d_max : 1.0);
  }
  out.require(instances >= 20, "only " + std::to_string(instances) +
                                   " instances");
  out.require(exceeded == 0, "greedy exceeded the exhaustive optimum " +
                                 std::to_string(exceeded) + " times");
  const double mean = std::accumulate(ratios.begin(), ratios.end(), 0.0) /
                      static_cast<double>(std::max<std::size_t>(1, ratios.size()));
  out.note(std::to_string(instances) + " instances, " +
           std::to_string(combinations) +
           " combinations scored, mean greedy/optimal ratio " + fmt(mean));
  return out;
}

// MLM query counts for a 100-token sample.
Outcome query_arithmetic() {
  Outcome out;
  const auto& r = testing::fixture_resources();
  const auto model = testing::fixture_classifier(Architecture::kCnn);
  const TokenizedText t = testing::long_fixture_text(100);
  out.require(t.size() == 100, "sample has " + std::to_string(t.size()) +
                                   " tokens");
  const auto mlm = r.mlm("distilled");
  AttackConfig config;
  config.rho_max = 0.15;
  config.rho_b = 0.05;
  const std::uint64_t before = mlm->query_count();
  const AttackTrace batched = attack(model, mlm, r.aligner, t, config);
  const std::uint64_t batched_queries = mlm->query_count() - before;
  config.per_token_masking = true;
  const std::uint64_t middle = mlm->query_count();
  const AttackTrace single = attack(model, mlm, r.aligner, t, config);
  const std::uint64_t single_queries = mlm->query_count() - middle;
  out.require(batched_queries == 3,
              "batched attack issued " + std::to_string(batched_queries));
  out.require(single_queries == 15,
              "per-token attack issued " + std::to_string(single_queries));
  out.require(batched.mlm_queries == batched_queries &&
                  single.mlm_queries == single_queries,
              "trace query counts disagree with the MLM counter");
  out.note("batched " + std::to_string(batched_queries) + " queries, per-token " +
           std::to_string(single_queries));
  return out;
}

// k from the header values of two worked examples.
Outcome worked_example_k() {
  Outcome out;
  const DistanceConfig eps;
  auto d = [](double pcc) { return 1.0 - (1.0 + pcc) / 2.0; };
  // The similarity 0.97 is shown rounded; d_s = 0.033 is the unrounded
  // distance behind the quoted k.
  const double k1 = sample_k(d(0.02), 0.033, eps).k;
  const double k2 = sample_k(d(-0.05), 1.0 - 0.98, eps).k;
  out.require(std::abs(k1 - 14.85) <= 0.5, "k1 = " + fmt(k1));
  out.require(std::abs(k2 - 30.0) <= 0.15 * 30.0, "k2 = " + fmt(k2));
  out.note("k1 " + fmt(k1, 3) + " (quoted 14.9), k2 " + fmt(k2, 3) +
           " (quoted 30)");
  out.note("with the rounded similarity taken literally (d_s = 0.03) k1 is " +
           fmt(sample_k(d(0.02), 1.0 - 0.97, eps).k, 3));
  return out;
}

// Mean of a bucket metric over buckets where both reports have a value.
struct Matched {
  double tea = 0.0;
  double baseline = 0.0;
  std::size_t buckets = 0;
};

Matched matched_means(const RobustnessReport& tea,
                      const RobustnessReport& baseline,
                      const std::string& metric) {
  Matched m;
  for (std::size_t b = 0; b < tea.buckets.size(); ++b) {
    const auto a = tea.buckets[b].metrics.find(metric);
    const auto c = baseline.buckets[b].metrics.find(metric);
    if (a == tea.buckets[b].metrics.end() ||
        c == baseline.buckets[b].metrics.end() || !a->second.mean ||
        !c->second.mean) {
      continue;
    }
    m.tea += *a->second.mean;
    m.baseline += *c->second.mean;
    ++m.buckets;
  }
  if (m.buckets > 0) {
    m.tea /= static_cast<double>(m.buckets);
    m.baseline /= static_cast<double>(m.buckets);
  }
  return m;
}

// TEA against the synonym baseline on the 2k corpus. Also returns the output
// directory for the regeneration check.
Outcome directional_reproduction(const fs::path& output) {
  Outcome out;
  const auto start = Clock::now();
  fs::remove_all(output);
  const ExperimentConfig config = config_at("reviews_2k.json", output);
  const ExperimentResult result = run_experiment(config);
  const RobustnessReport& tea = result.reports.at("tea");
  const RobustnessReport& base = result.reports.at("baseline");

  const std::string sts = "sts_use_like";
  const Matched pcc = matched_means(tea, base, "pcc");
  const Matched sim = matched_means(tea, base, sts);
  const Matched pp = matched_means(tea, base, "delta_pp");
  out.require(pcc.buckets > 0, "no rho bucket shared by both attacks");
  out.require(pcc.tea <= pcc.baseline, "PCC(TEA) " + fmt(pcc.tea) +
                                           " > PCC(baseline) " +
                                           fmt(pcc.baseline));
  out.require(sim.tea >= sim.baseline, "STS(TEA) " + fmt(sim.tea) +
                                           " < STS(baseline) " +
                                           fmt(sim.baseline));
  out.require(pp.tea <= pp.baseline, "dPP(TEA) " + fmt(pp.tea) +
                                         " > dPP(baseline) " +
                                         fmt(pp.baseline));
  const std::string k_metric = "k_" + config.primary_k_key();
  double increase = 0.0;
  if (tea.auc_k.count(k_metric) > 0 && base.auc_k.count(k_metric) > 0) {
    increase = relative_auc_increase(tea.auc_k.at(k_metric),
                                     base.auc_k.at(k_metric));
  }
  out.require(increase > 0.0, "relative AUC increase " + fmt(increase));

  auto overall = [](const RobustnessReport& r, const std::string& m) {
    const auto it = r.overall.find(m);
    return it != r.overall.end() && it->second.mean ? *it->second.mean : NAN;
  };
  std::string accuracies;
  for (const auto& [seed, acc] : result.validation_accuracy) {
    accuracies += (accuracies.empty() ? "" : ",") + fmt(acc, 3);
  }
  out.note("validation accuracy per seed " + accuracies);
  out.note("matched over " + std::to_string(pcc.buckets) +
           " rho buckets: PCC " + fmt(pcc.tea) + " vs " + fmt(pcc.baseline) +
           ", STS " + fmt(sim.tea) + " vs " + fmt(sim.baseline) + ", dPP " +
           fmt(pp.tea) + " vs " + fmt(pp.baseline) + "; relative AUC(" +
           k_metric + ") increase " + fmt(increase));
  out.note("overall (unmatched) means: PCC " + fmt(overall(tea, "pcc")) +
           " vs " + fmt(overall(base, "pcc")) + ", STS " +
           fmt(overall(tea, sts)) + " vs " + fmt(overall(base, sts)) +
           ", dPP " + fmt(overall(tea, "delta_pp")) + " vs " +
           fmt(overall(base, "delta_pp")) + ", rho " +
           fmt(overall(tea, "rho")) + " vs " + fmt(overall(base, "rho")));
  out.note("run took " + fmt(seconds_since(start), 1) + " s");
  return out;
}

// Runtime ordering and query ratio of the attack variants.
Outcome timing_ablation(const fs::path& output) {
  Outcome out;
  const ExperimentConfig config = config_at("bench.json", output);
  const ExperimentRunner runner(config);
  const BenchmarkResult result = benchmark_variants(runner, 40, 3);
  const VariantSummary& v1 = result.summaries.at(1);
  const VariantSummary& v2 = result.summaries.at(2);
  const VariantSummary& v3 = result.summaries.at(3);
  out.require(v3.median_seconds < v1.median_seconds,
              "median variant 3 " + fmt(v3.median_seconds, 6) +
                  " s >= variant 1 " + fmt(v1.median_seconds, 6) + " s");
  out.require(v2.total_queries == v2.total_predicted_queries &&
                  v3.total_queries == v3.total_predicted_queries,
              "query counts differ from the batch prediction");
  // Ratios compared as exact fractions.
  out.require(v3.total_queries * v2.total_predicted_queries ==
                  v3.total_predicted_queries * v2.total_queries,
              "query ratio differs from the prediction");
  out.note("median s/sample: v0 " + fmt(result.summaries.at(0).median_seconds, 5) +
           ", v1 " + fmt(v1.median_seconds, 5) + ", v2 " +
           fmt(v2.median_seconds, 5) + ", v3 " + fmt(v3.median_seconds, 5) +
           "; queries v2 " + std::to_string(v2.total_queries) + ", v3 " +
           std::to_string(v3.total_queries) + " (predicted " +
           std::to_string(v2.total_predicted_queries) + ", " +
           std::to_string(v3.total_predicted_queries) + ")");
  return out;
}

// AUC, relative increase, permutation invariance and regeneration.
Outcome estimator_algebra(const fs::path& experiment_dir) {
  Outcome out;
  const std::vector<std::pair<double, double>> constant = {{0.0, 2.0},
                                                           {0.4, 2.0}};
  out.require(std::abs(auc_k(constant) - 0.8) < 1e-15, "constant AUC != 0.8");
  out.require(relative_auc_increase(1.5, 1.0) == 0.5,
              "relative increase of 1.5 over 1.0 != 0.5");

  std::vector<SampleRobustness> samples =
      read_samples_jsonl((experiment_dir / "samples" /
                          "reviews_2k_cnn_S_tea_seed0.jsonl")
                             .string());
  out.require(!samples.empty(), "no per-sample records");
  const auto edges = default_rho_edges();
  const std::string reference = to_json(aggregate(samples, edges)).dump();
  std::mt19937_64 rng(5);
  bool invariant = true;
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(samples.begin(), samples.end(), rng);
    invariant = invariant && to_json(aggregate(samples, edges)).dump() == reference;
  }
  out.require(invariant, "aggregate depends on sample order");

  std::map<std::string, std::string> before;
  for (const auto& entry : fs::directory_iterator(experiment_dir)) {
    if (entry.is_regular_file()) {
      before[entry.path().filename().string()] = read_file(entry.path());
    }
  }
  regenerate_reports(experiment_dir.string());
  std::size_t differing = 0;
  for (const auto& [name, bytes] : before) {
    if (read_file(experiment_dir / name) != bytes) {
      ++differing;
      out.note("regenerated " + name + " differs");
    }
  }
  out.require(differing == 0, "regenerated reports differ");
  out.note(std::to_string(samples.size()) + " records permuted 20 times; " +
           std::to_string(before.size()) + " report files regenerated "
           "byte-identically");
  return out;
}

}  // namespace
}  // namespace tea

int main() {
  using tea::Outcome;
  const std::filesystem::path base = "acceptance_out";
  const std::filesystem::path experiment = base / "reviews_2k";
  struct Criterion {
    int id;
    std::string name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "metric identities", tea::metric_identities},
      {2, "attack contract", tea::attack_contract},
      {3, "brute-force oracle", tea::brute_force_oracle},
      {4, "query arithmetic", tea::query_arithmetic},
      {5, "worked-example k", tea::worked_example_k},
      {6, "TEA vs baseline", [&] {
         return tea::directional_reproduction(experiment);
       }},
      {7, "timing ablation", [&] {
         return tea::timing_ablation(base / "bench");
       }},
      {8, "estimator algebra", [&] {
         return tea::estimator_algebra(experiment);
       }},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.notes.push_back(std::string("exception: ") + e.what());
    }
    std::printf("criterion %d (%s): %s\n", c.id, c.name.c_str(),
                outcome.pass ? "PASS" : "FAIL");
    for (const std::string& note : outcome.notes) {
      std::printf("    %s\n", note.c_str());
    }
    std::fflush(stdout);
    if (!outcome.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n",
              static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
