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


// Python bindings. Structured results cross the boundary as JSON text and
// are decoded by the tea_robustness package.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <utility>
#include <vector>

#include "tea/attack.h"
#include "tea/distances.h"
#include "tea/error.h"
#include "tea/estimator.h"
#include "tea/experiment.h"
#include "tea/text.h"

namespace py = pybind11;

namespace {

tea::ExperimentConfig config_from(const std::string& config_json,
                                  const std::string& base_dir) {
  return tea::parse_experiment_config(nlohmann::json::parse(config_json),
                                      base_dir);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Attribution-robustness estimation core";

  // Translators run newest first, so the subclasses are registered last.
  auto& error = py::register_exception<tea::Error>(m, "Error",
                                                   PyExc_RuntimeError);
  py::register_exception<tea::ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<tea::ResolutionError>(m, "ResolutionError",
                                               error.ptr());

  m.def("preprocess", &tea::preprocess, py::arg("text"));

  m.def(
      "pearson_correlation",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return tea::pearson_correlation(a, b);
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "attribution_distance",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        const tea::AttributionDistance d = tea::attribution_distance(a, b);
        return py::make_tuple(d.value, d.pcc, d.undefined);
      },
      py::arg("a"), py::arg("b"),
      "Returns (distance, pcc, undefined).");

  m.def(
      "sample_k",
      [](double d_attr, double d_s, double eps_ds) {
        tea::DistanceConfig config;
        config.eps_ds = eps_ds;
        config.validate();
        const tea::KValue k = tea::sample_k(d_attr, d_s, config);
        return py::make_tuple(k.k, k.floored);
      },
      py::arg("d_attr"), py::arg("d_s"), py::arg("eps_ds") = 1e-3,
      "Returns (k, floored).");
  m.def(
      "auc_k",
      [](const std::vector<std::pair<double, double>>& curve) {
        return tea::auc_k(curve);
      },
      py::arg("curve"));
  m.def("relative_auc_increase", &tea::relative_auc_increase,
        py::arg("auc_tea"), py::arg("auc_baseline"));
  m.def("default_rho_edges", &tea::default_rho_edges);
  m.def(
      "bucket_index",
      [](double rho, const std::vector<double>& edges) {
        return tea::bucket_index(rho, edges);
      },
      py::arg("rho"), py::arg("edges"));

  m.def("rho_b_rule", &tea::rho_b_rule, py::arg("rho_max"));
  m.def("position_budget", &tea::position_budget, py::arg("num_tokens"),
        py::arg("rho_max"));
  m.def("batch_size", &tea::batch_size, py::arg("num_tokens"),
        py::arg("rho_b"));
  m.def("predicted_queries", &tea::predicted_queries, py::arg("num_tokens"),
        py::arg("rho_max"), py::arg("rho_b"));
  m.def(
      "make_batches",
      [](const std::vector<std::size_t>& ranked, std::size_t num_tokens,
         double rho_max, double rho_b) {
        return tea::make_batches(ranked, num_tokens, rho_max, rho_b);
      },
      py::arg("ranked"), py::arg("num_tokens"), py::arg("rho_max"),
      py::arg("rho_b"));

  m.def(
      "load_experiment_config",
      [](const std::string& path) {
        return tea::to_json(tea::load_experiment_config(path)).dump();
      },
      py::arg("path"));
  m.def(
      "run_experiment",
      [](const std::string& config_json, const std::string& base_dir) {
        const tea::ExperimentConfig config = config_from(config_json, base_dir);
        tea::ExperimentResult result;
        {
          py::gil_scoped_release release;
          result = tea::run_experiment(config);
        }
        nlohmann::json out = {{"artifacts", result.artifacts}};
        for (const auto& [attack, report] : result.reports) {
          out["reports"][attack] = tea::to_json(report);
        }
        for (const auto& [seed, accuracy] : result.validation_accuracy) {
          out["validation_accuracy"][std::to_string(seed)] = accuracy;
        }
        return out.dump();
      },
      py::arg("config_json"), py::arg("base_dir") = "");
  m.def(
      "regenerate_reports",
      [](const std::string& output_dir) {
        const tea::ExperimentResult result =
            tea::regenerate_reports(output_dir);
        return result.artifacts;
      },
      py::arg("output_dir"));
}
