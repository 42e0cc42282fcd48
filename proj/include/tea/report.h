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


// Rendering of attack traces and reports: a side-by-side attribution diff
// (ANSI terminal or HTML) and a four-panel SVG of PCC, k, STS and the
// perplexity increase against the perturbed ratio.

#ifndef TEA_REPORT_H_
#define TEA_REPORT_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "tea/attack.h"
#include "tea/attribution.h"
#include "tea/estimator.h"

namespace tea {

enum class DiffFormat { kAnsi, kHtml };

// Values shown in the diff header that the trace alone does not carry.
struct DiffHeader {
  std::optional<double> sems;  // 1 - d_s
  std::optional<double> k;
};

// Positive scores render red (towards the predicted class), negative blue;
// substituted tokens are underlined. Throws Error when a map length differs
// from its token sequence.
std::string render_diff(const AttackTrace& trace, const AttributionMap& original,
                        const AttributionMap& adversarial,
                        const DiffHeader& header, DiffFormat format);

// The header line alone, e.g. "confidence: 0.98 -> 0.95 | PCC: 0.02 |
// SemS: 0.97 | k: 14.9".
std::string diff_header_line(const AttackTrace& trace,
                             const AttributionMap& original,
                             const AttributionMap& adversarial,
                             const DiffHeader& header);

// One line series per report, labelled by its attack name.
std::string render_svg(std::span<const RobustnessReport> series,
                       std::string_view k_metric, std::string_view sts_metric);

}  // namespace tea

#endif  // TEA_REPORT_H_
