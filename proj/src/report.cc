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


#include "tea/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>
#include <vector>

#include "tea/distances.h"
#include "tea/error.h"

namespace tea {
namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string html_escape(std::string_view s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (const double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::string render_column(const TokenizedText& text,
                          const std::vector<double>& scores,
                          const std::set<std::size_t>& substituted,
                          DiffFormat format) {
  const double scale = max_abs(scores);
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (i > 0) out += ' ';
    const double a = scores[i];
    const double strength = scale > 0 ? std::abs(a) / scale : 0.0;
    const bool sub = substituted.count(i) > 0;
    if (format == DiffFormat::kAnsi) {
      std::string codes;
      if (a > 0) codes = "31";
      if (a < 0) codes = "34";
      if (strength >= 0.5 && a != 0) codes += ";1";
      if (sub) codes += codes.empty() ? "4" : ";4";
      if (codes.empty()) {
        out += text.tokens[i];
      } else {
        out += "\x1b[" + codes + "m" + text.tokens[i] + "\x1b[0m";
      }
    } else {
      const char* cls = a > 0 ? "pos" : (a < 0 ? "neg" : "zero");
      const char* rgb = a > 0 ? "220,40,40" : "40,80,220";
      out += "<span class=\"tok " + std::string(cls) +
             (sub ? " sub" : "") + "\" style=\"background:rgba(" + rgb + "," +
             fixed(strength, 2) + ")" +
             (sub ? ";text-decoration:underline" : "") + "\">" +
             html_escape(text.tokens[i]) + "</span>";
    }
  }
  return out;
}

}  // namespace

std::string diff_header_line(const AttackTrace& trace,
                             const AttributionMap& original,
                             const AttributionMap& adversarial,
                             const DiffHeader& header) {
  const auto label = static_cast<std::size_t>(trace.label);
  std::string line;
  if (label < trace.original_probs.size() &&
      label < trace.adversarial_probs.size()) {
    line += "confidence: " + fixed(trace.original_probs[label], 2) + " -> " +
            fixed(trace.adversarial_probs[label], 2);
  }
  std::string pcc = "n/a";
  if (original.size() >= 2 && original.size() == adversarial.size()) {
    const AttributionDistance d = attribution_distance(original, adversarial);
    if (!d.undefined) pcc = fixed(d.pcc, 2);
  }
  if (!line.empty()) line += " | ";
  line += "PCC: " + pcc;
  if (header.sems) line += " | SemS: " + fixed(*header.sems, 2);
  if (header.k) line += " | k: " + fixed(*header.k, 1);
  return line;
}

std::string render_diff(const AttackTrace& trace, const AttributionMap& original,
                        const AttributionMap& adversarial,
                        const DiffHeader& header, DiffFormat format) {
  if (original.size() != trace.original.size() ||
      adversarial.size() != trace.adversarial.size()) {
    throw Error("render_diff: attribution map length differs from the token "
                "count");
  }
  std::set<std::size_t> substituted;
  for (const Substitution& s : trace.substitutions) {
    substituted.insert(s.position);
  }
  const std::string head = diff_header_line(trace, original, adversarial,
                                            header);
  const std::string left =
      render_column(trace.original, original.scores, {}, format);
  const std::string right =
      render_column(trace.adversarial, adversarial.scores, substituted, format);
  if (format == DiffFormat::kAnsi) {
    return head + "\noriginal:    " + left + "\nadversarial: " + right + "\n";
  }
  return "<div class=\"tea-diff\">\n<p class=\"header\">" + html_escape(head) +
         "</p>\n<table>\n<tr><th>original</th><th>adversarial</th></tr>\n"
         "<tr><td>" + left + "</td><td>" + right +
         "</td></tr>\n</table>\n</div>\n";
}

std::string render_svg(std::span<const RobustnessReport> series,
                       std::string_view k_metric, std::string_view sts_metric) {
  struct Panel {
    std::string metric;
    std::string title;
  };
  const std::vector<Panel> panels = {{"pcc", "PCC"},
                                     {std::string(k_metric), "k"},
                                     {std::string(sts_metric), "STS"},
                                     {"delta_pp", "perplexity increase"}};
  const char* colors[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};
  constexpr double kPanelW = 260, kPanelH = 200, kMargin = 40;
  std::ostringstream svg;
  const double width = panels.size() * (kPanelW + kMargin) + kMargin;
  const double height = kPanelH + 3 * kMargin;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" font-family=\"sans-serif\" "
      << "font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  double x_max = 0.0;
  for (const RobustnessReport& r : series) {
    if (!r.edges.empty()) x_max = std::max(x_max, r.edges.back());
  }
  if (x_max <= 0) x_max = 1.0;

  for (std::size_t p = 0; p < panels.size(); ++p) {
    const double x0 = kMargin + p * (kPanelW + kMargin);
    const double y0 = kMargin;
    std::vector<std::vector<std::pair<double, double>>> lines;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const RobustnessReport& r : series) {
      std::vector<std::pair<double, double>> pts;
      for (const BucketStats& b : r.buckets) {
        const auto rho = b.metrics.find("rho");
        const auto m = b.metrics.find(panels[p].metric);
        if (rho == b.metrics.end() || m == b.metrics.end()) continue;
        if (!rho->second.mean || !m->second.mean) continue;
        pts.emplace_back(*rho->second.mean, *m->second.mean);
        lo = std::min(lo, *m->second.mean);
        hi = std::max(hi, *m->second.mean);
      }
      lines.push_back(std::move(pts));
    }
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    auto sx = [&](double x) { return x0 + kPanelW * x / x_max; };
    auto sy = [&](double y) { return y0 + kPanelH * (1.0 - (y - lo) / (hi - lo)); };

    svg << "<g>\n<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\""
        << kPanelW << "\" height=\"" << kPanelH
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    svg << "<text x=\"" << x0 + kPanelW / 2 << "\" y=\"" << y0 - 8
        << "\" text-anchor=\"middle\">" << panels[p].title << "</text>\n";
    svg << "<text x=\"" << x0 + kPanelW / 2 << "\" y=\"" << y0 + kPanelH + 28
        << "\" text-anchor=\"middle\">perturbed ratio</text>\n";
    for (int t = 0; t <= 4; ++t) {
      const double xv = x_max * t / 4.0;
      svg << "<text x=\"" << sx(xv) << "\" y=\"" << y0 + kPanelH + 14
          << "\" text-anchor=\"middle\">" << fixed(xv, 2) << "</text>\n";
      const double yv = lo + (hi - lo) * t / 4.0;
      svg << "<text x=\"" << x0 - 4 << "\" y=\"" << sy(yv) + 4
          << "\" text-anchor=\"end\">" << fixed(yv, 2) << "</text>\n";
    }
    for (std::size_t s = 0; s < lines.size(); ++s) {
      const char* color = colors[s % 6];
      if (lines[s].size() >= 2) {
        svg << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : lines[s]) {
          svg << fixed(sx(x), 2) << ',' << fixed(sy(y), 2) << ' ';
        }
        svg << "\"/>\n";
      }
      for (const auto& [x, y] : lines[s]) {
        svg << "<circle cx=\"" << fixed(sx(x), 2) << "\" cy=\""
            << fixed(sy(y), 2) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
      }
    }
    svg << "</g>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const double lx = kMargin + s * 120;
    const double ly = height - 10;
    svg << "<rect x=\"" << lx << "\" y=\"" << ly - 9
        << "\" width=\"10\" height=\"10\" fill=\"" << colors[s % 6]
        << "\"/>\n<text x=\"" << lx + 14 << "\" y=\"" << ly << "\">"
        << html_escape(series[s].attack) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace tea
