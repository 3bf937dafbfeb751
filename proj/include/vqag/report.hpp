// Copyright 2026 The VQAG Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Corpus statistics: question-word distribution and a printable report with
// an embedded JSON block between `---JSON---` sentinel lines.

#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vqag/metrics.hpp"
#include "vqag/types.hpp"

namespace vqag {

inline constexpr std::string_view kJsonSentinel = "---JSON---";

struct CategoryHistogram {
  std::map<QuestionWord, std::size_t> counts;  // one entry per question word
  std::size_t total = 0;

  CategoryHistogram() {
    for (QuestionWord w : kAllQuestionWords) counts[w] = 0;
  }

  bool operator==(const CategoryHistogram&) const = default;

  // Most frequent question word; ties go to the earlier word in kAllQuestionWords.
  QuestionWord mode() const {
    QuestionWord best = kAllQuestionWords.front();
    for (QuestionWord w : kAllQuestionWords) {
      if (counts.at(w) > counts.at(best)) best = w;
    }
    return best;
  }
};

inline CategoryHistogram category_distribution(const std::vector<QAPair>& pairs) {
  CategoryHistogram h;
  for (const auto& p : pairs) ++h.counts[p.question_word];
  h.total = pairs.size();
  return h;
}

namespace detail {

inline std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

inline std::string pad_right(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

inline std::string pad_left(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

}  // namespace detail

inline nlohmann::ordered_json report_json(const CategoryHistogram& hist,
                                          const std::optional<MetricReport>& metrics) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (QuestionWord w : kAllQuestionWords) counts[std::string(to_string(w))] = hist.counts.at(w);
  j["histogram"] = {{"counts", counts}, {"total", hist.total}};
  if (metrics) {
    nlohmann::ordered_json m;
    m["n_pairs"] = metrics->n_pairs;
    if (metrics->computed.bleu) m["bleu"] = metrics->bleu;
    if (metrics->computed.rouge_l) m["rouge_l"] = metrics->rouge_l;
    if (metrics->computed.meteor) m["meteor"] = metrics->meteor;
    j["metrics"] = m;
  }
  return j;
}

// Scores are printed x100 with two decimals; percentages with one.
inline std::string render_report(const CategoryHistogram& hist,
                                 const std::optional<MetricReport>& metrics = std::nullopt) {
  std::string out = "Question word distribution\n";
  out += "  " + detail::pad_right("question word", 14) + detail::pad_left("count", 8) +
         detail::pad_left("percent", 10) + "\n";
  for (QuestionWord w : kAllQuestionWords) {
    const std::size_t c = hist.counts.at(w);
    const double pct =
        hist.total == 0 ? 0.0 : 100.0 * static_cast<double>(c) / static_cast<double>(hist.total);
    out += "  " + detail::pad_right(std::string(to_string(w)), 14) +
           detail::pad_left(std::to_string(c), 8) +
           detail::pad_left(detail::fixed(pct, 1) + "%", 10) + "\n";
  }
  out += "  " + detail::pad_right("total", 14) + detail::pad_left(std::to_string(hist.total), 8) +
         "\n";
  if (metrics) {
    out += "\nMetrics (" + std::to_string(metrics->n_pairs) + " pairs)\n";
    auto row = [&](std::string_view name, bool on, double v) {
      out += "  " + detail::pad_right(std::string(name), 14) +
             detail::pad_left(on ? detail::fixed(100.0 * v, 2) : std::string("-"), 8) + "\n";
    };
    row("BLEU", metrics->computed.bleu, metrics->bleu);
    row("METEOR", metrics->computed.meteor, metrics->meteor);
    row("ROUGE-L", metrics->computed.rouge_l, metrics->rouge_l);
  }
  out += std::string(kJsonSentinel) + "\n";
  out += report_json(hist, metrics).dump(2) + "\n";
  out += std::string(kJsonSentinel) + "\n";
  return out;
}

struct ParsedReport {
  CategoryHistogram histogram;
  std::optional<MetricReport> metrics;
};

// Reads back the JSON block of a rendered report.
inline ParsedReport parse_report(std::string_view text) {
  const auto first = text.find(kJsonSentinel);
  if (first == std::string_view::npos) throw std::runtime_error("report has no JSON block");
  const auto body_start = first + kJsonSentinel.size();
  const auto second = text.find(kJsonSentinel, body_start);
  if (second == std::string_view::npos) throw std::runtime_error("unterminated JSON block");
  const auto j = nlohmann::json::parse(text.substr(body_start, second - body_start));

  ParsedReport out;
  const auto& h = j.at("histogram");
  for (const auto& [key, value] : h.at("counts").items()) {
    const auto w = parse_question_word(key);
    if (!w) throw std::runtime_error("unknown question word '" + key + "' in report");
    out.histogram.counts[*w] = value.get<std::size_t>();
  }
  out.histogram.total = h.at("total").get<std::size_t>();
  if (j.contains("metrics")) {
    const auto& m = j.at("metrics");
    MetricReport r;
    r.n_pairs = m.at("n_pairs").get<std::size_t>();
    r.computed.bleu = m.contains("bleu");
    r.computed.rouge_l = m.contains("rouge_l");
    r.computed.meteor = m.contains("meteor");
    if (r.computed.bleu) r.bleu = m.at("bleu").get<double>();
    if (r.computed.rouge_l) r.rouge_l = m.at("rouge_l").get<double>();
    if (r.computed.meteor) r.meteor = m.at("meteor").get<double>();
    out.metrics = r;
  }
  return out;
}

}  // namespace vqag
