// Copyright 2026 The Salience Authors.
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

#include "salience/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <ostream>

#include "salience/errors.hpp"
#include "salience/text.hpp"

namespace salience {

std::vector<std::size_t> rank_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

namespace {

std::size_t check_lengths(std::span<const double> scores, const std::vector<bool>& labels,
                          const char* what) {
  if (scores.size() != labels.size()) {
    throw ShapeError(std::string(what) + ": " + std::to_string(scores.size()) + " scores vs " +
                     std::to_string(labels.size()) + " labels");
  }
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
}

}  // namespace

double average_precision(std::span<const double> scores, const std::vector<bool>& labels) {
  const std::size_t positives = check_lengths(scores, labels, "average_precision");
  if (positives == 0) {
    std::cerr << "warning: average_precision with no positive labels; defined as 0\n";
    return 0.0;
  }
  double sum = 0.0;
  std::size_t hits = 0;
  const auto order = rank_order(scores);
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (!labels[order[r]]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  return sum / static_cast<double>(positives);
}

double rouge_l_tokens(std::span<const std::string> candidate, std::span<const std::string> reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  // Two-row LCS table over the reference.
  std::vector<std::size_t> prev(reference.size() + 1, 0), cur(reference.size() + 1, 0);
  for (const auto& c : candidate) {
    for (std::size_t j = 1; j <= reference.size(); ++j) {
      cur[j] = c == reference[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const auto lcs = static_cast<double>(prev[reference.size()]);
  if (lcs == 0.0) return 0.0;
  const double recall = lcs / static_cast<double>(reference.size());
  const double precision = lcs / static_cast<double>(candidate.size());
  return 2.0 * precision * recall / (precision + recall);
}

double rouge_l(std::string_view selected_text, std::string_view reference_text) {
  const auto a = word_tokens(selected_text);
  const auto b = word_tokens(reference_text);
  return rouge_l_tokens(a, b);
}

double recall_at_k(std::span<const double> scores, const std::vector<bool>& labels) {
  const std::size_t k = check_lengths(scores, labels, "recall_at_k");
  if (k == 0) {
    std::cerr << "warning: recall_at_k with no positive labels; defined as 0\n";
    return 0.0;
  }
  const auto order = rank_order(scores);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < k; ++r) hits += labels[order[r]] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(k);
}

namespace {

std::string join_selected(const std::vector<std::string>& texts, const std::vector<bool>& keep) {
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (keep[i]) parts.push_back(texts[i]);
  }
  return join(parts, " ");
}

ChapterEval evaluate_chapter(std::span<const double> scores, const SilverLabelSet& labels) {
  ChapterEval e;
  const auto mask = labels.salient_mask();
  e.sentences = mask.size();
  e.positives = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
  if (e.positives > 0) {
    e.metrics.map = average_precision(scores, mask);
    e.metrics.recall_at_k = recall_at_k(scores, mask);
  }
  if (e.positives > 0 && labels.texts.size() == mask.size()) {
    std::vector<bool> selected(mask.size(), false);
    const auto order = rank_order(scores);
    for (std::size_t r = 0; r < e.positives; ++r) selected[order[r]] = true;
    e.metrics.rouge_l = rouge_l(join_selected(labels.texts, selected), join_selected(labels.texts, mask));
  }
  return e;
}

}  // namespace

EvalReport evaluate(std::span<const SalienceProfile> profiles,
                    std::span<const SilverLabelSet> labels) {
  EvalReport report;
  std::map<std::string, const SilverLabelSet*> by_id;
  for (const auto& l : labels) by_id[l.chapter_id] = &l;

  for (const auto& profile : profiles) {
    if (report.config_hash.empty()) report.config_hash = profile.config_hash;
    if (report.scorer_fingerprint.empty()) report.scorer_fingerprint = profile.scorer_fingerprint;
    const auto it = by_id.find(profile.chapter_id);
    if (it == by_id.end()) {
      std::cerr << "warning: no silver labels for chapter '" << profile.chapter_id << "'\n";
      report.skipped.push_back(profile.chapter_id + ": missing label set");
      continue;
    }
    const SilverLabelSet& set = *it->second;
    std::map<Measure, ChapterEval> row;
    bool ok = true;
    for (const auto& [measure, scores] : profile.scores) {
      if (scores.size() != set.labels.size()) {
        report.skipped.push_back(profile.chapter_id + ": " + std::string(measure_name(measure)) +
                                 " has " + std::to_string(scores.size()) + " scores for " +
                                 std::to_string(set.labels.size()) + " labels");
        ok = false;
        break;
      }
      row[measure] = evaluate_chapter(scores, set);
    }
    if (ok) report.per_chapter[profile.chapter_id] = std::move(row);
  }

  // Deterministic fold in chapter_id order.
  for (const auto& [chapter_id, row] : report.per_chapter) {
    for (const auto& [measure, e] : row) {
      auto& mean = report.corpus_mean[measure];
      mean.chapters += 1;
      mean.metrics.rouge_l += e.metrics.rouge_l;
      if (e.positives > 0) {
        mean.ranked_chapters += 1;
        mean.metrics.map += e.metrics.map;
        mean.metrics.recall_at_k += e.metrics.recall_at_k;
      }
    }
  }
  for (auto& [measure, mean] : report.corpus_mean) {
    if (mean.chapters > 0) mean.metrics.rouge_l /= static_cast<double>(mean.chapters);
    if (mean.ranked_chapters > 0) {
      mean.metrics.map /= static_cast<double>(mean.ranked_chapters);
      mean.metrics.recall_at_k /= static_cast<double>(mean.ranked_chapters);
    }
  }
  return report;
}

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_header(std::ostream& out, const EvalReport& report) {
  out << "# tie_break=ascending_index\n";
  out << "# config_hash=" << report.config_hash << "\n";
  out << "# fingerprint=" << report.scorer_fingerprint << "\n";
}

}  // namespace

void write_per_chapter_csv(std::ostream& out, const EvalReport& report) {
  write_header(out, report);
  out << "chapter_id,measure,map,rouge_l,recall_at_k,sentences,positives\n";
  for (const auto& [chapter_id, row] : report.per_chapter) {
    for (const auto& [measure, e] : row) {
      out << chapter_id << ',' << measure_name(measure) << ',' << fixed6(e.metrics.map) << ','
          << fixed6(e.metrics.rouge_l) << ',' << fixed6(e.metrics.recall_at_k) << ','
          << e.sentences << ',' << e.positives << '\n';
    }
  }
}

void write_summary_csv(std::ostream& out, const EvalReport& report) {
  write_header(out, report);
  out << "measure,map,rouge_l,recall_at_k,chapters,ranked_chapters\n";
  for (const auto& [measure, mean] : report.corpus_mean) {
    out << measure_name(measure) << ',' << fixed6(mean.metrics.map) << ','
        << fixed6(mean.metrics.rouge_l) << ',' << fixed6(mean.metrics.recall_at_k) << ','
        << mean.chapters << ',' << mean.ranked_chapters << '\n';
  }
}

nlohmann::json plot_data(const SalienceProfile& profile, const SilverLabelSet& labels) {
  nlohmann::json sentences = nlohmann::json::array();
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    nlohmann::json scores = nlohmann::json::object();
    for (const auto& [measure, values] : profile.scores) {
      if (i < values.size()) scores[std::string(measure_name(measure))] = values[i];
    }
    sentences.push_back({{"index", i},
                         {"text", i < labels.texts.size() ? labels.texts[i] : std::string()},
                         {"salient", labels.labels[i].salient},
                         {"scores", scores}});
  }
  return {{"chapter_id", profile.chapter_id},
          {"config_hash", profile.config_hash},
          {"fingerprint", profile.scorer_fingerprint},
          {"sentences", sentences}};
}

}  // namespace salience
