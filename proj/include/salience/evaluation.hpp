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

#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "salience/alignment.hpp"
#include "salience/salience.hpp"

namespace salience {

// Indices sorted by score descending; equal scores keep ascending index.
std::vector<std::size_t> rank_order(std::span<const double> scores);

// Mean precision at the rank of each positive. 0 (with a warning) when there
// are no positives.
double average_precision(std::span<const double> scores, const std::vector<bool>& labels);

// LCS F1 between two token sequences; 0 when either is empty.
double rouge_l_tokens(std::span<const std::string> candidate, std::span<const std::string> reference);
// Same over word tokens of two texts.
double rouge_l(std::string_view selected_text, std::string_view reference_text);

// k = number of positives; fraction of positives among the top k.
double recall_at_k(std::span<const double> scores, const std::vector<bool>& labels);

struct Metrics {
  double map = 0.0;
  double rouge_l = 0.0;
  double recall_at_k = 0.0;
};

struct ChapterEval {
  Metrics metrics;
  std::size_t sentences = 0;
  std::size_t positives = 0;
};

struct CorpusMean {
  Metrics metrics;
  std::size_t chapters = 0;           // contributing to ROUGE-L
  std::size_t ranked_chapters = 0;    // with >= 1 positive; contributing to MAP and recall
};

struct EvalReport {
  std::map<std::string, std::map<Measure, ChapterEval>> per_chapter;
  std::map<Measure, CorpusMean> corpus_mean;
  std::vector<std::string> skipped;  // "<chapter_id>: reason"
  std::string config_hash;
  std::string scorer_fingerprint;
};

// Chapters without a label set, or whose lengths disagree, are skipped and
// recorded. Chapters without positives count toward ROUGE-L only.
EvalReport evaluate(std::span<const SalienceProfile> profiles,
                    std::span<const SilverLabelSet> labels);

void write_per_chapter_csv(std::ostream& out, const EvalReport& report);
void write_summary_csv(std::ostream& out, const EvalReport& report);

// Per chapter: {"chapter_id", "sentences": [{"index", "text", "salient",
// "scores": {measure: value}}]}.
nlohmann::json plot_data(const SalienceProfile& profile, const SilverLabelSet& labels);

}  // namespace salience
