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

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "salience/corpus.hpp"
#include "salience/embedding.hpp"
#include "salience/numeric.hpp"

namespace salience {

struct AlignmentConfig {
  double window_fraction = 0.10;  // rho
  double min_similarity = 0.35;   // mu
  double max_drop = 0.05;         // theta
  std::size_t max_targets = 3;    // k

  void validate() const;
};

struct Alignment {
  std::size_t index = 0;  // full-text sentence
  double similarity = 0.0;

  bool operator==(const Alignment&) const = default;
};

struct SilverLabel {
  bool salient = false;
  double salience_score = 0.0;

  bool operator==(const SilverLabel&) const = default;
};

struct SilverLabelSet {
  std::string chapter_id;
  std::vector<SilverLabel> labels;                 // per full-text sentence
  std::vector<std::vector<Alignment>> alignments;  // per summary sentence
  // Full-text sentences, when known; ROUGE-L references are built from them.
  std::vector<std::string> texts;

  std::size_t salient_count() const;
  std::vector<bool> salient_mask() const;
  bool operator==(const SilverLabelSet&) const = default;
};

// Full-text index range [first, last] searched for summary sentence i.
struct AlignmentWindow {
  std::size_t anchor = 0;
  std::size_t first = 0;
  std::size_t last = 0;
};

AlignmentWindow alignment_window(std::size_t i, std::size_t summary_size, std::size_t full_size,
                                 double window_fraction);

// Alignment over a precomputed similarity matrix (summary rows x full-text
// columns).
SilverLabelSet align_similarities(const Matrix& similarity, const AlignmentConfig& config);

SilverLabelSet align_chapter(const std::vector<Sentence>& summary,
                             const std::vector<Sentence>& full_text, const Embedder& embedder,
                             const AlignmentConfig& config);

struct PairedChapter {
  std::string chapter_id;
  std::vector<Sentence> summary;
  std::vector<Sentence> full_text;
};

// Reads {"chapter_id", "summary_sentences", "full_text_sentences"} lines.
// Sentence entries may be strings or {"index", "text"} objects.
std::vector<PairedChapter> read_paired_jsonl(std::istream& in);

struct AlignedChapter {
  PairedChapter chapter;
  SilverLabelSet labels;
};

struct CorpusStats {
  std::size_t chapters = 0;
  std::size_t labels = 0;
  std::size_t alignment_pairs = 0;
  std::size_t full_text_sentences = 0;
  double mean_sentences_per_chapter = 0.0;
  double mean_salient_per_chapter = 0.0;
  std::vector<std::string> skipped;
};

struct LabeledCorpus {
  std::vector<AlignedChapter> chapters;
  CorpusStats stats;
};

// Chapters with an empty summary or full text are skipped with a warning.
LabeledCorpus label_corpus(const std::vector<PairedChapter>& corpus, const Embedder& embedder,
                           const AlignmentConfig& config);

nlohmann::json alignment_to_json(const LabeledCorpus& corpus);
nlohmann::json stats_to_json(const CorpusStats& stats);
// Reads the "chapters" document back into label sets.
std::vector<SilverLabelSet> labels_from_json(const nlohmann::json& doc);

}  // namespace salience
