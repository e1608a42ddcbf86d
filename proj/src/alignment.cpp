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

#include "salience/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <istream>
#include <numeric>

#include "salience/errors.hpp"
#include "salience/text.hpp"

namespace salience {

void AlignmentConfig::validate() const {
  if (!(window_fraction > 0.0 && window_fraction <= 1.0))
    throw ConfigError("rho must lie in (0, 1]");
  if (!(min_similarity > 0.0 && min_similarity < 1.0)) throw ConfigError("mu must lie in (0, 1)");
  if (!(max_drop >= 0.0 && max_drop < 1.0)) throw ConfigError("theta must lie in [0, 1)");
  if (max_targets == 0) throw ConfigError("max_targets must be positive");
}

std::size_t SilverLabelSet::salient_count() const {
  return static_cast<std::size_t>(
      std::count_if(labels.begin(), labels.end(), [](const SilverLabel& l) { return l.salient; }));
}

std::vector<bool> SilverLabelSet::salient_mask() const {
  std::vector<bool> mask(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) mask[i] = labels[i].salient;
  return mask;
}

AlignmentWindow alignment_window(std::size_t i, std::size_t summary_size, std::size_t full_size,
                                 double window_fraction) {
  AlignmentWindow w;
  const double pos = static_cast<double>(i) / static_cast<double>(summary_size) *
                     static_cast<double>(full_size);
  w.anchor = static_cast<std::size_t>(std::lround(pos));
  const auto half = static_cast<std::size_t>(std::ceil(window_fraction * static_cast<double>(full_size)));
  w.first = w.anchor > half ? w.anchor - half : 0;
  w.last = std::min(w.anchor + half, full_size - 1);
  if (w.first > w.last) w.first = w.last;
  return w;
}

SilverLabelSet align_similarities(const Matrix& similarity, const AlignmentConfig& config) {
  config.validate();
  const auto summary_size = static_cast<std::size_t>(similarity.rows());
  const auto full_size = static_cast<std::size_t>(similarity.cols());
  if (summary_size == 0 || full_size == 0) throw ShapeError("alignment needs non-empty texts");

  SilverLabelSet out;
  out.labels.resize(full_size);
  out.alignments.resize(summary_size);
  for (std::size_t i = 0; i < summary_size; ++i) {
    const auto w = alignment_window(i, summary_size, full_size, config.window_fraction);
    std::vector<std::size_t> candidates(w.last - w.first + 1);
    std::iota(candidates.begin(), candidates.end(), w.first);
    const auto row = similarity.row(static_cast<Eigen::Index>(i));
    auto sim = [&](std::size_t j) { return row(static_cast<Eigen::Index>(j)); };

    double window_max = -std::numeric_limits<double>::infinity();
    for (std::size_t j : candidates) window_max = std::max(window_max, sim(j));
    const double floor = std::max(config.min_similarity, window_max - config.max_drop);

    std::erase_if(candidates, [&](std::size_t j) { return !(sim(j) >= floor); });
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](std::size_t a, std::size_t b) { return sim(a) > sim(b); });
    if (candidates.size() > config.max_targets) candidates.resize(config.max_targets);

    for (std::size_t j : candidates) {
      out.alignments[i].push_back({j, sim(j)});
      auto& label = out.labels[j];
      label.salience_score = label.salient ? std::max(label.salience_score, sim(j)) : sim(j);
      label.salient = true;
    }
  }
  return out;
}

namespace {

Matrix embed_sentences(const std::vector<Sentence>& sentences, const Embedder& embedder) {
  std::vector<std::string> texts;
  texts.reserve(sentences.size());
  for (const auto& s : sentences) texts.push_back(s.text);
  return embedder.embed_batch(texts);
}

}  // namespace

SilverLabelSet align_chapter(const std::vector<Sentence>& summary,
                             const std::vector<Sentence>& full_text, const Embedder& embedder,
                             const AlignmentConfig& config) {
  if (summary.empty() || full_text.empty()) throw ShapeError("alignment needs non-empty texts");
  const Matrix s = normalize_rows(embed_sentences(summary, embedder));
  const Matrix f = normalize_rows(embed_sentences(full_text, embedder));
  SilverLabelSet out = align_similarities(s * f.transpose(), config);
  for (const auto& sentence : full_text) out.texts.push_back(sentence.text);
  return out;
}

namespace {

std::vector<Sentence> sentences_from_json(const nlohmann::json& arr, const char* field) {
  if (!arr.is_array()) throw IoError(std::string("paired record: '") + field + "' must be a list");
  std::vector<Sentence> out;
  for (const auto& item : arr) {
    Sentence s;
    s.index = out.size();
    if (item.is_string()) {
      s.text = item.get<std::string>();
    } else {
      s.text = item.at("text").get<std::string>();
    }
    s.token_count = count_tokens(s.text);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

std::vector<PairedChapter> read_paired_jsonl(std::istream& in) {
  std::vector<PairedChapter> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw IoError("paired corpus line " + std::to_string(line_no) + ": " + e.what());
    }
    PairedChapter c;
    c.chapter_id = j.at("chapter_id").get<std::string>();
    c.summary = sentences_from_json(j.value("summary_sentences", nlohmann::json::array()),
                                    "summary_sentences");
    c.full_text = sentences_from_json(j.value("full_text_sentences", nlohmann::json::array()),
                                      "full_text_sentences");
    out.push_back(std::move(c));
  }
  return out;
}

LabeledCorpus label_corpus(const std::vector<PairedChapter>& corpus, const Embedder& embedder,
                           const AlignmentConfig& config) {
  config.validate();
  LabeledCorpus out;
  for (const auto& chapter : corpus) {
    if (chapter.summary.empty() || chapter.full_text.empty()) {
      std::cerr << "warning: chapter '" << chapter.chapter_id
                << "' has no paired summary or full text; skipped\n";
      out.stats.skipped.push_back(chapter.chapter_id);
      continue;
    }
    AlignedChapter aligned{chapter, align_chapter(chapter.summary, chapter.full_text, embedder, config)};
    aligned.labels.chapter_id = chapter.chapter_id;
    out.stats.labels += aligned.labels.salient_count();
    for (const auto& a : aligned.labels.alignments) out.stats.alignment_pairs += a.size();
    out.stats.full_text_sentences += chapter.full_text.size();
    out.chapters.push_back(std::move(aligned));
  }
  out.stats.chapters = out.chapters.size();
  if (out.stats.chapters > 0) {
    const auto n = static_cast<double>(out.stats.chapters);
    out.stats.mean_sentences_per_chapter = static_cast<double>(out.stats.full_text_sentences) / n;
    out.stats.mean_salient_per_chapter = static_cast<double>(out.stats.labels) / n;
  }
  return out;
}

nlohmann::json alignment_to_json(const LabeledCorpus& corpus) {
  nlohmann::json chapters = nlohmann::json::array();
  for (const auto& [chapter, labels] : corpus.chapters) {
    nlohmann::json summary = nlohmann::json::array();
    for (std::size_t i = 0; i < chapter.summary.size(); ++i) {
      nlohmann::json alignments = nlohmann::json::array();
      for (const auto& a : labels.alignments[i]) {
        alignments.push_back(
            {{"index", a.index}, {"text", chapter.full_text[a.index].text}, {"score", a.similarity}});
      }
      summary.push_back({{"index", i}, {"text", chapter.summary[i].text}, {"alignments", alignments}});
    }
    nlohmann::json full_text = nlohmann::json::array();
    for (std::size_t j = 0; j < chapter.full_text.size(); ++j) {
      full_text.push_back({{"index", j},
                           {"text", chapter.full_text[j].text},
                           {"salient", labels.labels[j].salient},
                           {"salience_score", labels.labels[j].salience_score}});
    }
    chapters.push_back(
        {{"chapter_id", chapter.chapter_id}, {"summary", summary}, {"full_text", full_text}});
  }
  return {{"chapters", chapters}};
}

nlohmann::json stats_to_json(const CorpusStats& stats) {
  return {{"chapters", stats.chapters},
          {"labels", stats.labels},
          {"alignment_pairs", stats.alignment_pairs},
          {"mean_sentences_per_chapter", stats.mean_sentences_per_chapter},
          {"mean_salient_per_chapter", stats.mean_salient_per_chapter},
          {"skipped", stats.skipped}};
}

std::vector<SilverLabelSet> labels_from_json(const nlohmann::json& doc) {
  std::vector<SilverLabelSet> out;
  for (const auto& c : doc.at("chapters")) {
    SilverLabelSet set;
    set.chapter_id = c.at("chapter_id").get<std::string>();
    for (const auto& f : c.at("full_text")) {
      set.labels.push_back({f.at("salient").get<bool>(), f.at("salience_score").get<double>()});
      set.texts.push_back(f.value("text", ""));
    }
    for (const auto& s : c.value("summary", nlohmann::json::array())) {
      std::vector<Alignment> row;
      for (const auto& a : s.value("alignments", nlohmann::json::array())) {
        row.push_back({a.at("index").get<std::size_t>(), a.at("score").get<double>()});
      }
      set.alignments.push_back(std::move(row));
    }
    out.push_back(std::move(set));
  }
  return out;
}

}  // namespace salience
