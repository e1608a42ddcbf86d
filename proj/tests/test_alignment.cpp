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

#include <doctest.h>

#include <sstream>

#include "salience/alignment.hpp"
#include "salience/errors.hpp"
#include "salience/rng.hpp"

using namespace salience;

namespace {

std::vector<Sentence> sentences(const std::vector<std::string>& texts) {
  std::vector<Sentence> out;
  for (std::size_t i = 0; i < texts.size(); ++i) out.push_back({i, texts[i], count_tokens(texts[i])});
  return out;
}

// Unique nonsense words so unrelated sentences share no features.
std::string unique_sentence(std::size_t chapter, std::size_t i) {
  std::string s;
  for (int w = 0; w < 5; ++w) s += (w ? " w" : "w") + std::to_string(chapter) + "x" + std::to_string(i) + "y" + std::to_string(w);
  return s + ".";
}

AlignmentConfig wide() {
  AlignmentConfig c;
  c.window_fraction = 1.0;
  return c;
}

}  // namespace

TEST_CASE("a single identical sentence is the only label") {
  LookupEmbedder e(3);
  e.set("s", Vector::Unit(3, 0));
  e.set("f0", Vector::Unit(3, 1));
  e.set("f1", Vector::Unit(3, 0));
  e.set("f2", Vector::Unit(3, 2));
  const auto set = align_chapter(sentences({"s"}), sentences({"f0", "f1", "f2"}), e, wide());
  CHECK(set.salient_mask() == std::vector<bool>{false, true, false});
  CHECK(set.labels[1].salience_score == doctest::Approx(1.0));
  REQUIRE(set.alignments[0].size() == 1);
  CHECK(set.alignments[0][0].index == 1);
}

TEST_CASE("the similarity gate") {
  Matrix sim(1, 4);
  sim << 0.30, 0.34, 0.10, 0.2;
  const auto set = align_similarities(sim, wide());
  CHECK(set.salient_count() == 0);
  CHECK(set.alignments[0].empty());
}

TEST_CASE("the drop filter and the target cap") {
  SUBCASE("theta excludes candidates more than 0.05 below the window maximum") {
    Matrix sim(1, 4);
    sim << 0.80, 0.77, 0.74, 0.73;
    const auto set = align_similarities(sim, wide());
    CHECK(set.salient_mask() == std::vector<bool>{true, true, false, false});
  }
  SUBCASE("at most k targets, ties to the lower index") {
    Matrix sim(1, 5);
    sim << 0.78, 0.80, 0.79, 0.78, 0.78;
    const auto set = align_similarities(sim, wide());
    REQUIRE(set.alignments[0].size() == 3);
    CHECK(set.alignments[0][0].index == 1);
    CHECK(set.alignments[0][1].index == 2);
    CHECK(set.alignments[0][2].index == 0);
  }
}

TEST_CASE("window placement is proportional and clamped") {
  const auto w = alignment_window(1, 2, 20, 0.1);
  CHECK(w.anchor == 10);
  CHECK(w.first == 8);
  CHECK(w.last == 12);
  const auto start = alignment_window(0, 3, 10, 0.1);
  CHECK(start.first == 0);
  CHECK(start.last == 1);
  const auto end = alignment_window(2, 2, 5, 0.5);  // i = |S| never happens, but stay safe
  CHECK(end.last == 4);
}

TEST_CASE("multiply matched sentences keep their best similarity") {
  Matrix sim(2, 2);
  sim << 0.6, 0.1,  //
      0.9, 0.2;
  const auto set = align_similarities(sim, wide());
  CHECK(set.labels[0].salient);
  CHECK(set.labels[0].salience_score == 0.9);
}

TEST_CASE("random alignments satisfy every label condition") {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = static_cast<Eigen::Index>(1 + rng.below(8));
    const auto f = static_cast<Eigen::Index>(1 + rng.below(40));
    Matrix sim(s, f);
    for (Eigen::Index i = 0; i < sim.size(); ++i) sim(i) = rng.uniform();
    const AlignmentConfig cfg;
    const auto set = align_similarities(sim, cfg);
    for (Eigen::Index i = 0; i < s; ++i) {
      const auto w = alignment_window(static_cast<std::size_t>(i), static_cast<std::size_t>(s),
                                      static_cast<std::size_t>(f), cfg.window_fraction);
      const double window_max = sim.row(i).segment(static_cast<Eigen::Index>(w.first),
                                                   static_cast<Eigen::Index>(w.last - w.first + 1)).maxCoeff();
      const auto& row = set.alignments[static_cast<std::size_t>(i)];
      CHECK(row.size() <= cfg.max_targets);
      for (const auto& a : row) {
        CHECK(a.similarity >= cfg.min_similarity);
        CHECK(a.similarity >= window_max - cfg.max_drop);
        CHECK(a.index >= w.first);
        CHECK(a.index <= w.last);
      }
    }
    for (std::size_t j = 0; j < set.labels.size(); ++j) {
      bool aligned = false;
      for (const auto& row : set.alignments) {
        for (const auto& a : row) aligned = aligned || a.index == j;
      }
      CHECK(set.labels[j].salient == aligned);
    }
  }
}

TEST_CASE("raising mu never adds labels") {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix sim(5, 30);
    for (Eigen::Index i = 0; i < sim.size(); ++i) sim(i) = rng.uniform();
    std::size_t previous = SIZE_MAX;
    for (double mu : {0.25, 0.35, 0.45}) {
      AlignmentConfig cfg;
      cfg.min_similarity = mu;
      const std::size_t count = align_similarities(sim, cfg).salient_count();
      CHECK(count <= previous);
      previous = count;
    }
  }
}

TEST_CASE("config validation") {
  AlignmentConfig c;
  c.min_similarity = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.max_drop = -0.1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.window_fraction = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.max_targets = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("label_corpus") {
  const HashedBowEmbedder e(768);
  SUBCASE("empty corpus") {
    const auto out = label_corpus({}, e, AlignmentConfig{});
    CHECK(out.chapters.empty());
    CHECK(out.stats.chapters == 0);
    CHECK(out.stats.labels == 0);
  }
  SUBCASE("one chapter, one match") {
    const PairedChapter c{"c1", sentences({"the red fox jumped"}), sentences({"the red fox jumped", "zebra yak"})};
    const auto out = label_corpus({c}, e, AlignmentConfig{});
    CHECK(out.stats.chapters == 1);
    CHECK(out.stats.labels == 1);
    CHECK(out.stats.mean_salient_per_chapter == 1.0);
    CHECK(out.stats.mean_sentences_per_chapter == 2.0);
  }
  SUBCASE("planted matches") {
    std::vector<PairedChapter> corpus;
    std::size_t planted = 0;
    for (std::size_t ch = 0; ch < 10; ++ch) {
      std::vector<std::string> full, summary;
      for (std::size_t i = 0; i < 20; ++i) full.push_back(unique_sentence(ch, i));
      const std::size_t summary_size = 2 + ch % 3;
      for (std::size_t i = 0; i < summary_size; ++i) {
        const auto anchor = alignment_window(i, summary_size, 20, 0.1).anchor;
        summary.push_back(full[anchor]);
        ++planted;
      }
      corpus.push_back({"c" + std::to_string(ch), sentences(summary), sentences(full)});
    }
    corpus.push_back({"missing", {}, sentences({"alone here"})});
    const auto out = label_corpus(corpus, e, AlignmentConfig{});
    CHECK(out.stats.labels == planted);
    CHECK(out.stats.chapters == 10);
    CHECK(out.stats.skipped == std::vector<std::string>{"missing"});
  }
}

TEST_CASE("paired input and alignment output") {
  std::istringstream in(
      R"({"chapter_id": "a", "summary_sentences": ["the fox ran"], "full_text_sentences": ["a cat sat", "the fox ran", "rain fell"]})"
      "\n");
  const auto paired = read_paired_jsonl(in);
  REQUIRE(paired.size() == 1);
  const auto out = label_corpus(paired, HashedBowEmbedder(64), AlignmentConfig{});
  const auto doc = alignment_to_json(out);
  const auto& ch = doc.at("chapters").at(0);
  CHECK(ch.at("chapter_id") == "a");
  CHECK(ch.at("summary").at(0).at("alignments").at(0).at("index") == 1);
  CHECK(ch.at("full_text").at(1).at("salient") == true);
  CHECK(ch.at("full_text").at(0).at("salience_score") == 0.0);
  const auto back = labels_from_json(doc);
  REQUIRE(back.size() == 1);
  CHECK(back[0] == out.chapters[0].labels);
}
