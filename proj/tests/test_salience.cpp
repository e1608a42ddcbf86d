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

#include <cmath>

#include "salience/errors.hpp"
#include "salience/reference_scorer.hpp"
#include "salience/salience.hpp"

using namespace salience;

namespace {

Chapter chapter_of(const std::vector<std::string>& sentences, std::string id = "ch0001") {
  Chapter c;
  c.chapter_id = std::move(id);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    c.sentences.push_back({i, sentences[i], count_tokens(sentences[i])});
  }
  return c;
}

std::vector<std::string> synthetic_sentences(std::size_t n, std::uint64_t seed) {
  static const char* words[] = {"king", "sea", "storm", "tower", "queen", "key", "boat", "island",
                                "wizard", "bird", "gold", "night", "river", "sword", "crown", "door"};
  Rng rng(seed);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string s;
    const std::size_t len = 4 + static_cast<std::size_t>(rng.below(5));
    for (std::size_t w = 0; w < len; ++w) {
      if (w) s += ' ';
      s += words[rng.below(16)];
    }
    out.push_back(s + ".");
  }
  return out;
}

struct Fixture {
  std::vector<std::string> docs;
  NGramScorer scorer;
  HashedBowEmbedder embedder{64};
  MemoryCache memory{1024};
  Rng rng{1};
  SalienceContext ctx;

  explicit Fixture(std::vector<std::string> training, int order = 2)
      : docs(std::move(training)), scorer(docs, NGramConfig{order, 0.1, 4.0, 64}) {
    ctx.scorer = &scorer;
    ctx.embedder = &embedder;
    ctx.memory = &memory;
    ctx.rng = &rng;
    ctx.window = WindowSpec{4, 512, 32};
    ctx.k = 5;
    ctx.mode = RetrievalMode::KbAndMem;
  }
};

}  // namespace

TEST_CASE("measure names") {
  for (Measure m : all_measures()) CHECK(parse_measure(measure_name(m)) == m);
  CHECK(all_measures().size() == 13);
  CHECK(parse_measure("Know-Diff-Sal") == Measure::KnowSal);
  CHECK(parse_measure("LIKE_SAL") == Measure::LikeSal);
  CHECK_FALSE(parse_measure("Bogus-Sal").has_value());
}

TEST_CASE("profile JSON round trip") {
  SalienceProfile p{"story", "ch0002", {{Measure::LikeSal, {0.5, -0.25}}, {Measure::Random, {0.1, 0.9}}}, "fp", "cafe"};
  const auto back = profile_from_json(profile_to_json(p));
  CHECK(back.story_id == "story");
  CHECK(back.chapter_id == "ch0002");
  CHECK(back.scores == p.scores);
  CHECK(back.scorer_fingerprint == "fp");
  CHECK(back.config_hash == "cafe");
}

TEST_CASE("order-1 scorer gives zero deletion, swap and embedding salience") {
  Fixture f(synthetic_sentences(40, 3), 1);
  const Chapter c = chapter_of(synthetic_sentences(12, 9));
  const auto p = profile_chapter(c, {Measure::LikeSal, Measure::SwapSal, Measure::EmbSal}, f.ctx, 5);
  for (Measure m : {Measure::LikeSal, Measure::SwapSal, Measure::EmbSal}) {
    REQUIRE(p.scores.at(m).size() == 12);
    for (double v : p.scores.at(m)) CHECK(v == 0.0);
  }
}

TEST_CASE("deletion salience") {
  Fixture f({"red fox jumps high", "blue bird sings loud", "red fox runs"});
  SUBCASE("last sentence is zero") {
    const Chapter c = chapter_of({"red fox.", "blue bird.", "jumps high."});
    CHECK(deletion_salience(c, 2, f.ctx) == 0.0);
  }
  SUBCASE("an adjacent duplicate carries no information") {
    const Chapter c = chapter_of({"blue bird sings.", "red fox jumps.", "red fox jumps.", "high and loud."});
    f.ctx.mode = RetrievalMode::Off;
    CHECK(std::abs(deletion_salience(c, 2, f.ctx)) < 1e-6);
  }
  SUBCASE("the sentence holding the target's key bigram is salient") {
    const Chapter c = chapter_of({"blue bird.", "zeta omega.", "zeta omega zeta omega."});
    f.ctx.mode = RetrievalMode::Off;
    CHECK(deletion_salience(c, 1, f.ctx) > 0.0);
  }
}

TEST_CASE("swap salience") {
  Fixture f({"a b c d", "c d a b"});
  f.ctx.mode = RetrievalMode::Off;
  SUBCASE("boundary-dependent target") {
    // Target "c" after "b" vs after "d".
    const Chapter c = chapter_of({"a b.", "c d.", "c d."});
    CHECK(swap_salience(c, 0, f.ctx) != 0.0);
  }
  SUBCASE("identical sentences") {
    const Chapter c = chapter_of({"a b.", "a b.", "a b.", "a b."});
    for (std::size_t t = 0; t < 4; ++t) CHECK(swap_salience(c, t, f.ctx) == 0.0);
  }
  SUBCASE("undefined positions") {
    const Chapter c = chapter_of({"a b.", "c d.", "a b."});
    CHECK(swap_salience(c, 1, f.ctx) == 0.0);
    CHECK(swap_salience(c, 2, f.ctx) == 0.0);
  }
}

TEST_CASE("knowledge salience") {
  Fixture f(synthetic_sentences(40, 21));
  SUBCASE("no knowledge sources") {
    const Chapter c = chapter_of(synthetic_sentences(6, 4));
    for (std::size_t t = 0; t < 6; ++t) CHECK(knowledge_salience(c, t, f.ctx) == 0.0);
  }
  SUBCASE("memory holding the target verbatim helps") {
    const Chapter c = chapter_of({"the quiet valley sleeps.", "violet lanterns drift upward slowly."});
    PassageRecord rec{"mem:earlier", "violet lanterns drift upward slowly.",
                      f.embedder.embed("violet lanterns drift upward slowly. the quiet valley sleeps."), Source::Memory, 0};
    f.memory.insert(rec);
    CHECK(knowledge_salience(c, 0, f.ctx) > 0.0);
  }
}

TEST_CASE("embedding distances") {
  Vector a(2), b(2);
  a << 1.0, 0.0;
  b << 0.0, 1.0;
  CHECK(embedding_distance(a, a) == doctest::Approx(0.0));
  CHECK(embedding_distance(a, b) == doctest::Approx(1.0));
  CHECK(embedding_distance(a, Vector::Zero(2)) == 0.0);

  const std::vector<Vector> same{a, a, a};
  for (double v : ely_surprise_from_embeddings(same, 4)) CHECK(v == 0.0);
  const std::vector<Vector> alternating{a, b, a, b};
  const auto s = ely_surprise_from_embeddings(alternating, 5);
  CHECK(s == std::vector<double>{0.0, 1.0, 1.0, 1.0, 0.0});
}

TEST_CASE("ely surprise equals pairwise distances of stored embeddings") {
  Fixture f(synthetic_sentences(40, 8));
  const Chapter c = chapter_of(synthetic_sentences(10, 12));
  std::vector<Vector> stored;
  {
    MemoryCache memory(1024);
    Rng rng(1);
    SalienceContext ctx = f.ctx;
    ctx.memory = &memory;
    ctx.rng = &rng;
    CoherenceOptions opts;
    opts.context_token_budget = ctx.window.context_token_budget;
    for (const auto& block : chapter_blocks(c, ctx)) {
      stored.push_back(coherence(block, retrieve_for(block, ctx, ctx.mode), f.scorer, opts).pooled_embedding);
      remember(block, ctx);
    }
  }
  const auto surprise = ely_surprise(c, f.ctx);
  REQUIRE(surprise.size() == 10);
  CHECK(surprise[0] == 0.0);
  for (std::size_t i = 1; i < stored.size(); ++i) {
    CHECK(surprise[i] == doctest::Approx(1.0 - stored[i].dot(stored[i - 1]) /
                                                  (stored[i].norm() * stored[i - 1].norm())));
  }
}

TEST_CASE("sentiment adjustment") {
  const LexiconSentiment lex;
  const Chapter neutral = chapter_of({"the table.", "a chair and a door."});
  const std::vector<double> scores{0.3, -0.2};
  CHECK(sentiment_adjust(scores, neutral.sentences, lex) == scores);

  const LexiconSentiment extreme({{"bliss", 1.0}, {"doom", -1.0}});
  const Chapter polar = chapter_of({"bliss.", "doom."});
  CHECK(sentiment_adjust(scores, polar.sentences, extreme) == std::vector<double>{0.6, -0.4});

  // happy (0.7) and murder (-0.95): mean -0.125.
  const Chapter mixed = chapter_of({"The happy child saw the murder."});
  CHECK(lex.score(mixed.sentences[0].text) == doctest::Approx(-0.125));
  const std::vector<double> one{2.0};
  CHECK(sentiment_adjust(one, mixed.sentences, lex)[0] == doctest::Approx(2.25));
  CHECK(lex.score("") == 0.0);
  CHECK(lex.score("the") == 0.0);
}

TEST_CASE("combine_like_clus") {
  const std::vector<double> c3{2.0, 2.0, 2.0};
  for (double v : combine_like_clus(c3, c3)) CHECK(v == 0.0);

  const std::vector<double> like{0.1, 0.9, 0.4, -0.3};
  const std::vector<double> flat{1.0, 1.0, 1.0, 1.0};
  const auto combined = combine_like_clus(like, flat);
  const double mean = (0.1 + 0.9 + 0.4 - 0.3) / 4.0;
  double var = 0.0;
  for (double v : like) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / 4.0);
  for (std::size_t i = 0; i < 4; ++i) CHECK(combined[i] == doctest::Approx(2.0 * (like[i] - mean) / sd));

  const std::vector<double> clus{0.5, 0.1, 0.2, 0.9};
  const double cm = (0.5 + 0.1 + 0.2 + 0.9) / 4.0;
  double cv = 0.0;
  for (double v : clus) cv += (v - cm) * (v - cm);
  const double csd = std::sqrt(cv / 4.0);
  const auto both = combine_like_clus(like, clus);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(both[i] == doctest::Approx((clus[i] - cm) / csd + 2.0 * (like[i] - mean) / sd));
  }
  CHECK_THROWS_AS(combine_like_clus(like, c3), ShapeError);
}

TEST_CASE("positional measures through profile_chapter") {
  Fixture f(synthetic_sentences(10, 2));
  const Chapter c = chapter_of(synthetic_sentences(5, 3));
  const auto p = profile_chapter(c, {Measure::Ascending, Measure::Descending, Measure::Random}, f.ctx, 11);
  CHECK(p.scores.at(Measure::Ascending) == std::vector<double>{0, 1, 2, 3, 4});
  CHECK(p.scores.at(Measure::Descending) == std::vector<double>{4, 3, 2, 1, 0});
  const auto again = profile_chapter(c, {Measure::Random}, f.ctx, 11);
  CHECK(again.scores.at(Measure::Random) == p.scores.at(Measure::Random));
  CHECK(profile_chapter(c, {Measure::Random}, f.ctx, 12).scores.at(Measure::Random) != p.scores.at(Measure::Random));
}

TEST_CASE("profile_chapter agrees with the standalone operations") {
  Fixture f(synthetic_sentences(60, 31));
  KnowledgeBase kb = KnowledgeBase::build(
      std::vector<TextPassage>{{"k0", "storm tower king sea"}, {"k1", "wizard island gold key"},
                               {"k2", "river sword crown door night"}},
      f.embedder);
  f.ctx.kb = &kb;
  f.ctx.memory = nullptr;
  f.ctx.mode = RetrievalMode::KbOnly;
  const Chapter c = chapter_of(synthetic_sentences(20, 77));
  const MeasureSet all(all_measures().begin(), all_measures().end());
  const auto p = profile_chapter(c, all, f.ctx, 99);
  for (const auto& [m, v] : p.scores) CHECK(v.size() == 20);

  SalienceContext off = f.ctx;
  off.mode = RetrievalMode::Off;
  for (std::size_t t = 0; t < 20; ++t) {
    CHECK(p.scores.at(Measure::LikeSal)[t] == doctest::Approx(deletion_salience(c, t, f.ctx)).epsilon(1e-14));
    CHECK(p.scores.at(Measure::NoKnowSal)[t] == doctest::Approx(deletion_salience(c, t, off)).epsilon(1e-14));
    CHECK(p.scores.at(Measure::SwapSal)[t] == doctest::Approx(swap_salience(c, t, f.ctx)).epsilon(1e-14));
    CHECK(p.scores.at(Measure::KnowSal)[t] == doctest::Approx(knowledge_salience(c, t, f.ctx)).epsilon(1e-14));
    CHECK(p.scores.at(Measure::EmbSal)[t] == doctest::Approx(embedding_salience(c, t, f.ctx)).epsilon(1e-14));
  }
  const auto surprise = ely_surprise(c, f.ctx);
  for (std::size_t t = 0; t < 20; ++t) CHECK(p.scores.at(Measure::EmbSurp)[t] == doctest::Approx(surprise[t]));

  const auto like = p.scores.at(Measure::LikeSal);
  const auto clus = p.scores.at(Measure::ClusSal);
  CHECK(p.scores.at(Measure::LikeClusSal) == combine_like_clus(like, clus));
  const LexiconSentiment lex;
  CHECK(p.scores.at(Measure::LikeImpSal) == sentiment_adjust(like, c.sentences, lex));

  const auto second = profile_chapter(c, all, f.ctx, 99);
  CHECK(second.scores == p.scores);
}

TEST_CASE("profile_chapter fills memory in block order and replay matches") {
  Fixture f(synthetic_sentences(30, 5));
  const Chapter c = chapter_of(synthetic_sentences(8, 6));
  (void)profile_chapter(c, {Measure::LikeSal}, f.ctx, 1);
  MemoryCache replayed(1024);
  Rng rng(1);
  SalienceContext ctx = f.ctx;
  ctx.memory = &replayed;
  ctx.rng = &rng;
  replay_chapter(c, {Measure::LikeSal}, ctx);
  CHECK(replayed.eviction_order() == f.memory.eviction_order());
  CHECK(f.memory.size() == 7);
}
