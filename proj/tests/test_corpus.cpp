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

#include "salience/corpus.hpp"
#include "salience/errors.hpp"
#include "salience/text.hpp"

using namespace salience;

namespace {

Chapter uniform_chapter(std::size_t n, std::size_t words = 5) {
  Chapter c;
  c.chapter_id = "ch0001";
  for (std::size_t i = 0; i < n; ++i) {
    std::string text;
    for (std::size_t w = 0; w < words; ++w) text += (w ? " w" : "w") + std::to_string(i);
    c.sentences.push_back({i, text, words});
  }
  return c;
}

std::vector<std::string> texts(const Story& s) {
  std::vector<std::string> out;
  for (const auto& ch : s.chapters) {
    for (const auto& sen : ch.sentences) out.push_back(sen.text);
  }
  return out;
}

}  // namespace

TEST_CASE("sentence splitting keeps initials together") {
  const Story s = ingest("A. B. went home. She slept.", "s");
  CHECK(texts(s) == std::vector<std::string>{"A. B. went home.", "She slept."});
}

TEST_CASE("sentence splitting edge cases") {
  CHECK(texts(ingest("Mr. Smith arrived. \"Run!\" he said. Then silence?  Yes.", "s")) ==
        std::vector<std::string>{"Mr. Smith arrived.", "\"Run!\" he said.", "Then silence?", "Yes."});
  CHECK(texts(ingest("No terminal punctuation\n\nNext paragraph here", "s")) ==
        std::vector<std::string>{"No terminal punctuation", "Next paragraph here"});
  CHECK(texts(ingest("He said wait... and then left. Done.", "s")).size() == 2);
}

TEST_CASE("ingest degenerate inputs") {
  CHECK_THROWS_AS(ingest("", "s"), EmptyStory);
  CHECK_THROWS_AS(ingest("   \n\n ", "s"), EmptyStory);
  const Story one = ingest("Hello.", "s");
  REQUIRE(one.chapters.size() == 1);
  REQUIRE(one.chapters[0].sentences.size() == 1);
  CHECK(one.chapters[0].sentences[0].index == 0);
  CHECK(one.chapters[0].sentences[0].text == "Hello.");
}

TEST_CASE("chapter breaks and headings") {
  const std::string raw = "One. Two.\nThree. Four.";
  const std::vector<std::size_t> breaks{10};
  const Story s = ingest(raw, "s", breaks);
  REQUIRE(s.chapters.size() == 2);
  CHECK(s.chapters[0].chapter_id == "ch0001");
  CHECK(s.chapters[1].chapter_id == "ch0002");
  CHECK(s.chapters[1].sentences[0].index == 0);
  CHECK(s.sentence_count() == 4);

  const Story h = ingest_with_headings("CHAPTER I\nAlpha. Beta.\nCHAPTER II\nGamma.", "s",
                                       std::regex("^CHAPTER [IVX]+$", std::regex::multiline));
  REQUIRE(h.chapters.size() == 2);
  CHECK(h.chapters[0].title == "CHAPTER I");
  CHECK(texts(h) == std::vector<std::string>{"Alpha.", "Beta.", "Gamma."});
}

TEST_CASE("token counts under the reference tokenizer") {
  CHECK(count_tokens("") == 0);
  CHECK(count_tokens("one two three") == 3);
  CHECK(count_tokens("  spaced\tout\nwords ") == 3);
}

TEST_CASE("make_blocks windowing") {
  SUBCASE("14 uniform sentences") {
    const auto blocks = make_blocks(uniform_chapter(14), WindowSpec{12, 512, 128});
    REQUIRE(blocks.size() == 13);
    const Block& b = blocks[12];
    CHECK(b.block_id == 12);
    REQUIRE(b.context.size() == 12);
    CHECK(b.context.front().index == 1);
    CHECK(b.context.back().index == 12);
    REQUIRE(b.target.size() == 1);
    CHECK(b.target[0].index == 13);
    CHECK(blocks[0].context.size() == 1);
  }
  SUBCASE("two sentences") {
    const auto blocks = make_blocks(uniform_chapter(2), WindowSpec{});
    REQUIRE(blocks.size() == 1);
    CHECK(blocks[0].context.size() == 1);
    CHECK(blocks[0].context[0].index == 0);
    REQUIRE(blocks[0].target.size() == 1);
    CHECK(blocks[0].target[0].index == 1);
  }
  SUBCASE("one sentence") { CHECK(make_blocks(uniform_chapter(1), WindowSpec{}).empty()); }
  SUBCASE("target fills the token budget") {
    const auto blocks = make_blocks(uniform_chapter(10, 5), WindowSpec{3, 512, 12});
    // 5 + 5 + 2 tokens: the third target sentence is cut.
    REQUIRE(blocks[0].target.size() == 3);
    CHECK(count_tokens(render_target(blocks[0].target)) == 12);
  }
}

TEST_CASE("render_context drops the oldest tokens first") {
  const Chapter c = uniform_chapter(4, 5);
  const std::span<const Sentence> all(c.sentences);
  CHECK(render_context(all, 512) == c.sentences[0].text + "\n" + c.sentences[1].text + "\n" +
                                         c.sentences[2].text + "\n" + c.sentences[3].text);
  const std::string cut = render_context(all, 7);
  CHECK(count_tokens(cut) == 7);
  CHECK(cut == "w2 w2\n" + c.sentences[3].text);
  CHECK(render_context(all, 10) == c.sentences[2].text + "\n" + c.sentences[3].text);
}

TEST_CASE("window spec validation") {
  CHECK_THROWS_AS(WindowSpec({0, 512, 128}).validate(), ConfigError);
  CHECK_NOTHROW(WindowSpec{}.validate());
}

TEST_CASE("story JSONL round trip") {
  Story s = ingest("First line here. Second one.\n\nThird. Fourth sentence now.", "tale",
                   std::vector<std::size_t>{29});
  s.title = "A Tale";
  Story t = ingest("Other story.", "other");
  std::stringstream ss;
  write_story_jsonl(ss, s);
  write_story_jsonl(ss, t);
  std::istringstream in(ss.str());
  const auto back = read_story_jsonl(in);
  REQUIRE(back.size() == 2);
  CHECK(back[0] == s);
  CHECK(back[1] == t);
}

TEST_CASE("word tokens") {
  CHECK(word_tokens("The King's  men, ran!") == std::vector<std::string>{"the", "king", "s", "men", "ran"});
  CHECK(normalize_whitespace("  a \n b\t") == "a b");
}
