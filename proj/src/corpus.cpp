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

#include "salience/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>

#include "salience/errors.hpp"
#include "salience/text.hpp"

namespace salience {

std::size_t Story::sentence_count() const {
  std::size_t n = 0;
  for (const auto& c : chapters) n += c.sentences.size();
  return n;
}

void WindowSpec::validate() const {
  if (context_sentences < 1 || context_token_budget < 1 ||
      target_token_budget < 1) {
    throw ConfigError("window sizes must all be >= 1");
  }
}

std::size_t WhitespaceTokenizer::count_tokens(std::string_view text) const {
  return split_whitespace(text).size();
}

const Tokenizer& default_tokenizer() {
  static const WhitespaceTokenizer tokenizer;
  return tokenizer;
}

std::size_t count_tokens(std::string_view text) {
  return default_tokenizer().count_tokens(text);
}

namespace {

const std::set<std::string>& builtin_abbreviations() {
  static const std::set<std::string> abbrevs = {
      "mr",   "mrs", "ms",   "dr",   "prof", "st",   "jr",  "sr",  "rev",
      "gen",  "col", "capt", "lt",   "sgt",  "gov",  "hon", "messrs",
      "mme",  "mlle", "vs",  "etc",  "e.g",  "i.e",  "cf",  "no",  "vol",
      "ch",   "chap", "fig", "jan",  "feb",  "mar",  "apr", "jun", "jul",
      "aug",  "sep", "sept", "oct",  "nov",  "dec",  "mt",  "ft",  "esq"};
  return abbrevs;
}

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_closer(char c) {
  return c == '"' || c == '\'' || c == ')' || c == ']';
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// UTF-8 closing quotes (’ ”) are E2 80 99 / E2 80 9D.
std::size_t utf8_closer_length(std::string_view s, std::size_t i) {
  if (i + 2 < s.size() &&
      static_cast<unsigned char>(s[i]) == 0xE2 &&
      static_cast<unsigned char>(s[i + 1]) == 0x80 &&
      (static_cast<unsigned char>(s[i + 2]) == 0x99 ||
       static_cast<unsigned char>(s[i + 2]) == 0x9D)) {
    return 3;
  }
  return 0;
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

RuleBasedSplitter::RuleBasedSplitter()
    : RuleBasedSplitter(builtin_abbreviations()) {}

RuleBasedSplitter::RuleBasedSplitter(std::set<std::string> abbreviations)
    : abbreviations_(std::move(abbreviations)) {}

std::vector<std::string> RuleBasedSplitter::split(std::string_view text) const {
  std::vector<std::string> out;
  auto emit = [&](std::size_t begin, std::size_t end) {
    std::string s = normalize_whitespace(text.substr(begin, end - begin));
    if (!s.empty()) out.push_back(std::move(s));
  };

  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    // Paragraph break.
    if (text[i] == '\n') {
      std::size_t j = i + 1;
      while (j < text.size() && (text[j] == ' ' || text[j] == '\t' || text[j] == '\r')) ++j;
      if (j < text.size() && text[j] == '\n') {
        emit(start, i);
        while (j < text.size() && is_space(text[j])) ++j;
        start = i = j;
        continue;
      }
    }
    if (!is_terminal(text[i])) {
      ++i;
      continue;
    }
    const std::size_t punct = i;
    std::size_t j = i;
    while (j < text.size()) {
      if (is_terminal(text[j]) || is_closer(text[j])) {
        ++j;
      } else if (std::size_t n = utf8_closer_length(text, j)) {
        j += n;
      } else {
        break;
      }
    }
    if (j < text.size() && !is_space(text[j])) {
      i = j;
      continue;
    }
    bool boundary = true;
    if (text[punct] == '.' && (punct + 1 == j || !is_terminal(text[punct + 1]))) {
      // Word immediately before the period.
      std::size_t w = punct;
      while (w > start && !is_space(text[w - 1])) --w;
      std::string word = lower_ascii(text.substr(w, punct - w));
      while (!word.empty() && !std::isalnum(static_cast<unsigned char>(word.front())) &&
             word.front() != '.') {
        word.erase(word.begin());
      }
      const bool initial =
          word.size() == 1 && std::isalpha(static_cast<unsigned char>(word[0]));
      if (initial || abbreviations_.count(word) > 0) boundary = false;
    }
    if (boundary) {
      std::size_t k = j;
      while (k < text.size() && is_space(text[k])) ++k;
      if (k < text.size() && std::islower(static_cast<unsigned char>(text[k]))) {
        boundary = false;
      }
    }
    if (boundary) {
      emit(start, j);
      start = j;
    }
    i = j;
  }
  emit(start, text.size());
  return out;
}

const SentenceSplitter& default_splitter() {
  static const RuleBasedSplitter splitter;
  return splitter;
}

namespace {

Chapter make_chapter(std::string_view body, std::string id, std::string title,
                     const SentenceSplitter& splitter,
                     const Tokenizer& tokenizer) {
  Chapter chapter;
  chapter.chapter_id = std::move(id);
  chapter.title = std::move(title);
  for (auto& text : splitter.split(body)) {
    if (trim(text).empty()) continue;
    Sentence s;
    s.index = chapter.sentences.size();
    s.token_count = tokenizer.count_tokens(text);
    s.text = std::move(text);
    chapter.sentences.push_back(std::move(s));
  }
  return chapter;
}

std::string chapter_id_for(std::size_t ordinal) {
  std::string digits = std::to_string(ordinal);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return "ch" + digits;
}

}  // namespace

Story ingest(std::string_view raw_text, std::string_view story_id,
             std::span<const std::size_t> chapter_breaks,
             const SentenceSplitter& splitter, const Tokenizer& tokenizer) {
  if (trim(raw_text).empty()) throw EmptyStory("story '" + std::string(story_id) + "' has no text");

  std::vector<std::size_t> cuts(chapter_breaks.begin(), chapter_breaks.end());
  cuts.push_back(0);
  cuts.push_back(raw_text.size());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  Story story;
  story.story_id = std::string(story_id);
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const std::size_t b = std::min(cuts[c], raw_text.size());
    const std::size_t e = std::min(cuts[c + 1], raw_text.size());
    Chapter chapter = make_chapter(raw_text.substr(b, e - b),
                                   chapter_id_for(story.chapters.size() + 1),
                                   "", splitter, tokenizer);
    if (!chapter.sentences.empty()) story.chapters.push_back(std::move(chapter));
  }
  if (story.chapters.empty()) throw EmptyStory("story '" + std::string(story_id) + "' has no sentences");
  return story;
}

Story ingest_with_headings(std::string_view raw_text, std::string_view story_id,
                           const std::regex& heading,
                           const SentenceSplitter& splitter,
                           const Tokenizer& tokenizer) {
  if (trim(raw_text).empty()) throw EmptyStory("story '" + std::string(story_id) + "' has no text");
  const std::string owned(raw_text);

  struct Segment {
    std::size_t begin, end;
    std::string title;
  };
  std::vector<Segment> segments;
  std::size_t cursor = 0;
  std::string pending_title;
  for (auto it = std::sregex_iterator(owned.begin(), owned.end(), heading);
       it != std::sregex_iterator(); ++it) {
    const auto pos = static_cast<std::size_t>(it->position());
    if (it->length() == 0) continue;
    segments.push_back({cursor, pos, pending_title});
    pending_title = normalize_whitespace(it->str());
    cursor = pos + static_cast<std::size_t>(it->length());
  }
  segments.push_back({cursor, owned.size(), pending_title});

  Story story;
  story.story_id = std::string(story_id);
  for (const auto& seg : segments) {
    Chapter chapter = make_chapter(raw_text.substr(seg.begin, seg.end - seg.begin),
                                   chapter_id_for(story.chapters.size() + 1),
                                   seg.title, splitter, tokenizer);
    if (!chapter.sentences.empty()) story.chapters.push_back(std::move(chapter));
  }
  if (story.chapters.empty()) throw EmptyStory("story '" + std::string(story_id) + "' has no sentences");
  return story;
}

std::string truncate_to_tokens(std::string_view text, std::size_t budget,
                               bool keep_front, const Tokenizer& tokenizer) {
  if (tokenizer.count_tokens(text) <= budget) return std::string(text);
  const auto words = split_whitespace(text);
  auto assemble = [&](std::size_t n) {
    std::string out;
    const std::size_t first = keep_front ? 0 : words.size() - n;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) out.push_back(' ');
      out.append(words[first + i]);
    }
    return out;
  };
  // Largest word count whose rendering fits; token counts grow with words.
  std::size_t lo = 0;
  std::size_t hi = words.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi + 1) / 2;
    if (tokenizer.count_tokens(assemble(mid)) <= budget) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return assemble(lo);
}

std::vector<Block> make_blocks(const Chapter& chapter, const WindowSpec& spec,
                               const Tokenizer& tokenizer) {
  spec.validate();
  const auto& s = chapter.sentences;
  std::vector<Block> blocks;
  if (s.size() < 2) return blocks;
  blocks.reserve(s.size() - 1);
  for (std::size_t t = 0; t + 1 < s.size(); ++t) {
    Block block;
    block.block_id = t;
    const std::size_t first = t + 1 >= spec.context_sentences ? t + 1 - spec.context_sentences : 0;
    block.context.assign(s.begin() + static_cast<std::ptrdiff_t>(first),
                         s.begin() + static_cast<std::ptrdiff_t>(t + 1));
    std::size_t remaining = spec.target_token_budget;
    for (std::size_t j = t + 1; j < s.size() && remaining > 0; ++j) {
      Sentence sentence = s[j];
      if (sentence.token_count > remaining) {
        sentence.text = truncate_to_tokens(sentence.text, remaining, true, tokenizer);
        sentence.token_count = tokenizer.count_tokens(sentence.text);
        if (sentence.text.empty()) break;
      }
      remaining -= std::min(remaining, sentence.token_count);
      block.target.push_back(std::move(sentence));
    }
    blocks.push_back(std::move(block));
  }
  return blocks;
}

std::string render_context(std::span<const Sentence> context,
                           std::size_t token_budget,
                           const Tokenizer& tokenizer) {
  std::size_t total = 0;
  for (const auto& s : context) total += tokenizer.count_tokens(s.text);
  std::size_t first = 0;
  std::string head;  // oldest surviving sentence, cut from its front
  bool truncated_head = false;
  while (first < context.size() && total > token_budget) {
    const std::size_t n = tokenizer.count_tokens(context[first].text);
    if (total - n >= token_budget) {
      total -= n;
      ++first;
      continue;
    }
    head = truncate_to_tokens(context[first].text, token_budget - (total - n), false, tokenizer);
    truncated_head = true;
    break;
  }
  std::string out;
  for (std::size_t i = first; i < context.size(); ++i) {
    const std::string& text = (i == first && truncated_head) ? head : context[i].text;
    if (text.empty()) continue;
    if (!out.empty()) out.push_back('\n');
    out.append(text);
  }
  return out;
}

std::string render_target(std::span<const Sentence> target) {
  std::string out;
  for (const auto& s : target) {
    if (!out.empty()) out.push_back(' ');
    out.append(s.text);
  }
  return out;
}

nlohmann::json chapter_to_json(const Story& story, const Chapter& chapter) {
  nlohmann::json sentences = nlohmann::json::array();
  for (const auto& s : chapter.sentences) {
    sentences.push_back({{"index", s.index}, {"text", s.text}, {"token_count", s.token_count}});
  }
  return {{"story_id", story.story_id},
          {"chapter_id", chapter.chapter_id},
          {"title", chapter.title},
          {"story_title", story.title},
          {"sentences", std::move(sentences)}};
}

void write_story_jsonl(std::ostream& out, const Story& story) {
  for (const auto& chapter : story.chapters) {
    out << chapter_to_json(story, chapter).dump() << '\n';
  }
}

std::vector<Story> read_story_jsonl(std::istream& in, const Tokenizer& tokenizer) {
  std::vector<Story> stories;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      Chapter chapter;
      chapter.chapter_id = j.at("chapter_id").get<std::string>();
      chapter.title = j.value("title", "");
      for (const auto& s : j.at("sentences")) {
        Sentence sentence;
        sentence.text = s.at("text").get<std::string>();
        if (trim(sentence.text).empty()) continue;
        sentence.index = chapter.sentences.size();
        if (s.contains("index") && s.at("index").get<std::size_t>() != sentence.index) {
          throw IoError("non-contiguous sentence index");
        }
        sentence.token_count = s.contains("token_count")
                                   ? s.at("token_count").get<std::size_t>()
                                   : tokenizer.count_tokens(sentence.text);
        chapter.sentences.push_back(std::move(sentence));
      }
      if (chapter.sentences.empty()) throw IoError("chapter has no sentences");
      const std::string story_id = j.at("story_id").get<std::string>();
      if (stories.empty() || stories.back().story_id != story_id) {
        stories.push_back(Story{story_id, j.value("story_title", ""), {}});
      }
      for (const auto& c : stories.back().chapters) {
        if (c.chapter_id == chapter.chapter_id) throw IoError("duplicate chapter id '" + chapter.chapter_id + "'");
      }
      stories.back().chapters.push_back(std::move(chapter));
    } catch (const nlohmann::json::exception& e) {
      throw IoError("story jsonl line " + std::to_string(line_no) + ": " + e.what());
    } catch (const IoError& e) {
      throw IoError("story jsonl line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return stories;
}

}  // namespace salience
