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
#include <memory>
#include <regex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace salience {

struct Sentence {
  std::size_t index = 0;
  std::string text;
  std::size_t token_count = 0;

  bool operator==(const Sentence&) const = default;
};

struct Chapter {
  std::string chapter_id;
  std::string title;
  std::vector<Sentence> sentences;

  bool operator==(const Chapter&) const = default;
};

struct Story {
  std::string story_id;
  std::string title;
  std::vector<Chapter> chapters;

  bool operator==(const Story&) const = default;

  std::size_t sentence_count() const;
};

// Sliding-window geometry. The candidate sentence sits last in its context.
struct WindowSpec {
  std::size_t context_sentences = 12;
  std::size_t context_token_budget = 512;
  std::size_t target_token_budget = 128;

  void validate() const;
};

// One scoring unit: context x ending at sentence block_id, target y starting
// right after it.
struct Block {
  std::size_t block_id = 0;
  std::vector<Sentence> context;
  std::vector<Sentence> target;
};

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::size_t count_tokens(std::string_view text) const = 0;
  virtual std::string name() const = 0;
};

// Whitespace-delimited tokens; the reference tokenizer.
class WhitespaceTokenizer final : public Tokenizer {
 public:
  std::size_t count_tokens(std::string_view text) const override;
  std::string name() const override { return "whitespace"; }
};

const Tokenizer& default_tokenizer();

std::size_t count_tokens(std::string_view text);

class SentenceSplitter {
 public:
  virtual ~SentenceSplitter() = default;
  virtual std::vector<std::string> split(std::string_view text) const = 0;
};

// Splits after terminal punctuation (. ! ?) followed by whitespace, unless
// the period closes a known abbreviation or a single-letter initial, or the
// next word starts lowercase. Blank lines always split.
class RuleBasedSplitter final : public SentenceSplitter {
 public:
  RuleBasedSplitter();
  explicit RuleBasedSplitter(std::set<std::string> abbreviations);

  std::vector<std::string> split(std::string_view text) const override;

 private:
  std::set<std::string> abbreviations_;
};

const SentenceSplitter& default_splitter();

// Splits raw text into a story. chapter_breaks are byte offsets at which new
// chapters begin; segments that hold no sentence are dropped.
Story ingest(std::string_view raw_text, std::string_view story_id,
             std::span<const std::size_t> chapter_breaks = {},
             const SentenceSplitter& splitter = default_splitter(),
             const Tokenizer& tokenizer = default_tokenizer());

// Chapter headings are the regex matches; each match becomes the title of the
// chapter that follows it and is excluded from the sentence stream.
Story ingest_with_headings(std::string_view raw_text, std::string_view story_id,
                           const std::regex& heading,
                           const SentenceSplitter& splitter = default_splitter(),
                           const Tokenizer& tokenizer = default_tokenizer());

// Keeps the first `budget` tokens (keep_front) or the last `budget` tokens of
// text, cutting on whitespace words.
std::string truncate_to_tokens(std::string_view text, std::size_t budget,
                               bool keep_front, const Tokenizer& tokenizer);

std::vector<Block> make_blocks(const Chapter& chapter, const WindowSpec& spec,
                               const Tokenizer& tokenizer = default_tokenizer());

// Context text for the scorer: sentences joined by '\n', with tokens dropped
// from the oldest sentence first until the budget holds.
std::string render_context(std::span<const Sentence> context,
                           std::size_t token_budget,
                           const Tokenizer& tokenizer = default_tokenizer());

std::string render_target(std::span<const Sentence> target);

// JSONL chapter records: {"story_id","chapter_id","title","sentences":[...]}.
nlohmann::json chapter_to_json(const Story& story, const Chapter& chapter);
void write_story_jsonl(std::ostream& out, const Story& story);
// Groups consecutive records by story_id, preserving order. Token counts are
// recomputed with the tokenizer when absent.
std::vector<Story> read_story_jsonl(std::istream& in,
                                    const Tokenizer& tokenizer = default_tokenizer());

}  // namespace salience
