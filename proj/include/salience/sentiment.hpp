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
#include <string>
#include <string_view>

namespace salience {

class SentimentProvider {
 public:
  virtual ~SentimentProvider() = default;
  virtual std::string name() const = 0;
  // Polarity in [-1, 1]; 0 for neutral or empty text.
  virtual double score(std::string_view text) const = 0;
};

// Word valence lexicon. A sentence scores the mean valence of its lexicon
// words, clamped to [-1, 1]; sentences without lexicon words score 0.
class LexiconSentiment final : public SentimentProvider {
 public:
  LexiconSentiment();  // built-in lexicon
  explicit LexiconSentiment(std::map<std::string, double> lexicon, std::string name = "lexicon");

  // "word<TAB>valence" per line; '#' starts a comment.
  static LexiconSentiment from_tsv(std::istream& in, std::string name);

  std::string name() const override { return name_; }
  double score(std::string_view text) const override;
  const std::map<std::string, double>& lexicon() const { return lexicon_; }

 private:
  std::map<std::string, double> lexicon_;
  std::string name_;
};

}  // namespace salience
