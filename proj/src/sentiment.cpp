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

#include "salience/sentiment.hpp"

#include <algorithm>
#include <istream>
#include <sstream>

#include "salience/errors.hpp"
#include "salience/text.hpp"

namespace salience {

namespace {

std::map<std::string, double> builtin_lexicon() {
  return {
      // positive
      {"good", 0.5},      {"great", 0.75},    {"happy", 0.7},     {"happiness", 0.7},
      {"joy", 0.8},       {"joyful", 0.8},    {"love", 0.8},      {"loved", 0.75},
      {"lovely", 0.7},    {"beautiful", 0.7}, {"wonderful", 0.8}, {"delight", 0.75},
      {"delighted", 0.75}, {"glad", 0.5},     {"smile", 0.5},     {"smiled", 0.5},
      {"laugh", 0.5},     {"laughed", 0.5},   {"kind", 0.5},      {"gentle", 0.4},
      {"hope", 0.5},      {"hoped", 0.4},     {"peace", 0.6},     {"calm", 0.4},
      {"safe", 0.4},      {"friend", 0.5},    {"friends", 0.5},   {"brave", 0.6},
      {"proud", 0.5},     {"triumph", 0.7},   {"victory", 0.7},   {"win", 0.6},
      {"won", 0.6},       {"rescue", 0.5},    {"rescued", 0.5},   {"saved", 0.5},
      {"free", 0.4},      {"warm", 0.3},      {"bright", 0.3},    {"sweet", 0.5},
      {"tender", 0.4},    {"grateful", 0.6},  {"thank", 0.4},     {"bless", 0.5},
      {"honest", 0.4},    {"trust", 0.5},     {"wealth", 0.3},    {"rich", 0.3},
      {"fortune", 0.4},   {"success", 0.6},   {"comfort", 0.4},   {"pleasure", 0.6},
      {"admire", 0.5},    {"married", 0.4},   {"wedding", 0.5},   {"embrace", 0.5},
      // negative
      {"bad", -0.5},      {"terrible", -0.8}, {"awful", -0.75},   {"horrible", -0.8},
      {"sad", -0.6},      {"sorrow", -0.7},   {"grief", -0.8},    {"cry", -0.5},
      {"cried", -0.5},    {"tears", -0.5},    {"weep", -0.6},     {"wept", -0.6},
      {"fear", -0.6},     {"afraid", -0.6},   {"terror", -0.8},   {"terrified", -0.8},
      {"dread", -0.7},    {"angry", -0.7},    {"anger", -0.7},    {"rage", -0.8},
      {"hate", -0.8},     {"hated", -0.8},    {"cruel", -0.75},   {"evil", -0.8},
      {"wicked", -0.7},   {"kill", -0.9},     {"killed", -0.9},   {"murder", -0.95},
      {"murdered", -0.95}, {"dead", -0.8},    {"death", -0.8},    {"die", -0.8},
      {"died", -0.8},     {"blood", -0.6},    {"wound", -0.6},    {"wounded", -0.6},
      {"pain", -0.6},     {"hurt", -0.6},     {"suffer", -0.7},   {"misery", -0.8},
      {"miserable", -0.75}, {"lost", -0.4},   {"alone", -0.4},    {"lonely", -0.5},
      {"danger", -0.6},   {"dangerous", -0.6}, {"threat", -0.6},   {"attack", -0.7},
      {"attacked", -0.7}, {"war", -0.7},      {"enemy", -0.6},    {"betray", -0.8},
      {"betrayed", -0.8}, {"lie", -0.4},      {"lied", -0.5},     {"guilty", -0.6},
      {"shame", -0.6},    {"ashamed", -0.6},  {"poor", -0.4},     {"sick", -0.5},
      {"ill", -0.4},      {"cold", -0.2},     {"dark", -0.3},     {"storm", -0.4},
      {"devil", -0.6},    {"curse", -0.7},    {"cursed", -0.7},   {"scream", -0.6},
      {"screamed", -0.6}, {"despair", -0.85}, {"ruin", -0.7},     {"ruined", -0.7},
      {"throat", -0.1},   {"cut", -0.3},      {"prison", -0.6},   {"escape", -0.2},
  };
}

}  // namespace

LexiconSentiment::LexiconSentiment() : LexiconSentiment(builtin_lexicon(), "builtin-lexicon") {}

LexiconSentiment::LexiconSentiment(std::map<std::string, double> lexicon, std::string name)
    : lexicon_(std::move(lexicon)), name_(std::move(name)) {
  for (auto& [word, v] : lexicon_) v = std::clamp(v, -1.0, 1.0);
}

LexiconSentiment LexiconSentiment::from_tsv(std::istream& in, std::string name) {
  std::map<std::string, double> lexicon;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    std::istringstream fields(line);
    std::string word;
    double valence = 0.0;
    if (!(fields >> word >> valence)) {
      throw IoError("sentiment lexicon line " + std::to_string(line_no) + " is malformed");
    }
    auto toks = word_tokens(word);
    if (toks.size() != 1) continue;
    lexicon[toks[0]] = valence;
  }
  return LexiconSentiment(std::move(lexicon), std::move(name));
}

double LexiconSentiment::score(std::string_view text) const {
  double sum = 0.0;
  std::size_t hits = 0;
  for (const auto& tok : word_tokens(text)) {
    auto it = lexicon_.find(tok);
    if (it == lexicon_.end()) continue;
    sum += it->second;
    ++hits;
  }
  if (hits == 0) return 0.0;
  return std::clamp(sum / static_cast<double>(hits), -1.0, 1.0);
}

}  // namespace salience
