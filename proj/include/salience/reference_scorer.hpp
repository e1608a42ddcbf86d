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

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "salience/corpus.hpp"
#include "salience/scoring.hpp"

namespace salience {

struct NGramConfig {
  int order = 2;
  double smoothing = 0.1;  // additive constant alpha
  // Pseudo-count granted to an n-gram that occurs in the conditioning text
  // (retrieved passage or context). This is how conditioning reaches the
  // prediction; a unigram model has no history and ignores it.
  double boost = 4.0;
  Eigen::Index embedding_dim = 768;
};

// Additive-smoothed word n-gram model used as an offline stand-in for the
// neural scorer.
//
// For history h (the last order-1 tokens before w, spanning passage, context
// and earlier target tokens):
//
//   P(w | h) = (C(h w) + boost * [h w in cond] + alpha)
//            / (C(h)   + boost * |{v : h v in cond}| + alpha * V)
//
// C counts the training corpus, V is the training vocabulary size plus one,
// and cond is the set of n-grams (orders 2..order) found inside the passage
// text or inside any single context line. Passage text is placed before the
// context. Row embeddings hash every target token and every conditioning
// n-gram of full order into `embedding_dim` buckets, then L2-normalize.
class NGramScorer final : public Scorer {
 public:
  NGramScorer(std::span<const Story> corpus, NGramConfig config);
  // Each document is one token stream.
  NGramScorer(std::span<const std::string> documents, NGramConfig config);

  ScoreResponse score(const ScoreRequest& request) const override;
  std::string fingerprint() const override;

  const NGramConfig& config() const { return config_; }
  std::size_t vocabulary_size() const { return vocab_.size(); }
  // Training count of a token sequence (length 1..order); 0 if unseen.
  std::uint64_t count(std::span<const std::string> ngram) const;

 private:
  void train(const std::vector<std::vector<std::string>>& streams);

  NGramConfig config_;
  std::unordered_map<std::string, std::uint32_t> vocab_;
  std::unordered_map<std::string, std::uint64_t> counts_;          // n-gram key -> count
  std::unordered_map<std::string, std::uint64_t> history_totals_;  // history key -> sum
  std::uint64_t total_tokens_ = 0;
  std::string corpus_hash_;
};

}  // namespace salience
