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

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "salience/baselines.hpp"
#include "salience/corpus.hpp"
#include "salience/retrieval.hpp"
#include "salience/scoring.hpp"
#include "salience/sentiment.hpp"

namespace salience {

enum class Measure {
  ClusSal,
  LikeSal,
  NoKnowSal,
  LikeImpSal,
  LikeClusSal,
  LikeClusImpSal,
  KnowSal,
  SwapSal,
  EmbSurp,
  EmbSal,
  Random,
  Ascending,
  Descending,
};

using MeasureSet = std::set<Measure>;

std::string_view measure_name(Measure m);
// Display names ("Like-Sal"), enum-style names ("LIKE_SAL") and the alias
// "Know-Diff-Sal" are accepted.
std::optional<Measure> parse_measure(std::string_view name);
const std::vector<Measure>& all_measures();

struct SalienceProfile {
  std::string story_id;
  std::string chapter_id;
  std::map<Measure, std::vector<double>> scores;
  std::string scorer_fingerprint;
  std::string config_hash;
};

nlohmann::json profile_to_json(const SalienceProfile& profile);
SalienceProfile profile_from_json(const nlohmann::json& j);

// Everything a salience computation reads or mutates. The memory cache and
// generator are shared state for one story and must be used in block order.
struct SalienceContext {
  const Scorer* scorer = nullptr;
  const Embedder* embedder = nullptr;
  const Tokenizer* tokenizer = &default_tokenizer();
  const KnowledgeBase* kb = nullptr;
  MemoryCache* memory = nullptr;
  Rng* rng = nullptr;
  const SentimentProvider* sentiment = nullptr;

  WindowSpec window;
  std::size_t k = 20;
  RetrievalMode mode = RetrievalMode::KbAndMem;
  ClusterConfig cluster;
  ClusterPolarity cluster_polarity = ClusterPolarity::Similarity;
  // Story-level time index of the chapter's first sentence; block ids and
  // memory ids are offset by it.
  std::size_t block_offset = 0;

  // Called once per block with the main-mode retrieval result.
  std::function<void(const Block&, const RetrievedSet&)> on_retrieval;
};

std::vector<Block> chapter_blocks(const Chapter& chapter, const SalienceContext& ctx);

// Retrieval for a block's intact context. Off mode returns the empty set.
RetrievedSet retrieve_for(const Block& block, const SalienceContext& ctx, RetrievalMode mode);

// Inserts the block's target into memory (no-op without a cache).
void remember(const Block& block, const SalienceContext& ctx);

// Block with its last context sentence (the candidate) removed.
Block delete_candidate(const Block& block);
// Block with its last two context sentences exchanged. Requires >= 2.
Block swap_last_pair(const Block& block);

// Cosine distance of pooled embeddings; 0 (with a warning) if either is zero.
double embedding_distance(const Vector& a, const Vector& b);

// c(present) - c(sentence t deleted) over the block ending at t; both
// evaluations share one retrieval against the intact context. 0 for the last
// sentence.
double deletion_salience(const Chapter& chapter, std::size_t t, const SalienceContext& ctx);

// c(original) - c(t and t+1 exchanged), evaluated on the block ending at t+1
// so the target is the same text in both variants. 0 when t+1 is the last
// sentence or does not exist.
double swap_salience(const Chapter& chapter, std::size_t t, const SalienceContext& ctx);

// c(retrieval on) - c(retrieval off) on the intact block ending at t.
double knowledge_salience(const Chapter& chapter, std::size_t t, const SalienceContext& ctx,
                          std::optional<RetrievalMode> on_mode = std::nullopt);

// Cosine distance between pooled embeddings of the present and deleted
// variants used by deletion_salience.
double embedding_salience(const Chapter& chapter, std::size_t t, const SalienceContext& ctx);

// Distances between consecutive blocks' pooled embeddings; element 0 and
// sentences without a block are 0.
std::vector<double> ely_surprise_from_embeddings(std::span<const Vector> block_embeddings,
                                                 std::size_t sentence_count);
// Causal pass over the chapter (inserts targets into memory).
std::vector<double> ely_surprise(const Chapter& chapter, const SalienceContext& ctx);

// score * (1 + |sentiment(sentence)|).
std::vector<double> sentiment_adjust(std::span<const double> scores,
                                     std::span<const Sentence> sentences,
                                     const SentimentProvider& provider);

// zscore(clus) + 2 * zscore(like).
std::vector<double> combine_like_clus(std::span<const double> like, std::span<const double> clus);

// All requested measures for one chapter in a single causal pass, inserting
// each block's target into memory after it is scored. Throws on scorer
// failure; nothing partial is returned.
SalienceProfile profile_chapter(const Chapter& chapter, const MeasureSet& measures,
                                const SalienceContext& ctx, std::uint64_t seed);

// Repeats the retrievals and memory inserts profile_chapter would make,
// without scoring. Used to restore story state when resuming.
void replay_chapter(const Chapter& chapter, const MeasureSet& measures,
                    const SalienceContext& ctx);

}  // namespace salience
