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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "salience/corpus.hpp"
#include "salience/embedding.hpp"
#include "salience/numeric.hpp"
#include "salience/retrieval.hpp"

namespace salience {

struct ScoreRequest {
  std::string context;                // x
  std::vector<std::string> passages;  // z, in RetrievedSet order
  std::string target;                 // y
  bool want_embedding = false;
};

// Row z holds log p(y_t | x, z, y_<t) for every target token t. With no
// passages there is exactly one row, conditioned on the context alone.
struct ScoreResponse {
  Matrix logprobs;
  std::optional<Matrix> embeddings;  // one pooled vector per row
  std::string fingerprint;
  bool truncated = false;

  Eigen::Index token_count() const { return logprobs.cols(); }

  // Throws ProtocolError naming the offending field.
  void validate(std::size_t passage_count) const;
};

// The language-model boundary. Implementations must be safe to call from
// several threads at once.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual ScoreResponse score(const ScoreRequest& request) const = 0;
  virtual std::string fingerprint() const = 0;
};

struct CoherenceResult {
  double avg_log_likelihood = 0.0;
  Eigen::Index token_count = 0;
  Vector pooled_embedding;  // empty when embeddings were not requested

  bool operator==(const CoherenceResult& o) const {
    return avg_log_likelihood == o.avg_log_likelihood && token_count == o.token_count &&
           pooled_embedding.size() == o.pooled_embedding.size() &&
           pooled_embedding == o.pooled_embedding;
  }
};

struct CoherenceOptions {
  std::size_t context_token_budget = 512;
  const Tokenizer* tokenizer = &default_tokenizer();
  bool want_embedding = true;
};

// Weight vector matching a response: the retrieval weights, or [1] for the
// single context-only row.
Vector response_weights(const RetrievedSet& retrieved);

// Length-normalized marginal log-likelihood of the target plus the
// weight-averaged pooled embedding.
CoherenceResult coherence_from_response(const ScoreResponse& response,
                                        const Vector& weights);

ScoreRequest make_request(const Block& block, const RetrievedSet& retrieved,
                          const CoherenceOptions& options = {});

CoherenceResult coherence(const Block& block, const RetrievedSet& retrieved,
                          const Scorer& scorer,
                          const CoherenceOptions& options = {});

// Memory entry for a scored block: its target text, keyed by block_id.
PassageRecord memory_record(const Block& block, const Embedder& embedder);

// Retrieval query for a block: the rendered (intact) context.
Vector query_embedding(const Block& block, const Embedder& embedder,
                       const CoherenceOptions& options = {});

// Blocks for every chapter of a story, with block_id offset so it is the
// story-level time index of the block's last context sentence.
std::vector<std::vector<Block>> make_story_blocks(const Story& story,
                                                  const WindowSpec& spec,
                                                  const Tokenizer& tokenizer = default_tokenizer());

struct RetrievalContext {
  const Embedder* embedder = nullptr;
  const KnowledgeBase* kb = nullptr;
  MemoryCache* memory = nullptr;
  Rng* rng = nullptr;
  std::size_t k = 20;
};

struct PerplexityReport {
  RetrievalMode mode = RetrievalMode::Off;
  double median = 0.0;
  std::vector<double> per_block;
  std::string fingerprint;
};

double median(std::vector<double> values);

// Scores blocks in order; after each block its target enters memory.
PerplexityReport perplexity(std::span<const Block> blocks, RetrievalMode mode,
                            const Scorer& scorer, const RetrievalContext& retrieval,
                            const CoherenceOptions& options = {});

// Wire protocol (one JSON object per line).
nlohmann::json request_to_json(const ScoreRequest& request, const std::string& id);
ScoreRequest request_from_json(const nlohmann::json& j);
nlohmann::json response_to_json(const ScoreResponse& response, const std::string& id);
// Validates id echo, types, shape and value ranges; throws ProtocolError.
ScoreResponse response_from_json(const nlohmann::json& j, const std::string& expected_id,
                                 std::size_t passage_count, bool want_embedding);

// Tokenizer and embedder backed by a scorer's token counts and embedding
// channel, for use with a remote model.
class ScorerTokenizer final : public Tokenizer {
 public:
  explicit ScorerTokenizer(const Scorer& scorer) : scorer_(scorer) {}
  std::size_t count_tokens(std::string_view text) const override;
  std::string name() const override { return "scorer:" + scorer_.fingerprint(); }

 private:
  const Scorer& scorer_;
};

class ScorerEmbedder final : public Embedder {
 public:
  ScorerEmbedder(const Scorer& scorer, Eigen::Index dimension)
      : scorer_(scorer), dimension_(dimension) {}
  Vector embed(std::string_view text) const override;
  Eigen::Index dimension() const override { return dimension_; }
  std::string fingerprint() const override { return "scorer:" + scorer_.fingerprint(); }

 private:
  const Scorer& scorer_;
  Eigen::Index dimension_;
};

}  // namespace salience
