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
#include <filesystem>
#include <iosfwd>
#include <list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "salience/corpus.hpp"
#include "salience/embedding.hpp"
#include "salience/numeric.hpp"
#include "salience/rng.hpp"

namespace salience {

enum class Source { Kb, Memory };
enum class EvictionPolicy { Lru, Fifo };
enum class RetrievalMode { KbAndMem, KbOnly, MemOnly, Off, Scrambled };

std::string_view to_string(Source source);
std::string_view to_string(EvictionPolicy policy);
std::string_view to_string(RetrievalMode mode);
EvictionPolicy parse_eviction_policy(std::string_view name);
// Accepts "kb+mem", "kb", "mem", "off", "scrambled".
RetrievalMode parse_retrieval_mode(std::string_view name);

struct TextPassage {
  std::string passage_id;
  std::string text;
};

struct PassageRecord {
  std::string passage_id;
  std::string text;
  Vector embedding;
  Source source = Source::Kb;
  std::optional<std::int64_t> memory_id;  // set iff source == Memory
};

struct RetrievedItem {
  PassageRecord record;
  double score = 0.0;
  double weight = 0.0;
};

// Sorted by score descending; ties go to memory entries, then smaller
// memory_id, then passage_id. Weights are the softmax of the kept scores.
struct RetrievedSet {
  std::vector<RetrievedItem> items;

  bool empty() const { return items.empty(); }
  std::size_t size() const { return items.size(); }
  Vector weights() const;
  std::vector<std::string> texts() const;
};

// Strict total order used for every ranking of passages.
bool ranks_before(double score_a, const PassageRecord& a, double score_b,
                  const PassageRecord& b);

// Softmax over retrieval scores. Throws EmptyScores on empty input.
std::vector<double> marginal_weights(std::span<const double> scores);

// Permanent passage index with exact maximum-inner-product search.
// Embeddings are stored rounded to f32 so that a saved and reloaded index
// answers queries identically.
class KnowledgeBase {
 public:
  struct Hit {
    std::size_t row;
    double score;
  };

  explicit KnowledgeBase(Eigen::Index dimension);

  static KnowledgeBase build(std::span<const TextPassage> passages,
                             const Embedder& embedder);

  void add(std::string passage_id, std::string text, const Vector& embedding);

  std::size_t size() const { return ids_.size(); }
  Eigen::Index dimension() const { return dimension_; }

  // Inner products of every row with the query.
  Vector scores(const Vector& query) const;
  std::vector<Hit> search(const Vector& query, std::size_t k) const;

  PassageRecord record(std::size_t row) const;
  const std::string& passage_id(std::size_t row) const { return ids_[row]; }
  const std::string& text(std::size_t row) const { return texts_[row]; }

  // <dir>/kb.bin: "SALKB1", u32 dimension, u64 count, count*dim f32 (LE).
  // <dir>/passages.jsonl: {"passage_id","text"} in row order.
  void save(const std::filesystem::path& dir) const;
  static KnowledgeBase load(const std::filesystem::path& dir);

 private:
  Eigen::Index dimension_;
  std::vector<double> values_;  // row-major
  std::vector<std::string> ids_;
  std::vector<std::string> texts_;
  std::unordered_set<std::string> id_set_;
};

// Transitory per-story passage pool with FIFO or LRU eviction. For LRU, both
// insertion and retrieval refresh recency.
class MemoryCache {
 public:
  struct Hit {
    std::size_t slot;
    double score;
  };

  explicit MemoryCache(std::size_t capacity = 131072,
                       EvictionPolicy policy = EvictionPolicy::Lru);

  // Adds the record (replacing any entry with the same passage_id) and
  // returns the id evicted to make room, if any.
  std::optional<std::string> insert(PassageRecord record);

  // Marks an entry as used. No effect under FIFO. Returns false if absent.
  bool touch(std::string_view passage_id);

  bool contains(std::string_view passage_id) const;
  std::size_t size() const { return index_.size(); }
  std::size_t capacity() const { return capacity_; }
  EvictionPolicy policy() const { return policy_; }
  Eigen::Index dimension() const { return dimension_; }

  // Passage ids, next victim first.
  std::vector<std::string> eviction_order() const;

  std::vector<Hit> search(const Vector& query, std::size_t k) const;
  std::vector<std::size_t> occupied_slots() const;
  double score(std::size_t slot, const Vector& query) const;
  const PassageRecord& at(std::size_t slot) const { return *slots_[slot]; }

 private:
  using OrderList = std::list<std::size_t>;

  void erase(std::string_view passage_id);

  std::size_t capacity_;
  EvictionPolicy policy_;
  Eigen::Index dimension_ = 0;
  std::vector<std::optional<PassageRecord>> slots_;
  std::vector<double> values_;  // slots_.size() * dimension_, row-major
  std::vector<std::size_t> free_slots_;
  OrderList order_;  // front is the next victim
  std::unordered_map<std::string, std::pair<std::size_t, OrderList::iterator>> index_;
};

// Top-k passages by inner product from the sources enabled by `mode`.
// Scrambled mode samples k passages uniformly (without replacement) from both
// sources using `rng`, keeping their true scores. Memory entries that are
// returned are touched in rank order.
RetrievedSet retrieve(const Vector& query, const KnowledgeBase* kb,
                      MemoryCache* memory, std::size_t k, RetrievalMode mode,
                      Rng* rng = nullptr);

nlohmann::json retrieved_to_json(const RetrievedSet& set);

// Chunks a document into passages of about `target_tokens` whitespace tokens,
// cutting only at sentence boundaries (an overlong sentence forms its own
// passage). Ids are "<doc_id>:<n>".
std::vector<TextPassage> chunk_document(std::string_view doc_id,
                                        std::string_view text,
                                        std::size_t target_tokens = 100,
                                        const SentenceSplitter& splitter = default_splitter());

std::vector<TextPassage> read_passages_jsonl(std::istream& in);

}  // namespace salience
