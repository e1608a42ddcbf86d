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

#include "salience/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>

#include "salience/errors.hpp"
#include "salience/text.hpp"

namespace salience {

static_assert(std::endian::native == std::endian::little,
              "KB persistence assumes a little-endian host");

std::string_view to_string(Source source) {
  return source == Source::Kb ? "kb" : "memory";
}

std::string_view to_string(EvictionPolicy policy) {
  return policy == EvictionPolicy::Lru ? "lru" : "fifo";
}

std::string_view to_string(RetrievalMode mode) {
  switch (mode) {
    case RetrievalMode::KbAndMem: return "kb+mem";
    case RetrievalMode::KbOnly: return "kb";
    case RetrievalMode::MemOnly: return "mem";
    case RetrievalMode::Off: return "off";
    case RetrievalMode::Scrambled: return "scrambled";
  }
  return "off";
}

EvictionPolicy parse_eviction_policy(std::string_view name) {
  if (name == "lru" || name == "LRU") return EvictionPolicy::Lru;
  if (name == "fifo" || name == "FIFO") return EvictionPolicy::Fifo;
  throw ConfigError("unknown memory policy '" + std::string(name) + "'");
}

RetrievalMode parse_retrieval_mode(std::string_view name) {
  if (name == "kb+mem" || name == "kb_and_mem" || name == "KB_AND_MEM") return RetrievalMode::KbAndMem;
  if (name == "kb" || name == "kb_only" || name == "KB_ONLY") return RetrievalMode::KbOnly;
  if (name == "mem" || name == "mem_only" || name == "MEM_ONLY") return RetrievalMode::MemOnly;
  if (name == "off" || name == "OFF") return RetrievalMode::Off;
  if (name == "scrambled" || name == "SCRAMBLED") return RetrievalMode::Scrambled;
  throw ConfigError("unknown retrieval mode '" + std::string(name) + "'");
}

Vector RetrievedSet::weights() const {
  Vector w(static_cast<Eigen::Index>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i) w(static_cast<Eigen::Index>(i)) = items[i].weight;
  return w;
}

std::vector<std::string> RetrievedSet::texts() const {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(item.record.text);
  return out;
}

bool ranks_before(double score_a, const PassageRecord& a, double score_b,
                  const PassageRecord& b) {
  if (score_a != score_b) return score_a > score_b;
  if (a.source != b.source) return a.source == Source::Memory;
  if (a.memory_id != b.memory_id) return a.memory_id.value_or(0) < b.memory_id.value_or(0);
  return a.passage_id < b.passage_id;
}

std::vector<double> marginal_weights(std::span<const double> scores) {
  if (scores.empty()) throw EmptyScores("marginal_weights needs at least one score");
  const Eigen::Map<const Vector> s(scores.data(), static_cast<Eigen::Index>(scores.size()));
  if (!all_finite(s)) throw ShapeError("marginal_weights: non-finite score");
  const Vector w = softmax(s);
  return {w.data(), w.data() + w.size()};
}

namespace {

Vector round_to_f32(const Vector& v) { return v.cast<float>().cast<double>(); }

void check_query(const Vector& query, Eigen::Index dimension) {
  if (query.size() != dimension) {
    throw ShapeError("query dimension " + std::to_string(query.size()) +
                     " != index dimension " + std::to_string(dimension));
  }
  if (!all_finite(query)) throw ShapeError("query embedding has non-finite entries");
}

}  // namespace

// ---------------------------------------------------------------------------
// KnowledgeBase

KnowledgeBase::KnowledgeBase(Eigen::Index dimension) : dimension_(dimension) {
  if (dimension < 1) throw ConfigError("KB dimension must be >= 1");
}

KnowledgeBase KnowledgeBase::build(std::span<const TextPassage> passages,
                                   const Embedder& embedder) {
  KnowledgeBase kb(embedder.dimension());
  for (const auto& p : passages) kb.add(p.passage_id, p.text, embedder.embed(p.text));
  return kb;
}

void KnowledgeBase::add(std::string passage_id, std::string text,
                        const Vector& embedding) {
  if (embedding.size() != dimension_) throw ShapeError("passage embedding has wrong dimension");
  if (!all_finite(embedding)) throw ShapeError("passage embedding has non-finite entries");
  if (!id_set_.insert(passage_id).second) {
    throw DuplicatePassage("duplicate passage id '" + passage_id + "'");
  }
  const Vector rounded = round_to_f32(embedding);
  values_.insert(values_.end(), rounded.data(), rounded.data() + rounded.size());
  ids_.push_back(std::move(passage_id));
  texts_.push_back(std::move(text));
}

Vector KnowledgeBase::scores(const Vector& query) const {
  check_query(query, dimension_);
  if (ids_.empty()) return Vector(0);
  const Eigen::Map<const RowMatrixX<double>> m(values_.data(),
                                               static_cast<Eigen::Index>(ids_.size()),
                                               dimension_);
  return m * query;
}

std::vector<KnowledgeBase::Hit> KnowledgeBase::search(const Vector& query,
                                                      std::size_t k) const {
  const Vector s = scores(query);
  std::vector<std::size_t> rows(ids_.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  const std::size_t keep = std::min(k, rows.size());
  auto before = [&](std::size_t a, std::size_t b) {
    const double sa = s(static_cast<Eigen::Index>(a));
    const double sb = s(static_cast<Eigen::Index>(b));
    if (sa != sb) return sa > sb;
    return ids_[a] < ids_[b];
  };
  std::partial_sort(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(keep), rows.end(), before);
  std::vector<Hit> hits;
  hits.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) hits.push_back({rows[i], s(static_cast<Eigen::Index>(rows[i]))});
  return hits;
}

PassageRecord KnowledgeBase::record(std::size_t row) const {
  PassageRecord r;
  r.passage_id = ids_[row];
  r.text = texts_[row];
  r.embedding = Eigen::Map<const Vector>(values_.data() + row * static_cast<std::size_t>(dimension_), dimension_);
  r.source = Source::Kb;
  return r;
}

namespace {
constexpr char kMagic[6] = {'S', 'A', 'L', 'K', 'B', '1'};
}

void KnowledgeBase::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  {
    std::ofstream bin(dir / "kb.bin", std::ios::binary | std::ios::trunc);
    if (!bin) throw IoError("cannot write " + (dir / "kb.bin").string());
    bin.write(kMagic, sizeof(kMagic));
    const auto dim = static_cast<std::uint32_t>(dimension_);
    const auto count = static_cast<std::uint64_t>(ids_.size());
    bin.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
    bin.write(reinterpret_cast<const char*>(&count), sizeof(count));
    std::vector<float> row(static_cast<std::size_t>(dimension_));
    for (std::size_t r = 0; r < ids_.size(); ++r) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        row[c] = static_cast<float>(values_[r * row.size() + c]);
      }
      bin.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!bin) throw IoError("failed writing " + (dir / "kb.bin").string());
  }
  std::ofstream side(dir / "passages.jsonl", std::ios::trunc);
  if (!side) throw IoError("cannot write " + (dir / "passages.jsonl").string());
  for (std::size_t r = 0; r < ids_.size(); ++r) {
    side << nlohmann::json{{"passage_id", ids_[r]}, {"text", texts_[r]}}.dump() << '\n';
  }
}

KnowledgeBase KnowledgeBase::load(const std::filesystem::path& dir) {
  std::ifstream bin(dir / "kb.bin", std::ios::binary);
  if (!bin) throw IoError("cannot read " + (dir / "kb.bin").string());
  char magic[sizeof(kMagic)];
  std::uint32_t dim = 0;
  std::uint64_t count = 0;
  bin.read(magic, sizeof(magic));
  bin.read(reinterpret_cast<char*>(&dim), sizeof(dim));
  bin.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (!bin || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError("bad KB header in " + (dir / "kb.bin").string());
  }
  std::ifstream side(dir / "passages.jsonl");
  if (!side) throw IoError("cannot read " + (dir / "passages.jsonl").string());
  const auto passages = read_passages_jsonl(side);
  if (passages.size() != count) throw IoError("KB sidecar row count does not match matrix");

  KnowledgeBase kb(static_cast<Eigen::Index>(dim));
  std::vector<float> row(dim);
  Vector v(static_cast<Eigen::Index>(dim));
  for (std::uint64_t r = 0; r < count; ++r) {
    bin.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(dim * sizeof(float)));
    if (!bin) throw IoError("truncated KB matrix");
    for (std::uint32_t c = 0; c < dim; ++c) v(c) = row[c];
    kb.add(passages[r].passage_id, passages[r].text, v);
  }
  return kb;
}

// ---------------------------------------------------------------------------
// MemoryCache

MemoryCache::MemoryCache(std::size_t capacity, EvictionPolicy policy)
    : capacity_(capacity), policy_(policy) {
  if (capacity < 1) throw ConfigError("memory capacity must be >= 1");
}

void MemoryCache::erase(std::string_view passage_id) {
  auto it = index_.find(std::string(passage_id));
  if (it == index_.end()) return;
  const std::size_t slot = it->second.first;
  order_.erase(it->second.second);
  slots_[slot].reset();
  free_slots_.push_back(slot);
  index_.erase(it);
}

std::optional<std::string> MemoryCache::insert(PassageRecord record) {
  if (record.source != Source::Memory) throw ConfigError("memory insert requires a MEMORY record");
  if (dimension_ == 0) dimension_ = record.embedding.size();
  if (record.embedding.size() != dimension_) throw ShapeError("memory embedding has wrong dimension");
  if (!all_finite(record.embedding)) throw ShapeError("memory embedding has non-finite entries");

  erase(record.passage_id);
  std::optional<std::string> evicted;
  if (index_.size() >= capacity_) {
    const std::size_t victim = order_.front();
    evicted = slots_[victim]->passage_id;
    erase(*evicted);
  }

  std::size_t slot;
  if (!free_slots_.empty()) {
    // Lowest free slot keeps the layout independent of eviction history order.
    auto min_it = std::min_element(free_slots_.begin(), free_slots_.end());
    slot = *min_it;
    free_slots_.erase(min_it);
  } else {
    slot = slots_.size();
    slots_.emplace_back();
    values_.resize(values_.size() + static_cast<std::size_t>(dimension_));
  }
  std::copy(record.embedding.data(), record.embedding.data() + dimension_,
            values_.begin() + static_cast<std::ptrdiff_t>(slot * static_cast<std::size_t>(dimension_)));
  std::string id = record.passage_id;
  slots_[slot] = std::move(record);
  order_.push_back(slot);
  index_.emplace(std::move(id), std::make_pair(slot, std::prev(order_.end())));
  return evicted;
}

bool MemoryCache::touch(std::string_view passage_id) {
  auto it = index_.find(std::string(passage_id));
  if (it == index_.end()) return false;
  if (policy_ == EvictionPolicy::Lru) order_.splice(order_.end(), order_, it->second.second);
  return true;
}

bool MemoryCache::contains(std::string_view passage_id) const {
  return index_.count(std::string(passage_id)) > 0;
}

std::vector<std::string> MemoryCache::eviction_order() const {
  std::vector<std::string> out;
  out.reserve(order_.size());
  for (std::size_t slot : order_) out.push_back(slots_[slot]->passage_id);
  return out;
}

std::vector<std::size_t> MemoryCache::occupied_slots() const {
  std::vector<std::size_t> out;
  out.reserve(index_.size());
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    if (slots_[s]) out.push_back(s);
  }
  return out;
}

double MemoryCache::score(std::size_t slot, const Vector& query) const {
  const Eigen::Map<const Vector> row(values_.data() + slot * static_cast<std::size_t>(dimension_), dimension_);
  return row.dot(query);
}

std::vector<MemoryCache::Hit> MemoryCache::search(const Vector& query,
                                                  std::size_t k) const {
  if (index_.empty()) return {};
  check_query(query, dimension_);
  const Eigen::Map<const RowMatrixX<double>> m(values_.data(),
                                               static_cast<Eigen::Index>(slots_.size()),
                                               dimension_);
  const Vector s = m * query;
  std::vector<std::size_t> live = occupied_slots();
  const std::size_t keep = std::min(k, live.size());
  auto before = [&](std::size_t a, std::size_t b) {
    return ranks_before(s(static_cast<Eigen::Index>(a)), *slots_[a],
                        s(static_cast<Eigen::Index>(b)), *slots_[b]);
  };
  std::partial_sort(live.begin(), live.begin() + static_cast<std::ptrdiff_t>(keep), live.end(), before);
  std::vector<Hit> hits;
  hits.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) hits.push_back({live[i], s(static_cast<Eigen::Index>(live[i]))});
  return hits;
}

// ---------------------------------------------------------------------------
// retrieve

namespace {

struct Candidate {
  double score;
  const KnowledgeBase* kb;  // null for memory candidates
  std::size_t ref;          // KB row or memory slot
};

}  // namespace

RetrievedSet retrieve(const Vector& query, const KnowledgeBase* kb,
                      MemoryCache* memory, std::size_t k, RetrievalMode mode,
                      Rng* rng) {
  if (k < 1) throw ConfigError("retrieve: k must be >= 1");
  RetrievedSet out;
  if (mode == RetrievalMode::Off) return out;

  const bool use_kb = kb != nullptr && kb->size() > 0 &&
                      (mode == RetrievalMode::KbAndMem || mode == RetrievalMode::KbOnly ||
                       mode == RetrievalMode::Scrambled);
  const bool use_mem = memory != nullptr && memory->size() > 0 &&
                       (mode == RetrievalMode::KbAndMem || mode == RetrievalMode::MemOnly ||
                        mode == RetrievalMode::Scrambled);

  std::vector<std::pair<PassageRecord, double>> chosen;
  if (mode == RetrievalMode::Scrambled) {
    if (rng == nullptr) throw ConfigError("scrambled retrieval needs a seeded generator");
    if (use_kb) check_query(query, kb->dimension());
    if (use_mem) check_query(query, memory->dimension());
    std::vector<Candidate> pool;
    if (use_kb) {
      for (std::size_t r = 0; r < kb->size(); ++r) pool.push_back({0.0, kb, r});
    }
    if (use_mem) {
      for (std::size_t s : memory->occupied_slots()) pool.push_back({0.0, nullptr, s});
    }
    const std::size_t keep = std::min(k, pool.size());
    for (std::size_t i = 0; i < keep; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng->below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    for (std::size_t i = 0; i < keep; ++i) {
      const Candidate& c = pool[i];
      if (c.kb != nullptr) {
        PassageRecord rec = kb->record(c.ref);
        const double s = rec.embedding.dot(query);
        chosen.emplace_back(std::move(rec), s);
      } else {
        chosen.emplace_back(memory->at(c.ref), memory->score(c.ref, query));
      }
    }
  } else {
    if (use_kb) {
      for (const auto& hit : kb->search(query, k)) chosen.emplace_back(kb->record(hit.row), hit.score);
    }
    if (use_mem) {
      for (const auto& hit : memory->search(query, k)) chosen.emplace_back(memory->at(hit.slot), hit.score);
    }
  }

  std::sort(chosen.begin(), chosen.end(), [](const auto& a, const auto& b) {
    return ranks_before(a.second, a.first, b.second, b.first);
  });
  if (chosen.size() > k) chosen.resize(k);
  if (chosen.empty()) return out;

  std::vector<double> scores;
  scores.reserve(chosen.size());
  for (const auto& c : chosen) scores.push_back(c.second);
  const auto weights = marginal_weights(scores);
  out.items.reserve(chosen.size());
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    out.items.push_back({std::move(chosen[i].first), chosen[i].second, weights[i]});
  }
  if (memory != nullptr) {
    for (const auto& item : out.items) {
      if (item.record.source == Source::Memory) memory->touch(item.record.passage_id);
    }
  }
  return out;
}

nlohmann::json retrieved_to_json(const RetrievedSet& set) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& item : set.items) {
    items.push_back({{"passage_id", item.record.passage_id},
                     {"source", to_string(item.record.source)},
                     {"memory_id", item.record.memory_id ? nlohmann::json(*item.record.memory_id)
                                                         : nlohmann::json(nullptr)},
                     {"score", item.score},
                     {"weight", item.weight}});
  }
  return items;
}

std::vector<TextPassage> chunk_document(std::string_view doc_id,
                                        std::string_view text,
                                        std::size_t target_tokens,
                                        const SentenceSplitter& splitter) {
  std::vector<TextPassage> out;
  std::string current;
  std::size_t current_tokens = 0;
  auto flush = [&] {
    if (current.empty()) return;
    out.push_back({std::string(doc_id) + ":" + std::to_string(out.size()), std::move(current)});
    current.clear();
    current_tokens = 0;
  };
  for (const auto& sentence : splitter.split(text)) {
    const std::size_t n = count_tokens(sentence);
    if (current_tokens > 0 && current_tokens + n > target_tokens) flush();
    if (!current.empty()) current.push_back(' ');
    current.append(sentence);
    current_tokens += n;
  }
  flush();
  return out;
}

std::vector<TextPassage> read_passages_jsonl(std::istream& in) {
  std::vector<TextPassage> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.at("passage_id").get<std::string>(), j.at("text").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw IoError("passage jsonl line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace salience
