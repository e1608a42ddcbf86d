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

#include <filesystem>
#include <set>

#include "oracles.hpp"
#include "salience/embedding.hpp"
#include "salience/errors.hpp"
#include "salience/retrieval.hpp"

using namespace salience;

namespace {

Vector random_unit(Rng& rng, Eigen::Index d) {
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = rng.normal();
  v.normalize();
  // f32-representable, so the index holds exactly these values.
  return v.cast<float>().cast<double>();
}

PassageRecord mem(const std::string& id, std::int64_t memory_id, const Vector& e) {
  return {id, "text " + id, e, Source::Memory, memory_id};
}

Vector basis(Eigen::Index d, Eigen::Index i) { return Vector::Unit(d, i); }

std::vector<std::string> ids(const RetrievedSet& set) {
  std::vector<std::string> out;
  for (const auto& item : set.items) out.push_back(item.record.passage_id);
  return out;
}

}  // namespace

TEST_CASE("orthonormal knowledge base") {
  KnowledgeBase kb(3);
  kb.add("p1", "one", basis(3, 0));
  kb.add("p2", "two", basis(3, 1));
  kb.add("p3", "three", basis(3, 2));
  const auto set = retrieve(basis(3, 1), &kb, nullptr, 1, RetrievalMode::KbOnly);
  REQUIRE(set.size() == 1);
  CHECK(set.items[0].record.passage_id == "p2");
  CHECK(set.items[0].score == 1.0);
  CHECK(set.items[0].weight == 1.0);
  CHECK_THROWS_AS(kb.add("p1", "again", basis(3, 0)), DuplicatePassage);
}

TEST_CASE("empty sources and off mode") {
  KnowledgeBase kb(4);
  MemoryCache cache(4);
  CHECK(retrieve(basis(4, 0), &kb, &cache, 5, RetrievalMode::KbAndMem).empty());
  kb.add("p", "x", basis(4, 0));
  CHECK(retrieve(basis(4, 0), &kb, &cache, 5, RetrievalMode::Off).empty());
  CHECK(retrieve(basis(4, 0), &kb, &cache, 5, RetrievalMode::MemOnly).empty());
}

TEST_CASE("knowledge base matches a brute-force scan") {
  Rng rng(42);
  const Eigen::Index d = 32;
  KnowledgeBase kb(d);
  std::vector<Vector> vecs;
  for (int i = 0; i < 2000; ++i) {
    vecs.push_back(random_unit(rng, d));
    kb.add("kb" + std::to_string(i), "", vecs.back());
  }
  for (int q = 0; q < 20; ++q) {
    const Vector query = random_unit(rng, d);
    std::vector<oracle::Candidate> all;
    for (std::size_t i = 0; i < vecs.size(); ++i) {
      all.push_back({vecs[i].dot(query), false, 0, "kb" + std::to_string(i)});
    }
    const auto expected = oracle::brute_force_top_k(all, 20);
    const auto got = retrieve(query, &kb, nullptr, 20, RetrievalMode::KbOnly);
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      CHECK(got.items[i].record.passage_id == expected[i].passage_id);
      CHECK(std::abs(got.items[i].score - expected[i].score) < 1e-12);
    }
  }
}

TEST_CASE("kb + memory merge matches a brute-force scan over both") {
  Rng rng(7);
  const Eigen::Index d = 16;
  KnowledgeBase kb(d);
  MemoryCache cache(64);
  std::vector<oracle::Candidate> pool;
  std::vector<Vector> kb_vecs, mem_vecs;
  for (int i = 0; i < 100; ++i) {
    kb_vecs.push_back(random_unit(rng, d));
    kb.add("kb" + std::to_string(i), "", kb_vecs.back());
  }
  for (int i = 0; i < 50; ++i) {
    mem_vecs.push_back(random_unit(rng, d));
    cache.insert(mem("mem:" + std::to_string(i), i, mem_vecs.back()));
  }
  const Vector query = random_unit(rng, d);
  for (int i = 0; i < 100; ++i) pool.push_back({kb_vecs[static_cast<std::size_t>(i)].dot(query), false, 0, "kb" + std::to_string(i)});
  for (int i = 0; i < 50; ++i) {
    pool.push_back({mem_vecs[static_cast<std::size_t>(i)].dot(query), true, static_cast<std::size_t>(i), "mem:" + std::to_string(i)});
  }
  const auto expected = oracle::brute_force_top_k(pool, 20);
  const auto got = retrieve(query, &kb, &cache, 20, RetrievalMode::KbAndMem);
  REQUIRE(got.size() == 20);
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(got.items[i].record.passage_id == expected[i].passage_id);
    weight_sum += got.items[i].weight;
    if (i > 0) CHECK(got.items[i].weight <= got.items[i - 1].weight);
  }
  CHECK(weight_sum == doctest::Approx(1.0));
}

TEST_CASE("tie-break: memory before KB, smaller memory id, then passage id") {
  KnowledgeBase kb(2);
  kb.add("b", "", basis(2, 0));
  kb.add("a", "", basis(2, 0));
  MemoryCache cache(8);
  cache.insert(mem("m9", 9, basis(2, 0)));
  cache.insert(mem("m3", 3, basis(2, 0)));
  const auto got = retrieve(basis(2, 0), &kb, &cache, 4, RetrievalMode::KbAndMem);
  CHECK(ids(got) == std::vector<std::string>{"m3", "m9", "a", "b"});
  for (const auto& item : got.items) CHECK(item.weight == doctest::Approx(0.25));
}

TEST_CASE("memory cache eviction examples") {
  const Vector e = basis(2, 0);
  SUBCASE("FIFO capacity 2") {
    MemoryCache c(2, EvictionPolicy::Fifo);
    c.insert(mem("A", 0, e));
    c.insert(mem("B", 1, e));
    CHECK(c.insert(mem("C", 2, e)) == std::optional<std::string>("A"));
    CHECK(c.eviction_order() == std::vector<std::string>{"B", "C"});
  }
  SUBCASE("LRU capacity 2 with a query hit") {
    MemoryCache c(2, EvictionPolicy::Lru);
    c.insert(mem("A", 0, basis(2, 0)));
    c.insert(mem("B", 1, basis(2, 1)));
    const auto hit = retrieve(basis(2, 0), nullptr, &c, 1, RetrievalMode::MemOnly);
    CHECK(ids(hit) == std::vector<std::string>{"A"});
    c.insert(mem("C", 2, e));
    CHECK(c.contains("A"));
    CHECK(c.contains("C"));
    CHECK_FALSE(c.contains("B"));
  }
  SUBCASE("capacity 1") {
    MemoryCache c(1);
    c.insert(mem("A", 0, e));
    CHECK(c.eviction_order() == std::vector<std::string>{"A"});
  }
  SUBCASE("KB records are rejected") {
    MemoryCache c(1);
    CHECK_THROWS_AS(c.insert({"k", "", e, Source::Kb, std::nullopt}), ConfigError);
  }
}

TEST_CASE("memory cache agrees with the executable specification on random traces") {
  Rng rng(2024);
  for (int trace = 0; trace < 500; ++trace) {
    const std::size_t capacity = 1 + static_cast<std::size_t>(rng.below(8));
    const bool lru = rng.below(2) == 0;
    MemoryCache cache(capacity, lru ? EvictionPolicy::Lru : EvictionPolicy::Fifo);
    oracle::CacheModel model(capacity, lru);
    const std::size_t length = 1 + static_cast<std::size_t>(rng.below(64));
    for (std::size_t step = 0; step < length; ++step) {
      const std::string id = "p" + std::to_string(rng.below(12));
      if (rng.below(3) == 0) {
        cache.touch(id);
        model.touch(id);
      } else {
        CHECK(cache.insert(mem(id, static_cast<std::int64_t>(step), basis(2, 0))) == model.insert(id));
      }
      REQUIRE(cache.eviction_order() == model.order());
    }
  }
}

TEST_CASE("scrambled retrieval") {
  Rng data(3);
  KnowledgeBase kb(8);
  for (int i = 0; i < 30; ++i) kb.add("kb" + std::to_string(i), "", random_unit(data, 8));
  const Vector q = random_unit(data, 8);
  Rng a(99), b(99);
  const auto first = retrieve(q, &kb, nullptr, 5, RetrievalMode::Scrambled, &a);
  const auto second = retrieve(q, &kb, nullptr, 5, RetrievalMode::Scrambled, &b);
  CHECK(ids(first) == ids(second));
  CHECK(first.size() == 5);
  std::set<std::string> unique;
  for (const auto& item : first.items) {
    unique.insert(item.record.passage_id);
    CHECK(item.score == doctest::Approx(item.record.embedding.dot(q)));
  }
  CHECK(unique.size() == 5);
  CHECK_THROWS_AS(retrieve(q, &kb, nullptr, 5, RetrievalMode::Scrambled, nullptr), ConfigError);
}

TEST_CASE("knowledge base persistence round trip") {
  Rng rng(5);
  KnowledgeBase kb(12);
  for (int i = 0; i < 40; ++i) kb.add("p" + std::to_string(i), "text " + std::to_string(i), random_unit(rng, 12));
  const auto dir = std::filesystem::temp_directory_path() / "salience_kb_roundtrip";
  std::filesystem::remove_all(dir);
  kb.save(dir);
  const auto loaded = KnowledgeBase::load(dir);
  REQUIRE(loaded.size() == kb.size());
  for (int q = 0; q < 10; ++q) {
    const Vector query = random_unit(rng, 12);
    const auto x = kb.search(query, 40);
    const auto y = loaded.search(query, 40);
    REQUIRE(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(x[i].row == y[i].row);
      CHECK(x[i].score == y[i].score);
    }
  }
  CHECK(loaded.text(3) == "text 3");
  std::filesystem::remove_all(dir);
}

TEST_CASE("mode names round trip") {
  for (auto m : {RetrievalMode::KbAndMem, RetrievalMode::KbOnly, RetrievalMode::MemOnly, RetrievalMode::Off,
                 RetrievalMode::Scrambled}) {
    CHECK(parse_retrieval_mode(to_string(m)) == m);
  }
  CHECK_THROWS(parse_retrieval_mode("sideways"));
}

TEST_CASE("document chunking") {
  const auto passages = chunk_document("doc", "One two three. Four five six. Seven eight nine.", 6);
  REQUIRE(passages.size() == 2);
  CHECK(passages[0].passage_id == "doc:0");
  CHECK(passages[0].text == "One two three. Four five six.");
  CHECK(passages[1].text == "Seven eight nine.");
}

TEST_CASE("hashed bag-of-words embedder") {
  const HashedBowEmbedder e(64);
  CHECK(e.embed("the cat sat").norm() == doctest::Approx(1.0));
  CHECK(e.embed("").isZero());
  CHECK(e.embed("Cat sat the") == e.embed("the cat sat"));
}
