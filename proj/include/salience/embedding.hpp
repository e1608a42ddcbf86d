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

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>

#include "salience/numeric.hpp"

namespace salience {

// Sentence / passage / query embedding provider.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual Vector embed(std::string_view text) const = 0;
  virtual Eigen::Index dimension() const = 0;
  virtual std::string fingerprint() const = 0;

  // One row per text.
  virtual Matrix embed_batch(std::span<const std::string> texts) const;
};

// Hashed bag of words: each word token is bucketed by FNV-1a, weighted by
// 1 + log(tf), and the vector is L2-normalized. Text without word tokens
// embeds to the zero vector.
class HashedBowEmbedder final : public Embedder {
 public:
  explicit HashedBowEmbedder(Eigen::Index dimension = 768);

  Vector embed(std::string_view text) const override;
  Eigen::Index dimension() const override { return dimension_; }
  std::string fingerprint() const override;

 private:
  Eigen::Index dimension_;
};

// Fixed text -> vector table; unknown text embeds to zero. For fixtures.
class LookupEmbedder final : public Embedder {
 public:
  explicit LookupEmbedder(Eigen::Index dimension) : dimension_(dimension) {}

  void set(std::string text, Vector v);
  Vector embed(std::string_view text) const override;
  Eigen::Index dimension() const override { return dimension_; }
  std::string fingerprint() const override { return "lookup"; }

 private:
  Eigen::Index dimension_;
  std::unordered_map<std::string, Vector> table_;
};

// Bucket for a hashed feature.
Eigen::Index hash_bucket(std::string_view feature, Eigen::Index dimension);

}  // namespace salience
