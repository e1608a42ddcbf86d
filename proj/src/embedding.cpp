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

#include "salience/embedding.hpp"

#include <cmath>
#include <map>

#include "salience/rng.hpp"
#include "salience/text.hpp"

namespace salience {

Matrix Embedder::embed_batch(std::span<const std::string> texts) const {
  Matrix out(static_cast<Eigen::Index>(texts.size()), dimension());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = embed(texts[i]).transpose();
  }
  return out;
}

Eigen::Index hash_bucket(std::string_view feature, Eigen::Index dimension) {
  return static_cast<Eigen::Index>(fnv1a64(feature) %
                                   static_cast<std::uint64_t>(dimension));
}

HashedBowEmbedder::HashedBowEmbedder(Eigen::Index dimension)
    : dimension_(dimension) {
  if (dimension < 1) throw ConfigError("embedding dimension must be >= 1");
}

Vector HashedBowEmbedder::embed(std::string_view text) const {
  std::map<std::string, int> tf;
  for (auto& tok : word_tokens(text)) ++tf[std::move(tok)];
  Vector v = Vector::Zero(dimension_);
  for (const auto& [tok, count] : tf) {
    v(hash_bucket(tok, dimension_)) += 1.0 + std::log(static_cast<double>(count));
  }
  return l2_normalized(v);
}

std::string HashedBowEmbedder::fingerprint() const {
  return "hashed-bow/dim=" + std::to_string(dimension_);
}

void LookupEmbedder::set(std::string text, Vector v) {
  if (v.size() != dimension_) throw ShapeError("lookup embedding has wrong dimension");
  table_[std::move(text)] = std::move(v);
}

Vector LookupEmbedder::embed(std::string_view text) const {
  auto it = table_.find(std::string(text));
  if (it == table_.end()) return Vector::Zero(dimension_);
  return it->second;
}

}  // namespace salience
