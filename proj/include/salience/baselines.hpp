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
#include <vector>

#include "salience/numeric.hpp"
#include "salience/rng.hpp"

namespace salience {

enum class PositionalKind { Random, Ascending, Descending };

// Ascending = [0 .. n-1], Descending = [n-1 .. 0], Random = seeded U[0,1).
std::vector<double> positional_baseline(std::size_t n, PositionalKind kind,
                                        std::uint64_t seed = 0);

struct ClusterConfig {
  std::size_t sentences_per_cluster = 10;
  std::size_t max_iterations = 100;
  double tolerance = 1e-6;
  std::uint64_t seed = 0;

  // ceil(n / sentences_per_cluster), clamped to [1, n].
  std::size_t cluster_count(std::size_t n) const;
};

enum class ClusterPolarity {
  Similarity,  // centroid-near sentences score high
  Distance,    // 1 - similarity
};

struct KMeansResult {
  Matrix initial_centroids;
  Matrix centroids;
  std::vector<std::size_t> assignment;
  // Objective (sum of squared distances to the assigned centroid) after each
  // assignment step.
  std::vector<double> objective_history;
};

// k-means++ seeding over the rows of `data`.
Matrix kmeans_plus_plus(const Matrix& data, std::size_t k, Rng& rng);

// Lloyd iterations from the given centroids until assignments stop changing,
// the objective improves by less than `tolerance`, or max_iterations.
// Nearest-centroid ties go to the lower index; empty clusters keep their
// previous centroid.
KMeansResult lloyd(const Matrix& data, Matrix centroids, const ClusterConfig& config);

KMeansResult kmeans(const Matrix& data, std::size_t k, const ClusterConfig& config);

// Clustering-summarizer baseline: k-means over L2-normalized sentence
// embeddings (k from config), then each sentence scores its cosine similarity
// to its own centroid. Rows are clustered in a canonical (lexicographic)
// order so the output is equivariant under permutation of the input.
std::vector<double> cluster_salience(const Matrix& embeddings, const ClusterConfig& config,
                                     ClusterPolarity polarity = ClusterPolarity::Similarity);

}  // namespace salience
