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

#include "salience/baselines.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "salience/errors.hpp"

namespace salience {

std::vector<double> positional_baseline(std::size_t n, PositionalKind kind,
                                        std::uint64_t seed) {
  std::vector<double> out(n);
  switch (kind) {
    case PositionalKind::Ascending:
      for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(i);
      break;
    case PositionalKind::Descending:
      for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(n - 1 - i);
      break;
    case PositionalKind::Random: {
      Rng rng(seed);
      for (auto& v : out) v = rng.uniform();
      break;
    }
  }
  return out;
}

std::size_t ClusterConfig::cluster_count(std::size_t n) const {
  if (n == 0) return 0;
  const std::size_t per = std::max<std::size_t>(1, sentences_per_cluster);
  return std::clamp<std::size_t>((n + per - 1) / per, 1, n);
}

Matrix kmeans_plus_plus(const Matrix& data, std::size_t k, Rng& rng) {
  const auto n = static_cast<std::size_t>(data.rows());
  if (n == 0 || k == 0) return Matrix(0, data.cols());
  k = std::min(k, n);
  Matrix centroids(static_cast<Eigen::Index>(k), data.cols());
  std::size_t first = static_cast<std::size_t>(rng.below(n));
  centroids.row(0) = data.row(static_cast<Eigen::Index>(first));
  Vector d2 = (data.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (std::size_t c = 1; c < k; ++c) {
    const double total = d2.sum();
    std::size_t pick = 0;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        u -= d2(static_cast<Eigen::Index>(i));
        if (u < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng.below(n));
    }
    centroids.row(static_cast<Eigen::Index>(c)) = data.row(static_cast<Eigen::Index>(pick));
    const Vector nd = (data.rowwise() - centroids.row(static_cast<Eigen::Index>(c))).rowwise().squaredNorm();
    d2 = d2.cwiseMin(nd);
  }
  return centroids;
}

KMeansResult lloyd(const Matrix& data, Matrix centroids, const ClusterConfig& config) {
  const Eigen::Index n = data.rows();
  const Eigen::Index k = centroids.rows();
  KMeansResult result;
  result.initial_centroids = centroids;
  result.assignment.assign(static_cast<std::size_t>(n), 0);
  std::vector<std::size_t> previous;

  for (std::size_t iter = 0; iter < std::max<std::size_t>(1, config.max_iterations); ++iter) {
    double objective = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_c = 0;
      for (Eigen::Index c = 0; c < k; ++c) {
        const double d = (data.row(i) - centroids.row(c)).squaredNorm();
        if (d < best) {
          best = d;
          best_c = static_cast<std::size_t>(c);
        }
      }
      result.assignment[static_cast<std::size_t>(i)] = best_c;
      objective += best;
    }
    const bool stable = result.assignment == previous;
    const bool small_gain = !result.objective_history.empty() &&
                            result.objective_history.back() - objective < config.tolerance;
    result.objective_history.push_back(objective);
    if (stable || small_gain) break;
    previous = result.assignment;

    Matrix sums = Matrix::Zero(k, data.cols());
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto c = result.assignment[static_cast<std::size_t>(i)];
      sums.row(static_cast<Eigen::Index>(c)) += data.row(i);
      ++sizes[c];
    }
    for (Eigen::Index c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) {
        centroids.row(c) = sums.row(c) / static_cast<double>(sizes[static_cast<std::size_t>(c)]);
      }
    }
  }
  result.centroids = std::move(centroids);
  return result;
}

KMeansResult kmeans(const Matrix& data, std::size_t k, const ClusterConfig& config) {
  Rng rng(config.seed);
  Matrix init = kmeans_plus_plus(data, k, rng);
  return lloyd(data, std::move(init), config);
}

std::vector<double> cluster_salience(const Matrix& embeddings, const ClusterConfig& config,
                                     ClusterPolarity polarity) {
  const auto n = static_cast<std::size_t>(embeddings.rows());
  if (n == 0) throw ShapeError("cluster_salience needs at least one embedding");
  const Matrix normalized = normalize_rows(embeddings);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = normalized.row(static_cast<Eigen::Index>(a));
    const auto rb = normalized.row(static_cast<Eigen::Index>(b));
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  });
  Matrix canonical(normalized.rows(), normalized.cols());
  for (std::size_t i = 0; i < n; ++i) {
    canonical.row(static_cast<Eigen::Index>(i)) = normalized.row(static_cast<Eigen::Index>(order[i]));
  }

  const KMeansResult km = kmeans(canonical, config.cluster_count(n), config);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<Eigen::Index>(km.assignment[i]);
    const double sim = cosine_similarity(canonical.row(static_cast<Eigen::Index>(i)).transpose(),
                                         km.centroids.row(c).transpose());
    out[order[i]] = polarity == ClusterPolarity::Similarity ? sim : 1.0 - sim;
  }
  return out;
}

}  // namespace salience
