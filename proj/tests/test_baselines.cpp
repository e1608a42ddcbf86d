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

#include <algorithm>
#include <numeric>

#include "oracles.hpp"
#include "salience/baselines.hpp"

using namespace salience;

namespace {

Matrix random_rows(Rng& rng, Eigen::Index n, Eigen::Index d) {
  Matrix m(n, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("positional baselines") {
  CHECK(positional_baseline(3, PositionalKind::Ascending) == std::vector<double>{0, 1, 2});
  CHECK(positional_baseline(3, PositionalKind::Descending) == std::vector<double>{2, 1, 0});
  const auto r = positional_baseline(50, PositionalKind::Random, 4);
  CHECK(r == positional_baseline(50, PositionalKind::Random, 4));
  CHECK(r != positional_baseline(50, PositionalKind::Random, 5));
  for (double v : r) {
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
  CHECK(positional_baseline(0, PositionalKind::Ascending).empty());
}

TEST_CASE("cluster count") {
  ClusterConfig c;
  CHECK(c.cluster_count(1) == 1);
  CHECK(c.cluster_count(10) == 1);
  CHECK(c.cluster_count(11) == 2);
  c.sentences_per_cluster = 1;
  CHECK(c.cluster_count(4) == 4);
}

TEST_CASE("cluster salience degenerate and perfect cases") {
  Matrix one(1, 3);
  one << 0.2, 0.5, -0.1;
  const auto single = cluster_salience(one, ClusterConfig{});
  REQUIRE(single.size() == 1);
  CHECK(single[0] == doctest::Approx(1.0));

  Matrix groups(6, 4);
  groups << 1, 0, 0, 0,  //
      1, 0, 0, 0,        //
      1, 0, 0, 0,        //
      0, 0, 2, 0,        //
      0, 0, 2, 0,        //
      0, 0, 2, 0;
  ClusterConfig cfg;
  cfg.sentences_per_cluster = 3;
  for (double v : cluster_salience(groups, cfg)) CHECK(v == doctest::Approx(1.0));
  for (double v : cluster_salience(groups, cfg, ClusterPolarity::Distance)) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("cluster salience is equivariant under row permutation") {
  Rng rng(17);
  const Matrix data = random_rows(rng, 25, 6);
  ClusterConfig cfg;
  cfg.sentences_per_cluster = 5;
  cfg.seed = 3;
  const auto base = cluster_salience(data, cfg);
  std::vector<Eigen::Index> perm(25);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  Matrix shuffled(25, 6);
  for (Eigen::Index i = 0; i < 25; ++i) shuffled.row(i) = data.row(perm[static_cast<std::size_t>(i)]);
  const auto moved = cluster_salience(shuffled, cfg);
  for (Eigen::Index i = 0; i < 25; ++i) {
    CHECK(moved[static_cast<std::size_t>(i)] == doctest::Approx(base[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]));
  }
}

TEST_CASE("Lloyd iterations agree with an independent implementation") {
  Rng rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix data = random_rows(rng, 30, 5);
    Rng seeding(static_cast<std::uint64_t>(trial));
    const Matrix init = kmeans_plus_plus(data, 3, seeding);
    REQUIRE(init.rows() == 3);
    ClusterConfig cfg;
    const auto got = lloyd(data, init, cfg);
    const auto expected = oracle::lloyd(data, init, cfg.max_iterations, cfg.tolerance);
    CHECK(got.assignment == expected.assignment);
    CHECK((got.centroids - expected.centroids).cwiseAbs().maxCoeff() < 1e-12);
    for (std::size_t i = 1; i < got.objective_history.size(); ++i) {
      CHECK(got.objective_history[i] <= got.objective_history[i - 1] + 1e-12);
    }
  }
}

TEST_CASE("k-means++ picks distinct data rows") {
  Rng rng(9);
  const Matrix data = random_rows(rng, 12, 3);
  Rng seeding(1);
  const Matrix c = kmeans_plus_plus(data, 4, seeding);
  for (Eigen::Index a = 0; a < 4; ++a) {
    bool found = false;
    for (Eigen::Index i = 0; i < 12; ++i) found = found || c.row(a) == data.row(i);
    CHECK(found);
    for (Eigen::Index b = 0; b < a; ++b) CHECK(c.row(a) != c.row(b));
  }
}
