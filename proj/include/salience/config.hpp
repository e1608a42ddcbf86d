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
#include <string>
#include <vector>

#include <json.hpp>

#include "salience/alignment.hpp"
#include "salience/baselines.hpp"
#include "salience/corpus.hpp"
#include "salience/retrieval.hpp"
#include "salience/salience.hpp"

namespace salience {

// Everything that determines a run's artifacts. Serialized as one flat JSON
// object whose keys are the field names below.
struct RunConfig {
  RetrievalMode retrieval_mode = RetrievalMode::KbAndMem;
  std::size_t k = 20;
  WindowSpec window;
  std::vector<Measure> measures = all_measures();
  std::uint64_t seed = 0;

  // "reference" or a sidecar endpoint (see RemoteScorerOptions).
  std::string scorer = "reference";
  std::int64_t scorer_timeout_ms = 30000;
  int scorer_retries = 2;
  int reference_order = 2;
  double reference_smoothing = 0.1;
  double reference_boost = 4.0;
  // Stories JSONL the reference scorer is trained on; empty = the input.
  std::string reference_corpus;

  Eigen::Index embedding_dim = 768;
  std::string kb_path;
  EvictionPolicy memory_policy = EvictionPolicy::Lru;
  std::size_t memory_capacity = 131072;

  std::size_t sentences_per_cluster = 10;
  ClusterPolarity cluster_polarity = ClusterPolarity::Similarity;
  AlignmentConfig alignment;

  std::string output_dir = "out";
  std::size_t workers = 1;

  void validate() const;
};

nlohmann::json config_to_json(const RunConfig& config);
// Overlays the keys present in `j` onto `base`; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

// Hex FNV-1a of the canonical serialization, excluding output_dir and
// workers (neither changes any artifact).
std::string config_hash(const RunConfig& config);

}  // namespace salience
