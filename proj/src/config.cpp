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

#include "salience/config.hpp"

#include <fstream>

#include "salience/errors.hpp"
#include "salience/rng.hpp"

namespace salience {

void RunConfig::validate() const {
  if (k == 0) throw ConfigError("k must be positive");
  window.validate();
  if (measures.empty()) throw ConfigError("measures must not be empty");
  if (scorer.empty()) throw ConfigError("scorer must not be empty");
  if (scorer_timeout_ms <= 0) throw ConfigError("scorer_timeout_ms must be positive");
  if (scorer_retries < 0) throw ConfigError("scorer_retries must be >= 0");
  if (reference_order < 1) throw ConfigError("reference_order must be >= 1");
  if (!(reference_smoothing > 0.0)) throw ConfigError("reference_smoothing must be positive");
  if (reference_boost < 0.0) throw ConfigError("reference_boost must be >= 0");
  if (embedding_dim <= 0) throw ConfigError("embedding_dim must be positive");
  if (memory_capacity == 0) throw ConfigError("memory_capacity must be positive");
  if (sentences_per_cluster == 0) throw ConfigError("sentences_per_cluster must be positive");
  alignment.validate();
  if (workers == 0) throw ConfigError("workers must be positive");
}

nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json measures = nlohmann::json::array();
  for (Measure m : c.measures) measures.push_back(std::string(measure_name(m)));
  return {
      {"retrieval_mode", std::string(to_string(c.retrieval_mode))},
      {"k", c.k},
      {"context_sentences", c.window.context_sentences},
      {"context_token_budget", c.window.context_token_budget},
      {"target_token_budget", c.window.target_token_budget},
      {"measures", measures},
      {"seed", c.seed},
      {"scorer", c.scorer},
      {"scorer_timeout_ms", c.scorer_timeout_ms},
      {"scorer_retries", c.scorer_retries},
      {"reference_order", c.reference_order},
      {"reference_smoothing", c.reference_smoothing},
      {"reference_boost", c.reference_boost},
      {"reference_corpus", c.reference_corpus},
      {"embedding_dim", c.embedding_dim},
      {"kb_path", c.kb_path},
      {"memory_policy", std::string(to_string(c.memory_policy))},
      {"memory_capacity", c.memory_capacity},
      {"sentences_per_cluster", c.sentences_per_cluster},
      {"cluster_polarity", c.cluster_polarity == ClusterPolarity::Similarity ? "similarity" : "distance"},
      {"rho", c.alignment.window_fraction},
      {"mu", c.alignment.min_similarity},
      {"theta", c.alignment.max_drop},
      {"max_targets", c.alignment.max_targets},
      {"output_dir", c.output_dir},
      {"workers", c.workers},
  };
}

namespace {

template <typename T>
T get_as(const nlohmann::json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j, RunConfig c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "retrieval_mode") {
      c.retrieval_mode = parse_retrieval_mode(get_as<std::string>(v, key));
    } else if (key == "k") {
      c.k = get_as<std::size_t>(v, key);
    } else if (key == "context_sentences") {
      c.window.context_sentences = get_as<std::size_t>(v, key);
    } else if (key == "context_token_budget") {
      c.window.context_token_budget = get_as<std::size_t>(v, key);
    } else if (key == "target_token_budget") {
      c.window.target_token_budget = get_as<std::size_t>(v, key);
    } else if (key == "measures") {
      c.measures.clear();
      for (const auto& name : get_as<std::vector<std::string>>(v, key)) {
        const auto m = parse_measure(name);
        if (!m) throw ConfigError("unknown measure '" + name + "'");
        c.measures.push_back(*m);
      }
    } else if (key == "seed") {
      c.seed = get_as<std::uint64_t>(v, key);
    } else if (key == "scorer") {
      c.scorer = get_as<std::string>(v, key);
    } else if (key == "scorer_timeout_ms") {
      c.scorer_timeout_ms = get_as<std::int64_t>(v, key);
    } else if (key == "scorer_retries") {
      c.scorer_retries = get_as<int>(v, key);
    } else if (key == "reference_order") {
      c.reference_order = get_as<int>(v, key);
    } else if (key == "reference_smoothing") {
      c.reference_smoothing = get_as<double>(v, key);
    } else if (key == "reference_boost") {
      c.reference_boost = get_as<double>(v, key);
    } else if (key == "reference_corpus") {
      c.reference_corpus = get_as<std::string>(v, key);
    } else if (key == "embedding_dim") {
      c.embedding_dim = get_as<Eigen::Index>(v, key);
    } else if (key == "kb_path") {
      c.kb_path = get_as<std::string>(v, key);
    } else if (key == "memory_policy") {
      c.memory_policy = parse_eviction_policy(get_as<std::string>(v, key));
    } else if (key == "memory_capacity") {
      c.memory_capacity = get_as<std::size_t>(v, key);
    } else if (key == "sentences_per_cluster") {
      c.sentences_per_cluster = get_as<std::size_t>(v, key);
    } else if (key == "cluster_polarity") {
      const auto p = get_as<std::string>(v, key);
      if (p == "similarity") {
        c.cluster_polarity = ClusterPolarity::Similarity;
      } else if (p == "distance") {
        c.cluster_polarity = ClusterPolarity::Distance;
      } else {
        throw ConfigError("cluster_polarity must be 'similarity' or 'distance'");
      }
    } else if (key == "rho") {
      c.alignment.window_fraction = get_as<double>(v, key);
    } else if (key == "mu") {
      c.alignment.min_similarity = get_as<double>(v, key);
    } else if (key == "theta") {
      c.alignment.max_drop = get_as<double>(v, key);
    } else if (key == "max_targets") {
      c.alignment.max_targets = get_as<std::size_t>(v, key);
    } else if (key == "output_dir") {
      c.output_dir = get_as<std::string>(v, key);
    } else if (key == "workers") {
      c.workers = get_as<std::size_t>(v, key);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  return config_from_json(j, std::move(base));
}

std::string config_hash(const RunConfig& config) {
  auto j = config_to_json(config);
  j.erase("output_dir");
  j.erase("workers");
  return to_hex(fnv1a64(j.dump()));
}

}  // namespace salience
