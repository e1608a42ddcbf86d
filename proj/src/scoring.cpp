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

#include "salience/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "salience/errors.hpp"

namespace salience {

void ScoreResponse::validate(std::size_t passage_count) const {
  const auto rows = static_cast<Eigen::Index>(std::max<std::size_t>(1, passage_count));
  if (logprobs.rows() != rows) {
    throw ProtocolError("logprobs", "expected " + std::to_string(rows) + " rows, got " +
                                        std::to_string(logprobs.rows()));
  }
  if (!all_finite(logprobs)) throw ProtocolError("logprobs", "non-finite entry");
  if ((logprobs.array() > 0.0).any()) throw ProtocolError("logprobs", "entry > 0");
  if (embeddings) {
    if (embeddings->rows() != rows) throw ProtocolError("embeddings", "row count differs from logprobs");
    if (!all_finite(*embeddings)) throw ProtocolError("embeddings", "non-finite entry");
  }
}

Vector response_weights(const RetrievedSet& retrieved) {
  if (retrieved.empty()) return Vector::Ones(1);
  return retrieved.weights();
}

CoherenceResult coherence_from_response(const ScoreResponse& response,
                                        const Vector& weights) {
  CoherenceResult out;
  out.token_count = response.token_count();
  if (out.token_count > 0) {
    const Vector marginal = marginalize(response.logprobs, weights);
    out.avg_log_likelihood = marginal.sum() / static_cast<double>(out.token_count);
  }
  if (response.embeddings) {
    out.pooled_embedding = response.embeddings->transpose() * weights;
  }
  return out;
}

ScoreRequest make_request(const Block& block, const RetrievedSet& retrieved,
                          const CoherenceOptions& options) {
  ScoreRequest request;
  request.context = render_context(block.context, options.context_token_budget, *options.tokenizer);
  request.passages = retrieved.texts();
  request.target = render_target(block.target);
  request.want_embedding = options.want_embedding;
  return request;
}

CoherenceResult coherence(const Block& block, const RetrievedSet& retrieved,
                          const Scorer& scorer, const CoherenceOptions& options) {
  const ScoreRequest request = make_request(block, retrieved, options);
  ScoreResponse response;
  try {
    response = scorer.score(request);
  } catch (const ScorerUnavailable& e) {
    throw ScorerUnavailable(e.cause(), static_cast<long long>(block.block_id));
  }
  response.validate(request.passages.size());
  if (options.want_embedding && !response.embeddings) {
    throw ProtocolError("embeddings", "requested but missing");
  }
  return coherence_from_response(response, response_weights(retrieved));
}

PassageRecord memory_record(const Block& block, const Embedder& embedder) {
  PassageRecord r;
  r.passage_id = "mem:" + std::to_string(block.block_id);
  r.text = render_target(block.target);
  r.embedding = embedder.embed(r.text);
  r.source = Source::Memory;
  r.memory_id = static_cast<std::int64_t>(block.block_id);
  return r;
}

Vector query_embedding(const Block& block, const Embedder& embedder,
                       const CoherenceOptions& options) {
  return embedder.embed(render_context(block.context, options.context_token_budget, *options.tokenizer));
}

std::vector<std::vector<Block>> make_story_blocks(const Story& story,
                                                  const WindowSpec& spec,
                                                  const Tokenizer& tokenizer) {
  std::vector<std::vector<Block>> out;
  std::size_t offset = 0;
  for (const auto& chapter : story.chapters) {
    auto blocks = make_blocks(chapter, spec, tokenizer);
    for (auto& b : blocks) b.block_id += offset;
    offset += chapter.sentences.size();
    out.push_back(std::move(blocks));
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

PerplexityReport perplexity(std::span<const Block> blocks, RetrievalMode mode,
                            const Scorer& scorer, const RetrievalContext& retrieval,
                            const CoherenceOptions& options) {
  if (blocks.empty()) throw ConfigError("perplexity needs at least one block");
  if (retrieval.embedder == nullptr && (mode != RetrievalMode::Off || retrieval.memory != nullptr)) {
    throw ConfigError("perplexity with retrieval or memory needs an embedder");
  }
  CoherenceOptions opts = options;
  opts.want_embedding = false;

  PerplexityReport report;
  report.mode = mode;
  report.fingerprint = scorer.fingerprint();
  report.per_block.reserve(blocks.size());
  for (const auto& block : blocks) {
    RetrievedSet retrieved;
    if (mode != RetrievalMode::Off) {
      retrieved = retrieve(query_embedding(block, *retrieval.embedder, opts), retrieval.kb,
                           retrieval.memory, retrieval.k, mode, retrieval.rng);
    }
    const CoherenceResult c = coherence(block, retrieved, scorer, opts);
    report.per_block.push_back(std::exp(-c.avg_log_likelihood));
    if (retrieval.memory != nullptr) retrieval.memory->insert(memory_record(block, *retrieval.embedder));
  }
  report.median = median(report.per_block);
  return report;
}

nlohmann::json request_to_json(const ScoreRequest& request, const std::string& id) {
  return {{"id", id},
          {"context", request.context},
          {"passages", request.passages},
          {"target", request.target},
          {"want_embedding", request.want_embedding}};
}

ScoreRequest request_from_json(const nlohmann::json& j) {
  ScoreRequest r;
  r.context = j.at("context").get<std::string>();
  r.passages = j.at("passages").get<std::vector<std::string>>();
  r.target = j.at("target").get<std::string>();
  r.want_embedding = j.value("want_embedding", false);
  return r;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j, const char* field,
                        std::optional<Eigen::Index> cols) {
  if (!j.is_array()) throw ProtocolError(field, "expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index width = cols.value_or(rows > 0 && j[0].is_array() ? static_cast<Eigen::Index>(j[0].size()) : 0);
  Matrix m(rows, width);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array()) throw ProtocolError(field, "row " + std::to_string(r) + " is not an array");
    if (static_cast<Eigen::Index>(row.size()) != width) {
      throw ProtocolError(field, "row " + std::to_string(r) + " has length " +
                                     std::to_string(row.size()) + ", expected " + std::to_string(width));
    }
    for (Eigen::Index c = 0; c < width; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw ProtocolError(field, "non-numeric entry");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

}  // namespace

nlohmann::json response_to_json(const ScoreResponse& response, const std::string& id) {
  nlohmann::json j = {{"id", id},
                      {"logprobs", matrix_to_json(response.logprobs)},
                      {"token_count", response.token_count()},
                      {"embeddings", response.embeddings ? matrix_to_json(*response.embeddings)
                                                         : nlohmann::json(nullptr)},
                      {"fingerprint", response.fingerprint}};
  if (response.truncated) j["truncated"] = true;
  return j;
}

ScoreResponse response_from_json(const nlohmann::json& j, const std::string& expected_id,
                                 std::size_t passage_count, bool want_embedding) {
  if (!j.is_object()) throw ProtocolError("<root>", "response is not a JSON object");
  if (!j.contains("id")) throw ProtocolError("id", "missing");
  const auto& id = j.at("id");
  const std::string got_id = id.is_string() ? id.get<std::string>() : id.dump();
  if (got_id != expected_id) throw ProtocolError("id", "expected '" + expected_id + "', got '" + got_id + "'");
  if (!j.contains("token_count") || !j.at("token_count").is_number_integer() ||
      j.at("token_count").get<long long>() < 0) {
    throw ProtocolError("token_count", "missing or not a non-negative integer");
  }
  if (!j.contains("fingerprint") || !j.at("fingerprint").is_string()) {
    throw ProtocolError("fingerprint", "missing or not a string");
  }
  if (!j.contains("logprobs")) throw ProtocolError("logprobs", "missing");
  const auto token_count = static_cast<Eigen::Index>(j.at("token_count").get<long long>());

  ScoreResponse r;
  r.logprobs = matrix_from_json(j.at("logprobs"), "logprobs", token_count);
  r.fingerprint = j.at("fingerprint").get<std::string>();
  r.truncated = j.value("truncated", false);
  if (j.contains("embeddings") && !j.at("embeddings").is_null()) {
    r.embeddings = matrix_from_json(j.at("embeddings"), "embeddings", std::nullopt);
  } else if (want_embedding) {
    throw ProtocolError("embeddings", "requested but null");
  }
  r.validate(passage_count);
  return r;
}

std::size_t ScorerTokenizer::count_tokens(std::string_view text) const {
  ScoreRequest request;
  request.target = std::string(text);
  return static_cast<std::size_t>(scorer_.score(request).token_count());
}

Vector ScorerEmbedder::embed(std::string_view text) const {
  ScoreRequest request;
  request.target = std::string(text);
  request.want_embedding = true;
  const ScoreResponse r = scorer_.score(request);
  if (!r.embeddings || r.embeddings->rows() < 1) throw ProtocolError("embeddings", "requested but missing");
  if (r.embeddings->cols() != dimension_) throw ProtocolError("embeddings", "unexpected dimension");
  return r.embeddings->row(0).transpose();
}

}  // namespace salience
