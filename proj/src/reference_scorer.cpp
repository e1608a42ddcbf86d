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

#include "salience/reference_scorer.hpp"

#include <cmath>
#include <cstring>
#include <set>
#include <sstream>
#include <unordered_set>

#include "salience/errors.hpp"
#include "salience/rng.hpp"
#include "salience/text.hpp"

namespace salience {

namespace {

using Ids = std::vector<std::uint32_t>;

std::string key_of(const std::uint32_t* ids, std::size_t n) {
  std::string k(n * sizeof(std::uint32_t), '\0');
  std::memcpy(k.data(), ids, k.size());
  return k;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void validate(const NGramConfig& config) {
  if (config.order < 1) throw ConfigError("n-gram order must be >= 1");
  if (!(config.smoothing > 0.0)) throw ConfigError("n-gram smoothing must be > 0");
  if (config.boost < 0.0) throw ConfigError("n-gram boost must be >= 0");
  if (config.embedding_dim < 1) throw ConfigError("embedding dimension must be >= 1");
}

}  // namespace

NGramScorer::NGramScorer(std::span<const Story> corpus, NGramConfig config)
    : config_(config) {
  validate(config_);
  std::vector<std::vector<std::string>> streams;
  for (const auto& story : corpus) {
    for (const auto& chapter : story.chapters) {
      std::vector<std::string> stream;
      for (const auto& s : chapter.sentences) {
        for (auto& tok : word_tokens(s.text)) stream.push_back(std::move(tok));
      }
      if (!stream.empty()) streams.push_back(std::move(stream));
    }
  }
  train(streams);
}

NGramScorer::NGramScorer(std::span<const std::string> documents, NGramConfig config)
    : config_(config) {
  validate(config_);
  std::vector<std::vector<std::string>> streams;
  for (const auto& doc : documents) {
    auto stream = word_tokens(doc);
    if (!stream.empty()) streams.push_back(std::move(stream));
  }
  train(streams);
}

void NGramScorer::train(const std::vector<std::vector<std::string>>& streams) {
  if (streams.empty()) throw EmptyCorpus("reference scorer needs a non-empty training corpus");
  std::uint64_t h = fnv1a64("");
  const auto n = static_cast<std::size_t>(config_.order);
  for (const auto& stream : streams) {
    Ids ids;
    ids.reserve(stream.size());
    for (const auto& tok : stream) {
      auto [it, inserted] = vocab_.emplace(tok, static_cast<std::uint32_t>(vocab_.size()));
      ids.push_back(it->second);
      h = fnv1a64(tok, h);
      h = fnv1a64(" ", h);
    }
    h = fnv1a64("\n", h);
    total_tokens_ += ids.size();
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t m = 1; m <= n && i + m <= ids.size(); ++m) {
        ++counts_[key_of(&ids[i], m)];
        if (m >= 2) ++history_totals_[key_of(&ids[i], m - 1)];
      }
    }
  }
  corpus_hash_ = to_hex(h);
}

std::uint64_t NGramScorer::count(std::span<const std::string> ngram) const {
  Ids ids;
  for (const auto& tok : ngram) {
    auto it = vocab_.find(tok);
    if (it == vocab_.end()) return 0;
    ids.push_back(it->second);
  }
  if (ids.empty()) return total_tokens_;
  auto it = counts_.find(key_of(ids.data(), ids.size()));
  return it == counts_.end() ? 0 : it->second;
}

std::string NGramScorer::fingerprint() const {
  return "ngram-reference/order=" + std::to_string(config_.order) +
         "/alpha=" + format_double(config_.smoothing) +
         "/boost=" + format_double(config_.boost) +
         "/dim=" + std::to_string(config_.embedding_dim) +
         "/corpus=" + corpus_hash_;
}

ScoreResponse NGramScorer::score(const ScoreRequest& request) const {
  const auto n = static_cast<std::size_t>(config_.order);
  const auto V = static_cast<double>(vocab_.size() + 1);
  const double alpha = config_.smoothing;
  const double beta = config_.boost;

  // Request-local ids for out-of-vocabulary tokens; never match corpus keys.
  std::unordered_map<std::string, std::uint32_t> local;
  auto id_of = [&](const std::string& tok) -> std::uint32_t {
    auto it = vocab_.find(tok);
    if (it != vocab_.end()) return it->second;
    auto [lit, inserted] = local.emplace(
        tok, static_cast<std::uint32_t>(vocab_.size() + 1 + local.size()));
    return lit->second;
  };
  struct Segment {
    std::vector<std::string> tokens;
    Ids ids;
  };
  auto segment_of = [&](std::string_view text) {
    Segment s;
    s.tokens = word_tokens(text);
    for (const auto& t : s.tokens) s.ids.push_back(id_of(t));
    return s;
  };

  std::vector<Segment> context_lines;
  {
    std::size_t b = 0;
    const std::string& ctx = request.context;
    while (b <= ctx.size()) {
      std::size_t e = ctx.find('\n', b);
      if (e == std::string::npos) e = ctx.size();
      Segment s = segment_of(std::string_view(ctx).substr(b, e - b));
      if (!s.ids.empty()) context_lines.push_back(std::move(s));
      b = e + 1;
    }
  }
  const Segment target = segment_of(request.target);

  // Conditioning n-grams of one segment, all orders 2..n.
  auto add_cond = [&](const Segment& s, std::unordered_set<std::string>& cond,
                      std::set<std::string>* top_order_strings) {
    for (std::size_t i = 0; i < s.ids.size(); ++i) {
      for (std::size_t m = 2; m <= n && i + m <= s.ids.size(); ++m) {
        cond.insert(key_of(&s.ids[i], m));
        if (top_order_strings != nullptr && m == n) {
          std::string joined;
          for (std::size_t j = 0; j < m; ++j) {
            if (j) joined.push_back('\x1f');
            joined += s.tokens[i + j];
          }
          top_order_strings->insert(std::move(joined));
        }
      }
    }
  };

  std::unordered_set<std::string> context_cond;
  std::set<std::string> context_strings;
  for (const auto& line : context_lines) {
    add_cond(line, context_cond, request.want_embedding ? &context_strings : nullptr);
  }

  const std::size_t rows = std::max<std::size_t>(1, request.passages.size());
  const auto T = static_cast<Eigen::Index>(target.ids.size());
  ScoreResponse response;
  response.fingerprint = fingerprint();
  response.logprobs.resize(static_cast<Eigen::Index>(rows), T);
  if (request.want_embedding) {
    response.embeddings = Matrix::Zero(static_cast<Eigen::Index>(rows), config_.embedding_dim);
  }

  for (std::size_t r = 0; r < rows; ++r) {
    const bool has_passage = !request.passages.empty();
    Segment passage;
    if (has_passage) passage = segment_of(request.passages[r]);

    std::unordered_set<std::string> cond = context_cond;
    std::set<std::string> cond_strings;
    if (request.want_embedding) cond_strings = context_strings;
    add_cond(passage, cond, request.want_embedding ? &cond_strings : nullptr);

    std::unordered_map<std::string, std::uint64_t> cond_fanout;
    for (const auto& k : cond) {
      ++cond_fanout[k.substr(0, k.size() - sizeof(std::uint32_t))];
    }

    // Token stream: passage, context lines, then the target.
    Ids stream = passage.ids;
    for (const auto& line : context_lines) stream.insert(stream.end(), line.ids.begin(), line.ids.end());

    for (Eigen::Index t = 0; t < T; ++t) {
      const std::uint32_t w = target.ids[static_cast<std::size_t>(t)];
      const std::size_t hist = std::min(n - 1, stream.size());
      double p;
      if (hist == 0) {
        const std::string key = key_of(&w, 1);
        auto it = counts_.find(key);
        const double c = it == counts_.end() ? 0.0 : static_cast<double>(it->second);
        p = (c + alpha) / (static_cast<double>(total_tokens_) + alpha * V);
      } else {
        Ids gram(stream.end() - static_cast<std::ptrdiff_t>(hist), stream.end());
        const std::string hkey = key_of(gram.data(), gram.size());
        gram.push_back(w);
        const std::string gkey = key_of(gram.data(), gram.size());
        auto cit = counts_.find(gkey);
        auto hit = history_totals_.find(hkey);
        auto fit = cond_fanout.find(hkey);
        const double c = cit == counts_.end() ? 0.0 : static_cast<double>(cit->second);
        const double ch = hit == history_totals_.end() ? 0.0 : static_cast<double>(hit->second);
        const double in_cond = cond.count(gkey) ? 1.0 : 0.0;
        const double fan = fit == cond_fanout.end() ? 0.0 : static_cast<double>(fit->second);
        p = (c + beta * in_cond + alpha) / (ch + beta * fan + alpha * V);
      }
      response.logprobs(static_cast<Eigen::Index>(r), t) = std::min(0.0, std::log(p));
      stream.push_back(w);
    }

    if (request.want_embedding) {
      Vector e = Vector::Zero(config_.embedding_dim);
      for (const auto& tok : target.tokens) e(hash_bucket(tok, config_.embedding_dim)) += 1.0;
      if (n >= 2) {
        for (const auto& g : cond_strings) e(hash_bucket("ng:" + g, config_.embedding_dim)) += 1.0;
      }
      response.embeddings->row(static_cast<Eigen::Index>(r)) = l2_normalized(e).transpose();
    }
  }
  return response;
}

}  // namespace salience
