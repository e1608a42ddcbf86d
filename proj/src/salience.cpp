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

#include "salience/salience.hpp"

#include <algorithm>
#include <cctype>
#include <iostream>

#include "salience/errors.hpp"

namespace salience {

namespace {

struct MeasureInfo {
  Measure measure;
  std::string_view name;
  std::string_view enum_name;
};

constexpr MeasureInfo kMeasures[] = {
    {Measure::ClusSal, "Clus-Sal", "CLUS_SAL"},
    {Measure::LikeSal, "Like-Sal", "LIKE_SAL"},
    {Measure::NoKnowSal, "No-Know-Sal", "NO_KNOW_SAL"},
    {Measure::LikeImpSal, "Like-Imp-Sal", "LIKE_IMP_SAL"},
    {Measure::LikeClusSal, "Like-Clus-Sal", "LIKE_CLUS_SAL"},
    {Measure::LikeClusImpSal, "Like-Clus-Imp-Sal", "LIKE_CLUS_IMP_SAL"},
    {Measure::KnowSal, "Know-Sal", "KNOW_SAL"},
    {Measure::SwapSal, "Swap-Sal", "SWAP_SAL"},
    {Measure::EmbSurp, "Emb-Surp", "EMB_SURP"},
    {Measure::EmbSal, "Emb-Sal", "EMB_SAL"},
    {Measure::Random, "Random", "RANDOM"},
    {Measure::Ascending, "Ascending", "ASCENDING"},
    {Measure::Descending, "Descending", "DESCENDING"},
};

}  // namespace

std::string_view measure_name(Measure m) {
  for (const auto& info : kMeasures) {
    if (info.measure == m) return info.name;
  }
  return "?";
}

std::optional<Measure> parse_measure(std::string_view name) {
  if (name == "Know-Diff-Sal" || name == "KNOW_DIFF_SAL") return Measure::KnowSal;
  for (const auto& info : kMeasures) {
    if (info.name == name || info.enum_name == name) return info.measure;
  }
  return std::nullopt;
}

const std::vector<Measure>& all_measures() {
  static const std::vector<Measure> all = [] {
    std::vector<Measure> v;
    for (const auto& info : kMeasures) v.push_back(info.measure);
    return v;
  }();
  return all;
}

nlohmann::json profile_to_json(const SalienceProfile& profile) {
  nlohmann::json scores = nlohmann::json::object();
  for (const auto& [m, values] : profile.scores) scores[std::string(measure_name(m))] = values;
  return {{"story_id", profile.story_id},
          {"chapter_id", profile.chapter_id},
          {"scores", std::move(scores)},
          {"fingerprint", profile.scorer_fingerprint},
          {"config_hash", profile.config_hash}};
}

SalienceProfile profile_from_json(const nlohmann::json& j) {
  SalienceProfile p;
  p.story_id = j.value("story_id", "");
  p.chapter_id = j.at("chapter_id").get<std::string>();
  p.scorer_fingerprint = j.value("fingerprint", "");
  p.config_hash = j.value("config_hash", "");
  for (const auto& [name, values] : j.at("scores").items()) {
    const auto m = parse_measure(name);
    if (!m) throw IoError("unknown measure '" + name + "' in profile");
    p.scores[*m] = values.get<std::vector<double>>();
  }
  return p;
}

std::vector<Block> chapter_blocks(const Chapter& chapter, const SalienceContext& ctx) {
  auto blocks = make_blocks(chapter, ctx.window, *ctx.tokenizer);
  for (auto& b : blocks) b.block_id += ctx.block_offset;
  return blocks;
}

namespace {

CoherenceOptions options_of(const SalienceContext& ctx, bool want_embedding) {
  CoherenceOptions o;
  o.context_token_budget = ctx.window.context_token_budget;
  o.tokenizer = ctx.tokenizer;
  o.want_embedding = want_embedding;
  return o;
}

void require_scoring(const SalienceContext& ctx) {
  if (ctx.scorer == nullptr) throw ConfigError("salience context has no scorer");
  if (ctx.embedder == nullptr) throw ConfigError("salience context has no embedder");
}

}  // namespace

RetrievedSet retrieve_for(const Block& block, const SalienceContext& ctx, RetrievalMode mode) {
  if (mode == RetrievalMode::Off) return {};
  return retrieve(query_embedding(block, *ctx.embedder, options_of(ctx, false)), ctx.kb, ctx.memory,
                  ctx.k, mode, ctx.rng);
}

void remember(const Block& block, const SalienceContext& ctx) {
  if (ctx.memory != nullptr) ctx.memory->insert(memory_record(block, *ctx.embedder));
}

Block delete_candidate(const Block& block) {
  Block out = block;
  if (!out.context.empty()) out.context.pop_back();
  return out;
}

Block swap_last_pair(const Block& block) {
  if (block.context.size() < 2) throw ShapeError("swap needs two context sentences");
  Block out = block;
  const std::size_t n = out.context.size();
  std::swap(out.context[n - 1], out.context[n - 2]);
  return out;
}

double embedding_distance(const Vector& a, const Vector& b) {
  if (a.size() == 0 || b.size() == 0 || a.norm() == 0.0 || b.norm() == 0.0) {
    std::cerr << "warning: zero-norm pooled embedding; distance defined as 0\n";
    return 0.0;
  }
  return cosine_distance(a, b);
}

double deletion_salience(const Chapter& chapter, std::size_t t, const SalienceContext& ctx) {
  require_scoring(ctx);
  const auto blocks = chapter_blocks(chapter, ctx);
  if (t >= blocks.size()) return 0.0;
  const Block& block = blocks[t];
  const RetrievedSet retrieved = retrieve_for(block, ctx, ctx.mode);
  const auto opts = options_of(ctx, false);
  const double present = coherence(block, retrieved, *ctx.scorer, opts).avg_log_likelihood;
  const double deleted =
      coherence(delete_candidate(block), retrieved, *ctx.scorer, opts).avg_log_likelihood;
  return present - deleted;
}

double swap_salience(const Chapter& chapter, std::size_t t, const SalienceContext& ctx) {
  require_scoring(ctx);
  const auto blocks = chapter_blocks(chapter, ctx);
  if (t + 1 >= blocks.size()) return 0.0;
  const Block& block = blocks[t + 1];
  if (block.context.size() < 2) return 0.0;
  const RetrievedSet retrieved = retrieve_for(block, ctx, ctx.mode);
  const auto opts = options_of(ctx, false);
  const double original = coherence(block, retrieved, *ctx.scorer, opts).avg_log_likelihood;
  const double swapped =
      coherence(swap_last_pair(block), retrieved, *ctx.scorer, opts).avg_log_likelihood;
  return original - swapped;
}

double knowledge_salience(const Chapter& chapter, std::size_t t, const SalienceContext& ctx,
                          std::optional<RetrievalMode> on_mode) {
  require_scoring(ctx);
  const auto blocks = chapter_blocks(chapter, ctx);
  if (t >= blocks.size()) return 0.0;
  const Block& block = blocks[t];
  const auto opts = options_of(ctx, false);
  const RetrievedSet on = retrieve_for(block, ctx, on_mode.value_or(ctx.mode));
  const double with = coherence(block, on, *ctx.scorer, opts).avg_log_likelihood;
  const double without = coherence(block, RetrievedSet{}, *ctx.scorer, opts).avg_log_likelihood;
  return with - without;
}

double embedding_salience(const Chapter& chapter, std::size_t t, const SalienceContext& ctx) {
  require_scoring(ctx);
  const auto blocks = chapter_blocks(chapter, ctx);
  if (t >= blocks.size()) return 0.0;
  const Block& block = blocks[t];
  const RetrievedSet retrieved = retrieve_for(block, ctx, ctx.mode);
  const auto opts = options_of(ctx, true);
  const Vector present = coherence(block, retrieved, *ctx.scorer, opts).pooled_embedding;
  const Vector deleted =
      coherence(delete_candidate(block), retrieved, *ctx.scorer, opts).pooled_embedding;
  return embedding_distance(present, deleted);
}

std::vector<double> ely_surprise_from_embeddings(std::span<const Vector> block_embeddings,
                                                 std::size_t sentence_count) {
  std::vector<double> out(sentence_count, 0.0);
  for (std::size_t b = 1; b < block_embeddings.size() && b < sentence_count; ++b) {
    out[b] = embedding_distance(block_embeddings[b], block_embeddings[b - 1]);
  }
  return out;
}

std::vector<double> ely_surprise(const Chapter& chapter, const SalienceContext& ctx) {
  require_scoring(ctx);
  const auto blocks = chapter_blocks(chapter, ctx);
  const auto opts = options_of(ctx, true);
  std::vector<Vector> embeddings;
  embeddings.reserve(blocks.size());
  for (const auto& block : blocks) {
    const RetrievedSet retrieved = retrieve_for(block, ctx, ctx.mode);
    embeddings.push_back(coherence(block, retrieved, *ctx.scorer, opts).pooled_embedding);
    remember(block, ctx);
  }
  return ely_surprise_from_embeddings(embeddings, chapter.sentences.size());
}

std::vector<double> sentiment_adjust(std::span<const double> scores,
                                     std::span<const Sentence> sentences,
                                     const SentimentProvider& provider) {
  if (scores.size() != sentences.size()) throw ShapeError("sentiment_adjust: length mismatch");
  std::vector<double> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = scores[i] * (1.0 + std::abs(provider.score(sentences[i].text)));
  }
  return out;
}

std::vector<double> combine_like_clus(std::span<const double> like, std::span<const double> clus) {
  if (like.size() != clus.size()) throw ShapeError("combine_like_clus: length mismatch");
  const auto n = static_cast<Eigen::Index>(like.size());
  const Vector combined = zscore(Eigen::Map<const Vector>(clus.data(), n)) +
                          2.0 * zscore(Eigen::Map<const Vector>(like.data(), n));
  return {combined.data(), combined.data() + combined.size()};
}

namespace {

bool needs_any(const MeasureSet& m, std::initializer_list<Measure> which) {
  return std::any_of(which.begin(), which.end(), [&](Measure x) { return m.count(x) > 0; });
}

}  // namespace

SalienceProfile profile_chapter(const Chapter& chapter, const MeasureSet& measures,
                                const SalienceContext& ctx, std::uint64_t seed) {
  const std::size_t n = chapter.sentences.size();
  if (n == 0) throw ShapeError("chapter '" + chapter.chapter_id + "' has no sentences");

  SalienceProfile profile;
  profile.chapter_id = chapter.chapter_id;

  const bool want_like = needs_any(measures, {Measure::LikeSal, Measure::LikeImpSal,
                                              Measure::LikeClusSal, Measure::LikeClusImpSal});
  const bool want_emb_sal = measures.count(Measure::EmbSal) > 0;
  const bool want_surp = measures.count(Measure::EmbSurp) > 0;
  const bool want_swap = measures.count(Measure::SwapSal) > 0;
  const bool want_know = measures.count(Measure::KnowSal) > 0;
  const bool want_noknow = measures.count(Measure::NoKnowSal) > 0;
  const bool want_clus = needs_any(measures, {Measure::ClusSal, Measure::LikeClusSal,
                                              Measure::LikeClusImpSal});
  const bool need_main = want_like || want_emb_sal || want_surp || want_swap || want_know;
  const bool need_off = want_know || want_noknow;
  const bool need_embedding = want_emb_sal || want_surp;

  std::vector<double> like(n, 0.0), noknow(n, 0.0), know(n, 0.0), swap(n, 0.0),
      emb_sal(n, 0.0);
  std::vector<Vector> block_embeddings;

  if (need_main || need_off) {
    require_scoring(ctx);
    profile.scorer_fingerprint = ctx.scorer->fingerprint();
    const auto blocks = chapter_blocks(chapter, ctx);
    const auto main_opts = options_of(ctx, need_embedding);
    const auto plain_opts = options_of(ctx, false);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const Block& block = blocks[b];
      double present_avg = 0.0;
      if (need_main) {
        const RetrievedSet retrieved = retrieve_for(block, ctx, ctx.mode);
        const CoherenceResult present = coherence(block, retrieved, *ctx.scorer, main_opts);
        present_avg = present.avg_log_likelihood;
        if (want_like || want_emb_sal) {
          const CoherenceResult deleted =
              coherence(delete_candidate(block), retrieved, *ctx.scorer, main_opts);
          like[b] = present.avg_log_likelihood - deleted.avg_log_likelihood;
          if (want_emb_sal) emb_sal[b] = embedding_distance(present.pooled_embedding, deleted.pooled_embedding);
        }
        if (want_swap && b >= 1 && block.context.size() >= 2) {
          const CoherenceResult swapped =
              coherence(swap_last_pair(block), retrieved, *ctx.scorer, plain_opts);
          swap[b - 1] = present.avg_log_likelihood - swapped.avg_log_likelihood;
        }
        if (want_surp) block_embeddings.push_back(present.pooled_embedding);
        if (ctx.on_retrieval) ctx.on_retrieval(block, retrieved);
      }
      if (need_off) {
        const RetrievedSet none;
        const double off_present = coherence(block, none, *ctx.scorer, plain_opts).avg_log_likelihood;
        if (want_noknow) {
          noknow[b] = off_present -
                      coherence(delete_candidate(block), none, *ctx.scorer, plain_opts).avg_log_likelihood;
        }
        if (want_know) know[b] = present_avg - off_present;
      }
      remember(block, ctx);
    }
  }

  std::vector<double> clus;
  if (want_clus) {
    if (ctx.embedder == nullptr) throw ConfigError("Clus-Sal needs an embedder");
    std::vector<std::string> texts;
    texts.reserve(n);
    for (const auto& s : chapter.sentences) texts.push_back(s.text);
    ClusterConfig cc = ctx.cluster;
    cc.seed = derive_seed(seed, chapter.chapter_id, "clus-sal");
    clus = cluster_salience(ctx.embedder->embed_batch(texts), cc, ctx.cluster_polarity);
  }
  const SentimentProvider* sentiment = ctx.sentiment;
  LexiconSentiment builtin;
  if (sentiment == nullptr) sentiment = &builtin;

  for (Measure m : measures) {
    std::vector<double> v;
    switch (m) {
      case Measure::ClusSal: v = clus; break;
      case Measure::LikeSal: v = like; break;
      case Measure::NoKnowSal: v = noknow; break;
      case Measure::LikeImpSal: v = sentiment_adjust(like, chapter.sentences, *sentiment); break;
      case Measure::LikeClusSal: v = combine_like_clus(like, clus); break;
      case Measure::LikeClusImpSal:
        v = sentiment_adjust(combine_like_clus(like, clus), chapter.sentences, *sentiment);
        break;
      case Measure::KnowSal: v = know; break;
      case Measure::SwapSal: v = swap; break;
      case Measure::EmbSurp: v = ely_surprise_from_embeddings(block_embeddings, n); break;
      case Measure::EmbSal: v = emb_sal; break;
      case Measure::Random:
        v = positional_baseline(n, PositionalKind::Random, derive_seed(seed, chapter.chapter_id, "random"));
        break;
      case Measure::Ascending: v = positional_baseline(n, PositionalKind::Ascending); break;
      case Measure::Descending: v = positional_baseline(n, PositionalKind::Descending); break;
    }
    profile.scores[m] = std::move(v);
  }
  return profile;
}

void replay_chapter(const Chapter& chapter, const MeasureSet& measures,
                    const SalienceContext& ctx) {
  const bool need_main = needs_any(measures, {Measure::LikeSal, Measure::LikeImpSal, Measure::LikeClusSal,
                                              Measure::LikeClusImpSal, Measure::EmbSal, Measure::EmbSurp,
                                              Measure::SwapSal, Measure::KnowSal});
  const bool need_off = needs_any(measures, {Measure::KnowSal, Measure::NoKnowSal});
  if (!need_main && !need_off) return;
  for (const auto& block : chapter_blocks(chapter, ctx)) {
    if (need_main) (void)retrieve_for(block, ctx, ctx.mode);
    remember(block, ctx);
  }
}

}  // namespace salience
