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

#include "salience/cli.hpp"

#include <algorithm>
#include <cctype>
#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "salience/alignment.hpp"
#include "salience/config.hpp"
#include "salience/corpus.hpp"
#include "salience/embedding.hpp"
#include "salience/errors.hpp"
#include "salience/evaluation.hpp"
#include "salience/reference_scorer.hpp"
#include "salience/remote_scorer.hpp"
#include "salience/retrieval.hpp"
#include "salience/salience.hpp"
#include "salience/scoring.hpp"
#include "salience/text.hpp"

namespace salience {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// A command-line problem; reported with exit code 2.
class UsageError : public Error {
 public:
  UsageError(std::string flag, const std::string& message)
      : Error(message), flag_(std::move(flag)) {}
  const char* kind() const noexcept override { return "UsageError"; }
  const std::string& flag() const { return flag_; }

 private:
  std::string flag_;
};

struct GlobalFlags {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> out;
};

struct IngestFlags {
  std::vector<std::string> inputs;
  std::string story_id;
  std::string title;
  std::string chapter_regex;
  std::string output;
};

struct BuildKbFlags {
  std::string input;
  std::optional<Eigen::Index> dim;
  std::string out;
};

struct LabelFlags {
  std::string input;
  std::optional<double> rho, mu, theta;
  std::optional<std::size_t> max_targets;
};

struct SalienceFlags {
  std::string input;
  std::string measures;
  std::optional<std::string> mode;
  std::optional<std::size_t> k;
  std::optional<std::string> kb;
  bool resume = false;
  bool force = false;
  bool retrieval_dump = false;
};

struct PerplexityFlags {
  std::string input;
  std::vector<std::string> modes;
  std::optional<std::size_t> k;
  std::optional<std::string> kb;
};

struct EvaluateFlags {
  std::string profiles;
  std::string labels;
};

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::string read_file(const fs::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes through a temporary so readers never observe a partial file.
void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::vector<Story> load_stories(const fs::path& path) {
  auto in = open_in(path);
  auto stories = read_story_jsonl(in);
  if (stories.empty()) throw EmptyCorpus("no stories in " + path.string());
  return stories;
}

std::vector<Measure> parse_measure_list(const std::string& text) {
  std::vector<Measure> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto name = std::string(trim(item));
    if (name.empty()) continue;
    const auto m = parse_measure(name);
    if (!m) throw UsageError("--measures", "unknown measure '" + name + "' in --measures");
    if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
  }
  if (out.empty()) throw UsageError("--measures", "--measures names no measure");
  return out;
}

RetrievalMode parse_mode_flag(const std::string& flag, const std::string& value) {
  try {
    return parse_retrieval_mode(value);
  } catch (const Error&) {
    throw UsageError(flag, "unknown retrieval mode '" + value + "' in " + flag);
  }
}

RunConfig base_config(const GlobalFlags& g) {
  RunConfig c = g.config_file.empty() ? RunConfig{} : load_config(g.config_file);
  if (g.seed) c.seed = *g.seed;
  if (g.workers) c.workers = *g.workers;
  if (g.out) c.output_dir = *g.out;
  if (const char* env = std::getenv("SALIENCE_SCORER_ENDPOINT"); env != nullptr && *env != '\0') {
    c.scorer = env;
  }
  return c;
}

std::unique_ptr<Scorer> make_scorer(const RunConfig& c, std::span<const Story> input) {
  if (c.scorer == "reference") {
    NGramConfig ng;
    ng.order = c.reference_order;
    ng.smoothing = c.reference_smoothing;
    ng.boost = c.reference_boost;
    ng.embedding_dim = c.embedding_dim;
    if (!c.reference_corpus.empty()) {
      const auto corpus = load_stories(c.reference_corpus);
      return std::make_unique<NGramScorer>(corpus, ng);
    }
    return std::make_unique<NGramScorer>(input, ng);
  }
  RemoteScorerOptions o;
  o.endpoint = c.scorer;
  o.timeout = std::chrono::milliseconds(c.scorer_timeout_ms);
  o.max_retries = c.scorer_retries;
  return std::make_unique<RemoteScorer>(o);
}

std::optional<KnowledgeBase> load_kb(const RunConfig& c) {
  if (c.kb_path.empty()) return std::nullopt;
  auto kb = KnowledgeBase::load(c.kb_path);
  if (kb.dimension() != c.embedding_dim) {
    throw ConfigError("knowledge base dimension " + std::to_string(kb.dimension()) +
                      " differs from embedding_dim " + std::to_string(c.embedding_dim));
  }
  return kb;
}

// ---------------------------------------------------------------- ingest

int cmd_ingest(const RunConfig& c, const IngestFlags& f, std::ostream& out) {
  if (f.inputs.size() > 1 && !f.story_id.empty()) {
    throw UsageError("--story-id", "--story-id needs exactly one --input");
  }
  const std::string hash = config_hash(c);
  std::string content;
  std::size_t chapters = 0, sentences = 0;
  for (const auto& input : f.inputs) {
    const std::string raw = read_file(input);
    const std::string id = f.story_id.empty() ? fs::path(input).stem().string() : f.story_id;
    Story story = f.chapter_regex.empty()
                      ? ingest(raw, id)
                      : ingest_with_headings(raw, id, std::regex(f.chapter_regex, std::regex::multiline));
    story.title = f.title.empty() ? id : f.title;
    for (const auto& chapter : story.chapters) {
      json record = chapter_to_json(story, chapter);
      record["config_hash"] = hash;
      content += record.dump() + "\n";
      sentences += chapter.sentences.size();
    }
    chapters += story.chapters.size();
  }
  const fs::path target = f.output.empty() ? fs::path(c.output_dir) / "stories.jsonl" : fs::path(f.output);
  write_file(target, content);
  out << json{{"stories", f.inputs.size()}, {"chapters", chapters}, {"sentences", sentences},
              {"output", target.string()}}
             .dump()
      << "\n";
  return 0;
}

// ---------------------------------------------------------------- build-kb

int cmd_build_kb(RunConfig c, const BuildKbFlags& f, std::ostream& out) {
  if (f.dim) c.embedding_dim = *f.dim;
  c.validate();
  std::vector<TextPassage> passages;
  if (fs::path(f.input).extension() == ".jsonl") {
    auto in = open_in(f.input);
    passages = read_passages_jsonl(in);
  } else {
    passages = chunk_document(fs::path(f.input).stem().string(), read_file(f.input));
  }
  if (passages.empty()) throw EmptyCorpus("no passages in " + f.input);
  const HashedBowEmbedder embedder(c.embedding_dim);
  const auto kb = KnowledgeBase::build(passages, embedder);
  const fs::path dir = f.out.empty() ? fs::path(c.output_dir) / "kb" : fs::path(f.out);
  fs::create_directories(dir);
  kb.save(dir);
  const json meta{{"config_hash", config_hash(c)},
                  {"fingerprint", embedder.fingerprint()},
                  {"dimension", c.embedding_dim},
                  {"count", kb.size()}};
  write_file(dir / "kb_meta.json", meta.dump(2) + "\n");
  out << meta.dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------- label

int cmd_label(RunConfig c, const LabelFlags& f, std::ostream& out) {
  if (f.rho) c.alignment.window_fraction = *f.rho;
  if (f.mu) c.alignment.min_similarity = *f.mu;
  if (f.theta) c.alignment.max_drop = *f.theta;
  if (f.max_targets) c.alignment.max_targets = *f.max_targets;
  c.validate();
  auto in = open_in(f.input);
  const auto paired = read_paired_jsonl(in);
  const HashedBowEmbedder embedder(c.embedding_dim);
  const auto labeled = label_corpus(paired, embedder, c.alignment);
  json doc = alignment_to_json(labeled);
  doc["config_hash"] = config_hash(c);
  doc["fingerprint"] = embedder.fingerprint();
  doc["stats"] = stats_to_json(labeled.stats);
  write_file(fs::path(c.output_dir) / "alignment.json", doc.dump(2) + "\n");
  out << stats_to_json(labeled.stats).dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------- salience

struct ProfileKey {
  std::string story_id;
  std::string chapter_id;
  auto operator<=>(const ProfileKey&) const = default;
};

struct StoryResult {
  std::vector<std::pair<ProfileKey, std::string>> records;  // new profile lines
  std::string dump;                                         // retrieval dump lines
  std::exception_ptr error;
  bool done = false;
};

std::map<ProfileKey, std::string> read_existing_profiles(const fs::path& path,
                                                         const std::string& hash, bool force) {
  std::map<ProfileKey, std::string> kept;
  if (!fs::exists(path)) return kept;
  auto in = open_in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      continue;  // a torn final line from an interrupted run
    }
    const std::string record_hash = j.value("config_hash", "");
    if (record_hash != hash) {
      if (!force) {
        throw ConfigError("existing output " + path.string() + " has config_hash " + record_hash +
                          " but the current config_hash is " + hash + "; pass --force to recompute");
      }
      continue;
    }
    kept[{j.value("story_id", ""), j.value("chapter_id", "")}] = line;
  }
  return kept;
}

int cmd_salience(RunConfig c, const SalienceFlags& f, std::ostream& out) {
  if (!f.measures.empty()) c.measures = parse_measure_list(f.measures);
  if (f.mode) c.retrieval_mode = parse_mode_flag("--mode", *f.mode);
  if (f.k) c.k = *f.k;
  if (f.kb) c.kb_path = *f.kb;
  c.validate();

  const auto stories = load_stories(f.input);
  const auto scorer = make_scorer(c, stories);
  const HashedBowEmbedder embedder(c.embedding_dim);
  const auto kb = load_kb(c);
  const LexiconSentiment sentiment;
  const std::string hash = config_hash(c);
  const MeasureSet measures(c.measures.begin(), c.measures.end());

  const fs::path dir = c.output_dir;
  fs::create_directories(dir);
  const fs::path profile_path = dir / "salience.jsonl";
  const fs::path dump_path = dir / "retrieval.jsonl";
  std::map<ProfileKey, std::string> existing;
  if (f.resume) existing = read_existing_profiles(profile_path, hash, f.force);

  // Progress file: kept records first, new ones appended as stories finish.
  {
    std::ofstream progress(profile_path, std::ios::binary | std::ios::trunc);
    for (const auto& [key, line] : existing) progress << line << "\n";
  }

  std::vector<StoryResult> results(stories.size());
  std::mutex mutex;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  auto work = [&] {
    for (std::size_t s = next++; s < stories.size(); s = next++) {
      StoryResult result;
      if (!failed) {
        try {
          const Story& story = stories[s];
          MemoryCache memory(c.memory_capacity, c.memory_policy);
          Rng rng(derive_seed(c.seed, story.story_id, "retrieval"));
          SalienceContext ctx;
          ctx.scorer = scorer.get();
          ctx.embedder = &embedder;
          ctx.kb = kb ? &*kb : nullptr;
          ctx.memory = &memory;
          ctx.rng = &rng;
          ctx.sentiment = &sentiment;
          ctx.window = c.window;
          ctx.k = c.k;
          ctx.mode = c.retrieval_mode;
          ctx.cluster.sentences_per_cluster = c.sentences_per_cluster;
          ctx.cluster_polarity = c.cluster_polarity;
          const std::uint64_t story_seed = derive_seed(c.seed, story.story_id, "salience");
          for (const auto& chapter : story.chapters) {
            const ProfileKey key{story.story_id, chapter.chapter_id};
            if (existing.count(key) > 0) {
              ctx.on_retrieval = nullptr;
              replay_chapter(chapter, measures, ctx);
            } else {
              if (f.retrieval_dump) {
                ctx.on_retrieval = [&](const Block& block, const RetrievedSet& set) {
                  result.dump += json{{"story_id", story.story_id},
                                      {"chapter_id", chapter.chapter_id},
                                      {"block_id", block.block_id},
                                      {"retrieved", retrieved_to_json(set)},
                                      {"config_hash", hash},
                                      {"fingerprint", scorer->fingerprint()}}
                                     .dump() +
                                 "\n";
                };
              }
              SalienceProfile profile = profile_chapter(chapter, measures, ctx, story_seed);
              profile.story_id = story.story_id;
              profile.config_hash = hash;
              if (profile.scorer_fingerprint.empty()) profile.scorer_fingerprint = scorer->fingerprint();
              result.records.emplace_back(key, profile_to_json(profile).dump());
            }
            ctx.block_offset += chapter.sentences.size();
          }
        } catch (...) {
          result.error = std::current_exception();
          failed = true;
        }
      }
      {
        std::lock_guard lock(mutex);
        result.done = true;
        results[s] = std::move(result);
      }
      ready.notify_all();
    }
  };

  std::vector<std::thread> pool;
  const std::size_t n_workers = std::min(c.workers, stories.size());
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(work);

  // Single consumer: append finished stories in input order.
  std::exception_ptr error;
  std::thread writer([&] {
    std::ofstream progress(profile_path, std::ios::binary | std::ios::app);
    for (std::size_t s = 0; s < stories.size(); ++s) {
      std::unique_lock lock(mutex);
      ready.wait(lock, [&] { return results[s].done; });
      if (results[s].error) {
        if (!error) error = results[s].error;
        continue;
      }
      for (const auto& [key, line] : results[s].records) progress << line << "\n";
      progress.flush();
    }
  });
  work();
  for (auto& t : pool) t.join();
  writer.join();
  if (error) std::rethrow_exception(error);

  // Final artifacts in canonical story / chapter order.
  std::map<ProfileKey, std::string> all = existing;
  std::string dump;
  for (auto& r : results) {
    for (auto& [key, line] : r.records) all[key] = std::move(line);
    dump += r.dump;
  }
  std::string content;
  std::size_t computed = 0;
  for (const auto& story : stories) {
    for (const auto& chapter : story.chapters) {
      const auto it = all.find({story.story_id, chapter.chapter_id});
      if (it != all.end()) content += it->second + "\n";
    }
  }
  for (const auto& r : results) computed += r.records.size();
  write_file(profile_path, content);
  if (f.retrieval_dump) write_file(dump_path, dump);
  out << json{{"chapters_computed", computed},
              {"chapters_resumed", existing.size()},
              {"config_hash", hash},
              {"fingerprint", scorer->fingerprint()},
              {"output", profile_path.string()}}
             .dump()
      << "\n";
  return 0;
}

// ---------------------------------------------------------------- perplexity

int cmd_perplexity(RunConfig c, const PerplexityFlags& f, std::ostream& out) {
  if (f.k) c.k = *f.k;
  if (f.kb) c.kb_path = *f.kb;
  c.validate();
  std::vector<RetrievalMode> modes;
  if (f.modes.empty()) {
    modes = {RetrievalMode::Off, RetrievalMode::KbOnly, RetrievalMode::MemOnly,
             RetrievalMode::KbAndMem, RetrievalMode::Scrambled};
  }
  for (const auto& m : f.modes) modes.push_back(parse_mode_flag("--mode", m));

  const auto stories = load_stories(f.input);
  const auto scorer = make_scorer(c, stories);
  const HashedBowEmbedder embedder(c.embedding_dim);
  const auto kb = load_kb(c);
  CoherenceOptions opts;
  opts.context_token_budget = c.window.context_token_budget;
  opts.want_embedding = false;

  json reports = json::array();
  for (RetrievalMode mode : modes) {
    std::vector<double> per_block;
    for (const auto& story : stories) {
      MemoryCache memory(c.memory_capacity, c.memory_policy);
      Rng rng(derive_seed(c.seed, story.story_id, "perplexity:" + std::string(to_string(mode))));
      RetrievalContext rc{&embedder, kb ? &*kb : nullptr, &memory, &rng, c.k};
      std::vector<Block> blocks;
      for (auto& chapter_blocks : make_story_blocks(story, c.window)) {
        blocks.insert(blocks.end(), chapter_blocks.begin(), chapter_blocks.end());
      }
      const auto report = perplexity(blocks, mode, *scorer, rc, opts);
      per_block.insert(per_block.end(), report.per_block.begin(), report.per_block.end());
    }
    const double med = per_block.empty() ? 0.0 : median(per_block);
    reports.push_back({{"mode", std::string(to_string(mode))},
                       {"median", med},
                       {"blocks", per_block.size()},
                       {"per_block", per_block}});
    out << to_string(mode) << " median_perplexity=" << med << " blocks=" << per_block.size() << "\n";
  }
  const json doc{{"config_hash", config_hash(c)}, {"fingerprint", scorer->fingerprint()}, {"reports", reports}};
  write_file(fs::path(c.output_dir) / "perplexity.json", doc.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------- evaluate / plotdata

std::vector<SalienceProfile> read_profiles(const fs::path& path) {
  auto in = open_in(path);
  std::vector<SalienceProfile> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    try {
      out.push_back(profile_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw IoError("bad profile record in " + path.string() + ": " + e.what());
    }
  }
  return out;
}

std::vector<SilverLabelSet> read_labels(const fs::path& path) {
  try {
    return labels_from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw IoError("bad alignment file " + path.string() + ": " + e.what());
  }
}

// Label sets are keyed by chapter_id. A profile matches "<story_id>/<chapter_id>"
// when such a label set exists, else its bare chapter_id.
void qualify_profile_ids(std::vector<SalienceProfile>& profiles,
                         const std::vector<SilverLabelSet>& labels) {
  std::set<std::string> ids;
  for (const auto& l : labels) ids.insert(l.chapter_id);
  for (auto& p : profiles) {
    const std::string qualified = p.story_id + "/" + p.chapter_id;
    if (!p.story_id.empty() && ids.count(qualified) > 0) p.chapter_id = qualified;
  }
}

int cmd_evaluate(const RunConfig& c, const EvaluateFlags& f, std::ostream& out) {
  auto profiles = read_profiles(f.profiles);
  const auto labels = read_labels(f.labels);
  qualify_profile_ids(profiles, labels);
  const auto report = evaluate(profiles, labels);
  std::ostringstream per_chapter, summary;
  write_per_chapter_csv(per_chapter, report);
  write_summary_csv(summary, report);
  write_file(fs::path(c.output_dir) / "per_chapter.csv", per_chapter.str());
  write_file(fs::path(c.output_dir) / "summary.csv", summary.str());
  out << summary.str();
  for (const auto& s : report.skipped) out << "# skipped " << s << "\n";
  return 0;
}

std::string safe_file_name(const std::string& id) {
  std::string out;
  for (char ch : id) {
    out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.') ? ch : '_';
  }
  return out;
}

int cmd_plotdata(const RunConfig& c, const EvaluateFlags& f, std::ostream& out) {
  auto profiles = read_profiles(f.profiles);
  const auto labels = read_labels(f.labels);
  qualify_profile_ids(profiles, labels);
  std::map<std::string, const SilverLabelSet*> by_id;
  for (const auto& l : labels) by_id[l.chapter_id] = &l;
  const fs::path dir = fs::path(c.output_dir) / "plots";
  std::size_t written = 0;
  for (const auto& p : profiles) {
    const auto it = by_id.find(p.chapter_id);
    if (it == by_id.end()) continue;
    write_file(dir / (safe_file_name(p.chapter_id) + ".json"), plot_data(p, *it->second).dump(2) + "\n");
    ++written;
  }
  out << json{{"plots", written}, {"output", dir.string()}}.dump() << "\n";
  return 0;
}

void print_error(std::ostream& err, const std::string& kind, const std::string& message,
                 const std::string& flag = {}) {
  json j{{"error", kind}, {"message", message}};
  if (!flag.empty()) j["flag"] = flag;
  err << j.dump() << std::endl;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Narrative event salience: ingest, label, score and evaluate stories", "salience"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  app.add_option("--config", g.config_file, "Flat JSON run configuration");
  app.add_option("--seed", g.seed, "Root seed");
  app.add_option("--workers", g.workers, "Parallel workers over stories");
  app.add_option("--out", g.out, "Output directory");

  IngestFlags ingest_f;
  auto* ingest_cmd = app.add_subcommand("ingest", "Split raw story text into chapters and sentences");
  ingest_cmd->add_option("--input", ingest_f.inputs, "Raw text file(s)")->required();
  ingest_cmd->add_option("--story-id", ingest_f.story_id, "Story id (default: file stem)");
  ingest_cmd->add_option("--title", ingest_f.title, "Story title");
  ingest_cmd->add_option("--chapter-regex", ingest_f.chapter_regex, "Chapter heading pattern");
  ingest_cmd->add_option("--output", ingest_f.output, "Output JSONL (default: <out>/stories.jsonl)");

  BuildKbFlags kb_f;
  auto* kb_cmd = app.add_subcommand("build-kb", "Embed passages into an exact inner-product index");
  kb_cmd->add_option("--input", kb_f.input, "Passages JSONL or a raw text document")->required();
  kb_cmd->add_option("--dim", kb_f.dim, "Embedding dimension");
  kb_cmd->add_option("--out", kb_f.out, "Index directory (default: <out>/kb)");

  LabelFlags label_f;
  auto* label_cmd = app.add_subcommand("label", "Align summaries to full text to make silver labels");
  label_cmd->add_option("--input", label_f.input, "Paired summary/full-text JSONL")->required();
  label_cmd->add_option("--rho", label_f.rho, "Window fraction");
  label_cmd->add_option("--mu", label_f.mu, "Minimum similarity");
  label_cmd->add_option("--theta", label_f.theta, "Maximum drop from the window maximum");
  label_cmd->add_option("--max-targets", label_f.max_targets, "Alignments per summary sentence");

  SalienceFlags sal_f;
  auto* sal_cmd = app.add_subcommand("salience", "Score every sentence with the selected measures");
  sal_cmd->add_option("--input", sal_f.input, "Stories JSONL")->required();
  sal_cmd->add_option("--measures", sal_f.measures, "Comma-separated measure names");
  sal_cmd->add_option("--mode", sal_f.mode, "Retrieval mode: kb+mem, kb, mem, off, scrambled");
  sal_cmd->add_option("--k", sal_f.k, "Passages retrieved per block");
  sal_cmd->add_option("--kb", sal_f.kb, "Knowledge base directory");
  sal_cmd->add_flag("--resume", sal_f.resume, "Skip chapters already scored with this config");
  sal_cmd->add_flag("--force", sal_f.force, "With --resume, recompute records from another config");
  sal_cmd->add_flag("--retrieval-dump", sal_f.retrieval_dump, "Write per-block retrieved passages");

  PerplexityFlags ppl_f;
  auto* ppl_cmd = app.add_subcommand("perplexity", "Median target perplexity per retrieval mode");
  ppl_cmd->add_option("--input", ppl_f.input, "Stories JSONL")->required();
  ppl_cmd->add_option("--mode", ppl_f.modes, "Retrieval mode (repeatable; default: all)");
  ppl_cmd->add_option("--k", ppl_f.k, "Passages retrieved per block");
  ppl_cmd->add_option("--kb", ppl_f.kb, "Knowledge base directory");

  EvaluateFlags eval_f;
  auto* eval_cmd = app.add_subcommand("evaluate", "MAP, ROUGE-L and Recall@k against silver labels");
  eval_cmd->add_option("--profiles", eval_f.profiles, "Salience JSONL")->required();
  eval_cmd->add_option("--labels", eval_f.labels, "Alignment JSON")->required();

  EvaluateFlags plot_f;
  auto* plot_cmd = app.add_subcommand("plotdata", "Per-chapter score and label series for plotting");
  plot_cmd->add_option("--profiles", plot_f.profiles, "Salience JSONL")->required();
  plot_cmd->add_option("--labels", plot_f.labels, "Alignment JSON")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    print_error(err, "UsageError", e.what());
    return 2;
  }

  try {
    RunConfig c = base_config(g);
    if (ingest_cmd->parsed()) return cmd_ingest(c, ingest_f, out);
    if (kb_cmd->parsed()) return cmd_build_kb(c, kb_f, out);
    if (label_cmd->parsed()) return cmd_label(c, label_f, out);
    if (sal_cmd->parsed()) return cmd_salience(c, sal_f, out);
    if (ppl_cmd->parsed()) return cmd_perplexity(c, ppl_f, out);
    if (eval_cmd->parsed()) return cmd_evaluate(c, eval_f, out);
    if (plot_cmd->parsed()) return cmd_plotdata(c, plot_f, out);
  } catch (const UsageError& e) {
    print_error(err, e.kind(), e.what(), e.flag());
    return 2;
  } catch (const ScorerUnavailable& e) {
    json j{{"error", e.kind()}, {"message", e.what()}, {"cause", e.cause()}};
    if (e.block_id()) j["block_id"] = *e.block_id();
    err << j.dump() << std::endl;
    return 1;
  } catch (const ProtocolError& e) {
    err << json{{"error", e.kind()}, {"message", e.what()}, {"field", e.field()}}.dump() << std::endl;
    return 1;
  } catch (const Error& e) {
    print_error(err, e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error(err, "InternalError", e.what());
    return 1;
  }
  return 2;
}

}  // namespace salience
