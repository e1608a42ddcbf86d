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

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "salience/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) {
    path = fs::temp_directory_path() / ("salience_cli_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = salience::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

const char* kStory =
    "The old lighthouse keeper climbed the stairs every night. He lit the lamp at dusk. "
    "Ships passed safely through the narrow strait. One winter a storm broke the glass. "
    "The keeper climbed the stairs with a lantern in his hand. He lit the lamp at dusk again. "
    "The ships passed safely and the sailors waved. Spring came and the keeper repaired the glass.";

}  // namespace

TEST_CASE("evaluate reproduces the golden CSV files") {
  TempDir tmp("golden");
  const std::string fixtures = FIXTURE_DIR;
  const auto r = run({"--out", tmp.path.string(), "evaluate", "--profiles", fixtures + "/eval_profiles.jsonl",
                      "--labels", fixtures + "/eval_alignment.json"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(slurp(tmp.path / "per_chapter.csv") == slurp(fixtures + "/golden_per_chapter.csv"));
  CHECK(slurp(tmp.path / "summary.csv") == slurp(fixtures + "/golden_summary.csv"));
}

TEST_CASE("usage errors exit with code 2 and a JSON error line") {
  TempDir tmp("usage");
  spit(tmp.path / "s.txt", kStory);
  REQUIRE(run({"--out", tmp.path.string(), "ingest", "--input", (tmp.path / "s.txt").string()}).code == 0);
  const auto r = run({"--out", tmp.path.string(), "salience", "--input", (tmp.path / "stories.jsonl").string(),
                      "--measures", "Bogus-Sal"});
  CHECK(r.code == 2);
  const auto j = json::parse(r.err.substr(0, r.err.find('\n')));
  CHECK(j.contains("error"));
  CHECK(j.at("flag") == "--measures");

  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"evaluate"}).code == 2);
}

TEST_CASE("missing input is a runtime error with exit code 1") {
  TempDir tmp("missing");
  const auto r = run({"--out", tmp.path.string(), "salience", "--input", (tmp.path / "nope.jsonl").string()});
  CHECK(r.code == 1);
  CHECK(json::parse(r.err.substr(0, r.err.find('\n'))).contains("error"));
}

TEST_CASE("unknown config keys are rejected") {
  TempDir tmp("config");
  spit(tmp.path / "c.json", R"({"k": 5, "no_such_key": 1})");
  spit(tmp.path / "s.txt", kStory);
  const auto r = run({"--config", (tmp.path / "c.json").string(), "--out", tmp.path.string(), "ingest", "--input",
                      (tmp.path / "s.txt").string()});
  CHECK(r.code != 0);
  CHECK(r.err.find("no_such_key") != std::string::npos);
}

TEST_CASE("memory lowers perplexity on repeated text") {
  TempDir tmp("ppl");
  std::string text;
  for (int i = 0; i < 4; ++i) text += std::string(kStory) + " ";
  spit(tmp.path / "rep.txt", text);
  REQUIRE(run({"--out", tmp.path.string(), "ingest", "--input", (tmp.path / "rep.txt").string()}).code == 0);
  const auto r = run({"--out", tmp.path.string(), "perplexity", "--input", (tmp.path / "stories.jsonl").string(),
                      "--mode", "off", "--mode", "mem"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto doc = json::parse(slurp(tmp.path / "perplexity.json"));
  REQUIRE(doc.at("reports").size() == 2);
  const double off = doc.at("reports").at(0).at("median").get<double>();
  const double mem = doc.at("reports").at(1).at("median").get<double>();
  CHECK(mem < off);
}

TEST_CASE("salience resume") {
  TempDir tmp("resume");
  spit(tmp.path / "a.txt", kStory);
  spit(tmp.path / "b.txt", std::string(kStory).substr(0, 200));
  REQUIRE(run({"--out", tmp.path.string(), "ingest", "--input", (tmp.path / "a.txt").string(), "--input",
               (tmp.path / "b.txt").string()})
              .code == 0);
  const std::string stories = (tmp.path / "stories.jsonl").string();
  const std::vector<std::string> base{"--out", tmp.path.string(), "--seed", "9", "salience", "--input", stories,
                                      "--measures", "Like-Sal,Clus-Sal,Random"};
  REQUIRE(run(base).code == 0);
  const std::string first = slurp(tmp.path / "salience.jsonl");
  CHECK(!first.empty());

  auto resumed = base;
  resumed.push_back("--resume");
  REQUIRE(run(resumed).code == 0);
  CHECK(slurp(tmp.path / "salience.jsonl") == first);

  // Drop the last record to simulate an interrupted run.
  std::string truncated = first.substr(0, first.rfind('\n', first.size() - 2) + 1);
  spit(tmp.path / "salience.jsonl", truncated);
  REQUIRE(run(resumed).code == 0);
  CHECK(slurp(tmp.path / "salience.jsonl") == first);

  auto other_seed = resumed;
  other_seed[3] = "10";
  const auto mismatch = run(other_seed);
  CHECK(mismatch.code == 1);
  other_seed.push_back("--force");
  CHECK(run(other_seed).code == 0);
  CHECK(slurp(tmp.path / "salience.jsonl") != first);
}

TEST_CASE("salience output does not depend on the worker count") {
  TempDir tmp("workers");
  spit(tmp.path / "a.txt", kStory);
  spit(tmp.path / "b.txt", std::string(kStory).substr(100));
  spit(tmp.path / "c.txt", std::string(kStory).substr(0, 250));
  std::vector<std::string> ingest{"--out", tmp.path.string(), "ingest"};
  for (const char* n : {"a.txt", "b.txt", "c.txt"}) {
    ingest.push_back("--input");
    ingest.push_back((tmp.path / n).string());
  }
  REQUIRE(run(ingest).code == 0);
  const std::string stories = (tmp.path / "stories.jsonl").string();
  REQUIRE(run({"--out", tmp.path.string(), "--workers", "1", "salience", "--input", stories}).code == 0);
  const std::string serial = slurp(tmp.path / "salience.jsonl");
  REQUIRE(run({"--out", tmp.path.string(), "--workers", "3", "salience", "--input", stories}).code == 0);
  CHECK(slurp(tmp.path / "salience.jsonl") == serial);
}

TEST_CASE("retrieval dump and plot data") {
  TempDir tmp("dump");
  spit(tmp.path / "a.txt", kStory);
  REQUIRE(run({"--out", tmp.path.string(), "ingest", "--input", (tmp.path / "a.txt").string()}).code == 0);
  REQUIRE(run({"--out", tmp.path.string(), "salience", "--input", (tmp.path / "stories.jsonl").string(),
               "--measures", "Like-Sal", "--mode", "mem", "--retrieval-dump"})
              .code == 0);
  const std::string dump = slurp(tmp.path / "retrieval.jsonl");
  REQUIRE(!dump.empty());
  CHECK(json::parse(dump.substr(0, dump.find('\n'))).contains("block_id"));

  const std::string fixtures = FIXTURE_DIR;
  REQUIRE(run({"--out", tmp.path.string(), "plotdata", "--profiles", fixtures + "/eval_profiles.jsonl", "--labels",
               fixtures + "/eval_alignment.json"})
              .code == 0);
  CHECK(fs::exists(tmp.path / "plots"));
}
