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

#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "salience/scoring.hpp"

namespace salience {

// Bidirectional newline-delimited channel. Failures raise ScorerUnavailable.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void write_line(const std::string& line) = 0;
  virtual std::string read_line(std::chrono::milliseconds timeout) = 0;
};

std::unique_ptr<LineChannel> connect_tcp(const std::string& host, int port,
                                         std::chrono::milliseconds timeout);
// Runs `command` under /bin/sh and talks to its stdin/stdout.
std::unique_ptr<LineChannel> spawn_process(const std::string& command);

struct RemoteScorerOptions {
  // "tcp://host:port", "host:port", or "stdio:<shell command>".
  std::string endpoint;
  std::chrono::milliseconds timeout{30000};
  int max_retries = 2;
};

// Client for the scorer sidecar. One request in flight at a time; a failed
// attempt drops the connection and the request is resent on a fresh one.
// Protocol violations are not retried.
class RemoteScorer final : public Scorer {
 public:
  explicit RemoteScorer(RemoteScorerOptions options);
  ~RemoteScorer() override;

  ScoreResponse score(const ScoreRequest& request) const override;
  std::string fingerprint() const override;

  // "TruncationWarning: ..." entries for responses flagged as truncated.
  std::vector<std::string> warnings() const;

 private:
  std::unique_ptr<LineChannel> open() const;

  RemoteScorerOptions options_;
  mutable std::mutex mutex_;
  mutable std::unique_ptr<LineChannel> channel_;
  mutable std::uint64_t next_id_ = 0;
  mutable std::string fingerprint_;
  mutable std::vector<std::string> warnings_;
};

}  // namespace salience
