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

#include <optional>
#include <stdexcept>
#include <string>

namespace salience {

// Base of every error the library raises. kind() is the stable name used in
// machine-readable CLI error lines.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define SALIENCE_DECLARE_ERROR(Name)                                 \
  class Name : public Error {                                        \
   public:                                                           \
    using Error::Error;                                              \
    const char* kind() const noexcept override { return #Name; }     \
  }

SALIENCE_DECLARE_ERROR(EmptyStory);
SALIENCE_DECLARE_ERROR(EmptyCorpus);
SALIENCE_DECLARE_ERROR(EmptyScores);
SALIENCE_DECLARE_ERROR(DuplicatePassage);
SALIENCE_DECLARE_ERROR(ShapeError);
SALIENCE_DECLARE_ERROR(ConfigError);
SALIENCE_DECLARE_ERROR(IoError);

#undef SALIENCE_DECLARE_ERROR

// The scoring backend could not produce a response (connection, timeout,
// process exit). Carries the block being scored when known.
class ScorerUnavailable : public Error {
 public:
  explicit ScorerUnavailable(const std::string& cause,
                             std::optional<long long> block_id = std::nullopt)
      : Error(block_id ? cause + " (block " + std::to_string(*block_id) + ")"
                       : cause),
        cause_(cause),
        block_id_(block_id) {}
  const char* kind() const noexcept override { return "ScorerUnavailable"; }
  const std::string& cause() const { return cause_; }
  std::optional<long long> block_id() const { return block_id_; }

 private:
  std::string cause_;
  std::optional<long long> block_id_;
};

// A scorer response violated the wire protocol.
class ProtocolError : public Error {
 public:
  ProtocolError(const std::string& field, const std::string& detail)
      : Error("protocol error in field '" + field + "': " + detail),
        field_(field) {}
  const char* kind() const noexcept override { return "ProtocolError"; }
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace salience
