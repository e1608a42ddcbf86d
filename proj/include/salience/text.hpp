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

#include <string>
#include <string_view>
#include <vector>

namespace salience {

std::string_view trim(std::string_view s);

// Collapses whitespace runs to one space and trims.
std::string normalize_whitespace(std::string_view s);

std::vector<std::string_view> split_whitespace(std::string_view s);

// Lowercased alphanumeric word tokens. ASCII punctuation separates tokens;
// bytes >= 0x80 are kept as word characters so UTF-8 words survive intact.
std::vector<std::string> word_tokens(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace salience
