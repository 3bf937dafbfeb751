// Copyright 2026 The VQAG Authors.
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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace vqag {

// Malformed input file content. Carries the source name and 1-based line.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::string source, std::size_t line, const std::string& message)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + message),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

// Head links of a sentence do not form a single rooted tree.
class TreeError : public std::runtime_error {
 public:
  TreeError(std::string sentence_id, const std::string& message)
      : std::runtime_error("sentence '" + sentence_id + "': " + message),
        sentence_id_(std::move(sentence_id)) {}

  const std::string& sentence_id() const { return sentence_id_; }

 private:
  std::string sentence_id_;
};

// A caller broke an operation's precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace vqag
