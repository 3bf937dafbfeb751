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

// JSONL readers and writers: detector output, generated QA pairs and
// reference questions. One JSON object per line; blank lines are skipped.

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vqag/error.hpp"
#include "vqag/types.hpp"

namespace vqag {

using ObjectMap = std::map<std::string, std::vector<DetectedObject>>;

struct Reference {
  std::string image_id;
  std::string caption_id;  // empty when the reference applies to the whole image
  std::string question;
};

namespace detail {

template <typename Fn>
void for_each_json_line(std::istream& in, const std::string& source, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(source, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw FormatError(source, line_no, "expected a JSON object");
    fn(j, line_no);
  }
}

inline const nlohmann::json& require(const nlohmann::json& j, const char* key,
                                     const std::string& source, std::size_t line) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw FormatError(source, line, std::string("missing field '") + key + "'");
  }
  return *it;
}

inline std::string require_string(const nlohmann::json& j, const char* key,
                                  const std::string& source, std::size_t line) {
  const auto& v = require(j, key, source, line);
  if (v.is_string()) return v.get<std::string>();
  // Numeric ids are common in COCO-derived files.
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw FormatError(source, line, std::string("field '") + key + "' must be a string");
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return in;
}

}  // namespace detail

// Labels are lowercased and trimmed; repeated image ids concatenate their lists.
inline ObjectMap parse_objects(std::istream& in, const std::string& source = "<input>") {
  ObjectMap out;
  detail::for_each_json_line(in, source, [&](const nlohmann::json& j, std::size_t line) {
    const std::string image_id = detail::require_string(j, "image_id", source, line);
    const auto& objects = detail::require(j, "objects", source, line);
    if (!objects.is_array()) throw FormatError(source, line, "'objects' must be an array");
    auto& list = out[image_id];
    for (const auto& o : objects) {
      if (!o.is_object()) throw FormatError(source, line, "object entries must be JSON objects");
      const auto& label = detail::require(o, "label", source, line);
      const auto& score = detail::require(o, "score", source, line);
      if (!label.is_string()) throw FormatError(source, line, "'label' must be a string");
      if (!score.is_number()) throw FormatError(source, line, "'score' must be a number");
      std::string norm = to_lower(trim(label.get<std::string>()));
      if (norm.empty()) throw FormatError(source, line, "empty object label");
      list.push_back({std::move(norm), score.get<double>()});
    }
  });
  return out;
}

inline ObjectMap read_objects(const std::string& path) {
  auto in = detail::open_input(path);
  return parse_objects(in, path);
}

inline nlohmann::ordered_json to_json(const QAPair& p) {
  nlohmann::ordered_json j;
  j["image_id"] = p.image_id;
  j["caption_id"] = p.caption_id;
  j["question"] = p.question;
  j["answer"] = p.answer;
  j["category"] = std::string(to_string(p.category));
  j["question_word"] = std::string(to_string(p.question_word));
  j["answer_source"] = std::string(to_string(p.answer_source));
  return j;
}

inline void write_qa(const std::vector<QAPair>& pairs, std::ostream& out) {
  for (const auto& p : pairs) out << to_json(p).dump() << '\n';
}

inline void write_qa(const std::vector<QAPair>& pairs, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_qa(pairs, out);
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline std::vector<QAPair> parse_qa(std::istream& in, const std::string& source = "<input>") {
  std::vector<QAPair> out;
  detail::for_each_json_line(in, source, [&](const nlohmann::json& j, std::size_t line) {
    QAPair p;
    p.image_id = detail::require_string(j, "image_id", source, line);
    p.caption_id = detail::require_string(j, "caption_id", source, line);
    p.question = detail::require_string(j, "question", source, line);
    p.answer = detail::require_string(j, "answer", source, line);
    const auto cat = parse_category(detail::require_string(j, "category", source, line));
    const auto word =
        parse_question_word(detail::require_string(j, "question_word", source, line));
    const auto src =
        parse_answer_source(detail::require_string(j, "answer_source", source, line));
    if (!cat) throw FormatError(source, line, "unknown category");
    if (!word) throw FormatError(source, line, "unknown question_word");
    if (!src) throw FormatError(source, line, "unknown answer_source");
    p.category = *cat;
    p.question_word = *word;
    p.answer_source = *src;
    out.push_back(std::move(p));
  });
  return out;
}

inline std::vector<QAPair> read_qa(const std::string& path) {
  auto in = detail::open_input(path);
  return parse_qa(in, path);
}

inline std::vector<Reference> parse_references(std::istream& in,
                                               const std::string& source = "<input>") {
  std::vector<Reference> out;
  detail::for_each_json_line(in, source, [&](const nlohmann::json& j, std::size_t line) {
    Reference r;
    r.image_id = detail::require_string(j, "image_id", source, line);
    if (j.contains("caption_id") && !j["caption_id"].is_null()) {
      r.caption_id = detail::require_string(j, "caption_id", source, line);
    }
    r.question = detail::require_string(j, "question", source, line);
    out.push_back(std::move(r));
  });
  return out;
}

inline std::vector<Reference> read_references(const std::string& path) {
  auto in = detail::open_input(path);
  return parse_references(in, path);
}

}  // namespace vqag
