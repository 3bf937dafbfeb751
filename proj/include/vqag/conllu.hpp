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

// CoNLL-U reader and writer for parsed captions.
//
// Every sentence block must carry `# sent_id = ...` and `# image_id = ...`
// comments. NER tags ride in the MISC column as `NER=<tag>` in BIO form;
// a token without one is tagged "O". Multiword token ranges (1-2) and empty
// nodes (1.1) are rejected.

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vqag/error.hpp"
#include "vqag/tree.hpp"
#include "vqag/types.hpp"

namespace vqag {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

// O, or B-/I- followed by one or more uppercase ASCII letters.
inline bool is_valid_ner(std::string_view tag) {
  if (tag == "O") return true;
  if (tag.size() < 3 || (tag[0] != 'B' && tag[0] != 'I') || tag[1] != '-') return false;
  for (char ch : tag.substr(2)) {
    if (ch < 'A' || ch > 'Z') return false;
  }
  return true;
}

namespace detail {

inline std::optional<int> parse_int(std::string_view s) {
  int value = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

// "sent_id = abc" -> "abc" when the key matches.
inline std::optional<std::string> comment_value(std::string_view comment,
                                                std::string_view key) {
  std::string_view body = trim(comment);
  if (body.substr(0, key.size()) != key) return std::nullopt;
  body = trim(body.substr(key.size()));
  if (body.empty() || body.front() != '=') return std::nullopt;
  return std::string(trim(body.substr(1)));
}

inline std::string misc_with_ner(const DepToken& tok) {
  if (tok.misc == "_" || tok.misc.empty()) {
    return tok.ner == "O" ? std::string("_") : "NER=" + tok.ner;
  }
  std::string out;
  bool found = false;
  for (auto item : split(tok.misc, '|')) {
    if (!out.empty()) out += '|';
    if (item.substr(0, 4) == "NER=") {
      out += "NER=" + tok.ner;
      found = true;
    } else {
      out += item;
    }
  }
  if (!found && tok.ner != "O") out += "|NER=" + tok.ner;
  return out;
}

struct PendingSentence {
  DepTree tree;
  std::size_t first_line = 0;
  bool has_sent_id = false;
  bool has_image_id = false;
};

}  // namespace detail

// Parses CoNLL-U text. `source` names the input in error messages.
inline std::vector<DepTree> parse_conllu(std::string_view text,
                                         const std::string& source = "<input>") {
  std::vector<DepTree> out;
  std::optional<detail::PendingSentence> cur;

  auto finish = [&]() {
    if (!cur) return;
    if (!cur->has_sent_id) {
      throw FormatError(source, cur->first_line, "sentence is missing '# sent_id ='");
    }
    if (!cur->has_image_id) {
      throw FormatError(source, cur->first_line, "sentence is missing '# image_id ='");
    }
    if (cur->tree.tokens.empty()) {
      throw FormatError(source, cur->first_line, "sentence has no token lines");
    }
    validate_tree(cur->tree);
    out.push_back(std::move(cur->tree));
    cur.reset();
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (trim(line).empty()) {
      finish();
      if (eol == text.size()) break;
      continue;
    }
    if (!cur) {
      cur.emplace();
      cur->first_line = line_no;
    }
    if (line.front() == '#') {
      const std::string_view body = line.substr(1);
      cur->tree.comments.emplace_back(body);
      if (auto v = detail::comment_value(body, "sent_id")) {
        cur->tree.sentence_id = *v;
        cur->has_sent_id = true;
      } else if (auto w = detail::comment_value(body, "image_id")) {
        cur->tree.image_id = *w;
        cur->has_image_id = true;
      }
      continue;
    }

    const auto fields = split(line, '\t');
    if (fields.size() != 10) {
      throw FormatError(source, line_no,
                        "expected 10 tab-separated columns, found " +
                            std::to_string(fields.size()));
    }
    if (fields[0].find('-') != std::string_view::npos) {
      throw FormatError(source, line_no, "multiword token lines are not supported");
    }
    if (fields[0].find('.') != std::string_view::npos) {
      throw FormatError(source, line_no, "empty nodes are not supported");
    }
    DepToken tok;
    const auto id = detail::parse_int(fields[0]);
    if (!id || *id < 1) {
      throw FormatError(source, line_no, "invalid token id '" + std::string(fields[0]) + "'");
    }
    const auto head = detail::parse_int(fields[6]);
    if (!head || *head < 0) {
      throw FormatError(source, line_no, "invalid head '" + std::string(fields[6]) + "'");
    }
    tok.id = *id;
    tok.form = fields[1];
    tok.lemma = fields[2];
    tok.upos = fields[3];
    tok.xpos = fields[4];
    tok.feats = fields[5];
    tok.head = *head;
    tok.deprel = fields[7];
    tok.deps = fields[8];
    tok.misc = fields[9];
    if (tok.form.empty()) throw FormatError(source, line_no, "empty FORM column");
    for (auto item : split(fields[9], '|')) {
      if (item.substr(0, 4) == "NER=") tok.ner = item.substr(4);
    }
    if (!is_valid_ner(tok.ner)) {
      throw FormatError(source, line_no, "invalid NER tag '" + tok.ner + "'");
    }
    cur->tree.tokens.push_back(std::move(tok));
  }
  finish();
  return out;
}

inline std::vector<DepTree> read_conllu(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_conllu(buf.str(), path);
}

// Serializes trees back to CoNLL-U. Comments are written verbatim; when a tree
// has none, sent_id and image_id comments are synthesized.
inline std::string write_conllu(const std::vector<DepTree>& trees) {
  std::string out;
  for (const auto& tree : trees) {
    if (tree.comments.empty()) {
      out += "# sent_id = " + tree.sentence_id + "\n";
      out += "# image_id = " + tree.image_id + "\n";
    }
    for (const auto& c : tree.comments) out += "#" + c + "\n";
    for (const auto& t : tree.tokens) {
      out += std::to_string(t.id) + '\t' + t.form + '\t' + t.lemma + '\t' + t.upos + '\t' +
             t.xpos + '\t' + t.feats + '\t' + std::to_string(t.head) + '\t' + t.deprel +
             '\t' + t.deps + '\t' + detail::misc_with_ner(t) + '\n';
    }
    out += '\n';
  }
  return out;
}

}  // namespace vqag
