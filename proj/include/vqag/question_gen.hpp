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

// Question generation from a masked caption.
//
// The nearest question is the masked caption read left to right. The relevant
// question comes from rebuilding the dependency tree around the mask:
//   1. left dependents of the mask are pruned with their subtrees;
//   2. along the root-to-mask path, the child leading to the mask is moved to
//      the front of its parent's child list;
//   3. the tree is read back in order and the mask becomes a wh-word.
//
// In-order reading of an n-ary tree emits the fronted children first, then
// the head interleaved with its remaining children by original position. On an
// untouched projective tree this reproduces the sentence.

#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vqag/answer_extract.hpp"
#include "vqag/conllu.hpp"
#include "vqag/error.hpp"
#include "vqag/jsonl.hpp"
#include "vqag/tree.hpp"
#include "vqag/types.hpp"

namespace vqag {

using WhMapping = std::map<Category, QuestionWord>;

inline WhMapping default_wh_mapping() {
  return {{Category::kPerson, QuestionWord::kWho},
          {Category::kLocation, QuestionWord::kWhere},
          {Category::kCount, QuestionWord::kHowMany},
          {Category::kQuantity, QuestionWord::kHowMuch},
          {Category::kEntity, QuestionWord::kWhich},
          {Category::kAnimal, QuestionWord::kWhat},
          {Category::kObject, QuestionWord::kWhat}};
}

// TSV lines `CATEGORY<TAB>question word`, overriding entries of `base`.
inline WhMapping load_wh_mapping(const std::string& path, WhMapping base = default_wh_mapping()) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 2) throw FormatError(path, line_no, "expected 'CATEGORY<TAB>question word'");
    std::string cat_name(trim(cols[0]));
    for (auto& ch : cat_name) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    const auto cat = parse_category(cat_name);
    const auto word = parse_question_word(to_lower(trim(cols[1])));
    if (!cat) throw FormatError(path, line_no, "unknown category '" + std::string(cols[0]) + "'");
    if (!word) {
      throw FormatError(path, line_no, "unknown question word '" + std::string(cols[1]) + "'");
    }
    base[*cat] = *word;
  }
  return base;
}

struct GenConfig {
  int max_question_tokens = 24;
  WhMapping wh_mapping = default_wh_mapping();

  void validate() const {
    if (max_question_tokens < 3) throw ContractError("max_question_tokens must be at least 3");
    for (Category c : kAllCategories) {
      if (wh_mapping.count(c) == 0) {
        throw ContractError("wh mapping has no entry for " + std::string(to_string(c)));
      }
    }
  }
};

namespace detail {

inline bool is_punct(const DepToken& t) {
  return base_deprel(t.deprel) == "punct" || t.upos == "PUNCT";
}

inline int single_mask(const DepTree& tree) {
  int found = 0;
  int count = 0;
  for (const auto& t : tree.tokens) {
    if (is_mask(t)) {
      found = t.id;
      ++count;
    }
  }
  if (count != 1) {
    throw ContractError("expected exactly one mask token, found " + std::to_string(count));
  }
  return found;
}

}  // namespace detail

inline std::vector<std::string> nearest_question(const DepTree& masked) {
  detail::single_mask(masked);
  std::size_t end = masked.size();
  while (end > 0 && detail::is_punct(masked.tokens[end - 1])) --end;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < end; ++i) out.push_back(masked.tokens[i].form);
  return out;
}

// Removes punctuation tokens; their dependents climb to the nearest kept
// ancestor. A punctuation root is kept.
inline DepTree drop_punctuation(const DepTree& tree) {
  std::vector<bool> keep(tree.size() + 1, true);
  for (const auto& t : tree.tokens) {
    if (t.head != 0 && detail::is_punct(t)) keep[static_cast<std::size_t>(t.id)] = false;
  }
  DepTree lifted = tree;
  for (auto& t : lifted.tokens) {
    while (t.head != 0 && !keep[static_cast<std::size_t>(t.head)]) t.head = tree.token(t.head).head;
  }
  return compact(lifted, keep);
}

inline DepTree reconstruct_tree(const DepTree& masked) {
  const int mask = detail::single_mask(masked);
  const auto children = child_lists(masked);

  std::vector<bool> keep(masked.size() + 1, true);
  for (int c : children[static_cast<std::size_t>(mask)]) {
    if (c < mask) {
      for (int d : subtree(masked, c)) keep[static_cast<std::size_t>(d)] = false;
    }
  }

  DepTree staged = masked;
  staged.fronted.clear();
  const auto path = path_from_root(masked, mask);
  for (std::size_t i = 1; i < path.size(); ++i) staged.fronted.push_back(path[i]);
  return compact(staged, keep);
}

namespace detail {

inline void emit_in_order(const DepTree& tree, const std::vector<std::vector<int>>& children,
                          int node, std::vector<DepToken>& out) {
  const auto& kids = children[static_cast<std::size_t>(node)];
  for (int c : kids) {
    if (tree.is_fronted(c)) emit_in_order(tree, children, c, out);
  }
  bool head_done = false;
  for (int c : kids) {
    if (tree.is_fronted(c)) continue;
    if (!head_done && c > node) {
      out.push_back(tree.token(node));
      head_done = true;
    }
    emit_in_order(tree, children, c, out);
  }
  if (!head_done) out.push_back(tree.token(node));
}

}  // namespace detail

inline std::vector<DepToken> in_order(const DepTree& tree) {
  std::vector<DepToken> out;
  if (tree.tokens.empty()) return out;
  out.reserve(tree.size());
  const auto children = child_lists(tree);
  detail::emit_in_order(tree, children, tree.root(), out);
  return out;
}

// Replaces the mask with the mapped question word, lowercases everything but
// proper nouns, keeps at most max_question_tokens words and appends "?".
inline std::string wh_substitute(std::span<const DepToken> seq, Category category,
                                 const GenConfig& cfg) {
  int masks = 0;
  for (const auto& t : seq) masks += is_mask(t) ? 1 : 0;
  if (masks != 1) {
    throw ContractError("expected exactly one mask token, found " + std::to_string(masks));
  }
  const auto wh = cfg.wh_mapping.at(category);
  std::vector<std::string> words;
  for (const auto& t : seq) {
    if (is_mask(t)) {
      for (auto w : split(to_string(wh), ' ')) words.emplace_back(w);
    } else {
      words.push_back(t.upos == "PROPN" ? t.form : to_lower(t.form));
    }
  }
  if (static_cast<int>(words.size()) > cfg.max_question_tokens) {
    words.resize(static_cast<std::size_t>(cfg.max_question_tokens));
  }
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  out += '?';
  return out;
}

inline std::string wh_substitute(const std::vector<std::string>& seq, Category category,
                                 const GenConfig& cfg) {
  std::vector<DepToken> tokens;
  for (const auto& s : seq) {
    DepToken t;
    t.form = s;
    tokens.push_back(std::move(t));
  }
  return wh_substitute(std::span<const DepToken>(tokens), category, cfg);
}

struct GenerationResult {
  std::vector<QAPair> pairs;
  std::size_t filtered = 0;  // captions removed by the filtering block
  std::size_t skipped = 0;   // captions that yielded no usable question
};

namespace detail {

// Lowercased question words with the trailing "?" removed.
inline std::vector<std::string> question_words(const std::string& question) {
  std::string body = question;
  if (!body.empty() && body.back() == '?') body.pop_back();
  std::vector<std::string> out;
  for (auto w : split(body, ' ')) {
    if (!w.empty()) out.push_back(to_lower(w));
  }
  return out;
}

inline bool contains_sequence(const std::vector<std::string>& hay,
                              const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

}  // namespace detail

// Runs one caption through the pipeline. Returns nullopt when the caption has
// no answer, or the answer would still be visible in the question, or nothing
// but the question word would remain.
inline std::optional<QAPair> generate_for_caption(const DepTree& caption,
                                                  const std::vector<DetectedObject>& objects,
                                                  const ExtractConfig& ecfg,
                                                  const GenConfig& gcfg) {
  const auto cand = extract_answer(caption, objects, ecfg);
  if (!cand) return std::nullopt;
  const DepTree masked = drop_punctuation(mask_caption(caption, *cand));
  const DepTree rebuilt = reconstruct_tree(masked);
  const auto seq = in_order(rebuilt);

  QAPair pair;
  pair.image_id = caption.image_id;
  pair.caption_id = caption.sentence_id;
  pair.question = wh_substitute(std::span<const DepToken>(seq), cand->category, gcfg);
  pair.answer = cand->surface;
  pair.category = cand->category;
  pair.question_word = gcfg.wh_mapping.at(cand->category);
  pair.answer_source = cand->source;

  const auto words = detail::question_words(pair.question);
  const auto wh_len = split(to_string(pair.question_word), ' ').size();
  if (words.size() <= wh_len) return std::nullopt;
  std::vector<std::string> answer_words;
  for (auto w : split(to_lower(pair.answer), ' ')) answer_words.emplace_back(w);
  if (detail::contains_sequence(words, answer_words)) return std::nullopt;
  return pair;
}

inline GenerationResult generate_qa(const ImageRecord& record, const ExtractConfig& ecfg,
                                    const GenConfig& gcfg) {
  gcfg.validate();
  GenerationResult result;
  const ImageRecord kept = filter_captions(record, ecfg);
  result.filtered = record.captions.size() - kept.captions.size();
  for (const auto& caption : kept.captions) {
    std::optional<QAPair> pair;
    try {
      pair = generate_for_caption(caption, kept.objects, ecfg, gcfg);
    } catch (const ContractError&) {
      pair.reset();
    } catch (const TreeError&) {
      pair.reset();
    }
    if (pair) {
      result.pairs.push_back(std::move(*pair));
    } else {
      ++result.skipped;
    }
  }
  return result;
}

// Groups captions by image in order of first appearance; images without a
// detector entry get an empty object list.
inline std::vector<ImageRecord> build_records(std::vector<DepTree> captions,
                                              const ObjectMap& objects) {
  std::vector<ImageRecord> out;
  std::map<std::string, std::size_t> index;
  for (auto& c : captions) {
    auto [it, inserted] = index.emplace(c.image_id, out.size());
    if (inserted) {
      ImageRecord r;
      r.image_id = c.image_id;
      if (auto o = objects.find(c.image_id); o != objects.end()) r.objects = o->second;
      out.push_back(std::move(r));
    }
    out[it->second].captions.push_back(std::move(c));
  }
  return out;
}

}  // namespace vqag
