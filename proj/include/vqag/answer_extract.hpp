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

// Answer extraction: pick one answer span per caption, categorize it and
// replace it with a category-tagged mask token.
//
// Detected objects take precedence when objects-as-context is on. Otherwise,
// or when no object word occurs in the caption, the earliest NER entity is
// used, then the head noun of the earliest noun chunk.

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vqag/conllu.hpp"
#include "vqag/error.hpp"
#include "vqag/tree.hpp"
#include "vqag/types.hpp"

namespace vqag {

// Object label -> caption words that count as a mention of it.
class SynonymTable {
 public:
  SynonymTable() = default;

  // The person set plus identity for every other label.
  static SynonymTable defaults() {
    SynonymTable t;
    t.add("person", {"adult", "man", "woman", "boy", "girl"});
    return t;
  }

  void add(std::string_view label, const std::vector<std::string>& words) {
    auto& set = entries_[to_lower(trim(label))];
    set.insert(to_lower(trim(label)));
    for (const auto& w : words) {
      auto norm = to_lower(trim(w));
      if (!norm.empty()) set.insert(std::move(norm));
    }
  }

  // Always contains the label itself.
  std::set<std::string> expand(std::string_view label) const {
    const std::string key = to_lower(label);
    const auto it = entries_.find(key);
    if (it == entries_.end()) return {key};
    return it->second;
  }

  const std::map<std::string, std::set<std::string>>& entries() const { return entries_; }

 private:
  std::map<std::string, std::set<std::string>> entries_;
};

// COCO animal classes.
inline std::set<std::string> default_animal_gazetteer() {
  return {"bird", "cat", "dog", "horse", "sheep", "cow", "elephant", "bear", "zebra", "giraffe"};
}

// TSV lines `label<TAB>word1,word2,...`, merged into `base`.
inline SynonymTable load_synonyms(const std::string& path,
                                  SynonymTable base = SynonymTable::defaults()) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 2 || trim(cols[0]).empty()) {
      throw FormatError(path, line_no, "expected 'label<TAB>word1,word2,...'");
    }
    std::vector<std::string> words;
    for (auto w : split(cols[1], ',')) words.emplace_back(trim(w));
    base.add(cols[0], words);
  }
  return base;
}

// One label per line; replaces the default gazetteer.
inline std::set<std::string> load_gazetteer(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto word = to_lower(trim(line));
    if (!word.empty() && word.front() != '#') out.insert(std::move(word));
  }
  return out;
}

struct ExtractConfig {
  bool use_objects_context = true;
  bool filter_captions = false;
  SynonymTable synonyms = SynonymTable::defaults();
  std::set<std::string> animals = default_animal_gazetteer();
};

struct AnswerCandidate {
  std::string image_id;
  std::string caption_id;
  int span_begin = 0;  // inclusive token ids
  int span_end = 0;
  int head_id = 0;
  std::string surface;
  Category category = Category::kObject;
  AnswerSource source = AnswerSource::kNounChunk;
  std::string object_label;  // set for OBJECT_MATCH

  bool contains(int id) const { return id >= span_begin && id <= span_end; }
};

namespace detail {

inline bool token_matches(const DepToken& tok, std::string_view word) {
  return to_lower(tok.lemma) == word || to_lower(tok.form) == word;
}

struct Span {
  int begin = 0;
  int end = 0;
};

// Every contiguous occurrence of any (possibly multiword) variant of `label`.
inline std::vector<Span> find_mentions(const DepTree& tree, std::string_view label,
                                       const SynonymTable& synonyms) {
  std::vector<Span> out;
  const int n = static_cast<int>(tree.size());
  for (const auto& variant : synonyms.expand(label)) {
    std::vector<std::string> words;
    for (auto w : split(variant, ' ')) {
      if (!w.empty()) words.emplace_back(w);
    }
    const int k = static_cast<int>(words.size());
    if (k == 0) continue;
    for (int start = 1; start + k - 1 <= n; ++start) {
      bool ok = true;
      for (int i = 0; i < k && ok; ++i) {
        ok = token_matches(tree.token(start + i), words[static_cast<std::size_t>(i)]);
      }
      if (ok) out.push_back({start, start + k - 1});
    }
  }
  return out;
}

// Span token with no ancestor inside the span; the shallowest, then leftmost.
inline int span_head(const DepTree& tree, int begin, int end) {
  int best = begin;
  int best_depth = depth(tree, begin);
  for (int id = begin + 1; id <= end; ++id) {
    const int d = depth(tree, id);
    if (d < best_depth) {
      best = id;
      best_depth = d;
    }
  }
  return best;
}

inline std::string span_surface(const DepTree& tree, int begin, int end) {
  std::string out;
  for (int id = begin; id <= end; ++id) {
    if (!out.empty()) out += ' ';
    out += tree.token(id).form;
  }
  return out;
}

inline std::string_view base_deprel(std::string_view rel) {
  return rel.substr(0, rel.find(':'));
}

inline bool is_nominal(const DepToken& t) { return t.upos == "NOUN" || t.upos == "PROPN"; }

}  // namespace detail

inline std::vector<std::pair<int, int>> ner_spans(const DepTree& tree) {
  std::vector<std::pair<int, int>> out;
  const int n = static_cast<int>(tree.size());
  int id = 1;
  while (id <= n) {
    const auto type = tree.token(id).entity_type();
    if (type.empty()) {
      ++id;
      continue;
    }
    int end = id;
    while (end + 1 <= n && tree.token(end + 1).ner.size() > 2 &&
           tree.token(end + 1).ner[0] == 'I' && tree.token(end + 1).entity_type() == type) {
      ++end;
    }
    out.emplace_back(id, end);
    id = end + 1;
  }
  return out;
}

// (chunk start, head noun) pairs in order of chunk start.
inline std::vector<std::pair<int, int>> noun_chunks(const DepTree& tree) {
  static const std::set<std::string_view> kChunkRels = {"det", "amod", "compound", "nummod"};
  std::vector<std::pair<int, int>> out;
  for (const auto& t : tree.tokens) {
    if (!detail::is_nominal(t)) continue;
    const auto rel = detail::base_deprel(t.deprel);
    if ((rel == "compound" || rel == "flat") && t.head > t.id &&
        detail::is_nominal(tree.token(t.head))) {
      continue;  // part of a larger chunk
    }
    int start = t.id;
    while (start > 1) {
      const DepToken& left = tree.token(start - 1);
      if (left.head != t.id || kChunkRels.count(detail::base_deprel(left.deprel)) == 0) break;
      --start;
    }
    out.emplace_back(start, t.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline bool mentions_any_object(const DepTree& tree, const std::vector<DetectedObject>& objects,
                                const SynonymTable& synonyms) {
  for (const auto& o : objects) {
    if (!detail::find_mentions(tree, o.label, synonyms).empty()) return true;
  }
  return false;
}

// Keeps captions that mention a detected object; identity when filtering is off.
inline ImageRecord filter_captions(const ImageRecord& record, const ExtractConfig& cfg) {
  if (!cfg.filter_captions) return record;
  ImageRecord out;
  out.image_id = record.image_id;
  out.objects = record.objects;
  for (const auto& c : record.captions) {
    if (mentions_any_object(c, record.objects, cfg.synonyms)) out.captions.push_back(c);
  }
  return out;
}

inline Category assign_category(const AnswerCandidate& cand, const DepTree& tree,
                                 const ExtractConfig& cfg = {}) {
  const DepToken& head = tree.token(cand.head_id);
  std::string_view entity = head.entity_type();
  if (cand.source == AnswerSource::kNer) entity = tree.token(cand.span_begin).entity_type();

  std::vector<std::string> words = {to_lower(head.lemma), to_lower(head.form)};
  if (!cand.object_label.empty()) words.push_back(cand.object_label);
  const auto persons = cfg.synonyms.expand("person");
  auto any_in = [&](const std::set<std::string>& set) {
    for (const auto& w : words) {
      if (set.count(w)) return true;
    }
    return false;
  };

  if (head.upos == "NUM" || entity == "CARDINAL") return Category::kCount;
  if (entity == "MONEY" || entity == "QUANTITY" || entity == "PERCENT") return Category::kQuantity;
  if (entity == "PERSON" || any_in(persons)) return Category::kPerson;
  if (entity == "GPE" || entity == "LOC" || entity == "FAC") return Category::kLocation;
  if (any_in(cfg.animals)) return Category::kAnimal;
  if (head.upos == "PROPN") return Category::kEntity;
  return Category::kObject;
}

// Returns nullopt when the caption has no eligible answer.
inline std::optional<AnswerCandidate> extract_answer(const DepTree& tree,
                                                     const std::vector<DetectedObject>& objects,
                                                     const ExtractConfig& cfg) {
  std::optional<AnswerCandidate> best;
  double best_score = 0.0;
  auto make = [&](int begin, int end, AnswerSource source) {
    AnswerCandidate c;
    c.image_id = tree.image_id;
    c.caption_id = tree.sentence_id;
    c.span_begin = begin;
    c.span_end = end;
    c.head_id = detail::span_head(tree, begin, end);
    c.surface = detail::span_surface(tree, begin, end);
    c.source = source;
    return c;
  };

  if (cfg.use_objects_context) {
    for (const auto& o : objects) {
      for (const auto& m : detail::find_mentions(tree, o.label, cfg.synonyms)) {
        bool better = !best || o.score > best_score;
        if (best && o.score == best_score) {
          // Smallest token id, then longest span, then label.
          better = m.begin < best->span_begin ||
                   (m.begin == best->span_begin &&
                    (m.end > best->span_end ||
                     (m.end == best->span_end && o.label < best->object_label)));
        }
        if (better) {
          best = make(m.begin, m.end, AnswerSource::kObjectMatch);
          best->object_label = o.label;
          best_score = o.score;
        }
      }
    }
  }
  if (!best) {
    const auto spans = ner_spans(tree);
    if (!spans.empty()) best = make(spans.front().first, spans.front().second, AnswerSource::kNer);
  }
  if (!best) {
    const auto chunks = noun_chunks(tree);
    if (!chunks.empty()) {
      const int head = chunks.front().second;
      best = make(head, head, AnswerSource::kNounChunk);
    }
  }
  if (best) best->category = assign_category(*best, tree, cfg);
  return best;
}

inline std::string mask_form(Category c) { return "[MASK:" + std::string(to_string(c)) + "]"; }

inline std::optional<Category> mask_category(std::string_view form) {
  constexpr std::string_view kPrefix = "[MASK:";
  if (form.size() <= kPrefix.size() + 1 || form.substr(0, kPrefix.size()) != kPrefix ||
      form.back() != ']') {
    return std::nullopt;
  }
  return parse_category(form.substr(kPrefix.size(), form.size() - kPrefix.size() - 1));
}

inline bool is_mask(const DepToken& t) { return mask_category(t.form).has_value(); }

// Collapses the answer span into one mask token. The mask takes the span
// head's head and deprel; outside tokens attached to any span token move to it.
inline DepTree mask_caption(const DepTree& tree, const AnswerCandidate& cand) {
  const int n = static_cast<int>(tree.size());
  if (cand.span_begin < 1 || cand.span_end > n || cand.span_begin > cand.span_end) {
    throw ContractError("answer span [" + std::to_string(cand.span_begin) + ", " +
                        std::to_string(cand.span_end) + "] outside caption of " +
                        std::to_string(n) + " tokens");
  }
  if (!cand.contains(cand.head_id)) throw ContractError("answer head lies outside its span");
  for (int a = tree.token(cand.head_id).head; a != 0; a = tree.token(a).head) {
    if (cand.contains(a)) throw ContractError("answer head is dominated by another span token");
  }

  const int width = cand.span_end - cand.span_begin;
  auto remap = [&](int id) {
    if (id < cand.span_begin) return id;
    if (id <= cand.span_end) return cand.span_begin;
    return id - width;
  };

  DepTree out;
  out.sentence_id = tree.sentence_id;
  out.image_id = tree.image_id;
  out.comments = tree.comments;
  for (const auto& t : tree.tokens) {
    if (cand.contains(t.id)) {
      if (t.id != cand.span_begin) continue;
      const DepToken& head = tree.token(cand.head_id);
      DepToken mask;
      mask.id = cand.span_begin;
      mask.form = mask_form(cand.category);
      mask.lemma = mask.form;
      mask.upos = "X";
      mask.head = head.head == 0 ? 0 : remap(head.head);
      mask.deprel = head.deprel;
      out.tokens.push_back(std::move(mask));
      continue;
    }
    DepToken copy = t;
    copy.id = remap(t.id);
    copy.head = t.head == 0 ? 0 : remap(t.head);
    out.tokens.push_back(std::move(copy));
  }
  return out;
}

}  // namespace vqag
