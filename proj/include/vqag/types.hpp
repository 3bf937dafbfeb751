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

// Core value types shared by every stage of the generation pipeline.

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vqag {

enum class Category { kPerson, kAnimal, kLocation, kCount, kQuantity, kEntity, kObject };

inline constexpr std::array<Category, 7> kAllCategories = {
    Category::kPerson, Category::kAnimal, Category::kLocation, Category::kCount,
    Category::kQuantity, Category::kEntity, Category::kObject};

enum class QuestionWord { kWho, kWhat, kWhich, kWhere, kHowMany, kHowMuch };

inline constexpr std::array<QuestionWord, 6> kAllQuestionWords = {
    QuestionWord::kWho, QuestionWord::kWhat, QuestionWord::kWhich,
    QuestionWord::kWhere, QuestionWord::kHowMany, QuestionWord::kHowMuch};

enum class AnswerSource { kObjectMatch, kNounChunk, kNer };

inline std::string_view to_string(Category c) {
  switch (c) {
    case Category::kPerson: return "PERSON";
    case Category::kAnimal: return "ANIMAL";
    case Category::kLocation: return "LOCATION";
    case Category::kCount: return "COUNT";
    case Category::kQuantity: return "QUANTITY";
    case Category::kEntity: return "ENTITY";
    case Category::kObject: return "OBJECT";
  }
  return "OBJECT";
}

inline std::string_view to_string(QuestionWord w) {
  switch (w) {
    case QuestionWord::kWho: return "who";
    case QuestionWord::kWhat: return "what";
    case QuestionWord::kWhich: return "which";
    case QuestionWord::kWhere: return "where";
    case QuestionWord::kHowMany: return "how many";
    case QuestionWord::kHowMuch: return "how much";
  }
  return "what";
}

inline std::string_view to_string(AnswerSource s) {
  switch (s) {
    case AnswerSource::kObjectMatch: return "OBJECT_MATCH";
    case AnswerSource::kNounChunk: return "NOUN_CHUNK";
    case AnswerSource::kNer: return "NER";
  }
  return "NER";
}

inline std::optional<Category> parse_category(std::string_view s) {
  for (Category c : kAllCategories) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

inline std::optional<QuestionWord> parse_question_word(std::string_view s) {
  for (QuestionWord w : kAllQuestionWords) {
    if (to_string(w) == s) return w;
  }
  return std::nullopt;
}

inline std::optional<AnswerSource> parse_answer_source(std::string_view s) {
  for (AnswerSource a : {AnswerSource::kObjectMatch, AnswerSource::kNounChunk,
                         AnswerSource::kNer}) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

// ASCII lowercase; multi-byte UTF-8 sequences pass through untouched.
inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char ch) {
    return static_cast<char>(std::tolower(ch));
  });
  return out;
}

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view kSpace = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(kSpace);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(kSpace);
  return s.substr(b, e - b + 1);
}

// One CoNLL-U token line. The NER tag travels in MISC as NER=<tag>.
struct DepToken {
  int id = 0;
  std::string form;
  std::string lemma;
  std::string upos;
  std::string xpos = "_";
  std::string feats = "_";
  int head = 0;  // 0 marks the root
  std::string deprel;
  std::string deps = "_";
  std::string misc = "_";
  std::string ner = "O";

  // "B-GPE" -> "GPE", "O" -> "".
  std::string_view entity_type() const {
    if (ner.size() > 2 && (ner[0] == 'B' || ner[0] == 'I') && ner[1] == '-') {
      return std::string_view(ner).substr(2);
    }
    return {};
  }
};

// A parsed caption. Token ids are 1..n in surface order.
struct DepTree {
  std::vector<DepToken> tokens;
  std::string sentence_id;
  std::string image_id;
  // Comment lines (without the leading '#') in file order, kept for round-trip.
  std::vector<std::string> comments;
  // Ids of tokens moved to the front of their parent's child list.
  std::vector<int> fronted;

  std::size_t size() const { return tokens.size(); }
  const DepToken& token(int id) const { return tokens.at(static_cast<std::size_t>(id - 1)); }
  DepToken& token(int id) { return tokens.at(static_cast<std::size_t>(id - 1)); }

  // Id of the first token with head 0, or 0 for an empty tree.
  int root() const {
    for (const auto& t : tokens) {
      if (t.head == 0) return t.id;
    }
    return 0;
  }

  bool is_fronted(int id) const {
    return std::find(fronted.begin(), fronted.end(), id) != fronted.end();
  }
};

struct DetectedObject {
  std::string label;
  double score = 0.0;
};

struct ImageRecord {
  std::string image_id;
  std::vector<DetectedObject> objects;
  std::vector<DepTree> captions;
};

struct QAPair {
  std::string image_id;
  std::string caption_id;
  std::string question;
  std::string answer;
  Category category = Category::kObject;
  QuestionWord question_word = QuestionWord::kWhat;
  AnswerSource answer_source = AnswerSource::kObjectMatch;

  bool operator==(const QAPair&) const = default;
};

}  // namespace vqag
