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

// Shared fixtures for the test suites: tree builders and random generators.

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vqag/types.hpp"

namespace vqag::testing {

inline std::string data_path(const std::string& name) {
  return std::string(VQAG_TEST_DATA_DIR) + "/" + name;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Compact token description: {form, upos, head, deprel, ner}.
struct Tok {
  std::string form;
  std::string upos;
  int head;
  std::string deprel;
  std::string ner = "O";
};

inline DepTree make_tree(const std::vector<Tok>& toks, std::string sent_id = "s1",
                         std::string image_id = "img1") {
  DepTree t;
  t.sentence_id = std::move(sent_id);
  t.image_id = std::move(image_id);
  int id = 1;
  for (const auto& k : toks) {
    DepToken d;
    d.id = id++;
    d.form = k.form;
    d.lemma = to_lower(k.form);
    d.upos = k.upos;
    d.head = k.head;
    d.deprel = k.deprel;
    d.ner = k.ner;
    t.tokens.push_back(std::move(d));
  }
  return t;
}

inline std::vector<std::string> forms(const std::vector<DepToken>& toks) {
  std::vector<std::string> out;
  for (const auto& t : toks) out.push_back(t.form);
  return out;
}

inline std::vector<std::string> forms(const DepTree& tree) { return forms(tree.tokens); }

namespace detail {

// Attaches every token in [lo, hi] under `parent` as one or more projective
// subtrees covering consecutive segments.
inline void attach_segments(std::vector<int>& heads, int lo, int hi, int parent, std::mt19937& rng) {
  int start = lo;
  while (start <= hi) {
    std::uniform_int_distribution<int> len_dist(1, hi - start + 1);
    const int end = start + len_dist(rng) - 1;
    std::uniform_int_distribution<int> head_dist(start, end);
    const int h = head_dist(rng);
    heads[static_cast<std::size_t>(h)] = parent;
    attach_segments(heads, start, h - 1, h, rng);
    attach_segments(heads, h + 1, end, h, rng);
    start = end + 1;
  }
}

}  // namespace detail

// heads[i] for ids 1..n (index 0 unused) of a random projective tree.
inline std::vector<int> random_projective_heads(int n, std::mt19937& rng) {
  std::vector<int> heads(static_cast<std::size_t>(n + 1), 0);
  std::uniform_int_distribution<int> root_dist(1, n);
  const int root = root_dist(rng);
  heads[static_cast<std::size_t>(root)] = 0;
  detail::attach_segments(heads, 1, root - 1, root, rng);
  detail::attach_segments(heads, root + 1, n, root, rng);
  return heads;
}

// Any rooted tree, projective or not.
inline std::vector<int> random_heads(int n, std::mt19937& rng) {
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i + 1;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> heads(static_cast<std::size_t>(n + 1), 0);
  for (std::size_t k = 1; k < order.size(); ++k) {
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    heads[static_cast<std::size_t>(order[k])] = order[pick(rng)];
  }
  return heads;
}

// Tree with distinct forms w1..wn over the given head array.
inline DepTree tree_from_heads(const std::vector<int>& heads, const std::string& sent_id = "r") {
  DepTree t;
  t.sentence_id = sent_id;
  t.image_id = "img";
  for (std::size_t i = 1; i < heads.size(); ++i) {
    DepToken d;
    d.id = static_cast<int>(i);
    d.form = "w" + std::to_string(i);
    d.lemma = d.form;
    d.upos = "NOUN";
    d.head = heads[i];
    d.deprel = heads[i] == 0 ? "root" : "dep";
    t.tokens.push_back(std::move(d));
  }
  return t;
}

// Union-find acyclicity check, independent of validate_tree.
inline bool is_tree_oracle(const DepTree& t) {
  const std::size_t n = t.tokens.size();
  if (n == 0) return false;
  std::vector<std::size_t> parent(n + 1);
  for (std::size_t i = 0; i <= n; ++i) parent[i] = i;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t roots = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& tok = t.tokens[i];
    if (tok.id != static_cast<int>(i + 1)) return false;
    if (tok.head < 0 || tok.head > static_cast<int>(n)) return false;
    if (tok.head == 0) {
      ++roots;
      continue;
    }
    const auto a = find(static_cast<std::size_t>(tok.id));
    const auto b = find(static_cast<std::size_t>(tok.head));
    if (a == b) return false;
    parent[a] = b;
  }
  return roots == 1;
}

}  // namespace vqag::testing
