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

// Structural helpers over DepTree: validation, child lists, subtrees and
// id renumbering after deletions.

#include <algorithm>
#include <string>
#include <vector>

#include "vqag/error.hpp"
#include "vqag/types.hpp"

namespace vqag {

// Throws TreeError unless ids are 1..n, there is exactly one root and every
// token reaches the root without revisiting a node.
inline void validate_tree(const DepTree& tree) {
  const int n = static_cast<int>(tree.size());
  if (n == 0) throw TreeError(tree.sentence_id, "sentence has no tokens");
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const DepToken& t = tree.tokens[static_cast<std::size_t>(i)];
    if (t.id != i + 1) {
      throw TreeError(tree.sentence_id, "token ids are not contiguous at position " +
                                            std::to_string(i + 1));
    }
    if (t.head < 0 || t.head > n) {
      throw TreeError(tree.sentence_id, "token " + std::to_string(t.id) +
                                            " has out-of-range head " +
                                            std::to_string(t.head));
    }
    if (t.head == t.id) {
      throw TreeError(tree.sentence_id,
                      "token " + std::to_string(t.id) + " is its own head");
    }
    if (t.head == 0) ++roots;
  }
  if (roots != 1) {
    throw TreeError(tree.sentence_id,
                    "expected exactly one root, found " + std::to_string(roots));
  }
  // 0 = unvisited, 1 = on current path, 2 = known to reach the root.
  std::vector<int> state(static_cast<std::size_t>(n + 1), 0);
  state[0] = 2;
  for (int start = 1; start <= n; ++start) {
    std::vector<int> path;
    int cur = start;
    while (state[static_cast<std::size_t>(cur)] == 0) {
      state[static_cast<std::size_t>(cur)] = 1;
      path.push_back(cur);
      cur = tree.token(cur).head;
    }
    if (state[static_cast<std::size_t>(cur)] == 1) {
      throw TreeError(tree.sentence_id,
                      "cycle through token " + std::to_string(cur));
    }
    for (int p : path) state[static_cast<std::size_t>(p)] = 2;
  }
}

// children[h] lists the dependents of token h in id order; children[0] holds
// the root.
inline std::vector<std::vector<int>> child_lists(const DepTree& tree) {
  std::vector<std::vector<int>> children(tree.size() + 1);
  for (const auto& t : tree.tokens) {
    children[static_cast<std::size_t>(t.head)].push_back(t.id);
  }
  return children;
}

// Ids of `id` and all its descendants, ascending.
inline std::vector<int> subtree(const DepTree& tree, int id) {
  const auto children = child_lists(tree);
  std::vector<int> out;
  std::vector<int> stack{id};
  while (!stack.empty()) {
    const int cur = stack.back();
    stack.pop_back();
    out.push_back(cur);
    for (int c : children[static_cast<std::size_t>(cur)]) stack.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Root first, ending at `id`.
inline std::vector<int> path_from_root(const DepTree& tree, int id) {
  std::vector<int> path;
  for (int cur = id; cur != 0; cur = tree.token(cur).head) path.push_back(cur);
  std::reverse(path.begin(), path.end());
  return path;
}

inline int depth(const DepTree& tree, int id) {
  return static_cast<int>(path_from_root(tree, id).size()) - 1;
}

// True when every subtree covers a contiguous id range.
inline bool is_projective(const DepTree& tree) {
  for (const auto& t : tree.tokens) {
    const auto ids = subtree(tree, t.id);
    if (ids.back() - ids.front() + 1 != static_cast<int>(ids.size())) return false;
  }
  return true;
}

// Keeps the tokens flagged in `keep` (indexed by old id), renumbering ids and
// heads to stay contiguous. Heads of kept tokens must point at kept tokens or 0.
inline DepTree compact(const DepTree& tree, const std::vector<bool>& keep) {
  std::vector<int> new_id(tree.size() + 1, 0);
  int next = 1;
  for (const auto& t : tree.tokens) {
    if (keep[static_cast<std::size_t>(t.id)]) new_id[static_cast<std::size_t>(t.id)] = next++;
  }
  DepTree out;
  out.sentence_id = tree.sentence_id;
  out.image_id = tree.image_id;
  out.comments = tree.comments;
  for (const auto& t : tree.tokens) {
    if (!keep[static_cast<std::size_t>(t.id)]) continue;
    DepToken copy = t;
    copy.id = new_id[static_cast<std::size_t>(t.id)];
    copy.head = new_id[static_cast<std::size_t>(t.head)];
    out.tokens.push_back(std::move(copy));
  }
  for (int f : tree.fronted) {
    if (keep[static_cast<std::size_t>(f)]) out.fronted.push_back(new_id[static_cast<std::size_t>(f)]);
  }
  return out;
}

}  // namespace vqag
