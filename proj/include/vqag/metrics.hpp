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

// BLEU, ROUGE-L and METEOR over token sequences, plus corpus evaluation of
// generated questions against reference questions.
//
// All scores live in [0, 1]. METEOR here is exact-match only: no stemming or
// synonym stages, and the alignment is exact (most matches, then fewest
// chunks) rather than beam-searched.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vqag/jsonl.hpp"
#include "vqag/types.hpp"

namespace vqag {

using Tokens = std::vector<std::string>;

// Lowercases, splits on whitespace and strips surrounding punctuation.
inline Tokens tokenize(std::string_view text) {
  constexpr std::string_view kPunct = "?!.,;:\"'()";
  Tokens out;
  std::string cur;
  auto flush = [&]() {
    std::string_view w = cur;
    while (!w.empty() && kPunct.find(w.front()) != std::string_view::npos) w.remove_prefix(1);
    while (!w.empty() && kPunct.find(w.back()) != std::string_view::npos) w.remove_suffix(1);
    if (!w.empty()) out.push_back(to_lower(w));
    cur.clear();
  };
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else {
      cur += ch;
    }
  }
  flush();
  return out;
}

// ---------------------------------------------------------------- BLEU

// Clipped n-gram statistics for one candidate; summed for corpus BLEU.
struct BleuStats {
  std::vector<std::size_t> matched;  // index n-1
  std::vector<std::size_t> total;
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;

  explicit BleuStats(int max_n = 4)
      : matched(static_cast<std::size_t>(max_n), 0), total(static_cast<std::size_t>(max_n), 0) {}

  BleuStats& operator+=(const BleuStats& o) {
    for (std::size_t i = 0; i < matched.size() && i < o.matched.size(); ++i) {
      matched[i] += o.matched[i];
      total[i] += o.total[i];
    }
    candidate_length += o.candidate_length;
    reference_length += o.reference_length;
    return *this;
  }
};

namespace detail {

// Maps tokens to dense ids (rank among the distinct tokens of all added sequences).
class Interner {
 public:
  explicit Interner(std::initializer_list<const Tokens*> seqs) {
    for (const Tokens* t : seqs) vocab_.insert(vocab_.end(), t->begin(), t->end());
    finish();
  }
  explicit Interner(const Tokens& first, const std::vector<Tokens>& rest) {
    vocab_.assign(first.begin(), first.end());
    for (const auto& t : rest) vocab_.insert(vocab_.end(), t.begin(), t.end());
    finish();
  }

  std::vector<std::uint32_t> ids(const Tokens& toks) const {
    std::vector<std::uint32_t> out;
    out.reserve(toks.size());
    for (const auto& t : toks) {
      const auto it = std::lower_bound(vocab_.begin(), vocab_.end(), std::string_view(t));
      out.push_back(static_cast<std::uint32_t>(it - vocab_.begin()));
    }
    return out;
  }
  std::size_t size() const { return vocab_.size(); }

 private:
  void finish() {
    std::sort(vocab_.begin(), vocab_.end());
    vocab_.erase(std::unique(vocab_.begin(), vocab_.end()), vocab_.end());
  }

  std::vector<std::string_view> vocab_;
};

// N-gram keys are the ids in varint form, which is prefix-free and keeps short
// keys inside the small-string buffer.
inline std::unordered_map<std::string, std::size_t> ngram_counts(const std::vector<std::uint32_t>& ids,
                                                                 int n) {
  std::unordered_map<std::string, std::size_t> counts;
  const auto len = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + len <= ids.size(); ++i) {
    std::string key;
    for (std::size_t k = 0; k < len; ++k) {
      std::uint32_t v = ids[i + k];
      while (v >= 0x80) {
        key += static_cast<char>((v & 0x7f) | 0x80);
        v >>= 7;
      }
      key += static_cast<char>(v);
    }
    ++counts[key];
  }
  return counts;
}

// Sorted (n-gram, count) runs with each n-gram packed into `bits` bits per id.
// Callers guarantee bits * n <= 64.
inline std::vector<std::pair<std::uint64_t, std::size_t>> packed_ngram_runs(
    const std::vector<std::uint32_t>& ids, int n, int bits) {
  const auto len = static_cast<std::size_t>(n);
  std::vector<std::uint64_t> keys;
  for (std::size_t i = 0; i + len <= ids.size(); ++i) {
    std::uint64_t key = 0;
    for (std::size_t k = 0; k < len; ++k) key = (key << bits) | ids[i + k];
    keys.push_back(key);
  }
  std::sort(keys.begin(), keys.end());
  std::vector<std::pair<std::uint64_t, std::size_t>> runs;
  for (std::uint64_t k : keys) {
    if (!runs.empty() && runs.back().first == k) {
      ++runs.back().second;
    } else {
      runs.emplace_back(k, 1);
    }
  }
  return runs;
}

// Clipped matches and total candidate n-grams for one order.
inline std::pair<std::size_t, std::size_t> clipped_counts(
    const std::vector<std::uint32_t>& cand, const std::vector<std::vector<std::uint32_t>>& refs,
    int n, std::size_t symbols) {
  std::size_t matched = 0;
  std::size_t total = 0;
  const int bits = std::max(1, static_cast<int>(std::bit_width(symbols)));
  if (bits * n <= 64) {
    std::vector<std::pair<std::uint64_t, std::size_t>> max_ref;
    for (const auto& r : refs) {
      const auto runs = packed_ngram_runs(r, n, bits);
      max_ref.insert(max_ref.end(), runs.begin(), runs.end());
    }
    std::sort(max_ref.begin(), max_ref.end(), [](const auto& a, const auto& b) {
      return a.first < b.first || (a.first == b.first && a.second > b.second);
    });
    std::size_t j = 0;
    for (const auto& [g, c] : packed_ngram_runs(cand, n, bits)) {
      total += c;
      while (j < max_ref.size() && max_ref[j].first < g) ++j;
      if (j < max_ref.size() && max_ref[j].first == g) matched += std::min(c, max_ref[j].second);
    }
    return {matched, total};
  }
  std::unordered_map<std::string, std::size_t> max_ref;
  for (const auto& r : refs) {
    for (const auto& [g, c] : ngram_counts(r, n)) {
      auto& m = max_ref[g];
      m = std::max(m, c);
    }
  }
  for (const auto& [g, c] : ngram_counts(cand, n)) {
    total += c;
    if (auto it = max_ref.find(g); it != max_ref.end()) matched += std::min(c, it->second);
  }
  return {matched, total};
}

inline double brevity_penalty(std::size_t c, std::size_t r) {
  if (c == 0) return 0.0;
  if (c >= r) return 1.0;
  return std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
}

}  // namespace detail

inline BleuStats bleu_stats(const Tokens& candidate, const std::vector<Tokens>& references,
                            int max_n = 4) {
  BleuStats s(max_n);
  s.candidate_length = candidate.size();
  // Closest reference length, shorter wins ties.
  bool have_ref = false;
  for (const auto& r : references) {
    if (r.empty()) continue;
    const auto diff = [&](std::size_t len) {
      return len > candidate.size() ? len - candidate.size() : candidate.size() - len;
    };
    if (!have_ref || diff(r.size()) < diff(s.reference_length) ||
        (diff(r.size()) == diff(s.reference_length) && r.size() < s.reference_length)) {
      s.reference_length = r.size();
      have_ref = true;
    }
  }
  const detail::Interner interner(candidate, references);
  const auto cand_ids = interner.ids(candidate);
  std::vector<std::vector<std::uint32_t>> ref_ids;
  for (const auto& r : references) ref_ids.push_back(interner.ids(r));
  for (int n = 1; n <= max_n; ++n) {
    const auto [matched, total] = detail::clipped_counts(cand_ids, ref_ids, n, interner.size());
    s.matched[static_cast<std::size_t>(n - 1)] = matched;
    s.total[static_cast<std::size_t>(n - 1)] = total;
  }
  return s;
}

// Sentence BLEU with add-one smoothing on orders n >= 2.
inline double bleu(const Tokens& candidate, const std::vector<Tokens>& references, int max_n = 4) {
  if (candidate.empty() || max_n < 1) return 0.0;
  const bool any_ref =
      std::any_of(references.begin(), references.end(), [](const Tokens& r) { return !r.empty(); });
  if (!any_ref) return 0.0;
  const BleuStats s = bleu_stats(candidate, references, max_n);
  if (s.matched[0] == 0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t i = 0; i < s.matched.size(); ++i) {
    const double smooth = i == 0 ? 0.0 : 1.0;
    log_sum += std::log((static_cast<double>(s.matched[i]) + smooth) /
                        (static_cast<double>(s.total[i]) + smooth));
  }
  return detail::brevity_penalty(s.candidate_length, s.reference_length) *
         std::exp(log_sum / static_cast<double>(s.matched.size()));
}

// Corpus BLEU from summed statistics, unsmoothed. Orders with no candidate
// n-grams anywhere in the corpus are left out of the geometric mean.
inline double corpus_bleu(const BleuStats& s) {
  double log_sum = 0.0;
  int orders = 0;
  for (std::size_t i = 0; i < s.matched.size(); ++i) {
    if (s.total[i] == 0) continue;
    if (s.matched[i] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(s.matched[i]) / static_cast<double>(s.total[i]));
    ++orders;
  }
  if (orders == 0) return 0.0;
  return detail::brevity_penalty(s.candidate_length, s.reference_length) *
         std::exp(log_sum / orders);
}

// ---------------------------------------------------------------- ROUGE-L

inline std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// LCS-based F-measure; beta = 1 gives the balanced harmonic mean.
inline double rouge_l(const Tokens& candidate, const Tokens& reference, double beta = 1.0) {
  if (candidate.empty() || reference.empty()) return 0.0;
  const auto l = static_cast<double>(lcs_length(candidate, reference));
  if (l == 0.0) return 0.0;
  const double p = l / static_cast<double>(candidate.size());
  const double r = l / static_cast<double>(reference.size());
  const double b2 = beta * beta;
  return (1.0 + b2) * p * r / (r + b2 * p);
}

// ---------------------------------------------------------------- METEOR

struct MeteorAlignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
};

namespace detail {

// Maximizes the number of adjacent match pairs (i->j, i+1->j+1) over maximum
// matchings. Any set of such pairs extends to a maximum matching, so the
// search only needs to respect per-symbol match targets.
class ChunkSearch {
 public:
  ChunkSearch(const std::vector<int>& cand, const std::vector<int>& ref, int symbols)
      : cand_(cand), ref_(ref), ref_mask_(static_cast<std::size_t>(symbols), 0),
        target_(static_cast<std::size_t>(symbols), 0),
        symbols_(static_cast<std::size_t>(symbols)),
        remaining_((cand.size() + 1) * symbols_, 0) {
    std::vector<int> cc(static_cast<std::size_t>(symbols), 0);
    for (int s : cand_) ++cc[static_cast<std::size_t>(s)];
    for (std::size_t j = 0; j < ref_.size(); ++j) {
      ref_mask_[static_cast<std::size_t>(ref_[j])] |= std::uint64_t{1} << j;
    }
    for (int s = 0; s < symbols; ++s) {
      target_[static_cast<std::size_t>(s)] =
          std::min(cc[static_cast<std::size_t>(s)],
                   std::popcount(ref_mask_[static_cast<std::size_t>(s)]));
    }
    // Small instances index the memo directly by (i, prev, used).
    const std::size_t states = (cand_.size() + 1) * (ref_.size() + 1);
    if (ref_.size() <= 12 && states << ref_.size() <= (std::size_t{1} << 20)) {
      dense_.assign(states << ref_.size(), kUnknown);
    }
    for (std::size_t i = cand_.size(); i-- > 0;) {
      std::copy_n(remaining_.begin() + static_cast<std::ptrdiff_t>((i + 1) * symbols_), symbols_,
                  remaining_.begin() + static_cast<std::ptrdiff_t>(i * symbols_));
      ++remaining_[i * symbols_ + static_cast<std::size_t>(cand_[i])];
    }
  }

  int best_links() { return search(0, -1, 0); }

 private:
  struct Key {
    std::size_t i;
    int prev;
    std::uint64_t used;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return std::hash<std::uint64_t>()(k.used * 1000003ULL + k.i * 131ULL +
                                        static_cast<std::uint64_t>(k.prev + 1));
    }
  };

  int search(std::size_t i, int prev, std::uint64_t used) {
    if (i == cand_.size()) return 0;
    const Key key{i, prev, used};
    int* slot = nullptr;
    if (!dense_.empty()) {
      slot = &dense_[((i * (ref_.size() + 1) + static_cast<std::size_t>(prev + 1)) << ref_.size()) |
                     used];
      if (*slot != kUnknown) return *slot;
    } else if (auto it = memo_.find(key); it != memo_.end()) {
      return it->second;
    }

    const auto s = static_cast<std::size_t>(cand_[i]);
    const int matched = std::popcount(used & ref_mask_[s]);
    const int needed = target_[s] - matched;
    int best = -1;
    // Leaving position i unmatched must keep the symbol's target reachable.
    if (remaining_[(i + 1) * symbols_ + s] >= needed) best = search(i + 1, -1, used);
    if (needed > 0) {
      std::uint64_t free = ref_mask_[s] & ~used;
      while (free != 0) {
        const int j = std::countr_zero(free);
        free &= free - 1;
        const int link = (prev >= 0 && j == prev + 1) ? 1 : 0;
        best = std::max(best, link + search(i + 1, j, used | (std::uint64_t{1} << j)));
      }
    }
    if (slot != nullptr) {
      *slot = best;
    } else {
      memo_.emplace(key, best);
    }
    return best;
  }

  const std::vector<int>& cand_;
  const std::vector<int>& ref_;
  std::vector<std::uint64_t> ref_mask_;
  std::vector<int> target_;
  std::size_t symbols_;
  std::vector<int> remaining_;  // remaining_[i * symbols_ + s]: count of s in cand_[i..]
  std::unordered_map<Key, int, KeyHash> memo_;
  static constexpr int kUnknown = -2;
  std::vector<int> dense_;
};

}  // namespace detail

inline MeteorAlignment meteor_align(const Tokens& candidate, const Tokens& reference) {
  const detail::Interner interner({&candidate, &reference});
  const auto cand_ids = interner.ids(candidate);
  const auto ref_ids = interner.ids(reference);
  const std::vector<int> cand(cand_ids.begin(), cand_ids.end());
  const std::vector<int> ref(ref_ids.begin(), ref_ids.end());
  const int symbols = static_cast<int>(interner.size());

  std::vector<int> cc(static_cast<std::size_t>(symbols), 0);
  std::vector<int> rc(static_cast<std::size_t>(symbols), 0);
  for (int s : cand) ++cc[static_cast<std::size_t>(s)];
  for (int s : ref) ++rc[static_cast<std::size_t>(s)];
  MeteorAlignment a;
  for (int s = 0; s < symbols; ++s) {
    a.matches += static_cast<std::size_t>(
        std::min(cc[static_cast<std::size_t>(s)], rc[static_cast<std::size_t>(s)]));
  }
  if (a.matches == 0) return a;

  std::size_t links = 0;
  if (ref.size() <= 64) {
    detail::ChunkSearch search(cand, ref, symbols);
    links = static_cast<std::size_t>(search.best_links());
  } else {
    // Beyond 64 reference tokens fall back to greedy left-to-right alignment
    // that extends the current run whenever possible.
    std::vector<bool> used(ref.size(), false);
    std::vector<int> left = cc;
    std::vector<int> room = rc;
    int prev = -1;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      const auto s = static_cast<std::size_t>(cand[i]);
      const int quota = std::min(left[s], room[s]);
      --left[s];
      if (quota == 0) {
        prev = -1;
        continue;
      }
      int pick = -1;
      if (prev >= 0 && static_cast<std::size_t>(prev + 1) < ref.size() &&
          !used[static_cast<std::size_t>(prev + 1)] && ref[static_cast<std::size_t>(prev + 1)] == cand[i]) {
        pick = prev + 1;
        ++links;
      } else {
        for (std::size_t j = 0; j < ref.size(); ++j) {
          if (!used[j] && ref[j] == cand[i]) {
            pick = static_cast<int>(j);
            break;
          }
        }
      }
      used[static_cast<std::size_t>(pick)] = true;
      --room[s];
      prev = pick;
    }
  }
  a.chunks = a.matches - links;
  return a;
}

inline double meteor(const Tokens& candidate, const Tokens& reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  const MeteorAlignment a = meteor_align(candidate, reference);
  if (a.matches == 0) return 0.0;
  const double m = static_cast<double>(a.matches);
  const double p = m / static_cast<double>(candidate.size());
  const double r = m / static_cast<double>(reference.size());
  const double fmean = 10.0 * p * r / (r + 9.0 * p);
  const double frag = static_cast<double>(a.chunks) / m;
  const double penalty = 0.5 * frag * frag * frag;
  return fmean * (1.0 - penalty);
}

// ---------------------------------------------------------------- corpus

struct MetricSet {
  bool bleu = true;
  bool rouge_l = true;
  bool meteor = true;
};

struct MetricReport {
  double bleu = 0.0;
  double rouge_l = 0.0;
  double meteor = 0.0;
  std::size_t n_pairs = 0;
  MetricSet computed;
};

struct Evaluation {
  MetricReport report;
  std::vector<std::string> skipped_ids;  // "image_id/caption_id" with no reference
};

// References apply to a candidate when the image matches and the reference is
// either image-level or names the candidate's caption.
inline Evaluation evaluate_corpus(const std::vector<QAPair>& candidates,
                                  const std::vector<Reference>& references,
                                  const MetricSet& metrics = {}, int max_n = 4) {
  std::map<std::string, std::vector<const Reference*>> by_image;
  for (const auto& r : references) by_image[r.image_id].push_back(&r);

  Evaluation ev;
  ev.report.computed = metrics;
  BleuStats corpus(max_n);
  double rouge_sum = 0.0;
  double meteor_sum = 0.0;
  for (const auto& c : candidates) {
    std::vector<Tokens> refs;
    if (auto it = by_image.find(c.image_id); it != by_image.end()) {
      for (const Reference* r : it->second) {
        if (r->caption_id.empty() || r->caption_id == c.caption_id) {
          auto toks = tokenize(r->question);
          if (!toks.empty()) refs.push_back(std::move(toks));
        }
      }
    }
    if (refs.empty()) {
      ev.skipped_ids.push_back(c.image_id + "/" + c.caption_id);
      continue;
    }
    const Tokens cand = tokenize(c.question);
    ++ev.report.n_pairs;
    if (metrics.bleu) corpus += bleu_stats(cand, refs, max_n);
    double best_rouge = 0.0;
    double best_meteor = 0.0;
    for (const auto& r : refs) {
      if (metrics.rouge_l) best_rouge = std::max(best_rouge, rouge_l(cand, r));
      if (metrics.meteor) best_meteor = std::max(best_meteor, meteor(cand, r));
    }
    rouge_sum += best_rouge;
    meteor_sum += best_meteor;
  }
  if (ev.report.n_pairs > 0) {
    const auto n = static_cast<double>(ev.report.n_pairs);
    if (metrics.bleu) ev.report.bleu = corpus_bleu(corpus);
    if (metrics.rouge_l) ev.report.rouge_l = rouge_sum / n;
    if (metrics.meteor) ev.report.meteor = meteor_sum / n;
  }
  return ev;
}

}  // namespace vqag
