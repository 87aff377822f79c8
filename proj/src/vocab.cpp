// Copyright 2026 The bertprep Authors
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

#include "bertprep/vocab.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include <absl/container/flat_hash_map.h>

#include "bertprep/error.hpp"
#include "bertprep/io.hpp"
#include "bertprep/rng.hpp"
#include "bertprep/text.hpp"

namespace bertprep::vocab {

std::vector<std::string> default_reserved_tokens() {
  return {std::string(kPad), std::string(kUnk), std::string(kCls),
          std::string(kSep), std::string(kMask)};
}

// ---------------------------------------------------------------------------
// Sampling and counting

std::vector<TextUnit> sample_subset(std::span<const TextUnit> corpus,
                                    const LanguageBudget& budget, std::uint64_t seed,
                                    SampleInfo* info) {
  if (corpus.empty()) throw Error("empty corpus");
  if (budget.token_budget == 0) {
    throw ValidationError("token budget for '" + budget.lang + "' must be > 0");
  }

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  std::vector<std::size_t> picked;
  std::uint64_t tokens = 0;
  for (std::size_t idx : order) {
    if (tokens >= budget.token_budget) break;
    tokens += text::count_tokens(corpus[idx].text);
    picked.push_back(idx);
  }
  std::sort(picked.begin(), picked.end());

  if (info != nullptr) {
    info->tokens = tokens;
    info->shortfall = tokens < budget.token_budget ? budget.token_budget - tokens : 0;
  }
  std::vector<TextUnit> out;
  out.reserve(picked.size());
  for (std::size_t idx : picked) out.push_back(corpus[idx]);
  return out;
}

void WordCounts::add(std::string_view word, std::uint64_t n) {
  auto it = counts.find(std::string(word));
  if (it == counts.end()) {
    counts.emplace(std::string(word), n);
  } else {
    it->second += n;
  }
  total_tokens += n;
}

void WordCounts::merge(const WordCounts& other) {
  for (const auto& [word, n] : other.counts) counts[word] += n;
  total_tokens += other.total_tokens;
}

WordCounts count_words(std::span<const std::vector<TextUnit>> subsets, unsigned jobs) {
  std::vector<const TextUnit*> units;
  for (const auto& subset : subsets) {
    for (const TextUnit& u : subset) units.push_back(&u);
  }
  auto count_range = [&](std::size_t begin, std::size_t end) {
    WordCounts wc;
    for (std::size_t i = begin; i < end; ++i) {
      for (std::string_view w : text::split_whitespace(units[i]->text)) wc.add(w);
    }
    return wc;
  };
  jobs = std::max(1u, jobs);
  if (jobs == 1 || units.size() < 2 * jobs) return count_range(0, units.size());

  std::vector<std::future<WordCounts>> parts;
  const std::size_t chunk = (units.size() + jobs - 1) / jobs;
  for (std::size_t b = 0; b < units.size(); b += chunk) {
    parts.push_back(std::async(std::launch::async, count_range, b,
                               std::min(units.size(), b + chunk)));
  }
  WordCounts total = parts.front().get();
  for (std::size_t i = 1; i < parts.size(); ++i) total.merge(parts[i].get());
  return total;
}

// ---------------------------------------------------------------------------
// Vocab

Vocab::Vocab(std::vector<std::string> pieces, std::size_t num_reserved)
    : pieces_(std::move(pieces)), num_reserved_(num_reserved) {
  if (num_reserved_ > pieces_.size()) {
    throw ValidationError("more reserved tokens than pieces");
  }
  index_.reserve(pieces_.size());
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const std::string& p = pieces_[i];
    if (p.empty()) throw ValidationError("empty vocabulary piece at id " + std::to_string(i));
    if (!index_.emplace(p, static_cast<std::uint32_t>(i)).second) {
      throw ValidationError("duplicate vocabulary piece '" + p + "'");
    }
  }
  build_trie();
}

void Vocab::build_trie() {
  // Pointer trie first, then packed.
  std::vector<std::map<std::uint8_t, std::uint32_t>> kids(2);
  std::vector<std::int32_t> ids(2, -1);
  for (std::size_t i = num_reserved_; i < pieces_.size(); ++i) {
    std::string_view body = pieces_[i];
    std::uint32_t node = 0;
    if (body.starts_with(kContinuationPrefix) && body.size() > kContinuationPrefix.size()) {
      body.remove_prefix(kContinuationPrefix.size());
      node = 1;
    }
    for (char c : body) {
      const auto b = static_cast<std::uint8_t>(c);
      auto it = kids[node].find(b);
      if (it == kids[node].end()) {
        it = kids[node].emplace(b, static_cast<std::uint32_t>(kids.size())).first;
        kids.emplace_back();
        ids.push_back(-1);
      }
      node = it->second;
    }
    ids[node] = static_cast<std::int32_t>(i);
  }

  constexpr std::uint32_t kNone = UINT32_MAX;
  base_.assign(2, 0);
  check_.assign(2, kNone - 1);  // roots: occupied, nobody's child
  value_.assign(2, -1);
  std::vector<bool> base_taken(2, false);
  std::vector<std::uint32_t> state_of(kids.size(), 0);
  state_of[1] = 1;
  std::size_t first_free = 2;
  std::vector<std::uint32_t> queue = {0, 1};
  for (std::size_t q = 0; q < queue.size(); ++q) {
    const std::uint32_t node = queue[q];
    const std::uint32_t s = state_of[node];
    if (kids[node].empty()) continue;
    const std::uint32_t lo = kids[node].begin()->first;
    while (first_free < check_.size() && check_[first_free] != kNone) ++first_free;
    std::size_t b = first_free > lo ? first_free - lo : 1;
    for (;; ++b) {
      if (b < base_taken.size() && base_taken[b]) continue;
      bool fits = true;
      for (const auto& [c, child] : kids[node]) {
        if (b + c < check_.size() && check_[b + c] != kNone) {
          fits = false;
          break;
        }
      }
      if (fits) break;
    }
    if (b >= base_taken.size()) base_taken.resize(b + 1, false);
    base_taken[b] = true;
    const std::size_t need = b + kids[node].rbegin()->first + 1;
    if (need > check_.size()) {
      base_.resize(need, 0);
      check_.resize(need, kNone);
      value_.resize(need, -1);
    }
    base_[s] = static_cast<std::uint32_t>(b);
    for (const auto& [c, child] : kids[node]) {
      const auto t = static_cast<std::uint32_t>(b + c);
      check_[t] = s;
      value_[t] = ids[child];
      state_of[child] = t;
      queue.push_back(child);
    }
  }
}

namespace {

bool looks_reserved(std::string_view line) {
  if (line.size() < 3 || line.front() != '[' || line.back() != ']') return false;
  return std::all_of(line.begin() + 1, line.end() - 1,
                     [](char c) { return c >= 'A' && c <= 'Z'; });
}

}  // namespace

Vocab Vocab::load(std::istream& in) {
  std::vector<std::string> pieces;
  std::size_t num_reserved = 0;
  bool in_reserved = true;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw ParseError("empty vocabulary line", lineno);
    if (in_reserved && looks_reserved(line)) {
      ++num_reserved;
    } else {
      in_reserved = false;
    }
    pieces.push_back(std::move(line));
  }
  try {
    return Vocab(std::move(pieces), num_reserved);
  } catch (const ValidationError& e) {
    throw ParseError(e.what(), 0);
  }
}

Vocab Vocab::load_file(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return load(in);
}

void Vocab::save(std::ostream& out) const {
  for (const std::string& p : pieces_) out << p << '\n';
}

std::optional<std::uint32_t> Vocab::find(std::string_view piece) const {
  auto it = index_.find(std::string(piece));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t Vocab::id(std::string_view piece) const {
  auto found = find(piece);
  if (!found) throw ValidationError("vocabulary lacks '" + std::string(piece) + "'");
  return *found;
}

template <typename Emit>
bool Vocab::segment(std::string_view word, Emit&& emit) const {
  const std::size_t states = check_.size();
  std::size_t pos = 0;
  while (pos < word.size()) {
    std::uint32_t s = pos == 0 ? 0 : 1;
    std::int32_t best = -1;
    std::size_t best_end = pos;
    for (std::size_t i = pos; i < word.size(); ++i) {
      const std::size_t t = std::size_t{base_[s]} + static_cast<std::uint8_t>(word[i]);
      if (t >= states || check_[t] != s) break;
      s = static_cast<std::uint32_t>(t);
      if (value_[t] >= 0) {
        best = value_[t];
        best_end = i + 1;
      }
    }
    if (best < 0) return false;
    emit(static_cast<std::uint32_t>(best));
    pos = best_end;
  }
  return true;
}

std::vector<std::string> Vocab::tokenize(std::string_view word) const {
  if (word.empty()) throw ValidationError("empty word");
  std::vector<std::string> out;
  if (!segment(word, [&](std::uint32_t id) { out.push_back(pieces_[id]); })) {
    return {std::string(kUnk)};
  }
  return out;
}

std::vector<std::uint32_t> Vocab::tokenize_ids(std::string_view word) const {
  std::vector<std::uint32_t> out;
  tokenize_ids(word, out);
  return out;
}

void Vocab::tokenize_ids(std::string_view word, std::vector<std::uint32_t>& out) const {
  if (word.empty()) throw ValidationError("empty word");
  out.clear();
  if (!segment(word, [&](std::uint32_t id) { out.push_back(id); })) out.assign(1, id(kUnk));
}

// ---------------------------------------------------------------------------
// Learning
//
// Candidates are substrings that start at a piece boundary of the current
// segmentation of each training word (initially every character boundary).
// A candidate is weighted by the total count of the words it occurs in.
// Selection walks candidates longest first: one whose remaining count meets
// the cutoff is accepted and its count is subtracted from all of its proper
// prefixes, so short pieces only survive on occurrences not already covered
// by a longer accepted piece. The accepted set becomes the segmentation
// vocabulary for the next round. The cutoff is bisected to approach the
// target size; accepted pieces are ranked by count * length.

namespace {

struct TrainingWord {
  std::vector<char32_t> cps;
  std::uint64_t count;
};

struct Accepted {
  std::string key;
  std::uint64_t score;
};

// Prefix tree of candidate pieces. Node 0 roots word-initial pieces and
// node 1 roots "##" continuations; a node's parent is the candidate one code
// point shorter.
class PieceTrie {
 public:
  static constexpr std::uint32_t kInitialRoot = 0;
  static constexpr std::uint32_t kContinuationRoot = 1;
  static constexpr std::uint32_t kNone = UINT32_MAX;

  PieceTrie() {
    add(kNone, 0, 0);
    add(kNone, 0, 0);
  }

  std::size_t size() const { return parent_.size(); }
  std::uint32_t parent(std::uint32_t n) const { return parent_[n]; }
  std::uint32_t depth(std::uint32_t n) const { return depth_[n]; }
  std::uint64_t count(std::uint32_t n) const { return count_[n]; }

  std::uint32_t child(std::uint32_t n, char32_t cp) const {
    auto it = children_.find(edge(n, cp));
    return it == children_.end() ? kNone : it->second;
  }

  // Adds `n` to the count of the child, creating it when missing.
  std::uint32_t bump(std::uint32_t n, char32_t cp, std::uint64_t by) {
    auto [it, inserted] = children_.try_emplace(edge(n, cp), 0u);
    if (inserted) it->second = add(n, cp, depth_[n] + 1);
    count_[it->second] += by;
    return it->second;
  }

  std::string key(std::uint32_t n) const {
    std::vector<char32_t> cps;
    while (parent_[n] != kNone) {
      cps.push_back(cp_[n]);
      n = parent_[n];
    }
    std::string out = n == kContinuationRoot ? std::string(kContinuationPrefix) : std::string();
    for (auto it = cps.rbegin(); it != cps.rend(); ++it) text::append_utf8(out, *it);
    return out;
  }

  void reserve(std::size_t n) {
    children_.reserve(n);
    parent_.reserve(n);
    cp_.reserve(n);
    depth_.reserve(n);
    count_.reserve(n);
  }

 private:
  static std::uint64_t edge(std::uint32_t n, char32_t cp) {
    return (static_cast<std::uint64_t>(n) << 32) | cp;
  }

  std::uint32_t add(std::uint32_t parent, char32_t cp, std::uint32_t depth) {
    parent_.push_back(parent);
    cp_.push_back(cp);
    depth_.push_back(depth);
    count_.push_back(0);
    return static_cast<std::uint32_t>(parent_.size() - 1);
  }

  absl::flat_hash_map<std::uint64_t, std::uint32_t> children_;
  std::vector<std::uint32_t> parent_;
  std::vector<char32_t> cp_;
  std::vector<std::uint32_t> depth_;
  std::vector<std::uint64_t> count_;
};

struct Round {
  PieceTrie trie;
  std::vector<std::uint32_t> longest_first;  // multi-character nodes only
  std::uint64_t max_count = 0;
};

class Learner {
 public:
  Learner(const WordCounts& counts, const LearnOptions& options)
      : options_(options) {
    std::vector<const std::pair<const std::string, std::uint64_t>*> sorted;
    sorted.reserve(counts.counts.size());
    for (const auto& kv : counts.counts) sorted.push_back(&kv);
    std::sort(sorted.begin(), sorted.end(),
              [](auto* a, auto* b) { return a->first < b->first; });

    std::map<char32_t, std::uint64_t> char_freq;
    for (const auto* kv : sorted) {
      if (kv->first.empty() || kv->second == 0) continue;
      std::size_t pos = 0;
      while (pos < kv->first.size()) {
        char_freq[text::decode_utf8(kv->first, pos)] += kv->second;
      }
    }
    std::vector<std::pair<char32_t, std::uint64_t>> chars(char_freq.begin(), char_freq.end());
    if (options_.max_alphabet > 0 && chars.size() > options_.max_alphabet) {
      std::stable_sort(chars.begin(), chars.end(),
                       [](const auto& a, const auto& b) { return a.second > b.second; });
      chars.resize(options_.max_alphabet);
    }
    std::unordered_set<char32_t> kept_chars;
    for (const auto& [cp, n] : chars) {
      kept_chars.insert(cp);
      std::string s;
      text::append_utf8(s, cp);
      alphabet_.push_back(s);
    }
    std::sort(alphabet_.begin(), alphabet_.end());

    for (const auto* kv : sorted) {
      if (kv->first.empty() || kv->second == 0) continue;
      TrainingWord w{{}, kv->second};
      bool covered = true;
      std::size_t pos = 0;
      while (pos < kv->first.size() && covered) {
        w.cps.push_back(text::decode_utf8(kv->first, pos));
        covered = kept_chars.contains(w.cps.back());
      }
      if (covered) words_.push_back(std::move(w));
    }
    first_round_ = count_candidates(nullptr, {}, 1);
  }

  std::size_t alphabet_size() const { return alphabet_.size(); }
  const std::vector<std::string>& alphabet() const { return alphabet_; }
  std::uint64_t max_count() const { return first_round_.max_count; }

  std::size_t base_size() const {
    return options_.reserved.size() + 2 * alphabet_.size();
  }

  // Full learning run at a fixed cutoff.
  std::vector<Accepted> build(std::uint64_t min_count) const {
    std::vector<std::uint32_t> accepted = select(first_round_, min_count);
    const Round* prev = &first_round_;
    Round current;
    for (std::size_t it = 1; it < options_.max_iterations; ++it) {
      std::vector<bool> in_vocab(prev->trie.size(), false);
      std::size_t longest = 1;
      for (std::uint32_t n : accepted) {
        in_vocab[n] = true;
        longest = std::max<std::size_t>(longest, prev->trie.depth(n));
      }
      Round next = count_candidates(&prev->trie, in_vocab, longest);
      accepted = select(next, min_count);
      current = std::move(next);
      prev = &current;
    }
    std::vector<std::int64_t> remaining = remaining_after(*prev, min_count);
    std::vector<Accepted> out;
    out.reserve(accepted.size());
    for (std::uint32_t n : accepted) {
      out.push_back({prev->trie.key(n),
                     static_cast<std::uint64_t>(remaining[n]) * prev->trie.depth(n)});
    }
    return out;
  }

 private:
  // Candidates start at the boundaries of the greedy segmentation under the
  // pieces flagged in `seg` (every character boundary when `seg` is null).
  Round count_candidates(const PieceTrie* seg, const std::vector<bool>& in_vocab,
                         std::size_t longest) const {
    Round round;
    round.trie.reserve(seg == nullptr ? words_.size() * 16 : seg->size());
    std::vector<std::size_t> bounds;
    for (const TrainingWord& w : words_) {
      const std::size_t len = w.cps.size();
      bounds.clear();
      if (seg == nullptr) {
        for (std::size_t i = 0; i < len; ++i) bounds.push_back(i);
      } else {
        std::size_t start = 0;
        while (start < len) {
          bounds.push_back(start);
          std::size_t best_end = start + 1;  // single characters always match
          std::uint32_t node = start == 0 ? PieceTrie::kInitialRoot : PieceTrie::kContinuationRoot;
          for (std::size_t i = start; i < std::min(len, start + longest); ++i) {
            node = seg->child(node, w.cps[i]);
            if (node == PieceTrie::kNone) break;
            if (in_vocab[node]) best_end = i + 1;
          }
          start = best_end;
        }
      }
      for (std::size_t start : bounds) {
        const std::size_t stop = std::min(len, start + options_.max_piece_chars);
        std::uint32_t node = start == 0 ? PieceTrie::kInitialRoot : PieceTrie::kContinuationRoot;
        for (std::size_t end = start + 1; end <= stop; ++end) {
          node = round.trie.bump(node, w.cps[end - 1], w.count);
        }
      }
    }

    std::uint32_t deepest = 0;
    for (std::uint32_t n = 2; n < round.trie.size(); ++n) {
      round.max_count = std::max(round.max_count, round.trie.count(n));
      deepest = std::max(deepest, round.trie.depth(n));
    }
    std::vector<std::vector<std::uint32_t>> by_depth(deepest + 1);
    for (std::uint32_t n = 2; n < round.trie.size(); ++n) {
      if (round.trie.depth(n) >= 2) by_depth[round.trie.depth(n)].push_back(n);
    }
    for (std::size_t d = by_depth.size(); d-- > 2;) {
      round.longest_first.insert(round.longest_first.end(), by_depth[d].begin(),
                                 by_depth[d].end());
    }
    return round;
  }

  // Walks candidates longest first. Accepting one subtracts its remaining
  // count from every shorter prefix, so the order among equal lengths does
  // not matter.
  std::vector<std::int64_t> remaining_after(const Round& round, std::uint64_t min_count,
                                            std::vector<std::uint32_t>* accepted = nullptr) const {
    const PieceTrie& t = round.trie;
    std::vector<std::int64_t> remaining(t.size());
    for (std::uint32_t n = 0; n < t.size(); ++n) remaining[n] = static_cast<std::int64_t>(t.count(n));
    for (std::uint32_t n : round.longest_first) {
      const std::int64_t c = remaining[n];
      if (c <= 0 || c < static_cast<std::int64_t>(min_count)) continue;
      if (accepted != nullptr) accepted->push_back(n);
      for (std::uint32_t p = t.parent(n); t.depth(p) >= 1; p = t.parent(p)) remaining[p] -= c;
    }
    return remaining;
  }

  std::vector<std::uint32_t> select(const Round& round, std::uint64_t min_count) const {
    std::vector<std::uint32_t> accepted;
    remaining_after(round, min_count, &accepted);
    return accepted;
  }

  const LearnOptions& options_;
  std::vector<TrainingWord> words_;
  std::vector<std::string> alphabet_;
  Round first_round_;
};

bool by_score(const Accepted& a, const Accepted& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.key < b.key;
}

}  // namespace

Vocab learn_wordpieces(const WordCounts& counts, const LearnOptions& options,
                       LearnInfo* info) {
  if (counts.counts.empty()) throw ValidationError("no words to learn from");
  if (options.max_iterations == 0) throw ValidationError("max_iterations must be >= 1");
  if (options.max_piece_chars == 0) throw ValidationError("max_piece_chars must be >= 1");
  if (!(options.size_tolerance >= 0.0)) throw ValidationError("size tolerance must be >= 0");

  Learner learner(counts, options);
  const std::size_t base = learner.base_size();
  if (options.target_size < base) throw ValidationError("target below alphabet size");

  const double target = static_cast<double>(options.target_size);
  const double slack = options.size_tolerance * target;
  auto size_of = [&](const std::vector<Accepted>& a) { return base + a.size(); };
  auto distance = [&](std::size_t size) {
    return std::abs(static_cast<double>(size) - target);
  };

  std::vector<Accepted> best;
  std::uint64_t best_cutoff = 0;
  std::size_t probes = 0;

  if (options.target_size > base) {
    // Bisection over the cutoff: a higher cutoff admits fewer pieces.
    std::uint64_t lo = 1;
    std::uint64_t hi = std::max<std::uint64_t>(learner.max_count(), 1);
    bool have_best = false;
    while (lo <= hi) {
      // Vocabulary size falls roughly as a power of the cutoff, so probe at
      // the geometric midpoint.
      const auto geo = static_cast<std::uint64_t>(
          std::sqrt(static_cast<long double>(lo) * static_cast<long double>(hi)));
      const std::uint64_t mid = std::clamp(geo, lo, hi);
      std::vector<Accepted> candidate = learner.build(mid);
      ++probes;
      const std::size_t size = size_of(candidate);
      if (!have_best || distance(size) < distance(size_of(best)) ||
          (distance(size) == distance(size_of(best)) && mid < best_cutoff)) {
        best = std::move(candidate);
        best_cutoff = mid;
        have_best = true;
      }
      if (distance(size) <= slack) break;
      if (size > options.target_size) {
        lo = mid + 1;
      } else {
        if (mid == 1) break;
        hi = mid - 1;
      }
    }
  }

  const std::size_t before_trim = size_of(best);
  std::sort(best.begin(), best.end(), by_score);
  // Overshoot beyond the tolerance: keep the highest-ranked pieces.
  if (static_cast<double>(size_of(best)) > target + slack) {
    best.resize(options.target_size - base);
  }

  std::vector<std::string> pieces = options.reserved;
  for (const std::string& c : learner.alphabet()) pieces.push_back(c);
  for (const std::string& c : learner.alphabet()) {
    pieces.push_back(std::string(kContinuationPrefix) + c);
  }
  for (Accepted& a : best) pieces.push_back(std::move(a.key));

  if (info != nullptr) {
    info->alphabet_chars = learner.alphabet_size();
    info->min_count = best_cutoff;
    info->size_before_trim = before_trim;
    info->probes = probes;
  }
  return Vocab(std::move(pieces), options.reserved.size());
}

}  // namespace bertprep::vocab
