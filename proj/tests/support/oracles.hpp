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

// Brute-force reference implementations. Deliberately naive: strings instead
// of hashes, full scans instead of indexes, counts instead of running sums.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "bertprep/eval/ner.hpp"
#include "bertprep/eval/ud.hpp"

namespace oracle {

// Splits on ASCII space only; callers feed ASCII-spaced text.
inline std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == '\n') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::vector<std::string> ngrams(const std::vector<std::string>& toks, std::size_t n) {
  std::vector<std::string> out;
  auto join = [&](std::size_t b, std::size_t e) {
    std::string s;
    for (std::size_t i = b; i < e; ++i) {
      if (i > b) s += '\x01';
      s += toks[i];
    }
    return s;
  };
  if (toks.empty()) return out;
  if (toks.size() < n) return {join(0, toks.size())};
  for (std::size_t i = 0; i + n <= toks.size(); ++i) out.push_back(join(i, i + n));
  return out;
}

// Keep flags for first-wins dedup against a set of n-gram strings.
inline std::vector<bool> dedup(const std::vector<std::string>& units, std::size_t n,
                               double threshold) {
  std::set<std::string> seen;
  std::vector<bool> keep;
  bool any_kept = false;
  for (const std::string& u : units) {
    const auto grams = ngrams(words(u), n);
    std::size_t hit = 0;
    for (const auto& g : grams) hit += seen.count(g);
    const double frac = grams.empty() ? 0.0 : double(hit) / double(grams.size());
    const bool drop = any_kept && frac >= threshold;
    keep.push_back(!drop);
    if (!drop) {
      any_kept = true;
      seen.insert(grams.begin(), grams.end());
    }
  }
  return keep;
}

// Longest-match-first over a piece set, scanning every piece at every
// position. Word and pieces are sequences of single-byte characters.
inline std::vector<std::string> longest_match(const std::string& word,
                                              const std::set<std::string>& pieces) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < word.size()) {
    std::string best;
    std::size_t best_len = 0;
    for (const std::string& p : pieces) {
      std::string body = p;
      if (pos > 0) {
        if (p.rfind("##", 0) != 0) continue;
        body = p.substr(2);
      } else if (p.rfind("##", 0) == 0) {
        continue;
      }
      if (body.empty() || body.size() <= best_len) continue;
      if (word.compare(pos, body.size(), body) == 0) {
        best = p;
        best_len = body.size();
      }
    }
    if (best_len == 0) return {"[UNK]"};
    out.push_back(best);
    pos += best_len;
  }
  return out;
}

struct Prf {
  double p, r, f;
};

inline Prf prf(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  const double p = tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp);
  const double r = tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn);
  const double f = 2 * tp + fp + fn == 0 ? 0.0 : double(2 * tp) / double(2 * tp + fp + fn);
  return {p, r, f};
}

// Token-level scores from a 4x4 confusion matrix, indexed [gold][pred].
inline std::map<std::string, double> ner_token(const std::vector<bertprep::eval::NerSentence>& gold,
                                               const std::vector<bertprep::eval::NerSentence>& pred) {
  std::array<std::array<std::uint64_t, 4>, 4> cm{};
  for (std::size_t s = 0; s < gold.size(); ++s) {
    for (std::size_t t = 0; t < gold[s].labels.size(); ++t) {
      ++cm[int(gold[s].labels[t])][int(pred[s].labels[t])];
    }
  }
  std::map<std::string, double> m;
  const char* names[] = {"per", "loc", "org"};
  double macro = 0;
  for (int c = 0; c < 3; ++c) {
    std::uint64_t tp = cm[c][c], fp = 0, fn = 0;
    for (int o = 0; o < 4; ++o) {
      if (o == c) continue;
      fp += cm[o][c];
      fn += cm[c][o];
    }
    const Prf x = prf(tp, fp, fn);
    m[std::string("precision_") + names[c]] = x.p;
    m[std::string("recall_") + names[c]] = x.r;
    m[std::string("f1_") + names[c]] = x.f;
    macro += x.f;
  }
  m["macro_f1"] = macro / 3;
  return m;
}

// Span-level: maximal same-label runs, compared as (sentence, begin, end, label) sets.
inline std::map<std::string, double> ner_span(const std::vector<bertprep::eval::NerSentence>& gold,
                                              const std::vector<bertprep::eval::NerSentence>& pred) {
  using Span = std::tuple<std::size_t, std::size_t, std::size_t, int>;
  auto spans = [](const std::vector<bertprep::eval::NerSentence>& data) {
    std::set<Span> out;
    for (std::size_t s = 0; s < data.size(); ++s) {
      const auto& l = data[s].labels;
      std::size_t b = 0;
      while (b < l.size()) {
        std::size_t e = b;
        while (e < l.size() && l[e] == l[b]) ++e;
        if (l[b] != bertprep::eval::NerLabel::kO) out.insert({s, b, e, int(l[b])});
        b = e;
      }
    }
    return out;
  };
  const auto g = spans(gold), p = spans(pred);
  std::map<std::string, double> m;
  const char* names[] = {"per", "loc", "org"};
  double macro = 0;
  for (int c = 0; c < 3; ++c) {
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (const Span& x : p) {
      if (std::get<3>(x) != c) continue;
      if (g.count(x)) {
        ++tp;
      } else {
        ++fp;
      }
    }
    for (const Span& x : g) {
      if (std::get<3>(x) == c && !p.count(x)) ++fn;
    }
    const Prf x = prf(tp, fp, fn);
    m[std::string("precision_") + names[c]] = x.p;
    m[std::string("recall_") + names[c]] = x.r;
    m[std::string("f1_") + names[c]] = x.f;
    macro += x.f;
  }
  m["macro_f1"] = macro / 3;
  return m;
}

struct Attachment {
  double upos, uas, las;
};

inline Attachment ud(const std::vector<bertprep::eval::UdSentence>& gold,
                     const std::vector<bertprep::eval::UdSentence>& pred) {
  std::uint64_t n = 0, upos = 0, heads = 0, labels = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    for (std::size_t t = 0; t < gold[s].size(); ++t) {
      ++n;
      upos += gold[s][t].upos == pred[s][t].upos;
      const bool h = gold[s][t].head == pred[s][t].head;
      heads += h;
      labels += h && gold[s][t].deprel == pred[s][t].deprel;
    }
  }
  if (n == 0) return {0, 0, 0};
  return {double(upos) / double(n), double(heads) / double(n), double(labels) / double(n)};
}

// Wordpiece selection at a fixed cutoff, ASCII words only. Every round
// enumerates candidate strings from the piece starts of the previous round's
// longest-match segmentation, then accepts longest first, charging each
// accepted count to all of its prefixes. Returns key -> remaining count.
inline std::map<std::string, std::uint64_t> learn(const std::map<std::string, std::uint64_t>& words,
                                                  std::uint64_t min_count, std::size_t rounds,
                                                  std::size_t max_chars) {
  std::set<std::string> pieces;  // alphabet in both forms plus accepted
  for (const auto& [w, n] : words) {
    for (char c : w) {
      pieces.insert(std::string(1, c));
      pieces.insert("##" + std::string(1, c));
    }
  }
  const std::set<std::string> alphabet = pieces;
  std::map<std::string, std::uint64_t> accepted;
  for (std::size_t round = 0; round < rounds; ++round) {
    std::map<std::string, std::int64_t> count;
    for (const auto& [w, n] : words) {
      std::vector<std::size_t> starts;
      if (round == 0) {
        for (std::size_t i = 0; i < w.size(); ++i) starts.push_back(i);
      } else {
        std::size_t pos = 0;
        for (const std::string& p : longest_match(w, pieces)) {
          starts.push_back(pos);
          pos += p.rfind("##", 0) == 0 ? p.size() - 2 : p.size();
        }
      }
      for (std::size_t b : starts) {
        for (std::size_t len = 1; len <= max_chars && b + len <= w.size(); ++len) {
          count[(b > 0 ? "##" : "") + w.substr(b, len)] += static_cast<std::int64_t>(n);
        }
      }
    }
    auto body_len = [](const std::string& k) { return k.rfind("##", 0) == 0 ? k.size() - 2 : k.size(); };
    std::vector<std::string> keys;
    for (const auto& [k, c] : count) keys.push_back(k);
    std::stable_sort(keys.begin(), keys.end(),
                     [&](const std::string& a, const std::string& b) { return body_len(a) > body_len(b); });
    accepted.clear();
    for (const std::string& k : keys) {
      const std::int64_t c = count[k];
      if (body_len(k) < 2 || c <= 0 || c < static_cast<std::int64_t>(min_count)) continue;
      accepted[k] = static_cast<std::uint64_t>(c);
      for (std::string p = k; body_len(p) > 1;) {
        p.pop_back();
        count[p] -= c;
      }
    }
    pieces = alphabet;
    for (const auto& [k, c] : accepted) pieces.insert(k);
  }
  return accepted;
}

}  // namespace oracle
