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

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "bertprep/error.hpp"
#include "bertprep/rng.hpp"
#include "oracles.hpp"

namespace bertprep::vocab {
namespace {

Vocab make_vocab(std::vector<std::string> learned) {
  std::vector<std::string> pieces = default_reserved_tokens();
  pieces.insert(pieces.end(), learned.begin(), learned.end());
  return Vocab(std::move(pieces), default_reserved_tokens().size());
}

std::string strip(const std::vector<std::string>& pieces) {
  std::string out;
  for (const std::string& p : pieces) {
    out += std::string_view(p).starts_with(kContinuationPrefix) ? p.substr(2) : p;
  }
  return out;
}

TEST(Tokenize, GreedyLongestMatch) {
  const Vocab v = make_vocab({"un", "una", "##aff", "##able", "##a", "##b", "##l", "##e", "##f"});
  EXPECT_EQ(v.tokenize("unaffable"), (std::vector<std::string>{"una", "##f", "##f", "##able"}));
  EXPECT_EQ(v.tokenize("un"), (std::vector<std::string>{"un"}));
  EXPECT_EQ(v.tokenize("xyz"), (std::vector<std::string>{"[UNK]"}));
  EXPECT_EQ(v.tokenize("unx"), (std::vector<std::string>{"[UNK]"}));
  EXPECT_THROW(v.tokenize(""), ValidationError);
  EXPECT_EQ(v.tokenize_ids("xyz"), (std::vector<std::uint32_t>{v.id(kUnk)}));
  std::vector<std::uint32_t> buf = {99, 98};
  v.tokenize_ids("unaffable", buf);
  EXPECT_EQ(buf, v.tokenize_ids("unaffable"));
  v.tokenize_ids("unx", buf);
  EXPECT_EQ(buf, (std::vector<std::uint32_t>{v.id(kUnk)}));
}

TEST(Tokenize, MultibyteCharacters) {
  const Vocab v = make_vocab({"č", "ć", "##š", "##a", "ča", "##ša"});
  EXPECT_EQ(v.tokenize("čaša"), (std::vector<std::string>{"ča", "##ša"}));
  EXPECT_EQ(v.tokenize("ćš"), (std::vector<std::string>{"ć", "##š"}));
}

TEST(Vocab, RejectsDuplicatesAndEmpties) {
  EXPECT_THROW(make_vocab({"a", "a"}), ValidationError);
  EXPECT_THROW(make_vocab({""}), ValidationError);
  EXPECT_THROW(Vocab({"a"}, 2), ValidationError);
  EXPECT_THROW(make_vocab({"a"}).id("zz"), ValidationError);
}

TEST(Vocab, SaveLoadRoundTrip) {
  const Vocab v = make_vocab({"a", "##b", "ab"});
  std::stringstream ss;
  v.save(ss);
  const Vocab back = Vocab::load(ss);
  EXPECT_EQ(back.pieces(), v.pieces());
  EXPECT_EQ(back.num_reserved(), 5u);
  EXPECT_EQ(back.id("ab"), 7u);
}

TEST(Vocab, LoadRejectsEmptyLines) {
  std::istringstream in("[PAD]\n\na\n");
  try {
    Vocab::load(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

// Every word over {a,b,c,d} up to `max_len` characters.
std::vector<std::string> all_words(std::size_t max_len) {
  std::vector<std::string> out, frontier = {""};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<std::string> next;
    for (const auto& w : frontier) {
      for (char c : std::string("abcd")) next.push_back(w + c);
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

std::set<std::string> random_pieces(Rng& rng) {
  std::set<std::string> pieces;
  const std::size_t n = 3 + rng.below(30);
  while (pieces.size() < n) {
    std::string body;
    const std::size_t len = 1 + rng.below(4);
    for (std::size_t i = 0; i < len; ++i) body += static_cast<char>('a' + rng.below(4));
    pieces.insert(rng.below(2) ? "##" + body : body);
  }
  return pieces;
}

TEST(Tokenize, MatchesExhaustiveOracle) {
  Rng rng(3);
  const auto words = all_words(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pieces = random_pieces(rng);
    const Vocab v = make_vocab({pieces.begin(), pieces.end()});
    for (const auto& w : words) {
      ASSERT_EQ(v.tokenize(w), oracle::longest_match(w, pieces)) << w;
    }
  }
}

TEST(Sample, ReachesBudgetInCorpusOrder) {
  std::vector<TextUnit> corpus;
  for (std::uint64_t i = 0; i < 100; ++i) {
    corpus.push_back({i, "hr", "w1 w2 w3", Granularity::kSentence});
  }
  SampleInfo info;
  const auto picked = sample_subset(corpus, {"hr", 31}, 7, &info);
  EXPECT_EQ(picked.size(), 11u);  // 10 units give 30 < 31 tokens
  EXPECT_EQ(info.tokens, 33u);
  EXPECT_EQ(info.shortfall, 0u);
  for (std::size_t i = 1; i < picked.size(); ++i) EXPECT_LT(picked[i - 1].id, picked[i].id);

  const auto again = sample_subset(corpus, {"hr", 31}, 7);
  ASSERT_EQ(again.size(), picked.size());
  for (std::size_t i = 0; i < picked.size(); ++i) EXPECT_EQ(again[i].id, picked[i].id);
}

TEST(Sample, ShortfallWhenCorpusTooSmall) {
  const std::vector<TextUnit> corpus = {{0, "en", "a b", Granularity::kSentence}};
  SampleInfo info;
  const auto picked = sample_subset(corpus, {"en", 10}, 1, &info);
  EXPECT_EQ(picked.size(), 1u);
  EXPECT_EQ(info.shortfall, 8u);
  EXPECT_THROW(sample_subset(corpus, {"en", 0}, 1), ValidationError);
  EXPECT_THROW(sample_subset(std::vector<TextUnit>{}, {"en", 5}, 1), Error);
}

TEST(Counts, IndependentOfJobs) {
  std::vector<std::vector<TextUnit>> subsets(2);
  Rng rng(1);
  for (std::uint64_t i = 0; i < 500; ++i) {
    subsets[i % 2].push_back({i, "x", "w" + std::to_string(rng.below(20)) + " w" +
                                          std::to_string(rng.below(20)),
                              Granularity::kSentence});
  }
  const auto one = count_words(subsets, 1);
  EXPECT_EQ(one.total_tokens, 1000u);
  EXPECT_EQ(count_words(subsets, 3), one);
}

TEST(Learn, SingleWordByHand) {
  // Round one over "aaaa": aaaa=1 aaa=1 aa=1, ##aaa=1 ##aa=2 ##a=3. At cutoff
  // 1 the pieces are aaaa, ##aaa, ##aa; aaa and aa are charged to aaaa.
  WordCounts wc;
  wc.add("aaaa");
  LearnOptions opts;
  opts.max_iterations = 1;
  opts.size_tolerance = 0;
  opts.target_size = 10;
  Vocab v = learn_wordpieces(wc, opts);
  EXPECT_EQ(v.pieces(), (std::vector<std::string>{"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
                                                  "a", "##a", "aaaa", "##aaa", "##aa"}));
  // Target 9: cutoff 1 overshoots, cutoff 2 keeps only ##aa; the tie goes to
  // the lower cutoff and the lowest score (##aa, 1 * 2) is trimmed.
  opts.target_size = 9;
  v = learn_wordpieces(wc, opts);
  EXPECT_EQ(v.size(), 9u);
  EXPECT_TRUE(v.contains("aaaa"));
  EXPECT_TRUE(v.contains("##aaa"));
  EXPECT_FALSE(v.contains("##aa"));
}

TEST(Learn, TargetBelowAlphabetFails) {
  WordCounts wc;
  wc.add("abc");
  LearnOptions opts;
  opts.target_size = 5 + 5;  // needs 5 + 2 * 3
  EXPECT_THROW(learn_wordpieces(wc, opts), ValidationError);
  opts.target_size = 11;
  EXPECT_EQ(learn_wordpieces(wc, opts).size(), 11u);
}

TEST(Learn, MatchesBruteForceOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    std::map<std::string, std::uint64_t> words;
    WordCounts wc;
    const std::size_t types = 5 + rng.below(40);
    for (std::size_t i = 0; i < types; ++i) {
      std::string w;
      const std::size_t len = 1 + rng.below(9);
      for (std::size_t k = 0; k < len; ++k) w += static_cast<char>('a' + rng.below(4));
      const std::uint64_t n = 1 + rng.below(50);
      words[w] += n;
      wc.add(w, n);
    }
    LearnOptions opts;
    opts.max_iterations = 1 + rng.below(4);
    opts.max_piece_chars = 2 + rng.below(6);
    opts.size_tolerance = 0;
    std::set<char> chars;
    for (const auto& [w, n] : words) chars.insert(w.begin(), w.end());
    const std::size_t base = 5 + 2 * chars.size();
    opts.target_size = base + 1 + rng.below(30);

    LearnInfo info;
    const Vocab v = learn_wordpieces(wc, opts, &info);
    const auto expected = oracle::learn(words, info.min_count, opts.max_iterations,
                                        opts.max_piece_chars);
    ASSERT_EQ(info.size_before_trim, base + expected.size()) << "trial " << trial;
    std::set<std::string> learned(v.pieces().begin() + static_cast<std::ptrdiff_t>(base),
                                  v.pieces().end());
    for (const std::string& p : learned) {
      ASSERT_TRUE(expected.contains(p)) << p << " trial " << trial;
    }
    if (learned.size() == expected.size()) continue;
    // Trimmed: the kept pieces outrank every dropped one by count * length.
    auto score = [&](const std::string& k) {
      return expected.at(k) * (k.starts_with("##") ? k.size() - 2 : k.size());
    };
    std::uint64_t min_kept = UINT64_MAX, max_dropped = 0;
    for (const auto& [k, n] : expected) {
      if (learned.contains(k)) {
        min_kept = std::min(min_kept, score(k));
      } else {
        max_dropped = std::max(max_dropped, score(k));
      }
    }
    EXPECT_GE(min_kept, max_dropped);
    EXPECT_EQ(v.size(), opts.target_size);
  }
}

TEST(Learn, VocabularyShapeAndRoundTrip) {
  Rng rng(2);
  WordCounts wc;
  const std::vector<std::string> syll = {"ka", "ri", "šo", "ne", "đu", "ta", "li", "mo"};
  for (int i = 0; i < 3000; ++i) {
    std::string w;
    const std::size_t n = 1 + rng.below(4);
    for (std::size_t k = 0; k < n; ++k) w += syll[rng.below(syll.size())];
    wc.add(w);
  }
  LearnOptions opts;
  opts.target_size = 120;
  LearnInfo info;
  const Vocab v = learn_wordpieces(wc, opts, &info);
  EXPECT_LE(std::abs(static_cast<double>(v.size()) - 120.0), 0.02 * 120 + 1e-9);
  EXPECT_EQ(v.num_reserved(), 5u);
  EXPECT_EQ(v.piece(1), "[UNK]");
  for (const auto& [w, n] : wc.counts) {
    const auto pieces = v.tokenize(w);
    ASSERT_NE(pieces.front(), "[UNK]") << w;
    ASSERT_EQ(strip(pieces), w);
  }
}

TEST(Learn, Deterministic) {
  WordCounts wc;
  for (int i = 0; i < 200; ++i) wc.add("w" + std::to_string(i * 7919 % 1000), 1 + i % 7);
  LearnOptions opts;
  opts.target_size = 60;
  EXPECT_EQ(learn_wordpieces(wc, opts).pieces(), learn_wordpieces(wc, opts).pieces());
}

TEST(Learn, AlphabetCapMapsRareCharactersToUnk) {
  WordCounts wc;
  wc.add("aaab", 10);
  wc.add("ba", 10);
  wc.add("ac", 1);
  LearnOptions opts;
  opts.max_alphabet = 2;
  opts.target_size = 12;
  const Vocab v = learn_wordpieces(wc, opts);
  EXPECT_FALSE(v.contains("c"));
  EXPECT_EQ(v.tokenize("ac"), (std::vector<std::string>{"[UNK]"}));
}

}  // namespace
}  // namespace bertprep::vocab
