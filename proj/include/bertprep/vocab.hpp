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

// Language-balanced wordpiece vocabularies.
//
// Vocabulary file format: UTF-8, one piece per line, line index == token id.
// Reserved tokens ("[PAD]", "[UNK]", ...) come first, followed by every
// training character as an initial piece and as a "##" continuation piece,
// followed by learned multi-character pieces.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bertprep/corpus.hpp"

namespace bertprep::vocab {

inline constexpr std::string_view kContinuationPrefix = "##";
inline constexpr std::string_view kPad = "[PAD]";
inline constexpr std::string_view kUnk = "[UNK]";
inline constexpr std::string_view kCls = "[CLS]";
inline constexpr std::string_view kSep = "[SEP]";
inline constexpr std::string_view kMask = "[MASK]";

std::vector<std::string> default_reserved_tokens();

struct LanguageBudget {
  std::string lang;
  std::uint64_t token_budget = 0;
};

struct SampleInfo {
  std::uint64_t tokens = 0;
  // Budget minus corpus size when the corpus was too small, else 0.
  std::uint64_t shortfall = 0;
};

// Draws units in seeded uniform-random order until their token total first
// reaches the budget. The returned units keep corpus order.
std::vector<TextUnit> sample_subset(std::span<const TextUnit> corpus,
                                    const LanguageBudget& budget, std::uint64_t seed,
                                    SampleInfo* info = nullptr);

struct WordCounts {
  std::unordered_map<std::string, std::uint64_t> counts;
  std::uint64_t total_tokens = 0;

  void add(std::string_view word, std::uint64_t n = 1);
  void merge(const WordCounts& other);
  bool operator==(const WordCounts&) const = default;
};

// Whitespace word counts over all subsets. The parallel reduction yields the
// same counts for any `jobs`.
WordCounts count_words(std::span<const std::vector<TextUnit>> subsets, unsigned jobs = 1);

class Vocab {
 public:
  Vocab() = default;
  // `pieces` includes the reserved tokens as its first `num_reserved` entries.
  Vocab(std::vector<std::string> pieces, std::size_t num_reserved);

  static Vocab load(std::istream& in);
  static Vocab load_file(const std::filesystem::path& path);
  void save(std::ostream& out) const;

  std::size_t size() const { return pieces_.size(); }
  std::size_t num_reserved() const { return num_reserved_; }
  const std::vector<std::string>& pieces() const { return pieces_; }
  const std::string& piece(std::uint32_t id) const { return pieces_.at(id); }

  std::optional<std::uint32_t> find(std::string_view piece) const;
  bool contains(std::string_view piece) const { return find(piece).has_value(); }
  // Throws ValidationError when `piece` is absent.
  std::uint32_t id(std::string_view piece) const;

  // Greedy longest-match-first segmentation. Non-initial pieces carry "##".
  // A word with any unmatched position becomes the single piece "[UNK]".
  // Throws ValidationError on an empty word.
  std::vector<std::string> tokenize(std::string_view word) const;
  std::vector<std::uint32_t> tokenize_ids(std::string_view word) const;
  // Same, into a caller-owned buffer (cleared first).
  void tokenize_ids(std::string_view word, std::vector<std::uint32_t>& out) const;

 private:
  template <typename Emit>
  bool segment(std::string_view word, Emit&& emit) const;

  void build_trie();

  std::vector<std::string> pieces_;
  std::size_t num_reserved_ = 0;
  std::unordered_map<std::string, std::uint32_t> index_;

  // Double-array byte trie over non-reserved pieces. State 0 roots
  // word-initial pieces, state 1 the bodies of "##" pieces. The child of s on
  // byte c is t = base_[s] + c when check_[t] == s; value_[t] is a piece id
  // or -1.
  std::vector<std::uint32_t> base_;
  std::vector<std::uint32_t> check_;
  std::vector<std::int32_t> value_;
};

struct LearnOptions {
  std::size_t target_size = 30000;
  double size_tolerance = 0.02;
  std::size_t max_iterations = 4;
  // Longest candidate piece, in code points, excluding the "##" prefix.
  std::size_t max_piece_chars = 16;
  // 0 keeps every observed character. Otherwise only the most frequent
  // characters enter the alphabet and words using others tokenize to [UNK].
  std::size_t max_alphabet = 0;
  std::vector<std::string> reserved = default_reserved_tokens();
};

struct LearnInfo {
  std::size_t alphabet_chars = 0;
  std::uint64_t min_count = 0;
  std::size_t size_before_trim = 0;
  std::size_t probes = 0;
};

// Learns a vocabulary whose size (reserved tokens included) is within
// `size_tolerance` of `target_size`, or as close as the data allows.
// Throws ValidationError("target below alphabet size") when the target
// cannot hold the reserved tokens plus both forms of every character.
Vocab learn_wordpieces(const WordCounts& counts, const LearnOptions& options,
                       LearnInfo* info = nullptr);

}  // namespace bertprep::vocab
