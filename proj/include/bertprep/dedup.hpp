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

// Near-duplicate removal by n-gram shingle overlap ("one instance only").
//
// Units are visited once, in id order. A unit is dropped when the fraction of
// its shingles already contributed by previously *kept* units reaches the
// threshold; otherwise it is kept and its shingles join the index. The first
// occurrence of any content therefore always survives.
//
// Shingles are 64-bit FNV-1a fingerprints of n consecutive whitespace tokens.
// Distinct shingles may collide; at 2^-64 per pair this is ignored.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "bertprep/corpus.hpp"

namespace bertprep::dedup {

using Fingerprint = std::uint64_t;

inline constexpr std::size_t kDefaultOrder = 9;
inline constexpr double kDefaultThreshold = 0.9;

// Fingerprints of every window of n tokens, in order. Units shorter than n
// tokens yield one fingerprint over all their tokens.
std::vector<Fingerprint> shingle_tokens(std::span<const std::string_view> tokens,
                                        std::size_t n);
std::vector<Fingerprint> shingle(const TextUnit& unit, std::size_t n);

class ShingleIndex {
 public:
  explicit ShingleIndex(std::size_t n = kDefaultOrder);

  std::size_t order() const { return n_; }
  std::size_t size() const { return seen_.size(); }

  bool contains(Fingerprint fp) const { return seen_.contains(fp); }
  void insert(std::span<const Fingerprint> fps);

 private:
  std::size_t n_;
  std::unordered_set<Fingerprint> seen_;
};

// Share of the unit's shingles (counted with multiplicity) present in index.
double duplicate_fraction(std::span<const Fingerprint> shingles,
                          const ShingleIndex& index);
double duplicate_fraction(const TextUnit& unit, const ShingleIndex& index);

struct DedupStats {
  std::uint64_t units_in = 0;
  std::uint64_t units_kept = 0;
  std::uint64_t units_dropped = 0;
  std::uint64_t tokens_in = 0;
  std::uint64_t tokens_kept = 0;
};

struct DedupOptions {
  std::size_t n = kDefaultOrder;
  double threshold = kDefaultThreshold;
  // Worker threads used to fingerprint units ahead of the sequential
  // keep/drop pass. Output does not depend on this.
  unsigned jobs = 1;
};

struct DedupResult {
  std::vector<TextUnit> kept;
  DedupStats stats;
};

// Throws ValidationError if n == 0 or threshold is outside [0, 1].
DedupResult dedup_corpus(std::span<const TextUnit> units, const DedupOptions& options);

}  // namespace bertprep::dedup
