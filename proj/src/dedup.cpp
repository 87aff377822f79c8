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

#include "bertprep/dedup.hpp"

#include <algorithm>
#include <future>
#include <string>

#include "bertprep/error.hpp"
#include "bertprep/hash.hpp"
#include "bertprep/text.hpp"

namespace bertprep::dedup {
namespace {

// 0xFF never occurs in UTF-8, so token boundaries cannot be forged.
constexpr unsigned char kTokenSeparator = 0xFF;

Fingerprint fingerprint(std::span<const std::string_view> window) {
  Fnv1a h;
  for (std::size_t i = 0; i < window.size(); ++i) {
    if (i > 0) h.update_byte(kTokenSeparator);
    h.update(window[i]);
  }
  return h.digest();
}

constexpr std::size_t kBlockSize = 4096;

struct Shingled {
  std::vector<Fingerprint> fps;
  std::size_t tokens = 0;
};

std::vector<Shingled> shingle_block(std::span<const TextUnit> block, std::size_t n,
                                    unsigned jobs) {
  std::vector<Shingled> out(block.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto tokens = text::split_whitespace(block[i].text);
      out[i].tokens = tokens.size();
      out[i].fps = shingle_tokens(tokens, n);
    }
  };
  if (jobs <= 1 || block.size() < 2 * jobs) {
    work(0, block.size());
    return out;
  }
  std::vector<std::future<void>> parts;
  const std::size_t chunk = (block.size() + jobs - 1) / jobs;
  for (std::size_t b = 0; b < block.size(); b += chunk) {
    parts.push_back(std::async(std::launch::async, work, b,
                               std::min(block.size(), b + chunk)));
  }
  for (auto& p : parts) p.get();
  return out;
}

}  // namespace

std::vector<Fingerprint> shingle_tokens(std::span<const std::string_view> tokens,
                                        std::size_t n) {
  if (n == 0) throw ValidationError("shingle order must be >= 1");
  std::vector<Fingerprint> out;
  if (tokens.empty()) return out;
  if (tokens.size() < n) {
    out.push_back(fingerprint(tokens));
    return out;
  }
  out.reserve(tokens.size() - n + 1);
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    out.push_back(fingerprint(tokens.subspan(i, n)));
  }
  return out;
}

std::vector<Fingerprint> shingle(const TextUnit& unit, std::size_t n) {
  const auto tokens = text::split_whitespace(unit.text);
  return shingle_tokens(tokens, n);
}

ShingleIndex::ShingleIndex(std::size_t n) : n_(n) {
  if (n == 0) throw ValidationError("shingle order must be >= 1");
}

void ShingleIndex::insert(std::span<const Fingerprint> fps) {
  seen_.insert(fps.begin(), fps.end());
}

double duplicate_fraction(std::span<const Fingerprint> shingles,
                          const ShingleIndex& index) {
  if (shingles.empty()) return 0.0;
  std::size_t seen = 0;
  for (Fingerprint fp : shingles) seen += index.contains(fp) ? 1 : 0;
  return static_cast<double>(seen) / static_cast<double>(shingles.size());
}

double duplicate_fraction(const TextUnit& unit, const ShingleIndex& index) {
  return duplicate_fraction(shingle(unit, index.order()), index);
}

DedupResult dedup_corpus(std::span<const TextUnit> units, const DedupOptions& options) {
  if (options.n == 0) throw ValidationError("shingle order must be >= 1");
  if (!(options.threshold >= 0.0 && options.threshold <= 1.0)) {
    throw ValidationError("threshold must lie in [0, 1]");
  }
  for (std::size_t i = 1; i < units.size(); ++i) {
    if (units[i].id <= units[i - 1].id) {
      throw ValidationError("units must be ordered by strictly increasing id");
    }
    if (units[i].granularity != units[0].granularity) {
      throw ValidationError("mixed granularity within one dedup run");
    }
  }

  DedupResult result;
  ShingleIndex index(options.n);
  const unsigned jobs = std::max(1u, options.jobs);

  auto launch = [&](std::size_t begin) {
    const auto block = units.subspan(begin, std::min(kBlockSize, units.size() - begin));
    const std::launch policy = jobs > 1 ? std::launch::async : std::launch::deferred;
    return std::async(policy, shingle_block, block, options.n, jobs);
  };

  std::future<std::vector<Shingled>> pending;
  if (!units.empty()) pending = launch(0);
  for (std::size_t begin = 0; begin < units.size(); begin += kBlockSize) {
    std::vector<Shingled> current = pending.get();
    if (begin + kBlockSize < units.size()) pending = launch(begin + kBlockSize);

    for (std::size_t i = 0; i < current.size(); ++i) {
      const Shingled& s = current[i];
      ++result.stats.units_in;
      result.stats.tokens_in += s.tokens;
      // The first unit is always kept, even at threshold 0.
      const bool drop = result.stats.units_kept > 0 &&
                        duplicate_fraction(s.fps, index) >= options.threshold;
      if (drop) {
        ++result.stats.units_dropped;
        continue;
      }
      index.insert(s.fps);
      ++result.stats.units_kept;
      result.stats.tokens_kept += s.tokens;
      result.kept.push_back(units[begin + i]);
    }
  }
  return result;
}

}  // namespace bertprep::dedup
