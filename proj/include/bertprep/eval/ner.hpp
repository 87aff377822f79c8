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

// Named-entity data on the shared four-label inventory {PER, LOC, ORG, O}.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bertprep/eval/report.hpp"

namespace bertprep::eval {

enum class NerLabel : std::uint8_t { kPer = 0, kLoc = 1, kOrg = 2, kO = 3 };

inline constexpr std::array<NerLabel, 3> kEntityLabels = {NerLabel::kPer, NerLabel::kLoc,
                                                          NerLabel::kOrg};

std::string_view to_string(NerLabel label);
std::optional<NerLabel> parse_label(std::string_view s);

struct RawNerSentence {
  std::vector<std::string> tokens;
  std::vector<std::string> tags;
};

struct NerSentence {
  std::vector<std::string> tokens;
  std::vector<NerLabel> labels;

  bool operator==(const NerSentence&) const = default;
};

// "FORM<TAB>TAG" per line, blank line between sentences. CRLF accepted.
// Throws ParseError naming the line for anything but two fields.
std::vector<RawNerSentence> parse_ner(std::istream& in);
std::vector<RawNerSentence> parse_ner_file(const std::filesystem::path& path);

enum class BioHandling { kStripPrefix, kPassthrough };

struct LabelMap {
  std::map<std::string, NerLabel> map;
  BioHandling bio_handling = BioHandling::kStripPrefix;

  // {"PER":"PER","LOC":"LOC","ORG":"ORG","O":"O"} with passthrough.
  static LabelMap identity();
  // {"map": {raw: "PER"|"LOC"|"ORG"|"O"}, "bio_handling": "strip_prefix"|"passthrough"}
  static LabelMap from_json(std::string_view json);
  static LabelMap load_file(const std::filesystem::path& path);

  // Exact tag first; with strip_prefix, then the tag minus a "B-", "I-",
  // "E-", "S-", "L-" or "U-" prefix. nullopt when neither is mapped.
  std::optional<NerLabel> lookup(std::string_view tag) const;
};

// Throws ValidationError naming the first unmapped tag.
std::vector<NerSentence> harmonize(std::span<const RawNerSentence> sentences,
                                   const LabelMap& map);
// Already-harmonized sentences under another map (e.g. the identity).
std::vector<NerSentence> harmonize(std::span<const NerSentence> sentences,
                                   const LabelMap& map);

enum class NerScoring { kToken, kSpan };

struct ClassScores {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// Token-level by default. Span mode scores maximal runs of one entity label
// as entities, matched exactly. Zero denominators give 0, and the macro F1
// always averages PER, LOC and ORG. Throws ValidationError naming the first
// misaligned sentence.
EvalReport ner_scores(std::span<const NerSentence> gold, std::span<const NerSentence> pred,
                      NerScoring scoring = NerScoring::kToken);

struct CorpusStats {
  std::uint64_t per = 0;
  std::uint64_t loc = 0;
  std::uint64_t org = 0;
  std::uint64_t n = 0;

  std::uint64_t entities() const { return per + loc + org; }
  double density() const {
    return n == 0 ? 0.0 : static_cast<double>(entities()) / static_cast<double>(n);
  }
};

CorpusStats ner_stats(std::span<const NerSentence> sentences);

}  // namespace bertprep::eval
