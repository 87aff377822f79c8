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

// CoNLL-U reading and UPOS / attachment scoring.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bertprep/eval/report.hpp"

namespace bertprep::eval {

inline constexpr int kNoHead = -1;

struct UdToken {
  int id = 0;
  std::string form;
  std::string upos;
  int head = kNoHead;  // 0 is the root; kNoHead when HEAD was "_"
  std::string deprel;
};

using UdSentence = std::vector<UdToken>;

struct ConlluOptions {
  // Gold files must carry integer heads; predictions from a tagger may not.
  bool require_heads = true;
};

// Multiword ranges ("3-4") and empty nodes ("5.1") are skipped. Throws
// ParseError with the line number for a wrong field count, a non-integer
// ID or HEAD, or a HEAD beyond the sentence.
std::vector<UdSentence> parse_conllu(std::istream& in, const ConlluOptions& options = {});
std::vector<UdSentence> parse_conllu_file(const std::filesystem::path& path,
                                          const ConlluOptions& options = {});

// Matching UPOS tags / scorable tokens. Throws ValidationError on misalignment.
EvalReport upos_accuracy(std::span<const UdSentence> gold, std::span<const UdSentence> pred);

struct AttachmentOptions {
  // Compare "nmod:poss" as "nmod".
  bool strip_subtypes = false;
};

// UAS and LAS over every token, punctuation included.
EvalReport attachment_scores(std::span<const UdSentence> gold, std::span<const UdSentence> pred,
                             const AttachmentOptions& options = {});

}  // namespace bertprep::eval
