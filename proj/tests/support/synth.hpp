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

// Synthetic corpora for tests: Zipf-distributed words built from
// language-specific syllables, some of them non-ASCII.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bertprep/corpus.hpp"
#include "bertprep/rng.hpp"

namespace synth {

class Lexicon {
 public:
  // `syllables` may contain multi-byte UTF-8.
  Lexicon(const std::vector<std::string>& syllables, std::size_t types, double exponent,
          std::uint64_t seed);
  const std::string& draw(bertprep::Rng& rng) const;
  std::size_t size() const { return words_.size(); }

 private:
  std::vector<std::string> words_;
  std::vector<double> cumulative_;
};

std::vector<std::string> syllables_for(const std::string& lang);

// Sentences of 5..24 words until `tokens` whitespace tokens are produced.
std::vector<bertprep::TextUnit> corpus(const Lexicon& lex, const std::string& lang,
                                       std::uint64_t tokens, std::uint64_t seed);

}  // namespace synth
