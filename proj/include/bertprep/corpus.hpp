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

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bertprep {

enum class Granularity { kSentence, kParagraph };

Granularity parse_granularity(std::string_view s);
std::string_view to_string(Granularity g);

// A sentence or paragraph of one language. Paragraph text keeps its line
// breaks as '\n'; every line is NFC-normalized with whitespace collapsed.
struct TextUnit {
  std::uint64_t id = 0;
  std::string lang;
  std::string text;
  Granularity granularity = Granularity::kSentence;
};

// Reads units from UTF-8 text. Sentence mode: one unit per non-blank line.
// Paragraph mode: runs of non-blank lines separated by blank lines. CRLF is
// accepted. Ids continue from `first_id`.
std::vector<TextUnit> read_units(std::istream& in, std::string_view lang,
                                 Granularity granularity,
                                 std::uint64_t first_id = 0);

std::vector<TextUnit> read_units_file(const std::filesystem::path& path,
                                      std::string_view lang,
                                      Granularity granularity,
                                      std::uint64_t first_id = 0);

// Inverse of read_units for already normalized units.
void write_units(std::ostream& out, std::span<const TextUnit> units,
                 Granularity granularity);

std::uint64_t count_tokens(std::span<const TextUnit> units);

}  // namespace bertprep
