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

// UTF-8 helpers shared by every corpus-facing module.

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace bertprep::text {

inline constexpr char32_t kReplacementChar = 0xFFFD;

// Decodes the code point starting at `pos` and advances `pos` past it.
// Malformed sequences decode to U+FFFD and consume a single byte.
char32_t decode_utf8(std::string_view s, std::size_t& pos);

void append_utf8(std::string& out, char32_t cp);

// Unicode White_Space property.
bool is_space(char32_t cp);

// Splits on runs of Unicode whitespace. Views point into `s`.
std::vector<std::string_view> split_whitespace(std::string_view s);

std::size_t count_tokens(std::string_view s);

// Byte offsets of every code point boundary, including 0 and s.size().
std::vector<std::size_t> codepoint_offsets(std::string_view s);

std::size_t codepoint_count(std::string_view s);

// Canonical composition (NFC). Invalid UTF-8 is passed through ICU's
// replacement behaviour.
std::string nfc(std::string_view s);

// Trims and collapses whitespace runs to a single ASCII space.
std::string collapse_whitespace(std::string_view s);

}  // namespace bertprep::text
