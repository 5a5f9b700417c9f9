// Copyright 2026 The lsk Authors
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

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace lsk {

struct NormConfig {
    bool apply_nfc = true;
    bool strip_zero_width = true;
    bool collapse_whitespace = true;
    std::set<char32_t> zero_width_set = {0x200B, 0x200C, 0x200D, 0xFEFF};
};

void validate(const NormConfig& cfg);

/// Transcript cleanup on UTF-8 text: NFC composition, removal of the
/// configured zero-width codepoints, then every run of Unicode White_Space
/// becomes one ASCII space and the ends are trimmed.
///
/// When stripping removed something, NFC is applied once more: a dropped
/// U+200B between a base letter and a combining mark would otherwise leave
/// a composable pair behind and normalize() would not be idempotent.
///
/// Invalid UTF-8 is decoded with U+FFFD substitution, so the function is total.
std::string normalize(std::string_view text, const NormConfig& cfg = {});

/// Splits normalized text on spaces. Never yields empty tokens.
std::vector<std::string> tokenize_words(std::string_view text);

/// Number of extended grapheme clusters (UAX #29) in UTF-8 text.
std::size_t grapheme_count(std::string_view text);

} // namespace lsk
