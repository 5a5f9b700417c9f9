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

#include "lsk/textnorm.hpp"

#include <memory>

#include <unicode/brkiter.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "lsk/errors.hpp"

namespace lsk {

namespace {

const icu::Normalizer2& nfc_instance() {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status) || nfc == nullptr) {
        throw Error(std::string("ICU NFC normalizer unavailable: ") + u_errorName(status));
    }
    return *nfc;
}

icu::UnicodeString to_nfc(const icu::UnicodeString& s) {
    UErrorCode status = U_ZERO_ERROR;
    icu::UnicodeString out = nfc_instance().normalize(s, status);
    if (U_FAILURE(status)) throw Error(std::string("NFC failed: ") + u_errorName(status));
    return out;
}

} // namespace

void validate(const NormConfig& cfg) {
    if (cfg.strip_zero_width && cfg.zero_width_set.empty()) {
        throw ValidationError("norm: zero_width_set must be non-empty when strip_zero_width");
    }
    for (char32_t cp : cfg.zero_width_set) {
        if (cp > 0x10FFFF) throw ValidationError("norm: zero_width_set holds a non-codepoint");
    }
}

std::string normalize(std::string_view text, const NormConfig& cfg) {
    icu::UnicodeString s = icu::UnicodeString::fromUTF8(
        icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));

    if (cfg.apply_nfc) s = to_nfc(s);

    if (cfg.strip_zero_width) {
        icu::UnicodeString kept;
        bool removed = false;
        for (int32_t i = 0; i < s.length();) {
            const UChar32 cp = s.char32At(i);
            if (cfg.zero_width_set.count(static_cast<char32_t>(cp)) != 0) {
                removed = true;
            } else {
                kept.append(cp);
            }
            i += U16_LENGTH(cp);
        }
        s = std::move(kept);
        if (removed && cfg.apply_nfc) s = to_nfc(s);
    }

    if (cfg.collapse_whitespace) {
        icu::UnicodeString out;
        bool pending_space = false;
        for (int32_t i = 0; i < s.length();) {
            const UChar32 cp = s.char32At(i);
            i += U16_LENGTH(cp);
            if (u_isUWhiteSpace(cp)) {
                pending_space = true;
                continue;
            }
            if (pending_space && out.length() > 0) out.append(static_cast<UChar>(u' '));
            pending_space = false;
            out.append(cp);
        }
        s = std::move(out);
    }

    std::string result;
    s.toUTF8String(result);
    return result;
}

std::vector<std::string> tokenize_words(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t next = text.find(' ', pos);
        const std::size_t end = next == std::string_view::npos ? text.size() : next;
        if (end > pos) tokens.emplace_back(text.substr(pos, end - pos));
        pos = end + 1;
    }
    return tokens;
}

std::size_t grapheme_count(std::string_view text) {
    const icu::UnicodeString s = icu::UnicodeString::fromUTF8(
        icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<icu::BreakIterator> it(
        icu::BreakIterator::createCharacterInstance(icu::Locale::getRoot(), status));
    if (U_FAILURE(status)) throw Error(std::string("ICU break iterator: ") + u_errorName(status));
    it->setText(s);
    std::size_t count = 0;
    for (int32_t p = it->next(); p != icu::BreakIterator::DONE; p = it->next()) ++count;
    return count;
}

} // namespace lsk
