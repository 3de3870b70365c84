#pragma once

// UTF-8 text primitives backed by ICU: codepoint access, NFKC/NFKD
// normalization, case folding, diacritic stripping, script counting.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

namespace citelink::text {

// Decodes UTF-8 into codepoints. Invalid sequences map to U+FFFD.
inline std::vector<char32_t> to_codepoints(std::string_view s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    const auto* p = reinterpret_cast<const uint8_t*>(s.data());
    int32_t i = 0;
    const auto len = static_cast<int32_t>(s.size());
    while (i < len) {
        UChar32 c;
        U8_NEXT(p, i, len, c);
        out.push_back(c < 0 ? 0xFFFD : static_cast<char32_t>(c));
    }
    return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
    uint8_t buf[U8_MAX_LENGTH];
    int32_t n = 0;
    UBool err = false;
    U8_APPEND(buf, n, U8_MAX_LENGTH, static_cast<UChar32>(cp), err);
    if (!err) out.append(reinterpret_cast<char*>(buf), n);
}

inline std::string from_codepoints(const std::vector<char32_t>& cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t c : cps) append_utf8(out, c);
    return out;
}

// Byte offset of the first invalid UTF-8 sequence, or -1 if the whole
// buffer is valid.
inline long first_invalid_utf8(std::string_view s) {
    const auto* p = reinterpret_cast<const uint8_t*>(s.data());
    int32_t i = 0;
    const auto len = static_cast<int32_t>(s.size());
    while (i < len) {
        int32_t start = i;
        UChar32 c;
        U8_NEXT(p, i, len, c);
        if (c < 0) return start;
    }
    return -1;
}

namespace detail {
inline const icu::Normalizer2& nfkc() {
    UErrorCode ec = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFKCInstance(ec);
    if (U_FAILURE(ec)) throw std::runtime_error("ICU NFKC unavailable");
    return *n;
}
inline const icu::Normalizer2& nfkd() {
    UErrorCode ec = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFKDInstance(ec);
    if (U_FAILURE(ec)) throw std::runtime_error("ICU NFKD unavailable");
    return *n;
}
}  // namespace detail

// NFKC normalization followed by full case folding.
inline std::string nfkc_casefold(std::string_view s) {
    icu::UnicodeString u = icu::UnicodeString::fromUTF8(
        icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
    UErrorCode ec = U_ZERO_ERROR;
    icu::UnicodeString norm = detail::nfkc().normalize(u, ec);
    if (U_FAILURE(ec)) throw std::runtime_error("NFKC normalization failed");
    norm.foldCase();
    std::string out;
    norm.toUTF8String(out);
    return out;
}

// NFKD, drop combining marks, case fold. "López" -> "lopez".
inline std::string strip_diacritics_casefold(std::string_view s) {
    icu::UnicodeString u = icu::UnicodeString::fromUTF8(
        icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
    UErrorCode ec = U_ZERO_ERROR;
    icu::UnicodeString norm = detail::nfkd().normalize(u, ec);
    if (U_FAILURE(ec)) throw std::runtime_error("NFKD normalization failed");
    icu::UnicodeString kept;
    for (int32_t i = 0; i < norm.length();) {
        UChar32 c = norm.char32At(i);
        i += U16_LENGTH(c);
        if (u_charType(c) != U_NON_SPACING_MARK) kept.append(c);
    }
    kept.foldCase();
    std::string out;
    kept.toUTF8String(out);
    return out;
}

inline bool is_punct(char32_t cp) {
    int8_t t = u_charType(static_cast<UChar32>(cp));
    switch (t) {
        case U_DASH_PUNCTUATION:
        case U_START_PUNCTUATION:
        case U_END_PUNCTUATION:
        case U_CONNECTOR_PUNCTUATION:
        case U_OTHER_PUNCTUATION:
        case U_INITIAL_PUNCTUATION:
        case U_FINAL_PUNCTUATION:
            return true;
        default:
            return false;
    }
}

inline bool is_space_or_control(char32_t cp) {
    return u_isUWhiteSpace(static_cast<UChar32>(cp)) ||
           u_charType(static_cast<UChar32>(cp)) == U_CONTROL_CHAR;
}

inline bool is_han(char32_t cp) {
    return ublock_getCode(static_cast<UChar32>(cp)) ==
               UBLOCK_CJK_UNIFIED_IDEOGRAPHS ||
           ublock_getCode(static_cast<UChar32>(cp)) ==
               UBLOCK_CJK_UNIFIED_IDEOGRAPHS_EXTENSION_A;
}

inline bool is_kana(char32_t cp) {
    UBlockCode b = ublock_getCode(static_cast<UChar32>(cp));
    return b == UBLOCK_HIRAGANA || b == UBLOCK_KATAKANA;
}

inline bool is_hangul(char32_t cp) {
    UBlockCode b = ublock_getCode(static_cast<UChar32>(cp));
    return b == UBLOCK_HANGUL_SYLLABLES || b == UBLOCK_HANGUL_JAMO ||
           b == UBLOCK_HANGUL_COMPATIBILITY_JAMO;
}

inline bool is_cyrillic(char32_t cp) {
    return ublock_getCode(static_cast<UChar32>(cp)) == UBLOCK_CYRILLIC;
}

inline std::string trim(std::string_view s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

inline std::vector<std::string> split(std::string_view s, std::string_view sep) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (true) {
        size_t next = s.find(sep, pos);
        if (next == std::string_view::npos) {
            out.emplace_back(s.substr(pos));
            break;
        }
        out.emplace_back(s.substr(pos, next - pos));
        pos = next + sep.size();
    }
    return out;
}

}  // namespace citelink::text
