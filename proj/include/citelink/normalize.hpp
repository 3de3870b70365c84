#pragma once

// Deterministic normalization primitives: DOI, title, person, and
// document-type classification. All functions are pure.

#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "citelink/text.hpp"
#include "citelink/types.hpp"

namespace citelink {

namespace detail {

inline bool strip_prefix_ci(std::string& s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (size_t i = 0; i < prefix.size(); ++i) {
        char a = s[i], b = prefix[i];
        if (a >= 'A' && a <= 'Z') a = static_cast<char>(a - 'A' + 'a');
        if (a != b) return false;
    }
    s.erase(0, prefix.size());
    return true;
}

// `10.<4-9 digits>/<non-whitespace suffix of length >= 1>`
inline bool matches_doi_grammar(std::string_view s) {
    if (s.size() < 3 || s[0] != '1' || s[1] != '0' || s[2] != '.') return false;
    size_t i = 3;
    size_t digits = 0;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
        ++digits;
        ++i;
    }
    if (digits < 4 || digits > 9) return false;
    if (i >= s.size() || s[i] != '/') return false;
    ++i;
    if (i >= s.size()) return false;
    for (size_t j = i; j < s.size(); ++j) {
        unsigned char c = static_cast<unsigned char>(s[j]);
        if (std::isspace(c)) return false;
    }
    return true;
}

}  // namespace detail

// Trims, strips resolver prefixes and a "doi:" label, lowercases, and
// validates against the registry grammar. Total: bad input yields nullopt.
inline std::optional<std::string> normalize_doi(std::string_view raw) {
    std::string s = text::trim(raw);
    detail::strip_prefix_ci(s, "https://dx.doi.org/") ||
        detail::strip_prefix_ci(s, "http://dx.doi.org/") ||
        detail::strip_prefix_ci(s, "https://doi.org/") ||
        detail::strip_prefix_ci(s, "http://doi.org/");
    detail::strip_prefix_ci(s, "doi:");
    s = text::trim(s);
    for (char& c : s)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (!detail::matches_doi_grammar(s)) return std::nullopt;
    return s;
}

// Compatibility-normalizes, lowercases, maps punctuation to spaces,
// collapses runs of whitespace, trims.
inline std::string normalize_title(std::string_view raw) {
    std::string folded = text::nfkc_casefold(raw);
    std::string out;
    out.reserve(folded.size());
    bool pending_space = false;
    bool started = false;
    for (char32_t cp : text::to_codepoints(folded)) {
        if (text::is_punct(cp) || text::is_space_or_control(cp)) {
            pending_space = true;
            continue;
        }
        if (pending_space && started) out.push_back(' ');
        pending_space = false;
        started = true;
        text::append_utf8(out, cp);
    }
    return out;
}

// Family-name key: text before the first comma when present, else the last
// whitespace-separated token; diacritics stripped, lowercased.
inline std::string normalize_person(std::string_view raw) {
    std::string s = text::trim(raw);
    if (s.empty()) return "";
    std::string family;
    size_t comma = s.find(',');
    if (comma != std::string::npos) {
        family = text::trim(s.substr(0, comma));
    } else {
        size_t last_ws = s.find_last_of(" \t");
        family = (last_ws == std::string::npos) ? s : s.substr(last_ws + 1);
    }
    return text::strip_diacritics_casefold(family);
}

// Raw source type string -> canonical DocumentType table. Configurable:
// rows loaded from a CSV extend or override the seeded defaults.
class DocTypeTable {
  public:
    DocTypeTable() {
        static const std::pair<const char*, DocumentType> kSeed[] = {
            {"article", DocumentType::JOURNAL},
            {"review", DocumentType::JOURNAL},
            {"letter", DocumentType::JOURNAL},
            {"editorial", DocumentType::JOURNAL},
            {"conference paper", DocumentType::CONFERENCE},
            {"proceedings paper", DocumentType::CONFERENCE},
            {"meeting abstract", DocumentType::CONFERENCE},
            {"book", DocumentType::BOOK},
            {"book chapter", DocumentType::BOOK},
            {"monograph", DocumentType::BOOK},
            {"thesis", DocumentType::THESIS},
            {"dissertation", DocumentType::THESIS},
            {"preprint", DocumentType::UNPUBLISHED},
            {"working paper", DocumentType::UNPUBLISHED},
            {"discussion paper", DocumentType::UNPUBLISHED},
            {"report", DocumentType::OTHER},
            {"patent", DocumentType::OTHER},
            // resolver-style hyphenated type names
            {"journal-article", DocumentType::JOURNAL},
            {"proceedings-article", DocumentType::CONFERENCE},
            {"book-chapter", DocumentType::BOOK},
            {"posted-content", DocumentType::UNPUBLISHED},
        };
        for (const auto& [raw, type] : kSeed) map_[raw] = type;
    }

    void add(std::string_view raw, DocumentType type) {
        map_[text::to_lower_ascii(text::trim(raw))] = type;
    }

    DocumentType classify(const std::optional<std::string>& raw) const {
        if (!raw) return DocumentType::UNKNOWN;
        auto it = map_.find(text::to_lower_ascii(text::trim(*raw)));
        return it == map_.end() ? DocumentType::UNKNOWN : it->second;
    }

  private:
    std::map<std::string, DocumentType> map_;
};

inline DocumentType classify_doc_type(const std::optional<std::string>& raw,
                                      const DocTypeTable& table = DocTypeTable{}) {
    return table.classify(raw);
}

}  // namespace citelink
