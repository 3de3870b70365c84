#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace citelink {

// Raised on bad user input (config values, malformed tables, precondition
// violations). Maps to exit code 1 in the CLI.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised on unreadable/unwritable files. Maps to exit code 2 in the CLI.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SourceDatabase : uint8_t { GS = 0, WOS = 1, SCOPUS = 2 };

inline const char* to_string(SourceDatabase s) {
    switch (s) {
        case SourceDatabase::GS: return "GS";
        case SourceDatabase::WOS: return "WOS";
        case SourceDatabase::SCOPUS: return "SCOPUS";
    }
    throw std::logic_error("bad SourceDatabase");
}

inline SourceDatabase source_from_string(const std::string& s) {
    if (s == "GS") return SourceDatabase::GS;
    if (s == "WOS") return SourceDatabase::WOS;
    if (s == "SCOPUS") return SourceDatabase::SCOPUS;
    throw ValidationError("unknown source database: " + s);
}

enum class DocumentType : uint8_t {
    JOURNAL = 0,
    CONFERENCE,
    BOOK,
    THESIS,
    UNPUBLISHED,
    OTHER,
    UNKNOWN
};

inline constexpr int kDocumentTypeCount = 7;

inline const char* to_string(DocumentType t) {
    switch (t) {
        case DocumentType::JOURNAL: return "JOURNAL";
        case DocumentType::CONFERENCE: return "CONFERENCE";
        case DocumentType::BOOK: return "BOOK";
        case DocumentType::THESIS: return "THESIS";
        case DocumentType::UNPUBLISHED: return "UNPUBLISHED";
        case DocumentType::OTHER: return "OTHER";
        case DocumentType::UNKNOWN: return "UNKNOWN";
    }
    throw std::logic_error("bad DocumentType");
}

inline std::optional<DocumentType> doc_type_from_string(const std::string& s) {
    static const std::map<std::string, DocumentType> m = {
        {"JOURNAL", DocumentType::JOURNAL},
        {"CONFERENCE", DocumentType::CONFERENCE},
        {"BOOK", DocumentType::BOOK},
        {"THESIS", DocumentType::THESIS},
        {"UNPUBLISHED", DocumentType::UNPUBLISHED},
        {"OTHER", DocumentType::OTHER},
        {"UNKNOWN", DocumentType::UNKNOWN},
    };
    auto it = m.find(s);
    if (it == m.end()) return std::nullopt;
    return it->second;
}

// One citing document from one source database, normalized.
struct CitingRecord {
    std::string record_id;
    SourceDatabase source = SourceDatabase::GS;
    std::string cited_doc_id;
    std::string title_raw;
    std::string title_norm;
    std::vector<std::string> authors;
    std::string first_author_key;
    std::optional<int> year;
    std::optional<std::string> venue;
    std::optional<std::string> doi;
    std::optional<std::string> url;
    std::optional<std::string> doc_type_raw;
    DocumentType doc_type = DocumentType::UNKNOWN;
    std::optional<std::string> language;
    // Source-supplied language name not yet mapped to an ISO code
    // (e.g. the WoS "LA" field); consumed by the detection cascade.
    std::optional<std::string> language_raw;
    std::optional<int64_t> citation_count;
};

// Thresholds and rules governing fuzzy acceptance.
struct MatchPolicy {
    double high_sim_threshold = 0.8;
    double low_sim_threshold = 0.7;
    int min_title_len = 30;

    void validate() const {
        if (!(low_sim_threshold > 0.0 && low_sim_threshold <= high_sim_threshold &&
              high_sim_threshold <= 1.0))
            throw ValidationError(
                "match policy requires 0 < low_sim_threshold <= "
                "high_sim_threshold <= 1");
        if (min_title_len < 1)
            throw ValidationError("match policy requires min_title_len >= 1");
    }
};

struct CategoryEntry {
    std::string category;
    std::string broad_area;
    std::optional<std::string> quartile;  // Q1..Q4
};

// Normalized-venue-keyed map of category/quartile assignments.
using CategoryMap = std::map<std::string, CategoryEntry>;

struct Corpus {
    std::vector<CitingRecord> records;
    std::set<std::string> cited_docs;
    std::map<SourceDatabase, size_t> per_source_counts;

    void add(CitingRecord rec) {
        cited_docs.insert(rec.cited_doc_id);
        per_source_counts[rec.source]++;
        records.push_back(std::move(rec));
    }
};

}  // namespace citelink
