#pragma once

// Parsers for the three database export formats, the category map loader,
// and canonical record-file IO.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "citelink/csv.hpp"
#include "citelink/normalize.hpp"
#include "citelink/text.hpp"
#include "citelink/types.hpp"

namespace citelink {

struct RejectEntry {
    std::string file;
    size_t line = 0;
    std::string reason;
};

struct IngestReport {
    std::vector<RejectEntry> rejects;
    std::vector<std::string> warnings;
    size_t total_lines = 0;
    size_t accepted = 0;

    void reject(const std::string& file, size_t line, std::string reason) {
        rejects.push_back({file, line, std::move(reason)});
    }
    void warn(std::string msg) { warnings.push_back(std::move(msg)); }
};

inline void write_rejects_csv(const std::vector<RejectEntry>& rejects,
                              const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "file,line,reason\n";
    for (const auto& r : rejects)
        out << csv::join_row({r.file, std::to_string(r.line), r.reason});
}

namespace detail {

inline std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::vector<std::string> split_lines(std::string_view data) {
    std::vector<std::string> lines;
    size_t pos = 0;
    while (pos <= data.size()) {
        size_t nl = data.find('\n', pos);
        if (nl == std::string_view::npos) {
            lines.emplace_back(data.substr(pos));
            break;
        }
        std::string_view line = data.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.emplace_back(line);
        pos = nl + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

inline std::optional<int> parse_int(const std::string& s) {
    std::string t = text::trim(s);
    if (t.empty()) return std::nullopt;
    try {
        size_t used = 0;
        int v = std::stoi(t, &used);
        if (used != t.size()) return std::nullopt;
        return v;
    } catch (...) {
        return std::nullopt;
    }
}

inline std::optional<int64_t> parse_count(const std::string& s) {
    auto v = parse_int(s);
    if (!v || *v < 0) return std::nullopt;
    return static_cast<int64_t>(*v);
}

// Scopus lists authors family-first without a comma ("Smith J.").
// Rewrites to "Family, Initials" so the generic person key applies.
inline std::string scopus_author_to_person(const std::string& author) {
    std::string a = text::trim(author);
    if (a.find(',') != std::string::npos) return a;
    size_t last_ws = a.find_last_of(' ');
    if (last_ws == std::string::npos) return a;
    std::string tail = a.substr(last_ws + 1);
    bool initials = !tail.empty() && tail.find('.') != std::string::npos;
    if (!initials) return a;
    return a.substr(0, last_ws) + ", " + tail;
}

inline void finish_record(CitingRecord& rec, const DocTypeTable& types) {
    rec.title_norm = normalize_title(rec.title_raw);
    if (!rec.authors.empty())
        rec.first_author_key = normalize_person(rec.authors.front());
    rec.doc_type = types.classify(rec.doc_type_raw);
}

}  // namespace detail

// WoS tag-tabular export: tab-delimited with a tag header line, quote
// characters carry no special meaning. Lines whose tab count differs from
// the header are rejected; invalid UTF-8 is fatal.
inline std::vector<CitingRecord> parse_wos_export(const std::string& path,
                                                  const std::string& cited_doc_id,
                                                  IngestReport& report,
                                                  const DocTypeTable& types = {}) {
    std::string data = detail::read_file_bytes(path);
    if (data.rfind("\xEF\xBB\xBF", 0) == 0) data.erase(0, 3);
    long bad = text::first_invalid_utf8(data);
    if (bad >= 0)
        throw ValidationError(path + ": invalid UTF-8 at byte offset " +
                              std::to_string(bad));
    auto lines = detail::split_lines(data);
    std::vector<CitingRecord> out;
    if (lines.empty()) return out;

    auto header = text::split(lines[0], "\t");
    std::map<std::string, size_t> col;
    for (size_t i = 0; i < header.size(); ++i)
        col[text::trim(header[i])] = i;

    auto field = [&](const std::vector<std::string>& row,
                     const char* tag) -> std::optional<std::string> {
        auto it = col.find(tag);
        if (it == col.end()) return std::nullopt;
        std::string v = text::trim(row[it->second]);
        if (v.empty()) return std::nullopt;
        return v;
    };

    std::set<std::string> seen_ids;
    for (size_t i = 1; i < lines.size(); ++i) {
        report.total_lines++;
        if (lines[i].empty()) continue;
        auto row = text::split(lines[i], "\t");
        if (row.size() != header.size()) {
            report.reject(path, i + 1,
                          "field count " + std::to_string(row.size()) +
                              " differs from header " +
                              std::to_string(header.size()));
            continue;
        }
        CitingRecord rec;
        rec.source = SourceDatabase::WOS;
        rec.cited_doc_id = cited_doc_id;
        auto ut = field(row, "UT");
        rec.record_id = ut ? *ut : "WOS:" + cited_doc_id + ":" + std::to_string(i + 1);
        if (!seen_ids.insert(rec.record_id).second) {
            report.warn(path + ":" + std::to_string(i + 1) +
                        ": duplicate record id " + rec.record_id + ", kept first");
            continue;
        }
        rec.title_raw = field(row, "TI").value_or("");
        if (auto au = field(row, "AU")) {
            for (auto& a : text::split(*au, ";")) {
                std::string t = text::trim(a);
                if (!t.empty()) rec.authors.push_back(t);
            }
        }
        if (auto py = field(row, "PY")) rec.year = detail::parse_int(*py);
        if (auto di = field(row, "DI")) rec.doi = normalize_doi(*di);
        rec.doc_type_raw = field(row, "DT");
        rec.language_raw = field(row, "LA");
        if (auto tc = field(row, "TC")) rec.citation_count = detail::parse_count(*tc);
        rec.venue = field(row, "SO");
        detail::finish_record(rec, types);
        report.accepted++;
        out.push_back(std::move(rec));
    }
    return out;
}

// Scopus RFC-4180 CSV export. Language is always absent for this source.
inline std::vector<CitingRecord> parse_scopus_export(const std::string& path,
                                                     const std::string& cited_doc_id,
                                                     IngestReport& report,
                                                     const DocTypeTable& types = {}) {
    std::vector<std::vector<std::string>> rows;
    try {
        rows = csv::parse_file(path);
    } catch (const csv::ParseError& e) {
        throw ValidationError(path + ": " + e.what());
    }
    std::vector<CitingRecord> out;
    if (rows.empty()) return out;

    std::map<std::string, size_t> col;
    for (size_t i = 0; i < rows[0].size(); ++i)
        col[text::trim(rows[0][i])] = i;
    if (!col.count("Cited by"))
        report.warn(path + ": no \"Cited by\" column, citation counts absent");

    auto field = [&](const std::vector<std::string>& row,
                     const char* name) -> std::optional<std::string> {
        auto it = col.find(name);
        if (it == col.end() || it->second >= row.size()) return std::nullopt;
        std::string v = text::trim(row[it->second]);
        if (v.empty()) return std::nullopt;
        return v;
    };

    std::set<std::string> seen_ids;
    for (size_t i = 1; i < rows.size(); ++i) {
        report.total_lines++;
        auto& row = rows[i];
        auto title = field(row, "Title");
        auto eid = field(row, "EID");
        if (!title || !eid) {
            report.reject(path, i + 1, "missing mandatory Title or EID");
            continue;
        }
        CitingRecord rec;
        rec.source = SourceDatabase::SCOPUS;
        rec.cited_doc_id = cited_doc_id;
        rec.record_id = *eid;
        if (!seen_ids.insert(rec.record_id).second) {
            report.warn(path + ":" + std::to_string(i + 1) +
                        ": duplicate record id " + rec.record_id + ", kept first");
            continue;
        }
        rec.title_raw = *title;
        if (auto au = field(row, "Authors")) {
            for (auto& a : text::split(*au, ", ")) {
                std::string t = text::trim(a);
                if (!t.empty()) rec.authors.push_back(t);
            }
        }
        if (auto y = field(row, "Year")) rec.year = detail::parse_int(*y);
        if (auto d = field(row, "DOI")) rec.doi = normalize_doi(*d);
        rec.venue = field(row, "Source title");
        rec.doc_type_raw = field(row, "Document Type");
        if (auto cb = field(row, "Cited by"))
            rec.citation_count = detail::parse_count(*cb);
        detail::finish_record(rec, types);
        if (!rec.authors.empty())
            rec.first_author_key =
                normalize_person(detail::scopus_author_to_person(rec.authors.front()));
        report.accepted++;
        out.push_back(std::move(rec));
    }
    return out;
}

namespace detail {

// "A Smith, B Jones - Nature, 2010 - nature.com"
inline void parse_gs_byline(const std::string& byline, CitingRecord& rec) {
    auto segs = text::split(byline, " - ");
    if (!segs.empty()) {
        for (auto& a : text::split(segs[0], ", ")) {
            std::string t = text::trim(a);
            if (!t.empty() && t != "\xE2\x80\xA6") rec.authors.push_back(t);
        }
    }
    if (segs.size() >= 2) {
        std::string mid = text::trim(segs[1]);
        size_t comma = mid.find_last_of(',');
        std::optional<int> year;
        std::string venue = mid;
        if (comma != std::string::npos) {
            year = parse_int(mid.substr(comma + 1));
            if (year) venue = text::trim(mid.substr(0, comma));
        } else if (auto only = parse_int(mid)) {
            year = only;
            venue.clear();
        }
        if (!rec.year) rec.year = year;
        if (!venue.empty()) rec.venue = venue;
    }
}

}  // namespace detail

// Google Scholar scrape dump: JSON-lines, one object per citing document.
inline std::vector<CitingRecord> parse_gs_dump(const std::string& path,
                                               const std::string& cited_doc_id,
                                               IngestReport& report,
                                               const DocTypeTable& types = {}) {
    std::string data = detail::read_file_bytes(path);
    auto lines = detail::split_lines(data);
    std::vector<CitingRecord> out;
    std::set<std::string> seen_ids;
    for (size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        report.total_lines++;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(lines[i]);
            if (!j.is_object()) throw ValidationError("not an object");
        } catch (const std::exception&) {
            report.reject(path, i + 1, "unparseable JSON line");
            continue;
        }
        if (!j.contains("cluster_id") || !j["cluster_id"].is_string()) {
            report.reject(path, i + 1, "missing cluster_id");
            continue;
        }
        CitingRecord rec;
        rec.source = SourceDatabase::GS;
        rec.cited_doc_id = cited_doc_id;
        rec.record_id = j["cluster_id"].get<std::string>();
        if (!seen_ids.insert(rec.record_id).second) {
            report.warn(path + ":" + std::to_string(i + 1) +
                        ": duplicate cluster_id " + rec.record_id + ", kept first");
            continue;
        }
        rec.title_raw = j.value("title", std::string{});
        if (j.contains("url") && j["url"].is_string())
            rec.url = j["url"].get<std::string>();
        if (j.contains("year") && j["year"].is_number_integer())
            rec.year = j["year"].get<int>();
        if (j.contains("cites") && j["cites"].is_number_integer()) {
            auto c = j["cites"].get<int64_t>();
            if (c >= 0) rec.citation_count = c;
        }
        if (j.contains("byline") && j["byline"].is_string())
            detail::parse_gs_byline(j["byline"].get<std::string>(), rec);

        std::optional<std::string> raw_doi;
        if (j.contains("doi") && j["doi"].is_string())
            raw_doi = j["doi"].get<std::string>();
        if (j.contains("meta") && j["meta"].is_object()) {
            const auto& meta = j["meta"];
            if (!raw_doi && meta.contains("citation_doi") &&
                meta["citation_doi"].is_string())
                raw_doi = meta["citation_doi"].get<std::string>();
            if (meta.contains("citation_language") &&
                meta["citation_language"].is_string()) {
                std::string lang =
                    text::to_lower_ascii(text::trim(meta["citation_language"].get<std::string>()));
                if (lang.size() == 2) rec.language = lang;
                else if (!lang.empty()) rec.language_raw = lang;
            }
            if (meta.contains("citation_dissertation_institution"))
                rec.doc_type_raw = "dissertation";
        }
        if (raw_doi) rec.doi = normalize_doi(*raw_doi);
        detail::finish_record(rec, types);
        report.accepted++;
        out.push_back(std::move(rec));
    }
    return out;
}

// CSV `venue,category,broad_area,quartile`; duplicate venues keep the last
// row; quartiles outside Q1..Q4 reject the row.
inline CategoryMap load_category_map(const std::string& path, IngestReport& report) {
    auto rows = csv::parse_file(path);
    CategoryMap map;
    for (size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.empty() || (i == 0 && !row.empty() && text::to_lower_ascii(row[0]) == "venue"))
            continue;
        if (row.size() < 3) {
            report.reject(path, i + 1, "expected venue,category,broad_area[,quartile]");
            continue;
        }
        std::string venue_key = text::to_lower_ascii(text::trim(row[0]));
        if (venue_key.empty()) {
            report.reject(path, i + 1, "empty venue");
            continue;
        }
        CategoryEntry e;
        e.category = text::trim(row[1]);
        e.broad_area = text::trim(row[2]);
        std::string q = row.size() > 3 ? text::trim(row[3]) : "";
        if (!q.empty()) {
            if (q != "Q1" && q != "Q2" && q != "Q3" && q != "Q4") {
                report.reject(path, i + 1, "invalid quartile " + q);
                continue;
            }
            e.quartile = q;
        }
        if (map.count(venue_key))
            report.warn(path + ":" + std::to_string(i + 1) +
                        ": duplicate venue " + venue_key + ", last row wins");
        map[venue_key] = std::move(e);
    }
    return map;
}

// ---- canonical record file (JSON-lines, fixed key order) ----

inline nlohmann::ordered_json record_to_json(const CitingRecord& r) {
    nlohmann::ordered_json j;
    j["record_id"] = r.record_id;
    j["source"] = to_string(r.source);
    j["cited_doc_id"] = r.cited_doc_id;
    j["title_raw"] = r.title_raw;
    j["title_norm"] = r.title_norm;
    j["authors"] = r.authors;
    j["first_author_key"] = r.first_author_key;
    if (r.year) j["year"] = *r.year;
    if (r.venue) j["venue"] = *r.venue;
    if (r.doi) j["doi"] = *r.doi;
    if (r.url) j["url"] = *r.url;
    if (r.doc_type_raw) j["doc_type_raw"] = *r.doc_type_raw;
    j["doc_type"] = to_string(r.doc_type);
    if (r.language) j["language"] = *r.language;
    if (r.language_raw) j["language_raw"] = *r.language_raw;
    if (r.citation_count) j["citation_count"] = *r.citation_count;
    return j;
}

inline CitingRecord record_from_json(const nlohmann::json& j) {
    CitingRecord r;
    r.record_id = j.at("record_id").get<std::string>();
    r.source = source_from_string(j.at("source").get<std::string>());
    r.cited_doc_id = j.at("cited_doc_id").get<std::string>();
    r.title_raw = j.value("title_raw", std::string{});
    r.title_norm = j.value("title_norm", std::string{});
    if (j.contains("authors")) r.authors = j["authors"].get<std::vector<std::string>>();
    r.first_author_key = j.value("first_author_key", std::string{});
    if (j.contains("year")) r.year = j["year"].get<int>();
    if (j.contains("venue")) r.venue = j["venue"].get<std::string>();
    if (j.contains("doi")) r.doi = j["doi"].get<std::string>();
    if (j.contains("url")) r.url = j["url"].get<std::string>();
    if (j.contains("doc_type_raw")) r.doc_type_raw = j["doc_type_raw"].get<std::string>();
    if (auto t = doc_type_from_string(j.value("doc_type", "UNKNOWN")))
        r.doc_type = *t;
    if (j.contains("language")) r.language = j["language"].get<std::string>();
    if (j.contains("language_raw")) r.language_raw = j["language_raw"].get<std::string>();
    if (j.contains("citation_count")) r.citation_count = j["citation_count"].get<int64_t>();
    return r;
}

inline void write_canonical(const std::vector<CitingRecord>& records,
                            const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& r : records) out << record_to_json(r).dump() << "\n";
}

inline std::vector<CitingRecord> read_canonical(const std::string& path) {
    std::string data = detail::read_file_bytes(path);
    std::vector<CitingRecord> out;
    for (auto& line : detail::split_lines(data)) {
        if (line.empty()) continue;
        out.push_back(record_from_json(nlohmann::json::parse(line)));
    }
    return out;
}

// Ingests one source. `path` is either a single export file or a directory
// of them; each file covers the citations of one cited document whose id
// is the filename stem.
inline std::vector<CitingRecord> ingest_source(SourceDatabase source,
                                               const std::string& path,
                                               IngestReport& report,
                                               const DocTypeTable& types = {}) {
    namespace fs = std::filesystem;
    std::vector<std::pair<std::string, std::string>> files;  // (cited_doc_id, path)
    if (fs::is_directory(path)) {
        for (const auto& entry : fs::directory_iterator(path))
            if (entry.is_regular_file())
                files.emplace_back(entry.path().stem().string(), entry.path().string());
        std::sort(files.begin(), files.end());
    } else if (fs::is_regular_file(path)) {
        files.emplace_back(fs::path(path).stem().string(), path);
    } else {
        throw IoError("input not found: " + path);
    }

    std::vector<CitingRecord> all;
    std::set<std::string> seen_ids;
    for (const auto& [cited_doc_id, file] : files) {
        std::vector<CitingRecord> recs;
        switch (source) {
            case SourceDatabase::GS:
                recs = parse_gs_dump(file, cited_doc_id, report, types);
                break;
            case SourceDatabase::WOS:
                recs = parse_wos_export(file, cited_doc_id, report, types);
                break;
            case SourceDatabase::SCOPUS:
                recs = parse_scopus_export(file, cited_doc_id, report, types);
                break;
        }
        for (auto& r : recs) {
            if (!seen_ids.insert(r.record_id).second) {
                report.warn(file + ": duplicate record id across files: " +
                            r.record_id + ", kept first");
                continue;
            }
            all.push_back(std::move(r));
        }
    }
    return all;
}

}  // namespace citelink
