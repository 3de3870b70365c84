#pragma once

// Metadata enrichment: DOI extraction from URLs, resolver lookups with a
// local cache, the language-identification cascade, and the unknown-type
// correction procedure.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "citelink/csv.hpp"
#include "citelink/digest.hpp"
#include "citelink/normalize.hpp"
#include "citelink/types.hpp"

namespace citelink {

// Scans for the first '/'-preceded substring that satisfies the DOI
// grammar; query strings and fragments are not part of the suffix.
inline std::optional<std::string> extract_doi_from_url(std::string_view url) {
    for (size_t i = 1; i + 3 <= url.size(); ++i) {
        if (url[i - 1] != '/' || url.compare(i, 3, "10.") != 0) continue;
        std::string_view cand = url.substr(i);
        size_t cut = cand.find_first_of("?#");
        if (cut != std::string_view::npos) cand = cand.substr(0, cut);
        if (auto doi = normalize_doi(cand)) return doi;
    }
    return std::nullopt;
}

// ---- language identification ----

class WosLanguageTable {
  public:
    WosLanguageTable() {
        static const std::pair<const char*, const char*> kSeed[] = {
            {"english", "en"},   {"spanish", "es"},    {"french", "fr"},
            {"german", "de"},    {"portuguese", "pt"}, {"italian", "it"},
            {"chinese", "zh"},   {"japanese", "ja"},   {"korean", "ko"},
            {"russian", "ru"},   {"dutch", "nl"},      {"polish", "pl"},
            {"turkish", "tr"},   {"arabic", "ar"},     {"czech", "cs"},
            {"swedish", "sv"},   {"norwegian", "no"},  {"danish", "da"},
            {"finnish", "fi"},   {"hungarian", "hu"},  {"greek", "el"},
            {"ukrainian", "uk"}, {"persian", "fa"},    {"hebrew", "he"},
            {"indonesian", "id"}, {"catalan", "ca"},   {"croatian", "hr"},
            {"serbian", "sr"},   {"slovak", "sk"},     {"slovenian", "sl"},
            {"romanian", "ro"},  {"bulgarian", "bg"},  {"thai", "th"},
            {"vietnamese", "vi"}, {"malay", "ms"},     {"estonian", "et"},
            {"lithuanian", "lt"}, {"latvian", "lv"},
        };
        for (const auto& [name, code] : kSeed) map_[name] = code;
    }

    void load_csv(const std::string& path) {
        for (const auto& row : csv::parse_file(path)) {
            if (row.size() < 2) continue;
            std::string name = text::to_lower_ascii(text::trim(row[0]));
            if (name.empty() || name == "name") continue;
            map_[name] = text::to_lower_ascii(text::trim(row[1]));
        }
    }

    std::optional<std::string> lookup(std::string_view name) const {
        std::string key = text::to_lower_ascii(text::trim(name));
        if (key.size() == 2 && map_rev_.count(key)) return key;
        auto it = map_.find(key);
        if (it == map_.end()) return std::nullopt;
        return it->second;
    }

  private:
    std::map<std::string, std::string> map_;
    // Accept already-ISO input for the common codes.
    std::set<std::string> map_rev_ = {"en", "es", "fr", "de", "pt", "it", "zh",
                                      "ja", "ko", "ru", "nl", "pl", "tr", "ar"};
};

// Stopword profiles for Latin-script language scoring over title tokens.
class LanguageProfiles {
  public:
    LanguageProfiles() {
        add("en", {"the", "of", "and", "in", "to", "for", "with", "on", "a",
                   "an", "from", "by", "is", "between", "among", "study"});
        add("es", {"el", "la", "los", "las", "de", "del", "y", "en", "un",
                   "una", "para", "con", "sobre", "entre", "estudio", "su"});
        add("fr", {"le", "la", "les", "de", "des", "du", "et", "en", "un",
                   "une", "pour", "avec", "sur", "dans", "etude", "chez"});
        add("de", {"der", "die", "das", "und", "von", "im", "zur", "zum",
                   "mit", "auf", "ein", "eine", "fur", "bei", "uber", "den"});
        add("it", {"il", "lo", "la", "gli", "di", "del", "della", "e", "in",
                   "un", "una", "per", "con", "su", "tra", "studio"});
        add("pt", {"o", "a", "os", "as", "de", "do", "da", "dos", "e", "em",
                   "um", "uma", "para", "com", "sobre", "estudo"});
        add("nl", {"de", "het", "een", "van", "en", "in", "op", "voor",
                   "met", "bij", "naar", "over", "tussen", "onderzoek"});
    }

    void add(const std::string& lang, std::vector<std::string> words) {
        auto& set = profiles_[lang];
        for (auto& w : words) set.insert(std::move(w));
    }

    void load_csv(const std::string& path) {
        for (const auto& row : csv::parse_file(path)) {
            if (row.size() < 2) continue;
            std::string lang = text::to_lower_ascii(text::trim(row[0]));
            if (lang.empty() || lang == "lang") continue;
            profiles_[lang].insert(text::to_lower_ascii(text::trim(row[1])));
        }
    }

    const std::map<std::string, std::set<std::string>>& profiles() const {
        return profiles_;
    }

  private:
    std::map<std::string, std::set<std::string>> profiles_;
};

struct LanguageTables {
    WosLanguageTable wos_names;
    LanguageProfiles profiles;
    // Minimum share of the top-two stopword-hit mass the winner must carry.
    double confidence_floor = 0.65;
};

namespace detail {

// Script heuristics over a normalized title; nullopt falls through to the
// stopword profiles.
inline std::optional<std::string> detect_by_script(const std::string& title_norm) {
    size_t letters = 0, han = 0, cyr = 0;
    bool kana = false, hangul = false;
    for (char32_t cp : text::to_codepoints(title_norm)) {
        if (cp == ' ') continue;
        ++letters;
        if (text::is_han(cp)) ++han;
        if (text::is_cyrillic(cp)) ++cyr;
        if (text::is_kana(cp)) kana = true;
        if (text::is_hangul(cp)) hangul = true;
    }
    if (letters == 0) return std::nullopt;
    if (kana) return "ja";
    if (hangul) return "ko";
    if (2 * han >= letters) return "zh";
    if (2 * cyr >= letters) return "ru";
    return std::nullopt;
}

inline std::optional<std::string> detect_by_stopwords(
    const std::string& title_norm, const LanguageProfiles& profiles,
    double floor) {
    std::vector<std::string> tokens = text::split(title_norm, " ");
    if (tokens.empty()) return std::nullopt;
    std::string best_lang;
    size_t best = 0, second = 0;
    for (const auto& [lang, words] : profiles.profiles()) {
        size_t hits = 0;
        for (const auto& t : tokens)
            if (words.count(t)) ++hits;
        if (hits > best) {
            second = best;
            best = hits;
            best_lang = lang;
        } else if (hits > second) {
            second = hits;
        }
    }
    if (best == 0) return std::nullopt;
    double margin = static_cast<double>(best) / static_cast<double>(best + second);
    if (margin < floor) return std::nullopt;
    return best_lang;
}

}  // namespace detail

// Cascade: (1) metadata language already on the record, (2) source
// language name mapped to ISO, (3) title-based detector.
inline std::optional<std::string> detect_language(
    const CitingRecord& record, const std::optional<std::string>& wos_lang,
    const LanguageTables& tables = {}) {
    if (record.language) return record.language;
    if (wos_lang)
        if (auto iso = tables.wos_names.lookup(*wos_lang)) return iso;
    if (auto script = detail::detect_by_script(record.title_norm)) return script;
    return detail::detect_by_stopwords(record.title_norm, tables.profiles,
                                       tables.confidence_floor);
}

// ---- resolver client ----

struct ResolverMetadata {
    std::optional<std::string> title;
    std::optional<std::string> type;
    std::optional<std::string> language;
    std::optional<std::string> container;
};

struct TransientResolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResolverConfig {
    std::string base_url;  // e.g. http://localhost:8080
    std::string cache_dir;
    bool offline = true;
    double rate_limit_per_sec = 1.0;
    int max_retries = 3;
    int backoff_ms = 250;
};

// HTTP GET `{base}/works/{key}` with a one-file-per-digest cache. Cache
// hits never touch the network; offline mode serves only the cache.
class ResolverClient {
  public:
    explicit ResolverClient(ResolverConfig cfg) : cfg_(std::move(cfg)) {
        if (!cfg_.cache_dir.empty())
            std::filesystem::create_directories(cfg_.cache_dir);
    }

    std::optional<ResolverMetadata> resolve(const std::string& key);

    const ResolverConfig& config() const { return cfg_; }

  private:
    std::string cache_path(const std::string& key) const {
        return cfg_.cache_dir + "/" + sha256_hex(key) + ".json";
    }

    std::optional<nlohmann::json> cache_read(const std::string& key) {
        std::string path = cache_path(key);
        std::ifstream in(path, std::ios::binary);
        if (!in) return std::nullopt;
        nlohmann::json j;
        in >> j;
        return j;
    }

    void cache_write(const std::string& key, const nlohmann::json& entry) {
        std::ofstream out(cache_path(key), std::ios::binary);
        out << entry.dump(2) << "\n";
    }

    void rate_wait() {
        if (cfg_.rate_limit_per_sec <= 0) return;
        auto min_gap = std::chrono::duration<double>(1.0 / cfg_.rate_limit_per_sec);
        auto now = std::chrono::steady_clock::now();
        if (last_request_.time_since_epoch().count() != 0) {
            auto next = last_request_ +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(min_gap);
            if (next > now) std::this_thread::sleep_until(next);
        }
        last_request_ = std::chrono::steady_clock::now();
    }

    static ResolverMetadata parse_metadata(const nlohmann::json& body) {
        const nlohmann::json& m =
            body.contains("message") && body["message"].is_object()
                ? body["message"]
                : body;
        ResolverMetadata md;
        auto pick = [&](const char* key) -> std::optional<std::string> {
            if (!m.contains(key)) return std::nullopt;
            const auto& v = m[key];
            if (v.is_string()) return v.get<std::string>();
            if (v.is_array() && !v.empty() && v[0].is_string())
                return v[0].get<std::string>();
            return std::nullopt;
        };
        md.title = pick("title");
        md.type = pick("type");
        md.language = pick("language");
        md.container = pick("container");
        if (!md.container) md.container = pick("container-title");
        return md;
    }

    ResolverConfig cfg_;
    std::mutex mutex_;
    std::chrono::steady_clock::time_point last_request_{};
};

inline std::optional<ResolverMetadata> ResolverClient::resolve(const std::string& key) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (auto cached = cache_read(key)) {
        if (cached->value("status", "") == "ok")
            return parse_metadata(cached->at("body"));
        return std::nullopt;
    }
    if (cfg_.offline) return std::nullopt;
    if (cfg_.base_url.empty())
        throw ValidationError("resolver base URL not configured");

    const std::string path = "/works/" + key;
    int attempt = 0;
    std::string last_error;
    while (attempt <= cfg_.max_retries) {
        if (attempt > 0)
            std::this_thread::sleep_for(
                std::chrono::milliseconds(cfg_.backoff_ms * attempt));
        ++attempt;
        rate_wait();
        httplib::Client client(cfg_.base_url);
        client.set_connection_timeout(10);
        client.set_read_timeout(30);
        auto res = client.Get(path);
        if (!res) {
            last_error = "connection failure";
            continue;
        }
        if (res->status == 404) {
            nlohmann::json entry = {{"key", key},
                                    {"status", "not_found"},
                                    {"fetched_at", std::time(nullptr)}};
            cache_write(key, entry);
            return std::nullopt;
        }
        if (res->status >= 200 && res->status < 300) {
            nlohmann::json body;
            try {
                body = nlohmann::json::parse(res->body);
            } catch (const std::exception&) {
                last_error = "unparseable response body";
                continue;
            }
            nlohmann::json entry = {{"key", key},
                                    {"status", "ok"},
                                    {"body", body},
                                    {"fetched_at", std::time(nullptr)}};
            cache_write(key, entry);
            return parse_metadata(body);
        }
        last_error = "HTTP status " + std::to_string(res->status);
    }
    throw TransientResolverError("resolver failed for " + key + " after " +
                                 std::to_string(cfg_.max_retries + 1) +
                                 " attempts: " + last_error);
}

// Fills missing DOIs (from URLs, then the resolver), document types, and
// languages in place. A present DOI is never overwritten; conflicts are
// logged and the first value wins.
inline void enrich_records(std::vector<CitingRecord>& records,
                           ResolverClient* resolver,
                           const LanguageTables& tables,
                           const DocTypeTable& types,
                           std::vector<std::string>& log) {
    for (auto& rec : records) {
        if (rec.url) {
            if (auto doi = extract_doi_from_url(*rec.url)) {
                if (!rec.doi) {
                    rec.doi = doi;
                } else if (*rec.doi != *doi) {
                    log.push_back("doi conflict for " + rec.record_id + ": kept " +
                                  *rec.doi + ", url gave " + *doi);
                }
            }
        }
        if (resolver && rec.doi &&
            (rec.doc_type == DocumentType::UNKNOWN || !rec.language || !rec.venue)) {
            if (auto md = resolver->resolve(*rec.doi)) {
                if (rec.doc_type == DocumentType::UNKNOWN && md->type) {
                    rec.doc_type_raw = md->type;
                    rec.doc_type = types.classify(rec.doc_type_raw);
                }
                if (!rec.language && md->language) {
                    std::string iso = text::to_lower_ascii(text::trim(*md->language));
                    if (iso.size() == 2) rec.language = iso;
                }
                if (!rec.venue && md->container) rec.venue = md->container;
            }
        }
        if (!rec.language)
            rec.language = detect_language(rec, rec.language_raw, tables);
    }
}

// ---- correction procedure ----

// Shares per document type; shares sum to 1 within 1e-9.
struct TypeDistribution {
    std::string group;
    std::map<DocumentType, double> shares;

    double share(DocumentType t) const {
        auto it = shares.find(t);
        return it == shares.end() ? 0.0 : it->second;
    }

    double total() const {
        double s = 0;
        for (auto& [t, v] : shares) s += v;
        return s;
    }
};

struct CorrectionSample {
    std::string group;
    std::vector<std::string> sampled_ids;
    std::map<std::string, DocumentType> labels;  // UNKNOWN not allowed
    uint64_t seed = 0;
};

// Deterministic sample of min(n, available) UNKNOWN-type records from a
// group. Sampling is without replacement; identical seed reproduces the
// identical sample.
inline CorrectionSample draw_type_sample(
    const std::vector<const CitingRecord*>& group_records,
    const std::string& group, size_t n, uint64_t seed) {
    if (group_records.empty())
        throw ValidationError("draw_type_sample: empty group \"" + group + "\"");
    std::vector<std::string> unknown_ids;
    for (const auto* r : group_records)
        if (r->doc_type == DocumentType::UNKNOWN)
            unknown_ids.push_back(r->record_id);
    if (unknown_ids.empty())
        throw ValidationError("draw_type_sample: group \"" + group +
                              "\" has no UNKNOWN-type records");
    std::sort(unknown_ids.begin(), unknown_ids.end());
    std::mt19937_64 rng(seed);
    size_t k = std::min(n, unknown_ids.size());
    for (size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<size_t> pick(i, unknown_ids.size() - 1);
        std::swap(unknown_ids[i], unknown_ids[pick(rng)]);
    }
    unknown_ids.resize(k);
    std::sort(unknown_ids.begin(), unknown_ids.end());
    CorrectionSample s;
    s.group = group;
    s.sampled_ids = std::move(unknown_ids);
    s.seed = seed;
    return s;
}

// Labeling sheet: `record_id,title,url,label` with an empty label column.
inline void write_labeling_sheet(const CorrectionSample& sample,
                                 const std::map<std::string, const CitingRecord*>& by_id,
                                 const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "record_id,title,url,label\n";
    for (const auto& id : sample.sampled_ids) {
        auto it = by_id.find(id);
        const CitingRecord* r = it == by_id.end() ? nullptr : it->second;
        out << csv::join_row({id, r ? r->title_raw : "",
                              r && r->url ? *r->url : "", ""});
    }
}

// Reads back an externally labeled sheet; rows with an empty label are
// skipped, a label of UNKNOWN is invalid.
inline CorrectionSample load_labeled_sheet(const std::string& path,
                                           const std::string& group) {
    auto rows = csv::parse_file(path);
    CorrectionSample s;
    s.group = group;
    for (size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() < 4) continue;
        s.sampled_ids.push_back(row[0]);
        std::string label = text::trim(row[3]);
        if (label.empty()) continue;
        auto t = doc_type_from_string(label);
        if (!t || *t == DocumentType::UNKNOWN)
            throw ValidationError(path + " row " + std::to_string(i + 1) +
                                  ": invalid label \"" + label + "\"");
        s.labels[row[0]] = *t;
    }
    return s;
}

inline TypeDistribution sample_distribution(const CorrectionSample& sample) {
    TypeDistribution d;
    d.group = sample.group;
    if (sample.labels.empty())
        throw ValidationError("correction sample for group \"" + sample.group +
                              "\" has no labels");
    for (const auto& [id, t] : sample.labels) d.shares[t] += 1.0;
    for (auto& [t, v] : d.shares) v /= static_cast<double>(sample.labels.size());
    return d;
}

// corrected(type) = known(type) + sample(type) * unknown_share. The
// UNKNOWN mass is redistributed; output sums to 1.
inline TypeDistribution apply_correction(const TypeDistribution& known_dist,
                                         double unknown_share,
                                         const TypeDistribution& sample_dist) {
    constexpr double kTol = 1e-9;
    if (known_dist.shares.count(DocumentType::UNKNOWN) &&
        known_dist.share(DocumentType::UNKNOWN) != 0.0)
        throw ValidationError("apply_correction: known_dist must exclude UNKNOWN");
    if (std::fabs(known_dist.total() + unknown_share - 1.0) > kTol)
        throw ValidationError("apply_correction: known shares + unknown_share must sum to 1");
    if (std::fabs(sample_dist.total() - 1.0) > kTol)
        throw ValidationError("apply_correction: sample shares must sum to 1");
    if (sample_dist.share(DocumentType::UNKNOWN) != 0.0)
        throw ValidationError("apply_correction: sample may not contain UNKNOWN");
    TypeDistribution out;
    out.group = known_dist.group;
    for (const auto& [t, v] : known_dist.shares) out.shares[t] = v;
    for (const auto& [t, v] : sample_dist.shares)
        out.shares[t] += v * unknown_share;
    out.shares[DocumentType::UNKNOWN] = 0.0;
    return out;
}

}  // namespace citelink
