#pragma once

// Overlap regions, coverage percentages, distribution tables, citation
// count summaries, Spearman correlations, and mean citation ratios.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "citelink/enrich.hpp"
#include "citelink/linkage.hpp"
#include "citelink/types.hpp"

namespace citelink {

// The 7 non-empty subsets of {GS, WOS, SCOPUS} a cluster's presence can
// equal. "GSc" is the GS+Scopus overlap.
enum class Region : uint8_t { G = 0, W, S, GW, GSc, WS, GWS };

inline constexpr std::array<const char*, 7> kRegionNames = {
    "G", "W", "S", "GW", "GSc", "WS", "GWS"};

inline Region region_of(const std::set<SourceDatabase>& presence) {
    bool g = presence.count(SourceDatabase::GS);
    bool w = presence.count(SourceDatabase::WOS);
    bool s = presence.count(SourceDatabase::SCOPUS);
    if (g && w && s) return Region::GWS;
    if (g && w) return Region::GW;
    if (g && s) return Region::GSc;
    if (w && s) return Region::WS;
    if (g) return Region::G;
    if (w) return Region::W;
    if (s) return Region::S;
    throw ValidationError("cluster with empty presence");
}

struct RegionCounts {
    std::array<uint64_t, 7> counts{};

    uint64_t& operator[](Region r) { return counts[static_cast<size_t>(r)]; }
    uint64_t operator[](Region r) const { return counts[static_cast<size_t>(r)]; }

    uint64_t total() const {
        uint64_t t = 0;
        for (auto c : counts) t += c;
        return t;
    }
    uint64_t gs_total() const {
        return (*this)[Region::G] + (*this)[Region::GW] + (*this)[Region::GSc] +
               (*this)[Region::GWS];
    }
    uint64_t wos_total() const {
        return (*this)[Region::W] + (*this)[Region::GW] + (*this)[Region::WS] +
               (*this)[Region::GWS];
    }
    uint64_t scopus_total() const {
        return (*this)[Region::S] + (*this)[Region::GSc] + (*this)[Region::WS] +
               (*this)[Region::GWS];
    }
};

// Each cluster increments exactly one region.
inline RegionCounts partition_regions(const std::vector<CitationCluster>& clusters) {
    RegionCounts rc;
    for (const auto& c : clusters) rc[region_of(c.presence)]++;
    return rc;
}

struct CoverageSummary {
    double pct_gs_all = 0, pct_wos_all = 0, pct_scopus_all = 0;
    std::optional<double> pct_wos_in_gs, pct_scopus_in_gs, pct_wos_in_scopus;
};

inline CoverageSummary coverage_metrics(const RegionCounts& rc) {
    uint64_t total = rc.total();
    if (total == 0)
        throw ValidationError("coverage_metrics: zero total clusters");
    auto pct = [](uint64_t num, uint64_t den) {
        return 100.0 * static_cast<double>(num) / static_cast<double>(den);
    };
    CoverageSummary s;
    s.pct_gs_all = pct(rc.gs_total(), total);
    s.pct_wos_all = pct(rc.wos_total(), total);
    s.pct_scopus_all = pct(rc.scopus_total(), total);
    if (rc.wos_total() > 0)
        s.pct_wos_in_gs = pct(rc[Region::GW] + rc[Region::GWS], rc.wos_total());
    if (rc.scopus_total() > 0)
        s.pct_scopus_in_gs = pct(rc[Region::GSc] + rc[Region::GWS], rc.scopus_total());
    if (rc.wos_total() > 0)
        s.pct_wos_in_scopus = pct(rc[Region::WS] + rc[Region::GWS], rc.wos_total());
    return s;
}

// ---- statistics ----

namespace detail {

inline std::vector<double> average_ranks(const std::vector<double>& xs) {
    size_t n = xs.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
        double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

inline std::optional<double> pearson(const std::vector<double>& xs,
                                     const std::vector<double>& ys) {
    size_t n = xs.size();
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0 || syy == 0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace detail

// Spearman correlation with average-rank tie handling; nullopt when either
// vector is constant.
inline std::optional<double> spearman(const std::vector<double>& xs,
                                      const std::vector<double>& ys) {
    if (xs.size() != ys.size())
        throw ValidationError("spearman: length mismatch");
    if (xs.size() < 2)
        throw ValidationError("spearman: need at least 2 observations");
    return detail::pearson(detail::average_ranks(xs), detail::average_ranks(ys));
}

// Mean over pairs of (1+gs)/(1+other); smoothing keeps zero-citation
// documents in the statistic.
inline double mean_ratio(const std::vector<std::pair<int64_t, int64_t>>& pairs) {
    if (pairs.empty()) throw ValidationError("mean_ratio: empty input");
    double sum = 0;
    for (const auto& [gs, other] : pairs) {
        if (gs < 0 || other < 0)
            throw ValidationError("mean_ratio: negative citation count");
        sum += (1.0 + static_cast<double>(gs)) / (1.0 + static_cast<double>(other));
    }
    return sum / static_cast<double>(pairs.size());
}

struct CountSummary {
    size_t n = 0;
    double median_log = 0;
    double mean_log = 0;
    double ci_half_width = 0;  // 1.96 * sd / sqrt(n), sample sd
};

inline CountSummary log_summary(const std::vector<int64_t>& counts) {
    if (counts.empty()) throw ValidationError("log_summary: empty input");
    std::vector<double> logs;
    logs.reserve(counts.size());
    for (int64_t c : counts) {
        if (c < 0) throw ValidationError("log_summary: negative count");
        logs.push_back(std::log1p(static_cast<double>(c)));
    }
    std::sort(logs.begin(), logs.end());
    CountSummary s;
    s.n = logs.size();
    size_t mid = s.n / 2;
    s.median_log = (s.n % 2 == 1) ? logs[mid] : (logs[mid - 1] + logs[mid]) / 2.0;
    double sum = 0;
    for (double v : logs) sum += v;
    s.mean_log = sum / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0;
        for (double v : logs) ss += (v - s.mean_log) * (v - s.mean_log);
        double sd = std::sqrt(ss / static_cast<double>(s.n - 1));
        s.ci_half_width = 1.96 * sd / std::sqrt(static_cast<double>(s.n));
    }
    return s;
}

// ---- distribution and correlation tables ----

// Prefer the member with the richest metadata; ties go WOS > SCOPUS > GS,
// then smallest record_id.
inline const CitingRecord* cluster_representative(
    const CitationCluster& cluster,
    const std::map<std::string, const CitingRecord*>& by_id) {
    const CitingRecord* best = nullptr;
    auto richness = [](const CitingRecord& r) {
        return (r.doc_type != DocumentType::UNKNOWN ? 1 : 0) +
               (r.language ? 1 : 0) + (r.doi ? 1 : 0);
    };
    auto source_rank = [](SourceDatabase s) {
        switch (s) {
            case SourceDatabase::WOS: return 0;
            case SourceDatabase::SCOPUS: return 1;
            case SourceDatabase::GS: return 2;
        }
        return 3;
    };
    for (const auto& id : cluster.members) {
        auto it = by_id.find(id);
        if (it == by_id.end()) continue;
        const CitingRecord* r = it->second;
        if (!best) {
            best = r;
            continue;
        }
        int dr = richness(*r) - richness(*best);
        if (dr > 0 ||
            (dr == 0 && (source_rank(r->source) < source_rank(best->source) ||
                         (source_rank(r->source) == source_rank(best->source) &&
                          r->record_id < best->record_id))))
            best = r;
    }
    return best;
}

enum class ClusterBucket { UniqueGS, Overlapping };

inline const char* to_string(ClusterBucket b) {
    return b == ClusterBucket::UniqueGS ? "unique_gs" : "overlapping";
}

struct GroupDistribution {
    std::string group;
    ClusterBucket bucket = ClusterBucket::UniqueGS;
    size_t n_clusters = 0;
    TypeDistribution types;        // corrected when a sample applies
    bool corrected = false;
    std::map<std::string, double> language_shares;  // top-k + "other"; "und" for absent
};

struct MissedProfile {
    SourceDatabase source = SourceDatabase::WOS;  // found by source, not GS
    size_t n_clusters = 0;
    TypeDistribution types;
    size_t n_journal = 0;
    std::map<std::string, double> quartile_shares;  // Q1..Q4 + "unmapped"
};

struct DistributionTables {
    std::vector<GroupDistribution> groups;
    std::vector<MissedProfile> missed;  // one per {WOS, SCOPUS}
    std::vector<std::string> notes;
};

struct DistributionOptions {
    size_t top_k_languages = 11;
};

// Cited-doc id -> analysis group (e.g. broad subject area). Clusters with
// no mapping fall into the "all" group.
using CitedDocGroups = std::map<std::string, std::string>;

inline DistributionTables distribution_tables(
    const std::vector<CitationCluster>& clusters,
    const std::map<std::string, const CitingRecord*>& by_id,
    const CategoryMap& category_map, const CitedDocGroups& cited_groups,
    const std::map<std::string, CorrectionSample>& corrections,
    const DistributionOptions& opts = {}) {
    DistributionTables out;

    auto group_of = [&](const CitationCluster& c) -> std::string {
        auto it = cited_groups.find(c.cited_doc_id);
        return it == cited_groups.end() ? "all" : it->second;
    };

    // Global top-k languages over all clusters.
    std::map<std::string, uint64_t> lang_freq;
    for (const auto& c : clusters) {
        const CitingRecord* rep = cluster_representative(c, by_id);
        if (!rep) continue;
        lang_freq[rep->language.value_or("und")]++;
    }
    std::vector<std::pair<std::string, uint64_t>> freq(lang_freq.begin(),
                                                       lang_freq.end());
    std::sort(freq.begin(), freq.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::set<std::string> top_langs;
    for (size_t i = 0; i < freq.size() && i < opts.top_k_languages; ++i)
        top_langs.insert(freq[i].first);

    struct Acc {
        size_t n = 0;
        std::map<DocumentType, uint64_t> types;
        std::map<std::string, uint64_t> langs;
    };
    std::map<std::pair<std::string, ClusterBucket>, Acc> acc;
    std::map<SourceDatabase, Acc> missed_acc;
    std::map<SourceDatabase, std::map<std::string, uint64_t>> missed_quart;
    std::map<SourceDatabase, size_t> missed_journal;

    for (const auto& c : clusters) {
        const CitingRecord* rep = cluster_representative(c, by_id);
        if (!rep) continue;
        bool has_gs = c.presence.count(SourceDatabase::GS);

        std::optional<ClusterBucket> bucket;
        if (c.presence.size() == 1 && has_gs)
            bucket = ClusterBucket::UniqueGS;
        else if (c.presence.size() >= 2)
            bucket = ClusterBucket::Overlapping;
        if (bucket) {
            Acc& a = acc[{group_of(c), *bucket}];
            a.n++;
            a.types[rep->doc_type]++;
            std::string lang = rep->language.value_or("und");
            a.langs[top_langs.count(lang) ? lang : "other"]++;
        }

        if (!has_gs) {
            for (SourceDatabase src : {SourceDatabase::WOS, SourceDatabase::SCOPUS}) {
                if (!c.presence.count(src)) continue;
                // Profile the member actually found by that database.
                const CitingRecord* member = rep;
                for (const auto& id : c.members) {
                    auto it = by_id.find(id);
                    if (it != by_id.end() && it->second->source == src) {
                        member = it->second;
                        break;
                    }
                }
                Acc& a = missed_acc[src];
                a.n++;
                a.types[member->doc_type]++;
                if (member->doc_type == DocumentType::JOURNAL) {
                    missed_journal[src]++;
                    std::string q = "unmapped";
                    if (member->venue) {
                        auto it = category_map.find(
                            text::to_lower_ascii(text::trim(*member->venue)));
                        if (it != category_map.end() && it->second.quartile)
                            q = *it->second.quartile;
                    }
                    missed_quart[src][q]++;
                }
            }
        }
    }

    for (const auto& [key, a] : acc) {
        GroupDistribution g;
        g.group = key.first;
        g.bucket = key.second;
        g.n_clusters = a.n;
        g.types.group = g.group;
        for (const auto& [t, n] : a.types)
            g.types.shares[t] = static_cast<double>(n) / static_cast<double>(a.n);
        auto cit = corrections.find(g.group);
        double unknown_share = g.types.share(DocumentType::UNKNOWN);
        if (cit != corrections.end() && unknown_share > 0) {
            TypeDistribution known = g.types;
            known.shares.erase(DocumentType::UNKNOWN);
            g.types = apply_correction(known, unknown_share,
                                       sample_distribution(cit->second));
            g.corrected = true;
        }
        for (const auto& [lang, n] : a.langs)
            g.language_shares[lang] =
                static_cast<double>(n) / static_cast<double>(a.n);
        out.groups.push_back(std::move(g));
    }

    for (SourceDatabase src : {SourceDatabase::WOS, SourceDatabase::SCOPUS}) {
        auto it = missed_acc.find(src);
        if (it == missed_acc.end()) continue;
        MissedProfile p;
        p.source = src;
        p.n_clusters = it->second.n;
        for (const auto& [t, n] : it->second.types)
            p.types.shares[t] =
                static_cast<double>(n) / static_cast<double>(it->second.n);
        p.n_journal = missed_journal[src];
        if (p.n_journal > 0)
            for (const auto& [q, n] : missed_quart[src])
                p.quartile_shares[q] =
                    static_cast<double>(n) / static_cast<double>(p.n_journal);
        if (p.quartile_shares.count("unmapped"))
            out.notes.push_back(std::string(to_string(src)) +
                                ": journal venues missing from category map "
                                "bucketed as unmapped");
        out.missed.push_back(std::move(p));
    }
    return out;
}

struct CorrelationRow {
    std::string category;
    size_t n = 0;
    std::optional<double> spearman_r;
    double mean_ratio = 0;
    double mean_log_gs = 0;
    double mean_log_other = 0;
};

// Pairs GS citation counts with the other source's counts per cluster,
// grouped by the venue-derived category of the non-GS citing record.
inline std::vector<CorrelationRow> correlation_table(
    const std::vector<CitationCluster>& clusters,
    const std::map<std::string, const CitingRecord*>& by_id,
    const CategoryMap& category_map, SourceDatabase other) {
    if (other == SourceDatabase::GS)
        throw ValidationError("correlation_table: pair must be GSxWOS or GSxSCOPUS");

    struct Obs {
        std::vector<double> gs, oth;
        std::vector<std::pair<int64_t, int64_t>> pairs;
    };
    std::map<std::string, Obs> by_cat;

    for (const auto& c : clusters) {
        if (!c.presence.count(SourceDatabase::GS) || !c.presence.count(other))
            continue;
        const CitingRecord* gs_rec = nullptr;
        const CitingRecord* other_rec = nullptr;
        for (const auto& id : c.members) {  // members sorted: smallest id wins
            auto it = by_id.find(id);
            if (it == by_id.end()) continue;
            if (!gs_rec && it->second->source == SourceDatabase::GS)
                gs_rec = it->second;
            if (!other_rec && it->second->source == other) other_rec = it->second;
        }
        if (!gs_rec || !other_rec || !gs_rec->citation_count ||
            !other_rec->citation_count)
            continue;
        std::string cat = "unmapped";
        if (other_rec->venue) {
            auto it = category_map.find(
                text::to_lower_ascii(text::trim(*other_rec->venue)));
            if (it != category_map.end()) cat = it->second.category;
        }
        Obs& o = by_cat[cat];
        o.gs.push_back(static_cast<double>(*gs_rec->citation_count));
        o.oth.push_back(static_cast<double>(*other_rec->citation_count));
        o.pairs.emplace_back(*gs_rec->citation_count, *other_rec->citation_count);
    }

    std::vector<CorrelationRow> rows;
    for (const auto& [cat, o] : by_cat) {
        CorrelationRow row;
        row.category = cat;
        row.n = o.pairs.size();
        if (row.n >= 2) row.spearman_r = spearman(o.gs, o.oth);
        row.mean_ratio = mean_ratio(o.pairs);
        double sg = 0, so = 0;
        for (size_t i = 0; i < o.pairs.size(); ++i) {
            sg += std::log1p(o.gs[i]);
            so += std::log1p(o.oth[i]);
        }
        row.mean_log_gs = sg / static_cast<double>(row.n);
        row.mean_log_other = so / static_cast<double>(row.n);
        rows.push_back(std::move(row));
    }
    return rows;  // std::map iteration keeps categories sorted
}

}  // namespace citelink
