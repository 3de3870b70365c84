#pragma once

// Two-stage matching per cited document (DOI equality, then greedy fuzzy
// title matching) and union-find clustering of pairwise matches.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <tuple>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "citelink/csv.hpp"
#include "citelink/text.hpp"
#include "citelink/types.hpp"

namespace citelink {

// Restricted Damerau-Levenshtein (optimal string alignment) distance over
// codepoints: insertions, deletions, substitutions, and adjacent
// transpositions, with no substring edited twice.
inline size_t osa_distance(const std::vector<char32_t>& a,
                           const std::vector<char32_t>& b) {
    const size_t m = a.size(), n = b.size();
    if (m == 0) return n;
    if (n == 0) return m;
    std::vector<size_t> prev2(n + 1), prev(n + 1), cur(n + 1);
    for (size_t j = 0; j <= n; ++j) prev[j] = j;
    for (size_t i = 1; i <= m; ++i) {
        cur[0] = i;
        for (size_t j = 1; j <= n; ++j) {
            size_t cost = (a[i - 1] == b[j - 1]) ? 0 : 1;
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost});
            if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1])
                cur[j] = std::min(cur[j], prev2[j - 2] + 1);
        }
        std::swap(prev2, prev);
        std::swap(prev, cur);
    }
    return prev[n];
}

inline size_t osa_distance(std::string_view a, std::string_view b) {
    return osa_distance(text::to_codepoints(a), text::to_codepoints(b));
}

// 1 - d / max(|a|,|b|); 1 when both strings are empty.
inline double title_similarity(const std::vector<char32_t>& a,
                               const std::vector<char32_t>& b) {
    size_t longest = std::max(a.size(), b.size());
    if (longest == 0) return 1.0;
    return 1.0 - static_cast<double>(osa_distance(a, b)) /
                     static_cast<double>(longest);
}

inline double title_similarity(std::string_view a, std::string_view b) {
    return title_similarity(text::to_codepoints(a), text::to_codepoints(b));
}

inline bool accept_match(double sim, size_t len_a, size_t len_b,
                         bool same_first_author, const MatchPolicy& policy) {
    if (sim >= policy.high_sim_threshold &&
        std::min(len_a, len_b) >= static_cast<size_t>(policy.min_title_len))
        return true;
    return sim >= policy.low_sim_threshold && same_first_author;
}

enum class MatchMethod : uint8_t { DOI, FUZZY };

inline const char* to_string(MatchMethod m) {
    return m == MatchMethod::DOI ? "DOI" : "FUZZY";
}

struct MatchEdge {
    std::string cited_doc_id;
    std::string record_a;  // endpoint from the lower-ordered source
    std::string record_b;
    MatchMethod method = MatchMethod::DOI;
    double similarity = 1.0;
};

// Matches the records of two sources citing the same document X.
// Stage 1 pairs equal normalized DOIs (surplus duplicates stay unmatched,
// pairing by ascending record_id). Stage 2 greedily takes the globally
// highest-similarity unmatched pair, tie-broken lexicographically, and
// keeps it iff accept_match holds. Output is a partial matching.
inline std::vector<MatchEdge> match_block(
    const std::vector<const CitingRecord*>& list_a,
    const std::vector<const CitingRecord*>& list_b,
    const MatchPolicy& policy) {
    policy.validate();
    if (list_a.empty() || list_b.empty()) return {};
    const std::string& cited = list_a.front()->cited_doc_id;
    for (const auto* lists : {&list_a, &list_b})
        for (const auto* r : *lists)
            if (r->cited_doc_id != cited)
                throw ValidationError("match_block: mixed cited_doc_id inputs (" +
                                      cited + " vs " + r->cited_doc_id + ")");
    if (list_a.front()->source == list_b.front()->source)
        throw ValidationError("match_block: both lists from the same source");

    // Edges store the lower-ordered source first so the result is
    // identical when argument order is swapped.
    bool a_first = static_cast<int>(list_a.front()->source) <
                   static_cast<int>(list_b.front()->source);
    auto make_edge = [&](const CitingRecord* ra, const CitingRecord* rb,
                         MatchMethod m, double sim) {
        MatchEdge e;
        e.cited_doc_id = cited;
        e.record_a = a_first ? ra->record_id : rb->record_id;
        e.record_b = a_first ? rb->record_id : ra->record_id;
        e.method = m;
        e.similarity = sim;
        return e;
    };

    std::vector<MatchEdge> edges;
    std::set<const CitingRecord*> matched;

    // Stage 1: DOI equality.
    std::map<std::string, std::vector<const CitingRecord*>> by_doi_a, by_doi_b;
    for (const auto* r : list_a)
        if (r->doi) by_doi_a[*r->doi].push_back(r);
    for (const auto* r : list_b)
        if (r->doi) by_doi_b[*r->doi].push_back(r);
    auto by_id = [](const CitingRecord* x, const CitingRecord* y) {
        return x->record_id < y->record_id;
    };
    for (auto& [doi, as] : by_doi_a) {
        auto it = by_doi_b.find(doi);
        if (it == by_doi_b.end()) continue;
        auto& bs = it->second;
        std::sort(as.begin(), as.end(), by_id);
        std::sort(bs.begin(), bs.end(), by_id);
        size_t k = std::min(as.size(), bs.size());
        for (size_t i = 0; i < k; ++i) {
            edges.push_back(make_edge(as[i], bs[i], MatchMethod::DOI, 1.0));
            matched.insert(as[i]);
            matched.insert(bs[i]);
        }
    }

    // Stage 2: fuzzy title matching over the remainder.
    std::vector<const CitingRecord*> rem_a, rem_b;
    for (const auto* r : list_a)
        if (!matched.count(r)) rem_a.push_back(r);
    for (const auto* r : list_b)
        if (!matched.count(r)) rem_b.push_back(r);

    if (!rem_a.empty() && !rem_b.empty()) {
        std::vector<std::vector<char32_t>> cps_a(rem_a.size()), cps_b(rem_b.size());
        for (size_t i = 0; i < rem_a.size(); ++i)
            cps_a[i] = text::to_codepoints(rem_a[i]->title_norm);
        for (size_t j = 0; j < rem_b.size(); ++j)
            cps_b[j] = text::to_codepoints(rem_b[j]->title_norm);

        struct Cand {
            double sim;
            size_t i, j;
        };
        std::vector<Cand> cands;
        for (size_t i = 0; i < rem_a.size(); ++i) {
            for (size_t j = 0; j < rem_b.size(); ++j) {
                // A pair below the low threshold can never be emitted.
                size_t longest = std::max(cps_a[i].size(), cps_b[j].size());
                size_t max_dist = static_cast<size_t>(
                    (1.0 - policy.low_sim_threshold) * static_cast<double>(longest));
                size_t len_gap = cps_a[i].size() > cps_b[j].size()
                                     ? cps_a[i].size() - cps_b[j].size()
                                     : cps_b[j].size() - cps_a[i].size();
                if (longest > 0 && len_gap > max_dist) continue;
                double sim = title_similarity(cps_a[i], cps_b[j]);
                if (sim >= policy.low_sim_threshold) cands.push_back({sim, i, j});
            }
        }
        auto pair_key = [&](const Cand& c) {
            const std::string& ida = rem_a[c.i]->record_id;
            const std::string& idb = rem_b[c.j]->record_id;
            return a_first ? std::tie(ida, idb) : std::tie(idb, ida);
        };
        std::sort(cands.begin(), cands.end(), [&](const Cand& x, const Cand& y) {
            if (x.sim != y.sim) return x.sim > y.sim;
            return pair_key(x) < pair_key(y);
        });
        std::vector<char> used_a(rem_a.size(), 0), used_b(rem_b.size(), 0);
        for (const auto& c : cands) {
            if (used_a[c.i] || used_b[c.j]) continue;
            bool same_author = !rem_a[c.i]->first_author_key.empty() &&
                               rem_a[c.i]->first_author_key ==
                                   rem_b[c.j]->first_author_key;
            if (!accept_match(c.sim, cps_a[c.i].size(), cps_b[c.j].size(),
                              same_author, policy))
                continue;  // pair becomes ineligible, records stay available
            edges.push_back(
                make_edge(rem_a[c.i], rem_b[c.j], MatchMethod::FUZZY, c.sim));
            used_a[c.i] = used_b[c.j] = 1;
        }
    }

    std::sort(edges.begin(), edges.end(), [](const MatchEdge& x, const MatchEdge& y) {
        return std::tie(x.record_a, x.record_b) < std::tie(y.record_a, y.record_b);
    });
    return edges;
}

struct CitationCluster {
    std::string cluster_id;
    std::string cited_doc_id;
    std::vector<std::string> members;  // sorted record ids
    std::set<SourceDatabase> presence;
    bool flagged = false;  // two members from the same source
};

// Connected components under union-find over the match edges; singletons
// become single-source clusters. Components with two same-source members
// are kept and flagged.
inline std::vector<CitationCluster> build_clusters(
    const std::vector<MatchEdge>& edges,
    const std::vector<const CitingRecord*>& records) {
    std::map<std::string, size_t> index;
    for (size_t i = 0; i < records.size(); ++i)
        index[records[i]->record_id] = i;

    std::vector<size_t> parent(records.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<size_t(size_t)> find = [&](size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (const auto& e : edges) {
        auto ia = index.find(e.record_a);
        auto ib = index.find(e.record_b);
        if (ia == index.end() || ib == index.end())
            throw ValidationError("build_clusters: edge references unknown record " +
                                  (ia == index.end() ? e.record_a : e.record_b));
        parent[find(ia->second)] = find(ib->second);
    }

    std::map<size_t, std::vector<size_t>> comps;
    for (size_t i = 0; i < records.size(); ++i) comps[find(i)].push_back(i);

    std::vector<CitationCluster> clusters;
    for (auto& [root, members] : comps) {
        CitationCluster c;
        c.cited_doc_id = records[members.front()]->cited_doc_id;
        std::map<SourceDatabase, int> per_source;
        for (size_t i : members) {
            c.members.push_back(records[i]->record_id);
            c.presence.insert(records[i]->source);
            per_source[records[i]->source]++;
        }
        std::sort(c.members.begin(), c.members.end());
        for (auto& [src, n] : per_source)
            if (n > 1) c.flagged = true;
        clusters.push_back(std::move(c));
    }
    std::sort(clusters.begin(), clusters.end(),
              [](const CitationCluster& x, const CitationCluster& y) {
                  return x.members.front() < y.members.front();
              });
    for (size_t i = 0; i < clusters.size(); ++i)
        clusters[i].cluster_id =
            clusters[i].cited_doc_id + "#" + std::to_string(i);
    return clusters;
}

// ---- file formats ----

inline std::string format_similarity(double sim) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", sim);
    return buf;
}

inline void write_edges_csv(const std::vector<MatchEdge>& edges,
                            std::ostream& out) {
    out << "cited_doc_id,record_a,record_b,method,similarity\n";
    for (const auto& e : edges)
        out << csv::join_row({e.cited_doc_id, e.record_a, e.record_b,
                              to_string(e.method), format_similarity(e.similarity)});
}

inline std::vector<MatchEdge> read_edges_csv(const std::string& path) {
    auto rows = csv::parse_file(path);
    std::vector<MatchEdge> edges;
    for (size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() < 5) throw ValidationError(path + ": short edge row");
        MatchEdge e;
        e.cited_doc_id = r[0];
        e.record_a = r[1];
        e.record_b = r[2];
        e.method = r[3] == "DOI" ? MatchMethod::DOI : MatchMethod::FUZZY;
        e.similarity = std::stod(r[4]);
        edges.push_back(std::move(e));
    }
    return edges;
}

inline nlohmann::ordered_json cluster_to_json(const CitationCluster& c) {
    nlohmann::ordered_json j;
    j["cluster_id"] = c.cluster_id;
    j["cited_doc_id"] = c.cited_doc_id;
    j["members"] = c.members;
    std::vector<std::string> pres;
    for (auto s : c.presence) pres.push_back(to_string(s));
    j["presence"] = pres;
    j["flagged"] = c.flagged;
    return j;
}

inline CitationCluster cluster_from_json(const nlohmann::json& j) {
    CitationCluster c;
    c.cluster_id = j.at("cluster_id").get<std::string>();
    c.cited_doc_id = j.at("cited_doc_id").get<std::string>();
    c.members = j.at("members").get<std::vector<std::string>>();
    for (const auto& s : j.at("presence"))
        c.presence.insert(source_from_string(s.get<std::string>()));
    c.flagged = j.value("flagged", false);
    return c;
}

}  // namespace citelink
