#pragma once

// End-to-end orchestration: configuration, the ingest/enrich/match/report
// stages, correction sampling, and the synthetic-corpus generator used by
// the verification harness.

#include <array>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "citelink/analytics.hpp"
#include "citelink/csv.hpp"
#include "citelink/digest.hpp"
#include "citelink/enrich.hpp"
#include "citelink/ingest.hpp"
#include "citelink/linkage.hpp"
#include "citelink/normalize.hpp"
#include "citelink/types.hpp"

namespace citelink {

inline constexpr const char* kToolVersion = "0.1.0";

struct PipelineConfig {
    // Per-source input: a single export file or a directory of them; the
    // cited document id is the filename stem.
    std::map<SourceDatabase, std::string> inputs;
    std::optional<std::string> category_map_path;
    std::optional<std::string> cited_doc_groups_path;  // CSV cited_doc_id,group
    std::map<std::string, std::string> correction_sheets;  // group -> labeled sheet
    std::optional<std::string> doc_type_table_path;
    std::optional<std::string> wos_language_table_path;
    std::optional<std::string> language_profiles_path;
    std::string out_dir;
    MatchPolicy policy;
    ResolverConfig resolver;
    int workers = 1;
    std::optional<uint64_t> seed;
    size_t top_k_languages = 11;

    void validate() const {
        if (out_dir.empty()) throw ValidationError("config: out_dir is required");
        for (const auto& [src, path] : inputs)
            if (std::filesystem::absolute(path) ==
                std::filesystem::absolute(out_dir))
                throw ValidationError("config: out_dir must differ from input " +
                                      path);
        policy.validate();
        if (workers < 1) throw ValidationError("config: workers must be >= 1");
    }
};

// Precedence: CLI flags (applied by the caller) > config file > defaults.
// CITELINK_RESOLVER_BASE and CITELINK_OFFLINE override the resolver block.
inline PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ValidationError("config " + path + ": " + e.what());
    }
    PipelineConfig cfg;
    if (j.contains("inputs")) {
        const auto& inputs = j["inputs"];
        if (inputs.contains("gs")) cfg.inputs[SourceDatabase::GS] = inputs["gs"];
        if (inputs.contains("wos")) cfg.inputs[SourceDatabase::WOS] = inputs["wos"];
        if (inputs.contains("scopus"))
            cfg.inputs[SourceDatabase::SCOPUS] = inputs["scopus"];
    }
    if (j.contains("category_map")) cfg.category_map_path = j["category_map"];
    if (j.contains("cited_doc_groups"))
        cfg.cited_doc_groups_path = j["cited_doc_groups"];
    if (j.contains("correction_sheets"))
        for (auto& [group, p] : j["correction_sheets"].items())
            cfg.correction_sheets[group] = p;
    if (j.contains("doc_type_table")) cfg.doc_type_table_path = j["doc_type_table"];
    if (j.contains("wos_language_table"))
        cfg.wos_language_table_path = j["wos_language_table"];
    if (j.contains("language_profiles"))
        cfg.language_profiles_path = j["language_profiles"];
    cfg.out_dir = j.value("out_dir", std::string{});
    if (j.contains("policy")) {
        const auto& p = j["policy"];
        cfg.policy.high_sim_threshold =
            p.value("high_sim_threshold", cfg.policy.high_sim_threshold);
        cfg.policy.low_sim_threshold =
            p.value("low_sim_threshold", cfg.policy.low_sim_threshold);
        cfg.policy.min_title_len = p.value("min_title_len", cfg.policy.min_title_len);
    }
    if (j.contains("resolver")) {
        const auto& r = j["resolver"];
        cfg.resolver.base_url = r.value("base_url", std::string{});
        cfg.resolver.cache_dir = r.value("cache_dir", std::string{});
        cfg.resolver.offline = r.value("offline", true);
        cfg.resolver.rate_limit_per_sec =
            r.value("rate_limit_per_sec", cfg.resolver.rate_limit_per_sec);
        cfg.resolver.max_retries = r.value("max_retries", cfg.resolver.max_retries);
        cfg.resolver.backoff_ms = r.value("backoff_ms", cfg.resolver.backoff_ms);
    }
    cfg.workers = j.value("workers", 1);
    if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
    cfg.top_k_languages = j.value("top_k_languages", cfg.top_k_languages);

    if (const char* base = std::getenv("CITELINK_RESOLVER_BASE"))
        cfg.resolver.base_url = base;
    if (const char* off = std::getenv("CITELINK_OFFLINE")) {
        std::string v = text::to_lower_ascii(off);
        cfg.resolver.offline = !(v == "0" || v == "false" || v == "no");
    }
    return cfg;
}

// Semantic configuration digest: execution knobs (workers) and the output
// location are excluded so reruns into different directories at different
// worker counts stay byte-identical.
inline std::string config_digest(const PipelineConfig& cfg) {
    nlohmann::ordered_json j;
    for (const auto& [src, path] : cfg.inputs) j["inputs"][to_string(src)] = path;
    if (cfg.category_map_path) j["category_map"] = *cfg.category_map_path;
    if (cfg.cited_doc_groups_path)
        j["cited_doc_groups"] = *cfg.cited_doc_groups_path;
    for (const auto& [g, p] : cfg.correction_sheets) j["correction_sheets"][g] = p;
    if (cfg.doc_type_table_path) j["doc_type_table"] = *cfg.doc_type_table_path;
    if (cfg.wos_language_table_path)
        j["wos_language_table"] = *cfg.wos_language_table_path;
    if (cfg.language_profiles_path)
        j["language_profiles"] = *cfg.language_profiles_path;
    j["policy"] = {{"high_sim_threshold", cfg.policy.high_sim_threshold},
                   {"low_sim_threshold", cfg.policy.low_sim_threshold},
                   {"min_title_len", cfg.policy.min_title_len}};
    j["resolver"] = {{"base_url", cfg.resolver.base_url},
                     {"offline", cfg.resolver.offline}};
    if (cfg.seed) j["seed"] = *cfg.seed;
    j["top_k_languages"] = cfg.top_k_languages;
    return sha256_hex(j.dump());
}

namespace detail {

inline std::string canonical_path(const PipelineConfig& cfg, SourceDatabase src) {
    return cfg.out_dir + "/records_" +
           text::to_lower_ascii(to_string(src)) + ".jsonl";
}

inline DocTypeTable load_doc_type_table(const PipelineConfig& cfg) {
    DocTypeTable table;
    if (cfg.doc_type_table_path) {
        for (const auto& row : csv::parse_file(*cfg.doc_type_table_path)) {
            if (row.size() < 2) continue;
            std::string raw = text::trim(row[0]);
            if (raw.empty() || text::to_lower_ascii(raw) == "raw_type") continue;
            auto t = doc_type_from_string(text::trim(row[1]));
            if (!t)
                throw ValidationError(*cfg.doc_type_table_path +
                                      ": unknown canonical type " + row[1]);
            table.add(raw, *t);
        }
    }
    return table;
}

inline LanguageTables load_language_tables(const PipelineConfig& cfg) {
    LanguageTables tables;
    if (cfg.wos_language_table_path)
        tables.wos_names.load_csv(*cfg.wos_language_table_path);
    if (cfg.language_profiles_path)
        tables.profiles.load_csv(*cfg.language_profiles_path);
    return tables;
}

inline CitedDocGroups load_cited_doc_groups(const PipelineConfig& cfg) {
    CitedDocGroups groups;
    if (!cfg.cited_doc_groups_path) return groups;
    for (const auto& row : csv::parse_file(*cfg.cited_doc_groups_path)) {
        if (row.size() < 2) continue;
        if (text::to_lower_ascii(row[0]) == "cited_doc_id") continue;
        groups[text::trim(row[0])] = text::trim(row[1]);
    }
    return groups;
}

inline std::string fmt4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

inline std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline void write_text_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << data;
}

}  // namespace detail

// ---- ingest ----

struct IngestResult {
    std::map<SourceDatabase, size_t> counts;
    size_t rejects = 0;
};

inline IngestResult cmd_ingest(const PipelineConfig& cfg, std::ostream& log = std::cout) {
    cfg.validate();
    if (cfg.inputs.empty())
        throw ValidationError("ingest: no inputs configured");
    std::filesystem::create_directories(cfg.out_dir);
    DocTypeTable types = detail::load_doc_type_table(cfg);
    IngestReport report;
    IngestResult result;
    for (const auto& [src, path] : cfg.inputs) {
        auto records = ingest_source(src, path, report, types);
        write_canonical(records, detail::canonical_path(cfg, src));
        result.counts[src] = records.size();
        log << "ingest " << to_string(src) << ": " << records.size()
            << " records\n";
    }
    write_rejects_csv(report.rejects, cfg.out_dir + "/rejects.csv");
    result.rejects = report.rejects.size();
    log << "rejects: " << report.rejects.size() << "\n";
    for (const auto& w : report.warnings) log << "warning: " << w << "\n";
    return result;
}

// ---- enrich ----

inline void cmd_enrich(const PipelineConfig& cfg, std::ostream& log = std::cout) {
    cfg.validate();
    DocTypeTable types = detail::load_doc_type_table(cfg);
    LanguageTables lang_tables = detail::load_language_tables(cfg);
    std::optional<ResolverClient> resolver;
    if (!cfg.resolver.base_url.empty() || !cfg.resolver.cache_dir.empty())
        resolver.emplace(cfg.resolver);
    std::vector<std::string> conflicts;
    for (const auto& [src, path] : cfg.inputs) {
        std::string canonical = detail::canonical_path(cfg, src);
        if (!std::filesystem::exists(canonical)) continue;
        auto records = read_canonical(canonical);
        enrich_records(records, resolver ? &*resolver : nullptr, lang_tables,
                       types, conflicts);
        write_canonical(records, canonical);
        log << "enrich " << to_string(src) << ": " << records.size()
            << " records\n";
    }
    std::sort(conflicts.begin(), conflicts.end());
    std::string body;
    for (const auto& c : conflicts) body += c + "\n";
    detail::write_text_file(cfg.out_dir + "/enrich_log.txt", body);
}

// ---- match ----

struct MatchResult {
    size_t doi_edges = 0;
    size_t fuzzy_edges = 0;
    size_t clusters = 0;
};

// Blocks (one per cited document) run on a worker pool; per-block results
// are written back in block order so output is scheduling-independent.
inline MatchResult cmd_match(const PipelineConfig& cfg, std::ostream& log = std::cout) {
    cfg.validate();
    std::vector<CitingRecord> all;
    for (const auto& [src, path] : cfg.inputs) {
        std::string canonical = detail::canonical_path(cfg, src);
        if (!std::filesystem::exists(canonical))
            throw IoError("canonical record file missing: " + canonical +
                          " (run ingest first)");
        auto records = read_canonical(canonical);
        all.insert(all.end(), std::make_move_iterator(records.begin()),
                   std::make_move_iterator(records.end()));
    }

    std::map<std::string, std::map<SourceDatabase, std::vector<const CitingRecord*>>>
        blocks;
    for (const auto& r : all) blocks[r.cited_doc_id][r.source].push_back(&r);

    std::vector<const std::map<std::string,
        std::map<SourceDatabase, std::vector<const CitingRecord*>>>::value_type*>
        block_list;
    for (const auto& kv : blocks) block_list.push_back(&kv);

    struct BlockOut {
        std::vector<MatchEdge> edges;
        std::vector<CitationCluster> clusters;
    };
    std::vector<BlockOut> outs(block_list.size());
    std::atomic<size_t> next{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= block_list.size() || failed.load()) break;
            try {
                const auto& per_source = block_list[i]->second;
                auto get = [&](SourceDatabase s) {
                    auto it = per_source.find(s);
                    return it == per_source.end()
                               ? std::vector<const CitingRecord*>{}
                               : it->second;
                };
                auto gs = get(SourceDatabase::GS);
                auto wos = get(SourceDatabase::WOS);
                auto scopus = get(SourceDatabase::SCOPUS);
                std::vector<MatchEdge> edges;
                const std::array<std::pair<const std::vector<const CitingRecord*>*,
                                           const std::vector<const CitingRecord*>*>,
                                 3>
                    source_pairs{{{&gs, &wos}, {&gs, &scopus}, {&wos, &scopus}}};
                for (const auto& pair : source_pairs) {
                    auto e = match_block(*pair.first, *pair.second, cfg.policy);
                    edges.insert(edges.end(), e.begin(), e.end());
                }
                std::sort(edges.begin(), edges.end(),
                          [](const MatchEdge& x, const MatchEdge& y) {
                              return std::tie(x.record_a, x.record_b) <
                                     std::tie(y.record_a, y.record_b);
                          });
                std::vector<const CitingRecord*> block_records;
                for (const auto* r : gs) block_records.push_back(r);
                for (const auto* r : wos) block_records.push_back(r);
                for (const auto* r : scopus) block_records.push_back(r);
                outs[i].clusters = build_clusters(edges, block_records);
                outs[i].edges = std::move(edges);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lk(failure_mutex);
                failure = std::string("block ") + block_list[i]->first + ": " +
                          e.what();
                failed = true;
            }
        }
    };
    size_t n_threads = std::min<size_t>(cfg.workers, std::max<size_t>(block_list.size(), 1));
    std::vector<std::thread> threads;
    for (size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (failed) throw ValidationError("match: " + failure);

    MatchResult result;
    std::ofstream edges_out(cfg.out_dir + "/edges.csv", std::ios::binary);
    if (!edges_out) throw IoError("cannot write edges.csv");
    edges_out << "cited_doc_id,record_a,record_b,method,similarity\n";
    std::ofstream clusters_out(cfg.out_dir + "/clusters.jsonl", std::ios::binary);
    if (!clusters_out) throw IoError("cannot write clusters.jsonl");
    for (auto& out : outs) {
        for (const auto& e : out.edges) {
            edges_out << csv::join_row({e.cited_doc_id, e.record_a, e.record_b,
                                        to_string(e.method),
                                        format_similarity(e.similarity)});
            (e.method == MatchMethod::DOI ? result.doi_edges : result.fuzzy_edges)++;
        }
        for (const auto& c : out.clusters)
            clusters_out << cluster_to_json(c).dump() << "\n";
        result.clusters += out.clusters.size();
    }
    log << "edges: " << result.doi_edges << " DOI, " << result.fuzzy_edges
        << " FUZZY; clusters: " << result.clusters << "\n";
    return result;
}

// ---- report ----

namespace detail {

inline std::vector<CitationCluster> read_clusters(const std::string& path) {
    std::string data = read_file_bytes(path);
    std::vector<CitationCluster> clusters;
    for (auto& line : split_lines(data)) {
        if (line.empty()) continue;
        clusters.push_back(cluster_from_json(nlohmann::json::parse(line)));
    }
    return clusters;
}

}  // namespace detail

inline void cmd_report(const PipelineConfig& cfg, std::ostream& log = std::cout) {
    cfg.validate();
    std::string clusters_path = cfg.out_dir + "/clusters.jsonl";
    if (!std::filesystem::exists(clusters_path))
        throw IoError("clusters.jsonl missing (run match first)");
    auto clusters = detail::read_clusters(clusters_path);

    std::vector<CitingRecord> all;
    for (const auto& [src, path] : cfg.inputs) {
        std::string canonical = detail::canonical_path(cfg, src);
        if (std::filesystem::exists(canonical)) {
            auto records = read_canonical(canonical);
            all.insert(all.end(), std::make_move_iterator(records.begin()),
                       std::make_move_iterator(records.end()));
        }
    }
    std::map<std::string, const CitingRecord*> by_id;
    for (const auto& r : all) by_id[r.record_id] = &r;

    CitedDocGroups cited_groups = detail::load_cited_doc_groups(cfg);
    std::vector<std::string> skipped;

    CategoryMap category_map;
    bool have_category_map = false;
    if (cfg.category_map_path) {
        IngestReport cat_report;
        category_map = load_category_map(*cfg.category_map_path, cat_report);
        have_category_map = true;
    } else {
        skipped.push_back("correlation and quartile tables: no category map");
    }

    std::map<std::string, CorrectionSample> corrections;
    for (const auto& [group, sheet] : cfg.correction_sheets)
        corrections[group] = load_labeled_sheet(sheet, group);

    std::string report_dir = cfg.out_dir + "/report";
    std::filesystem::create_directories(report_dir);

    auto group_of = [&](const CitationCluster& c) {
        auto it = cited_groups.find(c.cited_doc_id);
        return it == cited_groups.end() ? std::string("all") : it->second;
    };

    // Region counts and coverage, overall and per group.
    std::map<std::string, std::vector<CitationCluster>> per_group;
    for (const auto& c : clusters) per_group[group_of(c)].push_back(c);

    nlohmann::ordered_json summary;
    {
        std::string regions_csv = "group,G,W,S,GW,GSc,WS,GWS,total\n";
        std::string coverage_csv =
            "group,pct_gs_all,pct_wos_all,pct_scopus_all,pct_wos_in_gs,"
            "pct_scopus_in_gs,pct_wos_in_scopus\n";
        auto emit = [&](const std::string& group,
                        const std::vector<CitationCluster>& cs) {
            RegionCounts rc = partition_regions(cs);
            std::vector<std::string> row = {group};
            nlohmann::ordered_json jr;
            for (size_t i = 0; i < kRegionNames.size(); ++i) {
                row.push_back(std::to_string(rc.counts[i]));
                jr[kRegionNames[i]] = rc.counts[i];
            }
            row.push_back(std::to_string(rc.total()));
            jr["total"] = rc.total();
            regions_csv += csv::join_row(row);
            summary["regions"][group] = jr;
            if (rc.total() > 0) {
                CoverageSummary cov = coverage_metrics(rc);
                auto opt = [&](const std::optional<double>& v) {
                    return v ? detail::fmt4(*v) : std::string{};
                };
                coverage_csv += csv::join_row(
                    {group, detail::fmt4(cov.pct_gs_all), detail::fmt4(cov.pct_wos_all),
                     detail::fmt4(cov.pct_scopus_all), opt(cov.pct_wos_in_gs),
                     opt(cov.pct_scopus_in_gs), opt(cov.pct_wos_in_scopus)});
                nlohmann::ordered_json jc;
                jc["pct_gs_all"] = cov.pct_gs_all;
                jc["pct_wos_all"] = cov.pct_wos_all;
                jc["pct_scopus_all"] = cov.pct_scopus_all;
                if (cov.pct_wos_in_gs) jc["pct_wos_in_gs"] = *cov.pct_wos_in_gs;
                if (cov.pct_scopus_in_gs)
                    jc["pct_scopus_in_gs"] = *cov.pct_scopus_in_gs;
                if (cov.pct_wos_in_scopus)
                    jc["pct_wos_in_scopus"] = *cov.pct_wos_in_scopus;
                summary["coverage"][group] = jc;
            }
        };
        emit("all", clusters);
        for (const auto& [group, cs] : per_group)
            if (group != "all") emit(group, cs);
        detail::write_text_file(report_dir + "/regions.csv", regions_csv);
        detail::write_text_file(report_dir + "/coverage.csv", coverage_csv);
    }

    // Type / language / quartile distributions.
    DistributionOptions opts;
    opts.top_k_languages = cfg.top_k_languages;
    DistributionTables tables = distribution_tables(clusters, by_id, category_map,
                                                    cited_groups, corrections, opts);
    {
        std::string types_csv = "group,bucket,n,corrected";
        for (int t = 0; t < kDocumentTypeCount; ++t)
            types_csv += std::string(",") + to_string(static_cast<DocumentType>(t));
        types_csv += "\n";
        for (const auto& g : tables.groups) {
            std::vector<std::string> row = {g.group, to_string(g.bucket),
                                            std::to_string(g.n_clusters),
                                            g.corrected ? "true" : "false"};
            nlohmann::ordered_json jt;
            for (int t = 0; t < kDocumentTypeCount; ++t) {
                double share = g.types.share(static_cast<DocumentType>(t));
                row.push_back(detail::fmt4(share));
                jt[to_string(static_cast<DocumentType>(t))] = share;
            }
            types_csv += csv::join_row(row);
            summary["type_distributions"][g.group][to_string(g.bucket)] = {
                {"n", g.n_clusters}, {"corrected", g.corrected}, {"shares", jt}};
        }
        detail::write_text_file(report_dir + "/type_distributions.csv", types_csv);

        std::string langs_csv = "group,bucket,language,share\n";
        for (const auto& g : tables.groups) {
            nlohmann::ordered_json jl;
            for (const auto& [lang, share] : g.language_shares) {
                langs_csv += csv::join_row(
                    {g.group, to_string(g.bucket), lang, detail::fmt4(share)});
                jl[lang] = share;
            }
            summary["language_distributions"][g.group][to_string(g.bucket)] = jl;
        }
        detail::write_text_file(report_dir + "/language_distributions.csv",
                                langs_csv);

        std::string missed_csv = "source,n";
        for (int t = 0; t < kDocumentTypeCount; ++t)
            missed_csv += std::string(",") + to_string(static_cast<DocumentType>(t));
        missed_csv += ",n_journal,Q1,Q2,Q3,Q4,unmapped\n";
        for (const auto& p : tables.missed) {
            if (!have_category_map && p.n_journal > 0) {
                // quartile columns only meaningful with a category map
            }
            std::vector<std::string> row = {to_string(p.source),
                                            std::to_string(p.n_clusters)};
            for (int t = 0; t < kDocumentTypeCount; ++t)
                row.push_back(detail::fmt4(p.types.share(static_cast<DocumentType>(t))));
            row.push_back(std::to_string(p.n_journal));
            for (const char* q : {"Q1", "Q2", "Q3", "Q4", "unmapped"}) {
                auto it = p.quartile_shares.find(q);
                row.push_back(it == p.quartile_shares.end() ? "0.0000"
                                                            : detail::fmt4(it->second));
            }
            missed_csv += csv::join_row(row);
        }
        detail::write_text_file(report_dir + "/missed_profiles.csv", missed_csv);
    }

    // Citation count summaries per group x bucket (GS counts).
    {
        std::string counts_csv = "group,bucket,n,median_log,mean_log,ci_half_width\n";
        std::map<std::pair<std::string, ClusterBucket>, std::vector<int64_t>> counts;
        for (const auto& c : clusters) {
            bool has_gs = c.presence.count(SourceDatabase::GS);
            if (!has_gs) continue;
            std::optional<ClusterBucket> bucket;
            if (c.presence.size() == 1)
                bucket = ClusterBucket::UniqueGS;
            else
                bucket = ClusterBucket::Overlapping;
            const CitingRecord* gs_rec = nullptr;
            for (const auto& id : c.members) {
                auto it = by_id.find(id);
                if (it != by_id.end() && it->second->source == SourceDatabase::GS) {
                    gs_rec = it->second;
                    break;
                }
            }
            if (gs_rec && gs_rec->citation_count)
                counts[{group_of(c), *bucket}].push_back(*gs_rec->citation_count);
        }
        for (const auto& [key, xs] : counts) {
            CountSummary s = log_summary(xs);
            counts_csv += csv::join_row(
                {key.first, to_string(key.second), std::to_string(s.n),
                 detail::fmt6(s.median_log), detail::fmt6(s.mean_log),
                 detail::fmt6(s.ci_half_width)});
            summary["count_summaries"][key.first][to_string(key.second)] = {
                {"n", s.n},
                {"median_log", s.median_log},
                {"mean_log", s.mean_log},
                {"ci_half_width", s.ci_half_width}};
        }
        detail::write_text_file(report_dir + "/count_summaries.csv", counts_csv);
    }

    // Correlation tables, only with a category map.
    if (have_category_map) {
        for (auto [other, name] :
             {std::pair{SourceDatabase::WOS, "correlations_gs_wos"},
              {SourceDatabase::SCOPUS, "correlations_gs_scopus"}}) {
            auto rows = correlation_table(clusters, by_id, category_map, other);
            std::string csv_body =
                "category,n,spearman_r,mean_ratio,mean_log_gs,mean_log_other\n";
            for (const auto& r : rows) {
                csv_body += csv::join_row(
                    {r.category, std::to_string(r.n),
                     r.spearman_r ? detail::fmt6(*r.spearman_r) : std::string{},
                     detail::fmt6(r.mean_ratio), detail::fmt6(r.mean_log_gs),
                     detail::fmt6(r.mean_log_other)});
                nlohmann::ordered_json jr;
                jr["n"] = r.n;
                if (r.spearman_r) jr["spearman_r"] = *r.spearman_r;
                jr["mean_ratio"] = r.mean_ratio;
                jr["mean_log_gs"] = r.mean_log_gs;
                jr["mean_log_other"] = r.mean_log_other;
                summary[name][r.category] = jr;
            }
            detail::write_text_file(report_dir + "/" + name + ".csv", csv_body);
        }
    }

    summary["notes"] = tables.notes;
    summary["mean_ratio_smoothing"] = "(1+gs)/(1+other)";
    detail::write_text_file(report_dir + "/summary.json", summary.dump(2) + "\n");

    // Run manifest.
    nlohmann::ordered_json manifest;
    manifest["tool_version"] = kToolVersion;
    manifest["config_digest"] = config_digest(cfg);
    nlohmann::ordered_json digests;
    std::vector<std::string> input_files;
    for (const auto& [src, path] : cfg.inputs) {
        if (std::filesystem::is_directory(path)) {
            for (const auto& e : std::filesystem::directory_iterator(path))
                if (e.is_regular_file()) input_files.push_back(e.path().string());
        } else if (std::filesystem::is_regular_file(path)) {
            input_files.push_back(path);
        }
    }
    for (const auto* p : {&cfg.category_map_path, &cfg.cited_doc_groups_path})
        if (*p && std::filesystem::is_regular_file(**p)) input_files.push_back(**p);
    for (const auto& [g, p] : cfg.correction_sheets)
        if (std::filesystem::is_regular_file(p)) input_files.push_back(p);
    std::sort(input_files.begin(), input_files.end());
    for (const auto& f : input_files) digests[f] = sha256_file_hex(f);
    manifest["input_digests"] = digests;
    manifest["skipped"] = skipped;
    detail::write_text_file(report_dir + "/manifest.json", manifest.dump(2) + "\n");

    log << "report written to " << report_dir << "\n";
    for (const auto& s : skipped) log << "skipped: " << s << "\n";
}

// ---- sample ----

inline void cmd_sample(const PipelineConfig& cfg, const std::string& group,
                       size_t n, std::ostream& log = std::cout) {
    cfg.validate();
    if (!cfg.seed)
        throw ValidationError("sample: config seed is required for sampling");
    std::vector<CitingRecord> all;
    for (const auto& [src, path] : cfg.inputs) {
        std::string canonical = detail::canonical_path(cfg, src);
        if (std::filesystem::exists(canonical)) {
            auto records = read_canonical(canonical);
            all.insert(all.end(), std::make_move_iterator(records.begin()),
                       std::make_move_iterator(records.end()));
        }
    }
    CitedDocGroups cited_groups = detail::load_cited_doc_groups(cfg);
    std::vector<const CitingRecord*> group_records;
    std::map<std::string, const CitingRecord*> by_id;
    for (const auto& r : all) {
        by_id[r.record_id] = &r;
        auto it = cited_groups.find(r.cited_doc_id);
        std::string g = it == cited_groups.end() ? "all" : it->second;
        if (g == group) group_records.push_back(&r);
    }
    CorrectionSample sample = draw_type_sample(group_records, group, n, *cfg.seed);
    std::string path = cfg.out_dir + "/sample_" + group + ".csv";
    write_labeling_sheet(sample, by_id, path);
    log << "sample sheet for group " << group << ": " << sample.sampled_ids.size()
        << " records -> " << path << "\n";
}

// ---- synth ----

struct SynthSpec {
    size_t cited_docs = 0;
    size_t records = 0;
    std::map<Region, double> region_proportions;
    int max_title_edits = 0;
    double doi_drop_prob = 0.0;
    uint64_t seed = 0;

    void validate() const {
        if (cited_docs == 0 || records == 0)
            throw ValidationError("synth: cited_docs and records must be positive");
        double sum = 0;
        for (auto& [r, p] : region_proportions) {
            if (p < 0) throw ValidationError("synth: negative proportion");
            sum += p;
        }
        if (std::fabs(sum - 1.0) > 1e-6)
            throw ValidationError("synth: region proportions must sum to 1");
        if (doi_drop_prob < 0 || doi_drop_prob > 1)
            throw ValidationError("synth: doi_drop_prob must be in [0,1]");
        if (max_title_edits < 0)
            throw ValidationError("synth: max_title_edits must be >= 0");
    }
};

inline SynthSpec load_synth_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open synth spec " + path);
    nlohmann::json j;
    in >> j;
    SynthSpec spec;
    spec.cited_docs = j.value("cited_docs", 0u);
    spec.records = j.value("records", 0u);
    if (j.contains("region_proportions"))
        for (auto& [name, p] : j["region_proportions"].items()) {
            bool found = false;
            for (size_t i = 0; i < kRegionNames.size(); ++i)
                if (name == kRegionNames[i]) {
                    spec.region_proportions[static_cast<Region>(i)] = p;
                    found = true;
                }
            if (!found) throw ValidationError("synth: unknown region " + name);
        }
    spec.max_title_edits = j.value("max_title_edits", 0);
    spec.doi_drop_prob = j.value("doi_drop_prob", 0.0);
    spec.seed = j.value("seed", 0u);
    return spec;
}

namespace detail {

inline std::set<SourceDatabase> region_sources(Region r) {
    switch (r) {
        case Region::G: return {SourceDatabase::GS};
        case Region::W: return {SourceDatabase::WOS};
        case Region::S: return {SourceDatabase::SCOPUS};
        case Region::GW: return {SourceDatabase::GS, SourceDatabase::WOS};
        case Region::GSc: return {SourceDatabase::GS, SourceDatabase::SCOPUS};
        case Region::WS: return {SourceDatabase::WOS, SourceDatabase::SCOPUS};
        case Region::GWS:
            return {SourceDatabase::GS, SourceDatabase::WOS, SourceDatabase::SCOPUS};
    }
    throw std::logic_error("bad region");
}

inline std::string random_word(std::mt19937_64& rng, size_t min_len, size_t max_len) {
    std::uniform_int_distribution<size_t> len(min_len, max_len);
    std::uniform_int_distribution<int> letter(0, 25);
    std::string w;
    size_t n = len(rng);
    for (size_t i = 0; i < n; ++i) w.push_back(static_cast<char>('a' + letter(rng)));
    return w;
}

inline std::string edit_title(const std::string& title, int max_edits,
                              std::mt19937_64& rng) {
    if (max_edits <= 0 || title.empty()) return title;
    std::string s = title;
    std::uniform_int_distribution<int> n_edits(0, max_edits);
    std::uniform_int_distribution<int> op(0, 3);
    std::uniform_int_distribution<int> letter(0, 25);
    int k = n_edits(rng);
    for (int e = 0; e < k && !s.empty(); ++e) {
        std::uniform_int_distribution<size_t> pos_dist(0, s.size() - 1);
        size_t pos = pos_dist(rng);
        char c = static_cast<char>('a' + letter(rng));
        switch (op(rng)) {
            case 0: s[pos] = c; break;
            case 1: s.insert(s.begin() + static_cast<long>(pos), c); break;
            case 2:
                if (s.size() > 1) s.erase(s.begin() + static_cast<long>(pos));
                break;
            case 3:
                if (pos + 1 < s.size()) std::swap(s[pos], s[pos + 1]);
                break;
        }
    }
    return s;
}

}  // namespace detail

// Generates three export trees with a recorded ground-truth cluster
// structure. Titles for planted duplicates are long and high-entropy so
// unrelated pairs stay far below the fuzzy thresholds.
inline void cmd_synth(const PipelineConfig& cfg, const SynthSpec& spec,
                      std::ostream& log = std::cout) {
    spec.validate();
    if (cfg.out_dir.empty()) throw ValidationError("synth: out_dir required");
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    std::string gs_dir = cfg.out_dir + "/gs";
    std::string wos_dir = cfg.out_dir + "/wos";
    std::string scopus_dir = cfg.out_dir + "/scopus";
    std::string truth_dir = cfg.out_dir + "/truth";
    for (const auto& d : {gs_dir, wos_dir, scopus_dir, truth_dir})
        fs::create_directories(d);

    // Expected records per cluster under the planted proportions.
    double mean_size = 0;
    for (const auto& [r, p] : spec.region_proportions)
        mean_size += p * static_cast<double>(detail::region_sources(r).size());
    size_t n_clusters = static_cast<size_t>(
        std::llround(static_cast<double>(spec.records) / mean_size));
    if (n_clusters == 0) n_clusters = 1;

    // Largest-remainder apportionment of clusters to regions.
    std::vector<std::pair<Region, double>> quota;
    for (const auto& [r, p] : spec.region_proportions)
        quota.emplace_back(r, p * static_cast<double>(n_clusters));
    std::map<Region, size_t> region_clusters;
    size_t assigned = 0;
    for (const auto& [r, q] : quota) {
        region_clusters[r] = static_cast<size_t>(std::floor(q));
        assigned += region_clusters[r];
    }
    std::sort(quota.begin(), quota.end(), [](const auto& a, const auto& b) {
        double fa = a.second - std::floor(a.second);
        double fb = b.second - std::floor(b.second);
        if (fa != fb) return fa > fb;
        return static_cast<int>(a.first) < static_cast<int>(b.first);
    });
    for (size_t i = 0; assigned < n_clusters; ++i, ++assigned)
        region_clusters[quota[i % quota.size()].first]++;

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> year_dist(2007, 2018);
    std::uniform_int_distribution<int> cites_dist(0, 120);
    static const char* kTypesWos[] = {"Article", "Review", "Proceedings Paper"};
    static const char* kTypesScopus[] = {"Article", "Conference Paper",
                                         "Book Chapter"};

    struct SynthRecord {
        SourceDatabase source;
        std::string record_id, title, author_display, author_key, venue, doi;
        int year;
        int64_t cites;
        const char* type_raw;
    };
    struct SynthCluster {
        Region region;
        std::vector<SynthRecord> records;
    };

    std::map<std::string, std::vector<SynthCluster>> by_cited_doc;
    RegionCounts truth_regions;
    std::vector<std::array<std::string, 3>> truth_pairs;  // cited, a, b
    size_t total_records = 0;

    size_t cluster_index = 0;
    for (const auto& [region, count] : region_clusters) {
        for (size_t c = 0; c < count; ++c, ++cluster_index) {
            std::string cited = "X" + std::to_string(cluster_index % spec.cited_docs);
            SynthCluster cl;
            cl.region = region;
            std::string base_title;
            while (base_title.size() < 40) {
                if (!base_title.empty()) base_title += " ";
                base_title += detail::random_word(rng, 4, 9);
            }
            std::string family = detail::random_word(rng, 5, 8);
            family[0] = static_cast<char>(family[0] - 'a' + 'A');
            std::string venue = "Journal of " + detail::random_word(rng, 5, 8);
            std::string doi = "10.5555/c" + std::to_string(cluster_index);
            int year = year_dist(rng);
            bool first = true;
            for (SourceDatabase src : detail::region_sources(region)) {
                SynthRecord rec;
                rec.source = src;
                rec.title = first ? base_title
                                  : detail::edit_title(base_title,
                                                       spec.max_title_edits, rng);
                first = false;
                rec.author_display = family;
                rec.author_key = family;
                rec.venue = venue;
                rec.doi = unit(rng) < spec.doi_drop_prob ? "" : doi;
                rec.year = year;
                rec.cites = cites_dist(rng);
                switch (src) {
                    case SourceDatabase::GS:
                        rec.record_id = "G" + std::to_string(cluster_index);
                        rec.type_raw = "";
                        break;
                    case SourceDatabase::WOS:
                        rec.record_id = "W" + std::to_string(cluster_index);
                        rec.type_raw = kTypesWos[cluster_index % 3];
                        break;
                    case SourceDatabase::SCOPUS:
                        rec.record_id = "S" + std::to_string(cluster_index);
                        rec.type_raw = kTypesScopus[cluster_index % 3];
                        break;
                }
                cl.records.push_back(std::move(rec));
                total_records++;
            }
            truth_regions[region]++;
            for (size_t i = 0; i < cl.records.size(); ++i)
                for (size_t j = i + 1; j < cl.records.size(); ++j)
                    truth_pairs.push_back(
                        {cited, cl.records[i].record_id, cl.records[j].record_id});
            by_cited_doc[cited].push_back(std::move(cl));
        }
    }

    // Emit one export file per cited document per source.
    for (size_t d = 0; d < spec.cited_docs; ++d) {
        std::string cited = "X" + std::to_string(d);
        auto it = by_cited_doc.find(cited);
        std::string gs_body, scopus_body, wos_body;
        wos_body = "UT\tTI\tAU\tPY\tDI\tDT\tLA\tTC\tSO\n";
        scopus_body = "Title,Authors,Year,DOI,Source title,Document Type,Cited by,EID\n";
        if (it != by_cited_doc.end()) {
            for (const auto& cl : it->second) {
                for (const auto& rec : cl.records) {
                    switch (rec.source) {
                        case SourceDatabase::GS: {
                            nlohmann::ordered_json j;
                            j["title"] = rec.title;
                            j["cluster_id"] = rec.record_id;
                            j["cites"] = rec.cites;
                            j["year"] = rec.year;
                            j["byline"] = "A " + rec.author_display + " - " +
                                          rec.venue + ", " +
                                          std::to_string(rec.year) +
                                          " - example.org";
                            if (!rec.doi.empty()) j["doi"] = rec.doi;
                            gs_body += j.dump() + "\n";
                            break;
                        }
                        case SourceDatabase::WOS:
                            wos_body += rec.record_id + "\t" + rec.title + "\t" +
                                        rec.author_display + ", A\t" +
                                        std::to_string(rec.year) + "\t" + rec.doi +
                                        "\t" + rec.type_raw + "\tEnglish\t" +
                                        std::to_string(rec.cites) + "\t" +
                                        rec.venue + "\n";
                            break;
                        case SourceDatabase::SCOPUS:
                            scopus_body += csv::join_row(
                                {rec.title, rec.author_display + " A.",
                                 std::to_string(rec.year), rec.doi, rec.venue,
                                 rec.type_raw, std::to_string(rec.cites),
                                 rec.record_id});
                            break;
                    }
                }
            }
        }
        detail::write_text_file(gs_dir + "/" + cited + ".jsonl", gs_body);
        detail::write_text_file(wos_dir + "/" + cited + ".txt", wos_body);
        detail::write_text_file(scopus_dir + "/" + cited + ".csv", scopus_body);
    }

    // Ground truth.
    std::sort(truth_pairs.begin(), truth_pairs.end());
    std::string pairs_csv = "cited_doc_id,record_a,record_b\n";
    for (const auto& p : truth_pairs)
        pairs_csv += csv::join_row({p[0], p[1], p[2]});
    detail::write_text_file(truth_dir + "/truth_edges.csv", pairs_csv);
    std::string regions_csv = "region,count\n";
    for (size_t i = 0; i < kRegionNames.size(); ++i)
        regions_csv += csv::join_row(
            {kRegionNames[i], std::to_string(truth_regions.counts[i])});
    detail::write_text_file(truth_dir + "/truth_regions.csv", regions_csv);

    log << "synth: " << n_clusters << " clusters, " << total_records
        << " records over " << spec.cited_docs << " cited documents\n";
}

// ---- pipeline ----

inline void cmd_pipeline(const PipelineConfig& cfg, std::ostream& log = std::cout) {
    cmd_ingest(cfg, log);
    cmd_enrich(cfg, log);
    cmd_match(cfg, log);
    cmd_report(cfg, log);
}

}  // namespace citelink
