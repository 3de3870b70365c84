#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "citelink/analytics.hpp"

using namespace citelink;

namespace {

CitationCluster cluster_with(std::set<SourceDatabase> presence,
                             std::vector<std::string> members = {},
                             std::string cited = "X") {
    CitationCluster c;
    c.cited_doc_id = std::move(cited);
    c.presence = std::move(presence);
    c.members = std::move(members);
    return c;
}

}  // namespace

TEST_CASE("partition_regions tallies presences") {
    std::vector<CitationCluster> clusters;
    clusters.push_back(cluster_with({SourceDatabase::GS}));
    clusters.push_back(cluster_with(
        {SourceDatabase::GS, SourceDatabase::WOS, SourceDatabase::SCOPUS}));
    RegionCounts rc = partition_regions(clusters);
    CHECK(rc[Region::G] == 1);
    CHECK(rc[Region::GWS] == 1);
    CHECK(rc.total() == 2);

    CHECK(partition_regions({}).total() == 0);
}

TEST_CASE("coverage_metrics worked example") {
    RegionCounts rc;
    rc[Region::G] = 3;
    rc[Region::W] = 1;
    rc[Region::S] = 1;
    rc[Region::GW] = 1;
    rc[Region::GSc] = 1;
    rc[Region::WS] = 1;
    rc[Region::GWS] = 2;
    CoverageSummary s = coverage_metrics(rc);
    CHECK(s.pct_gs_all == Catch::Approx(70.0));
    CHECK(s.pct_wos_all == Catch::Approx(50.0));
    CHECK(s.pct_scopus_all == Catch::Approx(50.0));
    REQUIRE(s.pct_wos_in_gs.has_value());
    CHECK(*s.pct_wos_in_gs == Catch::Approx(60.0));
}

TEST_CASE("coverage_metrics boundary cases") {
    RegionCounts all_gws;
    all_gws[Region::GWS] = 7;
    CoverageSummary s = coverage_metrics(all_gws);
    CHECK(s.pct_gs_all == Catch::Approx(100.0));
    CHECK(*s.pct_wos_in_gs == Catch::Approx(100.0));
    CHECK(*s.pct_wos_in_scopus == Catch::Approx(100.0));

    RegionCounts no_wos;
    no_wos[Region::G] = 4;
    CoverageSummary s2 = coverage_metrics(no_wos);
    CHECK_FALSE(s2.pct_wos_in_gs.has_value());

    RegionCounts zero;
    CHECK_THROWS_AS(coverage_metrics(zero), ValidationError);
}

TEST_CASE("coverage_metrics is scale invariant") {
    RegionCounts rc;
    rc[Region::G] = 3;
    rc[Region::GW] = 2;
    rc[Region::WS] = 5;
    rc[Region::GWS] = 1;
    CoverageSummary s1 = coverage_metrics(rc);
    RegionCounts scaled;
    for (size_t i = 0; i < rc.counts.size(); ++i)
        scaled.counts[i] = rc.counts[i] * 13;
    CoverageSummary s2 = coverage_metrics(scaled);
    CHECK(s1.pct_gs_all == Catch::Approx(s2.pct_gs_all));
    CHECK(s1.pct_wos_all == Catch::Approx(s2.pct_wos_all));
    CHECK(*s1.pct_wos_in_gs == Catch::Approx(*s2.pct_wos_in_gs));
}

TEST_CASE("spearman worked examples") {
    CHECK(*spearman({1, 2, 3}, {10, 20, 30}) == Catch::Approx(1.0));
    CHECK(*spearman({1, 2, 3}, {3, 2, 1}) == Catch::Approx(-1.0));
    // ties via average ranks: xs ranks (1.5, 1.5, 3), ys ranks (1, 2, 3)
    double r = *spearman({1, 1, 2}, {1, 2, 3});
    CHECK(r == Catch::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));
    CHECK_FALSE(spearman({5, 5, 5}, {1, 2, 3}).has_value());
    CHECK_THROWS_AS(spearman({1.0}, {2.0}), ValidationError);
    CHECK_THROWS_AS(spearman({1, 2}, {1, 2, 3}), ValidationError);
}

TEST_CASE("mean_ratio with smoothing") {
    CHECK(mean_ratio({{9, 4}}) == Catch::Approx(2.0));
    CHECK(mean_ratio({{0, 0}}) == Catch::Approx(1.0));
    CHECK(mean_ratio({{9, 4}, {0, 0}}) == Catch::Approx(1.5));
    CHECK_THROWS_AS(mean_ratio({}), ValidationError);
    CHECK_THROWS_AS(mean_ratio({{-1, 2}}), ValidationError);
}

TEST_CASE("log_summary matches direct formula evaluation") {
    CountSummary zeros = log_summary({0, 0, 0});
    CHECK(zeros.median_log == 0.0);
    CHECK(zeros.mean_log == 0.0);
    CHECK(zeros.ci_half_width == 0.0);

    // [0,1,2,3,10]: logs = ln1, ln2, ln3, ln4, ln11
    std::vector<double> logs = {std::log(1.0), std::log(2.0), std::log(3.0),
                                std::log(4.0), std::log(11.0)};
    double mean = 0;
    for (double v : logs) mean += v;
    mean /= 5.0;
    double ss = 0;
    for (double v : logs) ss += (v - mean) * (v - mean);
    double ci = 1.96 * std::sqrt(ss / 4.0) / std::sqrt(5.0);
    CountSummary s = log_summary({0, 1, 2, 3, 10});
    CHECK(s.n == 5);
    CHECK(s.median_log == Catch::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(s.mean_log == Catch::Approx(mean).epsilon(1e-12));
    CHECK(s.ci_half_width == Catch::Approx(ci).epsilon(1e-12));

    CountSummary one = log_summary({5});
    CHECK(one.ci_half_width == 0.0);
    CHECK(one.mean_log == Catch::Approx(std::log(6.0)));

    CHECK_THROWS_AS(log_summary({}), ValidationError);
    CHECK_THROWS_AS(log_summary({-1}), ValidationError);
}

TEST_CASE("log_summary mean never increases when adding a zero") {
    std::vector<int64_t> counts = {3, 7, 1, 0, 12};
    double before = log_summary(counts).mean_log;
    counts.push_back(0);
    CHECK(log_summary(counts).mean_log <= before);
}

namespace {

CitingRecord rec(const std::string& id, SourceDatabase src, DocumentType t,
                 std::optional<std::string> lang = std::nullopt,
                 std::optional<int64_t> cites = std::nullopt,
                 std::optional<std::string> venue = std::nullopt) {
    CitingRecord r;
    r.record_id = id;
    r.source = src;
    r.cited_doc_id = "X";
    r.doc_type = t;
    r.language = std::move(lang);
    r.citation_count = cites;
    r.venue = std::move(venue);
    return r;
}

}  // namespace

TEST_CASE("distribution_tables buckets unique-GS vs overlapping") {
    std::vector<CitingRecord> records = {
        rec("g1", SourceDatabase::GS, DocumentType::THESIS, "en"),
        rec("g2", SourceDatabase::GS, DocumentType::JOURNAL, "en"),
        rec("w2", SourceDatabase::WOS, DocumentType::JOURNAL, "en")};
    std::map<std::string, const CitingRecord*> by_id;
    for (const auto& r : records) by_id[r.record_id] = &r;

    std::vector<CitationCluster> clusters;
    clusters.push_back(cluster_with({SourceDatabase::GS}, {"g1"}));
    clusters.push_back(
        cluster_with({SourceDatabase::GS, SourceDatabase::WOS}, {"g2", "w2"}));

    auto tables = distribution_tables(clusters, by_id, {}, {}, {});
    REQUIRE(tables.groups.size() == 2);
    for (const auto& g : tables.groups) {
        double sum = 0;
        for (const auto& [t, v] : g.types.shares) sum += v;
        CHECK(sum == Catch::Approx(1.0).margin(1e-9));
        if (g.bucket == ClusterBucket::UniqueGS)
            CHECK(g.types.share(DocumentType::THESIS) == Catch::Approx(1.0));
        else
            CHECK(g.types.share(DocumentType::JOURNAL) == Catch::Approx(1.0));
    }
}

TEST_CASE("distribution_tables profiles citations missed by GS") {
    std::vector<CitingRecord> records = {
        rec("w1", SourceDatabase::WOS, DocumentType::JOURNAL, "en", 3,
        "Scientometrics")};
    std::map<std::string, const CitingRecord*> by_id;
    for (const auto& r : records) by_id[r.record_id] = &r;
    std::vector<CitationCluster> clusters;
    clusters.push_back(cluster_with({SourceDatabase::WOS}, {"w1"}));

    CategoryMap cats;
    cats["scientometrics"] = {"Information Science", "Social Sciences", "Q1"};
    auto tables = distribution_tables(clusters, by_id, cats, {}, {});
    REQUIRE(tables.missed.size() == 1);
    CHECK(tables.missed[0].source == SourceDatabase::WOS);
    CHECK(tables.missed[0].quartile_shares.at("Q1") == Catch::Approx(1.0));

    // venue not in the map -> "unmapped" bucket, reported
    auto tables2 = distribution_tables(clusters, by_id, {}, {}, {});
    CHECK(tables2.missed[0].quartile_shares.at("unmapped") == Catch::Approx(1.0));
    CHECK_FALSE(tables2.notes.empty());
}

TEST_CASE("distribution_tables applies a correction sample") {
    std::vector<CitingRecord> records = {
        rec("g1", SourceDatabase::GS, DocumentType::JOURNAL),
        rec("g2", SourceDatabase::GS, DocumentType::UNKNOWN),
        rec("g3", SourceDatabase::GS, DocumentType::JOURNAL),
        rec("g4", SourceDatabase::GS, DocumentType::JOURNAL),
        rec("g5", SourceDatabase::GS, DocumentType::UNKNOWN)};
    std::map<std::string, const CitingRecord*> by_id;
    for (const auto& r : records) by_id[r.record_id] = &r;
    std::vector<CitationCluster> clusters;
    for (const auto& r : records)
        clusters.push_back(cluster_with({SourceDatabase::GS}, {r.record_id}));

    CorrectionSample sample;
    sample.group = "all";
    sample.labels = {{"g2", DocumentType::THESIS}, {"g5", DocumentType::JOURNAL}};
    std::map<std::string, CorrectionSample> corrections = {{"all", sample}};

    auto tables = distribution_tables(clusters, by_id, {}, {}, corrections);
    REQUIRE(tables.groups.size() == 1);
    const auto& g = tables.groups[0];
    CHECK(g.corrected);
    // known JOURNAL 0.6, unknown 0.4, sample JOURNAL 0.5 -> 0.6 + 0.2 = 0.8
    CHECK(g.types.share(DocumentType::JOURNAL) == Catch::Approx(0.8));
    CHECK(g.types.share(DocumentType::THESIS) == Catch::Approx(0.2));
    CHECK(g.types.share(DocumentType::UNKNOWN) == 0.0);
}

TEST_CASE("correlation_table groups by venue category") {
    std::vector<CitingRecord> records;
    std::vector<CitationCluster> clusters;
    for (int i = 0; i < 3; ++i) {
        auto g = rec("g" + std::to_string(i), SourceDatabase::GS,
                     DocumentType::JOURNAL, std::nullopt, i + 1);
        auto w = rec("w" + std::to_string(i), SourceDatabase::WOS,
                     DocumentType::JOURNAL, std::nullopt, i + 1, "Scientometrics");
        records.push_back(g);
        records.push_back(w);
        clusters.push_back(cluster_with({SourceDatabase::GS, SourceDatabase::WOS},
                                        {g.record_id, w.record_id}));
    }
    std::map<std::string, const CitingRecord*> by_id;
    for (const auto& r : records) by_id[r.record_id] = &r;
    CategoryMap cats;
    cats["scientometrics"] = {"Information Science", "Social Sciences", "Q1"};

    auto rows = correlation_table(clusters, by_id, cats, SourceDatabase::WOS);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].category == "Information Science");
    CHECK(rows[0].n == 3);
    REQUIRE(rows[0].spearman_r.has_value());
    CHECK(*rows[0].spearman_r == Catch::Approx(1.0));
    CHECK(rows[0].mean_ratio == Catch::Approx(1.0));
}

TEST_CASE("correlation_table emits n<2 rows without r") {
    auto g = rec("g1", SourceDatabase::GS, DocumentType::JOURNAL, std::nullopt, 9);
    auto w = rec("w1", SourceDatabase::WOS, DocumentType::JOURNAL, std::nullopt, 4);
    std::map<std::string, const CitingRecord*> by_id = {{"g1", &g}, {"w1", &w}};
    std::vector<CitationCluster> clusters = {cluster_with(
        {SourceDatabase::GS, SourceDatabase::WOS}, {"g1", "w1"})};
    auto rows = correlation_table(clusters, by_id, {}, SourceDatabase::WOS);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].n == 1);
    CHECK_FALSE(rows[0].spearman_r.has_value());
    CHECK(rows[0].mean_ratio == Catch::Approx(2.0));

    CHECK_THROWS_AS(correlation_table(clusters, by_id, {}, SourceDatabase::GS),
                    ValidationError);
}
