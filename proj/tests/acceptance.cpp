// Acceptance harness: one PASS/FAIL line per criterion, exit 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "citelink/pipeline.hpp"

using namespace citelink;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    std::string name;
    std::function<void()> body;  // throws std::runtime_error on failure
};

void expect(bool cond, const std::string& detail) {
    if (!cond) throw std::runtime_error(detail);
}

fs::path work_dir() {
    fs::path dir = fs::temp_directory_path() / "citelink_acceptance";
    fs::create_directories(dir);
    return dir;
}

fs::path fresh(const std::string& name) {
    fs::path dir = work_dir() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// ---- criterion 1: correction worked example ----

void criterion_correction() {
    TypeDistribution known;
    known.shares[DocumentType::JOURNAL] = 0.335;
    known.shares[DocumentType::CONFERENCE] = 0.465;
    TypeDistribution sample;
    sample.shares[DocumentType::JOURNAL] = 0.276;
    sample.shares[DocumentType::THESIS] = 0.724;
    TypeDistribution out = apply_correction(known, 0.20, sample);
    double j = out.share(DocumentType::JOURNAL);
    expect(std::fabs(j - 0.390) <= 0.0005,
           "JOURNAL share " + std::to_string(j) + " not within 0.390 +/- 0.0005");
}

// ---- criterion 2: exhaustive edit-distance oracle ----

size_t naive_osa(const std::string& a, const std::string& b, size_t i, size_t j) {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    size_t best = naive_osa(a, b, i + 1, j) + 1;                    // delete
    best = std::min(best, naive_osa(a, b, i, j + 1) + 1);           // insert
    best = std::min(best,
                    naive_osa(a, b, i + 1, j + 1) + (a[i] != b[j]));  // sub
    if (i + 1 < a.size() && j + 1 < b.size() && a[i] == b[j + 1] &&
        a[i + 1] == b[j])
        best = std::min(best, naive_osa(a, b, i + 2, j + 2) + 1);   // transpose
    return best;
}

void criterion_osa_oracle() {
    std::vector<std::string> strings = {""};
    for (size_t len = 1; len <= 5; ++len) {
        size_t start = 0;
        std::vector<std::string> next;
        for (const auto& s : strings)
            if (s.size() == len - 1)
                for (char c : {'a', 'b', 'c'}) next.push_back(s + c);
        (void)start;
        strings.insert(strings.end(), next.begin(), next.end());
    }
    expect(strings.size() == 364, "expected 364 strings over {a,b,c} len<=5");
    size_t checked = 0;
    for (size_t i = 0; i < strings.size(); ++i) {
        for (size_t j = i; j < strings.size(); ++j) {
            size_t oracle = naive_osa(strings[i], strings[j], 0, 0);
            size_t got = osa_distance(strings[i], strings[j]);
            size_t got_sym = osa_distance(strings[j], strings[i]);
            if (got != oracle || got_sym != oracle)
                throw std::runtime_error("mismatch on (\"" + strings[i] +
                                         "\",\"" + strings[j] + "\"): dp " +
                                         std::to_string(got) + ", oracle " +
                                         std::to_string(oracle));
            ++checked;
        }
    }
    expect(checked == 364 * 365 / 2, "pair enumeration incomplete");
}

// ---- criterion 3: threshold boundary grid ----

void criterion_threshold_grid() {
    MatchPolicy policy;
    for (double sim : {0.699, 0.700, 0.799, 0.800}) {
        for (size_t len : {29u, 30u}) {
            for (bool author : {false, true}) {
                bool expected = (sim >= 0.8 && len >= 30) || (sim >= 0.7 && author);
                bool got = accept_match(sim, len, 100, author, policy);
                if (got != expected)
                    throw std::runtime_error(
                        "grid case sim=" + std::to_string(sim) +
                        " len=" + std::to_string(len) +
                        " author=" + (author ? "t" : "f") + ": got " +
                        (got ? "accept" : "reject"));
            }
        }
    }
}

// ---- synthetic-recovery machinery (criteria 4, 5, 8, 9) ----

SynthSpec figure3_spec(size_t docs, size_t records, int edits, double doi_drop,
                       uint64_t seed) {
    SynthSpec spec;
    spec.cited_docs = docs;
    spec.records = records;
    spec.region_proportions = {
        {Region::GWS, 0.469}, {Region::G, 0.369}, {Region::GSc, 0.077},
        {Region::GW, 0.025},  {Region::WS, 0.030}, {Region::W, 0.015},
        {Region::S, 0.015}};
    spec.max_title_edits = edits;
    spec.doi_drop_prob = doi_drop;
    spec.seed = seed;
    return spec;
}

PipelineConfig corpus_config(const fs::path& corpus, const fs::path& out,
                             int workers) {
    PipelineConfig cfg;
    cfg.inputs[SourceDatabase::GS] = (corpus / "gs").string();
    cfg.inputs[SourceDatabase::WOS] = (corpus / "wos").string();
    cfg.inputs[SourceDatabase::SCOPUS] = (corpus / "scopus").string();
    cfg.out_dir = out.string();
    cfg.workers = workers;
    return cfg;
}

using PairSet = std::set<std::pair<std::string, std::string>>;

PairSet read_pairs(const fs::path& csv_path, size_t col_a, size_t col_b) {
    auto rows = csv::parse_file(csv_path.string());
    PairSet pairs;
    for (size_t i = 1; i < rows.size(); ++i)
        pairs.insert({rows[i][col_a], rows[i][col_b]});
    return pairs;
}

double pairwise_f1(const PairSet& predicted, const PairSet& truth) {
    size_t tp = 0;
    for (const auto& p : predicted)
        if (truth.count(p)) ++tp;
    if (predicted.empty() || truth.empty()) return 0.0;
    double precision = static_cast<double>(tp) / static_cast<double>(predicted.size());
    double recall = static_cast<double>(tp) / static_cast<double>(truth.size());
    if (precision + recall == 0) return 0.0;
    return 2 * precision * recall / (precision + recall);
}

std::map<std::string, uint64_t> read_truth_regions(const fs::path& path) {
    auto rows = csv::parse_file(path.string());
    std::map<std::string, uint64_t> out;
    for (size_t i = 1; i < rows.size(); ++i)
        out[rows[i][0]] = std::stoull(rows[i][1]);
    return out;
}

struct Recovery {
    double f1 = 0;
    std::map<std::string, uint64_t> truth_regions, got_regions;
};

Recovery run_recovery(const std::string& tag, size_t docs, size_t records,
                      int edits, double doi_drop, int workers) {
    fs::path corpus = fresh(tag + "_corpus");
    fs::path out = fresh(tag + "_out");
    std::ostringstream quiet;
    PipelineConfig synth_cfg;
    synth_cfg.out_dir = corpus.string();
    cmd_synth(synth_cfg, figure3_spec(docs, records, edits, doi_drop, 20260823),
              quiet);
    PipelineConfig cfg = corpus_config(corpus, out, workers);
    cmd_ingest(cfg, quiet);
    cmd_match(cfg, quiet);

    Recovery r;
    r.f1 = pairwise_f1(read_pairs(out / "edges.csv", 1, 2),
                       read_pairs(corpus / "truth" / "truth_edges.csv", 1, 2));
    r.truth_regions = read_truth_regions(corpus / "truth" / "truth_regions.csv");
    auto clusters = detail::read_clusters((out / "clusters.jsonl").string());
    RegionCounts rc = partition_regions(clusters);
    for (size_t i = 0; i < kRegionNames.size(); ++i)
        r.got_regions[kRegionNames[i]] = rc.counts[i];
    return r;
}

void criterion_clean_recovery() {
    Recovery r = run_recovery("clean", 1000, 50000, 0, 0.0, 4);
    expect(r.f1 == 1.0, "clean F1 " + std::to_string(r.f1) + " != 1.0");
    for (const auto& [region, truth] : r.truth_regions)
        if (r.got_regions[region] != truth)
            throw std::runtime_error("region " + region + ": got " +
                                     std::to_string(r.got_regions[region]) +
                                     ", truth " + std::to_string(truth));
}

void criterion_noisy_recovery() {
    Recovery r = run_recovery("noisy", 1000, 50000, 2, 0.3, 4);
    expect(r.f1 >= 0.99, "noisy F1 " + std::to_string(r.f1) + " < 0.99");
    uint64_t truth_total = 0, got_total = 0;
    for (const auto& [region, n] : r.truth_regions) truth_total += n;
    for (const auto& [region, n] : r.got_regions) got_total += n;
    for (const auto& [region, truth] : r.truth_regions) {
        double truth_pct = 100.0 * static_cast<double>(truth) /
                           static_cast<double>(truth_total);
        double got_pct = 100.0 * static_cast<double>(r.got_regions[region]) /
                         static_cast<double>(got_total);
        if (std::fabs(got_pct - truth_pct) > 1.0)
            throw std::runtime_error(
                "region " + region + " off by " +
                std::to_string(std::fabs(got_pct - truth_pct)) + " pp");
    }
}

// ---- criterion 6: Spearman oracle ----

std::optional<double> oracle_spearman(const std::vector<double>& xs,
                                      const std::vector<double>& ys) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<double> r(v.size());
        for (size_t i = 0; i < v.size(); ++i) {
            size_t less = 0, equal = 0;
            for (size_t j = 0; j < v.size(); ++j) {
                if (v[j] < v[i]) ++less;
                if (v[j] == v[i]) ++equal;
            }
            r[i] = static_cast<double>(less) +
                   (static_cast<double>(equal) + 1.0) / 2.0;
        }
        return r;
    };
    std::vector<double> rx = ranks(xs), ry = ranks(ys);
    double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0 || syy == 0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

void criterion_spearman_oracle() {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<size_t> n_dist(2, 200);
    std::uniform_int_distribution<int> val(0, 20);  // plenty of ties
    for (int trial = 0; trial < 1000; ++trial) {
        size_t n = n_dist(rng);
        std::vector<double> xs(n), ys(n);
        for (size_t i = 0; i < n; ++i) {
            xs[i] = val(rng);
            ys[i] = val(rng);
        }
        auto got = spearman(xs, ys);
        auto want = oracle_spearman(xs, ys);
        expect(got.has_value() == want.has_value(),
               "definedness mismatch at trial " + std::to_string(trial));
        if (got)
            expect(std::fabs(*got - *want) <= 1e-12,
                   "trial " + std::to_string(trial) + ": |" +
                       std::to_string(*got) + " - " + std::to_string(*want) +
                       "| > 1e-12");
        // invariance under the strictly increasing map x -> x^3
        std::vector<double> cubed(n);
        for (size_t i = 0; i < n; ++i) cubed[i] = xs[i] * xs[i] * xs[i];
        auto got_cubed = spearman(cubed, ys);
        expect(got.has_value() == got_cubed.has_value(),
               "cube invariance definedness mismatch");
        if (got)
            expect(std::fabs(*got - *got_cubed) <= 1e-12,
                   "cube invariance violated at trial " + std::to_string(trial));
    }
}

// ---- criterion 7: cluster oracle ----

void criterion_cluster_oracle() {
    for (uint64_t seed = 0; seed < 1000; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<size_t> n_dist(1, 12);
        std::uniform_int_distribution<int> src_dist(0, 2);
        std::uniform_real_distribution<double> unit(0, 1);
        size_t n = n_dist(rng);
        std::vector<CitingRecord> records(n);
        for (size_t i = 0; i < n; ++i) {
            records[i].record_id = "r" + std::to_string(i);
            records[i].source = static_cast<SourceDatabase>(src_dist(rng));
            records[i].cited_doc_id = "X";
        }
        std::vector<const CitingRecord*> ptrs;
        for (const auto& r : records) ptrs.push_back(&r);
        std::vector<MatchEdge> edges;
        std::vector<std::vector<size_t>> adj(n);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j) {
                if (records[i].source == records[j].source) continue;
                if (unit(rng) < 0.25) {
                    MatchEdge e;
                    e.cited_doc_id = "X";
                    e.record_a = records[i].record_id;
                    e.record_b = records[j].record_id;
                    e.method = MatchMethod::FUZZY;
                    e.similarity = 0.9;
                    edges.push_back(e);
                    adj[i].push_back(j);
                    adj[j].push_back(i);
                }
            }

        // brute-force components
        std::vector<int> comp(n, -1);
        int n_comp = 0;
        for (size_t i = 0; i < n; ++i) {
            if (comp[i] != -1) continue;
            std::vector<size_t> stack = {i};
            comp[i] = n_comp;
            while (!stack.empty()) {
                size_t v = stack.back();
                stack.pop_back();
                for (size_t w : adj[v])
                    if (comp[w] == -1) {
                        comp[w] = n_comp;
                        stack.push_back(w);
                    }
            }
            ++n_comp;
        }
        std::map<int, std::vector<std::string>> want_members;
        std::map<int, std::set<SourceDatabase>> want_presence;
        std::map<int, std::map<SourceDatabase, int>> src_count;
        for (size_t i = 0; i < n; ++i) {
            want_members[comp[i]].push_back(records[i].record_id);
            want_presence[comp[i]].insert(records[i].source);
            src_count[comp[i]][records[i].source]++;
        }
        std::set<std::vector<std::string>> want_sets;
        for (auto& [c, members] : want_members) {
            std::sort(members.begin(), members.end());
            want_sets.insert(members);
        }

        auto clusters = build_clusters(edges, ptrs);
        expect(clusters.size() == static_cast<size_t>(n_comp),
               "seed " + std::to_string(seed) + ": cluster count mismatch");
        std::set<std::vector<std::string>> got_sets;
        for (const auto& c : clusters) {
            got_sets.insert(c.members);
            // locate the oracle component via any member
            int oc = -1;
            for (size_t i = 0; i < n; ++i)
                if (records[i].record_id == c.members.front()) oc = comp[i];
            expect(c.presence == want_presence[oc],
                   "seed " + std::to_string(seed) + ": presence mismatch");
            bool want_flag = false;
            for (const auto& [s, k] : src_count[oc])
                if (k >= 2) want_flag = true;
            expect(c.flagged == want_flag,
                   "seed " + std::to_string(seed) + ": flag mismatch");
        }
        expect(got_sets == want_sets,
               "seed " + std::to_string(seed) + ": membership mismatch");
    }
}

// ---- criterion 8: pipeline determinism across worker counts ----

std::map<std::string, std::string> dir_digest(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file())
            out[fs::relative(e.path(), root).string()] =
                sha256_file_hex(e.path().string());
    return out;
}

void criterion_determinism() {
    fs::path corpus = fresh("det_corpus");
    std::ostringstream quiet;
    PipelineConfig synth_cfg;
    synth_cfg.out_dir = corpus.string();
    cmd_synth(synth_cfg, figure3_spec(200, 5000, 2, 0.3, 7), quiet);

    fs::path out1 = fresh("det_out_w1");
    fs::path out8 = fresh("det_out_w8");
    cmd_pipeline(corpus_config(corpus, out1, 1), quiet);
    cmd_pipeline(corpus_config(corpus, out8, 8), quiet);
    auto d1 = dir_digest(out1);
    auto d8 = dir_digest(out8);
    expect(d1.size() == d8.size(), "output file sets differ in size");
    for (const auto& [rel, digest] : d1) {
        auto it = d8.find(rel);
        expect(it != d8.end(), "missing file in workers=8 run: " + rel);
        expect(it->second == digest, "byte difference in " + rel);
    }
}

// ---- criterion 9: matching throughput ----

void criterion_throughput() {
    fs::path corpus = fresh("perf_corpus");
    fs::path out = fresh("perf_out");
    std::ostringstream quiet;
    PipelineConfig synth_cfg;
    synth_cfg.out_dir = corpus.string();
    cmd_synth(synth_cfg, figure3_spec(1000, 100000, 0, 0.0, 3), quiet);
    PipelineConfig cfg = corpus_config(corpus, out, 8);
    cmd_ingest(cfg, quiet);
    auto start = std::chrono::steady_clock::now();
    cmd_match(cfg, quiet);
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    expect(secs < 60.0,
           "matching took " + std::to_string(secs) + " s (budget 60 s)");
}

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {"correction worked example (journal share 0.390)", criterion_correction},
        {"edit-distance oracle, exhaustive over {a,b,c} len<=5",
         criterion_osa_oracle},
        {"threshold boundary grid (16 cases)", criterion_threshold_grid},
        {"clean synthetic recovery (exact regions, F1=1.0)",
         criterion_clean_recovery},
        {"noisy synthetic recovery (F1>=0.99, regions +/-1pp)",
         criterion_noisy_recovery},
        {"Spearman oracle + cube invariance (1e-12)", criterion_spearman_oracle},
        {"cluster oracle, 1000 random graphs <=12 records",
         criterion_cluster_oracle},
        {"pipeline determinism, workers 1 vs 8", criterion_determinism},
        {"matching throughput, 100k records < 60 s", criterion_throughput},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        auto start = std::chrono::steady_clock::now();
        try {
            c.body();
            double secs = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - start)
                              .count();
            std::printf("PASS  %s (%.1fs)\n", c.name.c_str(), secs);
        } catch (const std::exception& e) {
            ++failures;
            std::printf("FAIL  %s: %s\n", c.name.c_str(), e.what());
        }
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
