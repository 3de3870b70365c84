// citelink command line interface.
//
// Exit codes: 0 success, 1 validation/config error, 2 I/O error.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "citelink/pipeline.hpp"

namespace {

using citelink::PipelineConfig;

struct FlagOverrides {
    std::string config_path;
    std::string out_dir;
    std::string gs, wos, scopus;
    std::string category_map, cited_doc_groups;
    double high_sim = -1, low_sim = -1;
    int64_t min_title_len = -1;
    int workers = 0;
    int64_t seed = -1;
    std::string resolver_base;
    int offline = -1;  // -1 unset, 0 online, 1 offline
};

void add_common(CLI::App* app, FlagOverrides& f) {
    app->add_option("--config", f.config_path, "pipeline config JSON");
    app->add_option("--out-dir", f.out_dir, "output directory");
    app->add_option("--gs", f.gs, "Google Scholar input file or directory");
    app->add_option("--wos", f.wos, "Web of Science input file or directory");
    app->add_option("--scopus", f.scopus, "Scopus input file or directory");
    app->add_option("--category-map", f.category_map, "venue category map CSV");
    app->add_option("--cited-doc-groups", f.cited_doc_groups,
                    "cited_doc_id,group CSV");
    app->add_option("--high-sim", f.high_sim, "high similarity threshold");
    app->add_option("--low-sim", f.low_sim, "low similarity threshold");
    app->add_option("--min-title-len", f.min_title_len,
                    "minimum title length for the high-similarity rule");
    app->add_option("--workers", f.workers, "worker threads for matching");
    app->add_option("--seed", f.seed, "RNG seed for sampling");
    app->add_option("--resolver-base", f.resolver_base, "DOI resolver base URL");
    app->add_flag("--offline{1},--online{0}", f.offline,
                  "force resolver offline/online");
}

// Flags > config file > defaults. Environment overrides are applied inside
// load_config; flags still win because they are applied afterwards.
PipelineConfig build_config(const FlagOverrides& f) {
    PipelineConfig cfg;
    if (!f.config_path.empty()) cfg = citelink::load_config(f.config_path);
    if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
    if (!f.gs.empty()) cfg.inputs[citelink::SourceDatabase::GS] = f.gs;
    if (!f.wos.empty()) cfg.inputs[citelink::SourceDatabase::WOS] = f.wos;
    if (!f.scopus.empty()) cfg.inputs[citelink::SourceDatabase::SCOPUS] = f.scopus;
    if (!f.category_map.empty()) cfg.category_map_path = f.category_map;
    if (!f.cited_doc_groups.empty()) cfg.cited_doc_groups_path = f.cited_doc_groups;
    if (f.high_sim >= 0) cfg.policy.high_sim_threshold = f.high_sim;
    if (f.low_sim >= 0) cfg.policy.low_sim_threshold = f.low_sim;
    if (f.min_title_len >= 0)
        cfg.policy.min_title_len = static_cast<size_t>(f.min_title_len);
    if (f.workers > 0) cfg.workers = f.workers;
    if (f.seed >= 0) cfg.seed = static_cast<uint64_t>(f.seed);
    if (!f.resolver_base.empty()) cfg.resolver.base_url = f.resolver_base;
    if (f.offline >= 0) cfg.resolver.offline = (f.offline == 1);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"citation linkage toolkit"};
    app.require_subcommand(1);

    FlagOverrides f;
    std::string sample_group = "all";
    size_t sample_n = 0;
    std::string synth_spec_path;

    auto* ingest = app.add_subcommand("ingest", "parse exports into canonical records");
    auto* enrich = app.add_subcommand("enrich", "fill metadata and detect languages");
    auto* match = app.add_subcommand("match", "link records across sources");
    auto* report = app.add_subcommand("report", "write the report bundle");
    auto* sample = app.add_subcommand("sample", "draw a type-labeling sample");
    auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
    auto* pipeline =
        app.add_subcommand("pipeline", "ingest, enrich, match, and report");
    for (auto* sub : {ingest, enrich, match, report, sample, synth, pipeline})
        add_common(sub, f);
    sample->add_option("--group", sample_group, "analysis group to sample from");
    sample->add_option("--n", sample_n, "sample size")->required();
    synth->add_option("--spec", synth_spec_path, "synthesis spec JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        PipelineConfig cfg = build_config(f);
        if (ingest->parsed()) citelink::cmd_ingest(cfg);
        if (enrich->parsed()) citelink::cmd_enrich(cfg);
        if (match->parsed()) citelink::cmd_match(cfg);
        if (report->parsed()) citelink::cmd_report(cfg);
        if (sample->parsed()) citelink::cmd_sample(cfg, sample_group, sample_n);
        if (synth->parsed())
            citelink::cmd_synth(cfg, citelink::load_synth_spec(synth_spec_path));
        if (pipeline->parsed()) citelink::cmd_pipeline(cfg);
    } catch (const citelink::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const citelink::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
