#include <exception>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sprig/commands.hpp"
#include "sprig/config.hpp"
#include "sprig/error.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string method;
    std::string out;
    std::string bundle;
    std::string variant;
    std::size_t queries_limit = 0;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON run configuration");
    cmd->add_option("--method", f.method, "method id");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--queries-limit", f.queries_limit, "evaluate only the first N queries");
    cmd->add_option("--seed", f.seed, "rng seed for subsets and bootstrap");
    cmd->add_option("--bundle", f.bundle, "hotpot-defaults or 2wiki-defaults");
    cmd->add_option("--variant", f.variant, "Base, +EL, +PRUNE, +MIX or +ALL");
    cmd->add_option("--threads", f.threads, "query worker threads (0 = all cores)");
    cmd->add_option("--set", f.sets, "override a dotted key, KEY=JSON");
}

sprig::RunConfig resolve(const CLI::App* cmd, const CommonFlags& f) {
    sprig::RunConfig config = f.config_path.empty() ? sprig::RunConfig{} : sprig::load_config(f.config_path);
    if (!f.bundle.empty()) sprig::apply_bundle(config, f.bundle);
    if (!f.variant.empty()) sprig::apply_variant(config, f.variant);
    for (const auto& s : f.sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos) throw sprig::Error("cli_app", "--set expects KEY=VALUE, got '" + s + "'");
        std::string key = s.substr(0, eq);
        std::string raw = s.substr(eq + 1);
        nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
        if (value.is_discarded()) value = raw;
        sprig::set_config_key(config, key, value);
    }
    if (!f.method.empty()) config.method = sprig::parse_method(f.method);
    if (!f.out.empty()) config.output_dir = f.out;
    if (cmd->count("--queries-limit")) config.eval.queries_limit = f.queries_limit;
    if (cmd->count("--seed")) config.seed = f.seed;
    if (cmd->count("--threads")) config.eval.threads = f.threads;
    return config;
}

void print_report(const sprig::EvalSummary& s) {
    const auto& a = s.report.aggregates;
    std::cout << std::fixed << std::setprecision(3) << "Method\tR@5\tR@10\tHit@10\tMRR\tQTime\n"
              << s.method << '\t' << a.recall_at_5 << '\t' << a.recall_at_10 << '\t' << a.hit_at_10 << '\t' << a.mrr
              << '\t' << a.qtime_seconds << '\n'
              << "queries " << a.evaluated << ", fallback rate " << s.report.fallback_rate << ", p50/p95/p99 ms "
              << 1000 * s.latency.p50 << '/' << 1000 * s.latency.p95 << '/' << 1000 * s.latency.p99 << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sprig: CPU graph retrieval with personalized PageRank"};
    app.require_subcommand(1);

    CommonFlags index_f, eval_f, ablate_f, bench_f, stats_f, sig_f;
    auto* index_cmd = app.add_subcommand("index", "build and persist graph and inverted index");
    add_common(index_cmd, index_f);
    auto* eval_cmd = app.add_subcommand("eval", "run a method over the queries and write reports");
    add_common(eval_cmd, eval_f);
    auto* ablate_cmd = app.add_subcommand("ablate", "grid over config keys on a seeded query subset");
    add_common(ablate_cmd, ablate_f);
    auto* bench_cmd = app.add_subcommand("bench", "index-time scaling over synthetic corpora");
    add_common(bench_cmd, bench_f);
    auto* stats_cmd = app.add_subcommand("stats", "entity and term graph statistics");
    add_common(stats_cmd, stats_f);
    auto* sig_cmd = app.add_subcommand("significance", "paired bootstrap of R@10 against a baseline run");
    add_common(sig_cmd, sig_f);
    std::string baseline;
    std::vector<std::string> runs;
    sig_cmd->add_option("--baseline", baseline, "baseline predictions file")->required();
    sig_cmd->add_option("--run", runs, "predictions file to compare (repeatable)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (index_cmd->parsed()) {
            auto manifest = sprig::cmd_index(resolve(index_cmd, index_f));
            std::cout << "index_fingerprint " << manifest["index_fingerprint"].get<std::string>() << '\n';
        } else if (eval_cmd->parsed()) {
            print_report(sprig::cmd_eval(resolve(eval_cmd, eval_f)));
        } else if (ablate_cmd->parsed()) {
            auto rows = sprig::cmd_ablate(resolve(ablate_cmd, ablate_f));
            std::cout << rows.size() << " cells; best R@10 " << std::fixed << std::setprecision(3)
                      << (rows.empty() ? 0.0 : rows.front().report.aggregates.recall_at_10) << '\n';
        } else if (bench_cmd->parsed()) {
            auto result = sprig::cmd_bench(resolve(bench_cmd, bench_f));
            std::cout << "Docs\tIndexSeconds\tMsPerDoc\n" << std::fixed << std::setprecision(4);
            for (const auto& r : result.rows) std::cout << r.n_docs << '\t' << r.index_seconds << '\t' << r.ms_per_doc << '\n';
            std::cout << "R2 " << result.fit.r2 << ", per-doc spread " << result.per_doc_spread << "x\n";
        } else if (stats_cmd->parsed()) {
            auto rows = sprig::cmd_stats(resolve(stats_cmd, stats_f));
            std::cout << "Graph\tNodes\tEdges\tEntityDegP95\tDocDegP95\n";
            for (const auto& r : rows)
                std::cout << r.graph << '\t' << r.stats.nodes << '\t' << r.stats.edges << '\t'
                          << r.stats.p95_entity_degree << '\t' << r.stats.p95_doc_degree << '\n';
        } else if (sig_cmd->parsed()) {
            auto rows = sprig::cmd_significance(resolve(sig_cmd, sig_f), baseline, runs);
            sprig::write_significance_table(rows, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
