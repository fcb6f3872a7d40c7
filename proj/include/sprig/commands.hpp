#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "sprig/config.hpp"
#include "sprig/eval.hpp"
#include "sprig/pipeline.hpp"

namespace sprig {

/// Persists the graph (entity or term, when the method has one), the
/// inverted index and manifest.json into config.output_dir. Returns the
/// manifest.
nlohmann::json cmd_index(const RunConfig& config);

struct EvalSummary {
    std::string method;
    EvalReport report;
    LatencyStats latency;
    double mean_edge_visits = 0.0;
    std::size_t degraded_fallbacks = 0;
    IndexTimings index_timings;
    bool reused_artifacts = false;
    double peak_rss_mib = 0.0;
};

/// Runs the method over the queries (first eval.queries_limit when set) and
/// writes <method>.predictions.jsonl, <method>.metrics.jsonl,
/// <method>.summary.json and <method>.report.tsv. Persisted artifacts are
/// reused when their fingerprint matches.
EvalSummary cmd_eval(const RunConfig& config);

struct AblationRow {
    nlohmann::json overrides;  // dotted key -> value for this cell
    RunConfig config;
    EvalReport report;
};

/// The same seeded query subset for every cell; rows sorted by R@10
/// descending (stable in cell order). Writes ablation.tsv.
std::vector<AblationRow> cmd_ablate(const RunConfig& config);

/// Seeded subset of `size` query positions, ascending.
std::vector<std::size_t> sample_subset(std::size_t n_queries, std::size_t size, std::uint64_t seed);

struct BenchRow {
    std::size_t n_docs = 0;
    double index_seconds = 0.0;  // minimum over trials
    double ms_per_doc = 0.0;
    double query_seconds = 0.0;  // total over the benchmark queries
    double mean_edge_visits = 0.0;
    std::size_t graph_edges = 0;
};

struct ScalingResult {
    std::vector<BenchRow> rows;
    LinearFit fit;            // index seconds against n_docs
    double per_doc_spread = 0.0;  // max ms/doc over min ms/doc
};

/// Synthetic corpora of each size in bench.sizes, indexed with the
/// configured method bench.trials times.
ScalingResult scaling_sweep(const RunConfig& config);

/// scaling_sweep plus bench.tsv and bench.json.
ScalingResult cmd_bench(const RunConfig& config);

struct StatsRow {
    std::string graph;
    GraphStats stats;
};

/// Entity graph (with the configured pruning) and term graph statistics.
/// Writes stats.tsv.
std::vector<StatsRow> cmd_stats(const RunConfig& config);

struct SignificanceRow {
    std::string method;
    BootstrapResult result;
};

/// Paired bootstrap of per-query R@10 for every run against the baseline,
/// gold from the configured dataset. Writes significance.tsv.
std::vector<SignificanceRow> cmd_significance(const RunConfig& config, const std::string& baseline,
                                              const std::vector<std::string>& runs);

void write_significance_table(const std::vector<SignificanceRow>& rows, std::ostream& out);

}  // namespace sprig
