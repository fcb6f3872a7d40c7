#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sprig/corpus.hpp"
#include "sprig/ranked_list.hpp"

namespace sprig {

/// One query's ranked passage ids plus where its time went.
struct RunEntry {
    std::vector<std::string> ranked_ids;
    QueryTimings timings;
};

using Run = std::map<std::string, RunEntry>;

double recall_at(std::span<const std::string> ranked, std::span<const std::string> gold, std::size_t k);
double hit_at(std::span<const std::string> ranked, std::span<const std::string> gold, std::size_t k);
/// 1 / rank of the first gold passage (1-based), 0 when none is retrieved.
double reciprocal_rank(std::span<const std::string> ranked, std::span<const std::string> gold);

struct QueryMetrics {
    std::string query_id;
    double recall_at_5 = 0.0;
    double recall_at_10 = 0.0;
    double hit_at_10 = 0.0;
    double reciprocal_rank = 0.0;
    QueryTimings timings;
    bool missing_from_run = false;
    bool empty_gold = false;
};

struct MetricAggregates {
    double recall_at_5 = 0.0;
    double recall_at_10 = 0.0;
    double hit_at_10 = 0.0;
    double mrr = 0.0;
    double qtime_seconds = 0.0;  // summed total time over evaluated queries
    double seed_seconds = 0.0;
    double traversal_seconds = 0.0;
    std::size_t evaluated = 0;
};

struct EvalReport {
    std::vector<QueryMetrics> per_query;
    MetricAggregates aggregates;
    std::size_t missing_queries = 0;
    std::size_t empty_gold_queries = 0;
    std::size_t fallback_count = 0;
    double fallback_rate = 0.0;
    std::string config_hash;
};

struct MetricOptions {
    bool include_empty_gold = false;  // empty-gold queries then count as zeros
};

/// Per-query R@5, R@10, Hit@10 and RR with arithmetic-mean aggregates.
/// A query absent from the run is scored as an empty ranking and counted;
/// a run key that names no query is an error.
EvalReport compute_metrics(const Run& run, std::span<const Query> queries, const MetricOptions& options = {});

struct BootstrapParams {
    std::size_t resamples = 10000;
    double confidence = 0.95;
    std::uint64_t seed = 42;
};

struct BootstrapResult {
    double delta_mean = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t wins = 0;
    std::size_t ties = 0;
    std::size_t losses = 0;
    std::size_t resamples = 0;
    std::uint64_t rng_seed = 0;
};

/// Paired bootstrap of per-query deltas (a - b) with a percentile interval.
BootstrapResult paired_bootstrap(std::span<const double> a, std::span<const double> b, const BootstrapParams& params = {});

/// Id-keyed variant. The id sets must be identical; the error names the
/// offending ids instead of silently intersecting.
using MetricColumn = std::vector<std::pair<std::string, double>>;
BootstrapResult paired_bootstrap(const MetricColumn& a, const MetricColumn& b, const BootstrapParams& params = {});

struct LatencyStats {
    double p50 = 0.0;
    double p95 = 0.0;
    double p99 = 0.0;
};

/// Nearest-rank percentiles.
LatencyStats latency_stats(std::span<const double> samples);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Least squares y = slope * x + intercept; needs at least two points.
LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys);

// Report files.
void write_predictions(const Run& run, std::span<const Query> queries, std::ostream& out);
/// Lines in file order; duplicate query ids are an error.
std::vector<std::pair<std::string, std::vector<std::string>>> read_predictions(const std::string& path);
void write_metrics_jsonl(const EvalReport& report, std::ostream& out);
void write_summary_table(const std::vector<std::pair<std::string, EvalReport>>& rows, std::ostream& out);

}  // namespace sprig
