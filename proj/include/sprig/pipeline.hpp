#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sprig/config.hpp"
#include "sprig/corpus.hpp"
#include "sprig/dense.hpp"
#include "sprig/entities.hpp"
#include "sprig/eval.hpp"
#include "sprig/fusion.hpp"
#include "sprig/graph.hpp"
#include "sprig/hnsw.hpp"
#include "sprig/lexical.hpp"

namespace sprig {

struct IndexTimings {
    double extract_seconds = 0.0;
    double graph_seconds = 0.0;
    double lexical_seconds = 0.0;
    double dense_seconds = 0.0;
    double total_seconds = 0.0;
};

/// Read-only state shared by every query of a run.
struct Artifacts {
    std::shared_ptr<const Dataset> dataset;
    InvertedIndex lexical;
    CorpusMentions mentions;
    AliasMap aliases;
    std::optional<BipartiteGraph> entity_graph;  // after pruning
    std::optional<BipartiteGraph> term_graph;
    std::optional<VectorStore> passage_vectors;  // aligned with corpus ordinals
    std::optional<HnswIndex> hnsw;
    std::optional<VectorStore> query_vectors;
    std::unordered_map<std::string, std::size_t> query_rows;
    std::optional<ExternalScores> rerank_scores;
    IndexTimings timings;
};

/// Synthetic generation or file loading (plus the separate query file).
std::shared_ptr<Dataset> load_dataset(const RunConfig& config);

/// Builds what config.method needs. `prebuilt_graph` replaces graph
/// construction when given (the graph kind must match the method).
std::shared_ptr<Artifacts> build_artifacts(const RunConfig& config, std::shared_ptr<const Dataset> dataset,
                                           std::optional<BipartiteGraph> prebuilt_graph = std::nullopt,
                                           std::optional<InvertedIndex> prebuilt_lexical = std::nullopt);

struct QueryOutcome {
    RankedList ranked;
    bool fallback = false;           // seed vector was empty
    bool fallback_degraded = false;  // bm25_top1 had nothing to offer
    std::uint64_t edge_visits = 0;
};

struct Evaluation {
    Run run;
    EvalReport report;
    std::size_t degraded_fallbacks = 0;
    double mean_edge_visits = 0.0;
    std::vector<double> latencies;  // total seconds per query, query order
};

class Engine {
public:
    Engine(RunConfig config, std::shared_ptr<const Artifacts> artifacts);

    QueryOutcome run(const Query& query) const;
    Evaluation evaluate(std::span<const Query> queries) const;

    const RunConfig& config() const noexcept { return config_; }
    const Artifacts& artifacts() const noexcept { return *artifacts_; }

private:
    RankedList lexical(const Query& query, std::size_t k) const;
    RankedList dense(const Query& query, std::size_t k) const;
    RankedList fused(const Query& query) const;
    QueryOutcome traverse(const Query& query, const BipartiteGraph& graph, const SeedVector& entity_seed,
                          const SeedVector& passage_seed, const RankedList* bm25_hint) const;
    std::size_t thread_count(std::size_t jobs) const;

    RunConfig config_;
    std::shared_ptr<const Artifacts> artifacts_;
};

/// VmHWM of this process in MiB, 0 when unavailable.
double peak_rss_mib();

}  // namespace sprig
