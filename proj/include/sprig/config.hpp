#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sprig/corpus.hpp"
#include "sprig/entities.hpp"
#include "sprig/fusion.hpp"
#include "sprig/hnsw.hpp"
#include "sprig/lexical.hpp"
#include "sprig/seeds.hpp"

namespace sprig {

enum class Method {
    bm25,
    rm3,
    bm25_2step,
    dense,
    rrf,
    graph,
    graph_hybrid,
    graph_dense,
    graph_rrf,
    rrf_ppr_fusion,
    tfidf_graph,
    bm25_ce,
    rrf_ce,
};

Method parse_method(std::string_view id);
std::string_view to_string(Method method);
const std::vector<Method>& all_methods();

bool uses_entity_graph(Method m);
bool uses_dense(Method m);
bool uses_rerank(Method m);

enum class PprMode { power, push };
enum class NerMode { regex, external };
enum class DenseSearch { exact, hnsw };

struct DatasetConfig {
    std::string path;
    CorpusFormat format = CorpusFormat::generic_jsonl;
    std::string queries;  // optional separate query file (generic_jsonl schema)
    std::string passage_vectors;
    std::string passage_vector_ids;
    std::string query_vectors;
    std::string query_vector_ids;
    std::string entities;       // external entities file for ner.mode = external
    std::string rerank_scores;  // external scores for *_ce methods
    bool synthetic = false;
    SyntheticParams synthetic_params;
};

struct NerConfig {
    NerMode mode = NerMode::regex;
    NormalizationMode normalization = NormalizationMode::simple;
    std::size_t min_entity_len = 2;
    bool alias = false;
};

struct GraphConfig {
    double hub_penalty = 0.5;
    std::size_t min_entity_df = 1;
    double max_entity_df_ratio = 1.0;
    double prune_hub_pct = 0.0;
    std::optional<std::size_t> outdegree_cap;
    std::size_t term_min_df = 3;
    double term_max_df_ratio = 0.1;
};

struct PprConfig {
    PprMode mode = PprMode::power;
    double alpha = 0.15;
    std::uint32_t max_iter = 5;
    double epsilon = 1e-6;
    std::uint64_t max_pushes = 1'000'000;
};

struct DenseConfig {
    DenseSearch search = DenseSearch::hnsw;
    HnswParams hnsw;  // M = 32, efConstruction = 200
    std::size_t ef_search = 64;
};

struct EvalConfig {
    std::size_t top_k = 100;
    bool include_empty_gold = false;
    std::size_t threads = 0;  // 0: hardware concurrency
    std::size_t queries_limit = 0;
};

struct AblateConfig {
    nlohmann::json grid = nlohmann::json::object();  // dotted key -> list of values
    std::size_t subset_size = 500;
};

struct BenchConfig {
    std::vector<std::size_t> sizes{1000, 2000, 4000, 8000};
    std::size_t trials = 3;
    std::size_t queries = 100;
    double entity_ratio = 1.5;
    std::size_t hops = 2;
};

/// Everything one run needs. Built from defaults, then an optional bundle
/// ("hotpot-defaults" / "2wiki-defaults"), then a variant (+EL, +PRUNE,
/// +MIX, +ALL), then explicit keys.
struct RunConfig {
    Method method = Method::graph_hybrid;
    DatasetConfig dataset;
    NerConfig ner;
    GraphConfig graph;
    PprConfig ppr;
    SeedConfig seeds;
    std::size_t dense_seed_k = 5;  // seed passages for graph_dense
    Bm25Params bm25;
    Rm3Params rm3;
    TwoStepParams two_step;
    DenseConfig dense;
    RrfParams rrf;
    double fusion_weight = 0.5;
    std::size_t rerank_top_n = 100;
    EvalConfig eval;
    AblateConfig ablate;
    BenchConfig bench;
    std::string output_dir = "out";
    std::uint64_t seed = 42;
    std::string bundle;
    std::string variant = "base";
};

/// Sets one dotted key ("ppr.alpha"); unknown keys and ill-typed values
/// are rejected.
void set_config_key(RunConfig& config, const std::string& key, const nlohmann::json& value);

void apply_bundle(RunConfig& config, std::string_view bundle);
void apply_variant(RunConfig& config, std::string_view variant);

/// Parses a JSON document. Nested objects are flattened to dotted keys,
/// except the value of "ablate.grid" which is kept whole.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

/// Checks every module precondition the configuration feeds into.
void validate(const RunConfig& config);

/// Canonical JSON of the full configuration.
nlohmann::json to_json(const RunConfig& config);

/// FNV-1a 64 of canonical JSON, hex encoded.
std::string fingerprint(const nlohmann::json& value);
std::string fingerprint_bytes(std::string_view bytes);
std::string config_hash(const RunConfig& config);
/// Hash of only the settings that change built artifacts.
std::string index_fingerprint(const RunConfig& config);

}  // namespace sprig
