#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "sprig/entities.hpp"
#include "sprig/graph.hpp"
#include "sprig/ppr.hpp"
#include "sprig/ranked_list.hpp"

namespace sprig {

enum class SeedWeighting { raw, softmax, rank };
enum class SeedMixing { mass_proportional, adaptive };
enum class FallbackPolicy { uniform, bm25_top1 };

SeedWeighting parse_seed_weighting(std::string_view name);
SeedMixing parse_seed_mixing(std::string_view name);
FallbackPolicy parse_fallback_policy(std::string_view name);
std::string_view to_string(SeedWeighting w);
std::string_view to_string(SeedMixing m);
std::string_view to_string(FallbackPolicy f);

struct SeedConfig {
    std::size_t k = 10;
    SeedWeighting weighting = SeedWeighting::rank;
    double q = 0.5;
    SeedMixing mixing = SeedMixing::mass_proportional;
    FallbackPolicy fallback = FallbackPolicy::uniform;
};

/// Entity ordinals of the query's regex mentions (alias-resolved when a
/// map is given) that exist in the graph vocabulary, deduplicated.
std::vector<std::uint32_t> match_query_entities(std::string_view question, const BipartiteGraph& graph,
                                                const ExtractOptions& options, const AliasMap* aliases);

/// Query tokens present in a term graph's vocabulary.
std::vector<std::uint32_t> match_query_terms(std::string_view question, const BipartiteGraph& graph);

/// Mass df(e)^-q per matched entity, L1-normalized. Empty when nothing matched.
SeedVector entity_seeds(const BipartiteGraph& graph, std::span<const std::uint32_t> matched, double q);

/// Top-k passages weighted by raw score (shifted by the minimum when any
/// score is negative), softmax(score) or 1/rank.
SeedVector passage_seeds(const RankedList& ranked, std::size_t k, SeedWeighting weighting);

/// Mass-proportional: joint L1 normalization of the un-normalized masses.
/// Adaptive: alpha_mix = (n_e + 1) / (n_e + n_d + 2). An empty side yields
/// the other side unchanged; both empty is an error.
SeedVector mix_seeds(const SeedVector& entity_seed, const SeedVector& passage_seed, SeedMixing mode);

/// The adaptive mixing weight on the entity side.
double adaptive_mix_weight(std::size_t n_entity_seeds, std::size_t n_passage_seeds);

struct FallbackSeed {
    SeedVector seed;
    bool degraded = false;  // bm25_top1 requested but no BM25 result existed
};

FallbackSeed fallback_seed(std::size_t n_docs, FallbackPolicy policy, const RankedList* bm25_ranked);

}  // namespace sprig
