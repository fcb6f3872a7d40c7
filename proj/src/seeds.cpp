#include "sprig/seeds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sprig/error.hpp"
#include "sprig/text.hpp"

namespace sprig {

namespace {
constexpr const char* kComponent = "seed_builder";

void sort_unique(std::vector<std::uint32_t>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}
}  // namespace

SeedWeighting parse_seed_weighting(std::string_view name) {
    if (name == "raw") return SeedWeighting::raw;
    if (name == "softmax") return SeedWeighting::softmax;
    if (name == "rank") return SeedWeighting::rank;
    throw Error(kComponent, "unknown seed weighting '" + std::string(name) + "'");
}

SeedMixing parse_seed_mixing(std::string_view name) {
    if (name == "mass_proportional") return SeedMixing::mass_proportional;
    if (name == "adaptive") return SeedMixing::adaptive;
    throw Error(kComponent, "unknown seed mixing '" + std::string(name) + "'");
}

FallbackPolicy parse_fallback_policy(std::string_view name) {
    if (name == "uniform") return FallbackPolicy::uniform;
    if (name == "bm25_top1") return FallbackPolicy::bm25_top1;
    throw Error(kComponent, "unknown fallback policy '" + std::string(name) + "'");
}

std::string_view to_string(SeedWeighting w) {
    switch (w) {
        case SeedWeighting::raw: return "raw";
        case SeedWeighting::softmax: return "softmax";
        case SeedWeighting::rank: return "rank";
    }
    return "unknown";
}

std::string_view to_string(SeedMixing m) {
    return m == SeedMixing::adaptive ? "adaptive" : "mass_proportional";
}

std::string_view to_string(FallbackPolicy f) { return f == FallbackPolicy::bm25_top1 ? "bm25_top1" : "uniform"; }

std::vector<std::uint32_t> match_query_entities(std::string_view question, const BipartiteGraph& graph,
                                                const ExtractOptions& options, const AliasMap* aliases) {
    std::vector<std::uint32_t> matched;
    for (const EntityMention& m : extract_regex(question, 0, options)) {
        const std::string key = aliases ? aliases->resolve(m.normalized) : m.normalized;
        if (auto e = graph.find_entity(key)) matched.push_back(*e);
    }
    sort_unique(matched);
    return matched;
}

std::vector<std::uint32_t> match_query_terms(std::string_view question, const BipartiteGraph& graph) {
    std::vector<std::uint32_t> matched;
    for (const std::string& token : tokenize(question))
        if (auto e = graph.find_entity(token)) matched.push_back(*e);
    sort_unique(matched);
    return matched;
}

SeedVector entity_seeds(const BipartiteGraph& graph, std::span<const std::uint32_t> matched, double q) {
    if (q < 0.0) throw Error(kComponent, "entity downweight exponent q must be >= 0");
    std::vector<SeedVector::Entry> masses;
    masses.reserve(matched.size());
    for (std::uint32_t e : matched) {
        if (e >= graph.n_entities()) throw Error(kComponent, "entity ordinal outside the graph");
        const double df = graph.df()[e];
        if (df <= 0.0) continue;
        masses.emplace_back(graph.entity_node(e), q == 0.0 ? 1.0 : std::pow(df, -q));
    }
    return SeedVector::from_masses(std::move(masses));
}

SeedVector passage_seeds(const RankedList& ranked, std::size_t k, SeedWeighting weighting) {
    if (k < 1) throw Error(kComponent, "seed passage count k must be >= 1");
    const std::size_t take = std::min(k, ranked.size());
    std::vector<SeedVector::Entry> masses;
    masses.reserve(take);
    if (take == 0) return {};
    switch (weighting) {
        case SeedWeighting::rank:
            for (std::size_t i = 0; i < take; ++i)
                masses.emplace_back(ranked.items[i].doc, 1.0 / static_cast<double>(i + 1));
            break;
        case SeedWeighting::softmax: {
            double top = ranked.items[0].score;
            for (std::size_t i = 1; i < take; ++i) top = std::max(top, ranked.items[i].score);
            for (std::size_t i = 0; i < take; ++i)
                masses.emplace_back(ranked.items[i].doc, std::exp(ranked.items[i].score - top));
            break;
        }
        case SeedWeighting::raw: {
            double low = ranked.items[0].score;
            for (std::size_t i = 1; i < take; ++i) low = std::min(low, ranked.items[i].score);
            const double shift = low < 0.0 ? low : 0.0;
            double total = 0.0;
            for (std::size_t i = 0; i < take; ++i) {
                masses.emplace_back(ranked.items[i].doc, ranked.items[i].score - shift);
                total += masses.back().second;
            }
            if (!(total > 0.0))
                for (auto& m : masses) m.second = 1.0;
            break;
        }
    }
    return SeedVector::from_masses(std::move(masses));
}

double adaptive_mix_weight(std::size_t n_entity_seeds, std::size_t n_passage_seeds) {
    return static_cast<double>(n_entity_seeds + 1) / static_cast<double>(n_entity_seeds + n_passage_seeds + 2);
}

SeedVector mix_seeds(const SeedVector& entity_seed, const SeedVector& passage_seed, SeedMixing mode) {
    if (entity_seed.empty() && passage_seed.empty()) throw Error(kComponent, "cannot mix two empty seed vectors");
    if (entity_seed.empty()) return passage_seed;
    if (passage_seed.empty()) return entity_seed;

    double entity_weight = 0.0;
    double passage_weight = 0.0;
    if (mode == SeedMixing::mass_proportional) {
        entity_weight = entity_seed.raw_mass();
        passage_weight = passage_seed.raw_mass();
    } else {
        entity_weight = adaptive_mix_weight(entity_seed.size(), passage_seed.size());
        passage_weight = 1.0 - entity_weight;
    }
    std::vector<SeedVector::Entry> masses;
    masses.reserve(entity_seed.size() + passage_seed.size());
    for (const auto& [node, mass] : entity_seed.entries()) masses.emplace_back(node, entity_weight * mass);
    for (const auto& [node, mass] : passage_seed.entries()) masses.emplace_back(node, passage_weight * mass);
    return SeedVector::from_masses(std::move(masses));
}

FallbackSeed fallback_seed(std::size_t n_docs, FallbackPolicy policy, const RankedList* bm25_ranked) {
    if (n_docs == 0) throw Error(kComponent, "fallback seed needs at least one document");
    FallbackSeed out;
    if (policy == FallbackPolicy::bm25_top1) {
        if (bm25_ranked && !bm25_ranked->empty()) {
            out.seed = SeedVector::from_masses({{bm25_ranked->items.front().doc, 1.0}});
            return out;
        }
        out.degraded = true;
    }
    std::vector<SeedVector::Entry> masses;
    masses.reserve(n_docs);
    for (std::size_t d = 0; d < n_docs; ++d) masses.emplace_back(static_cast<NodeId>(d), 1.0);
    out.seed = SeedVector::from_masses(std::move(masses));
    return out;
}

}  // namespace sprig
