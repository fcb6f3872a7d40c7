#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sprig/graph.hpp"
#include "sprig/ranked_list.hpp"

namespace sprig {

/// Sparse probability distribution over graph nodes. Construction merges
/// duplicate nodes, drops non-positive masses and L1-normalizes; the mass
/// before normalization is kept for mass-proportional mixing.
class SeedVector {
public:
    using Entry = std::pair<NodeId, double>;

    SeedVector() = default;
    static SeedVector from_masses(std::vector<Entry> masses);

    const std::vector<Entry>& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t size() const noexcept { return entries_.size(); }
    double raw_mass() const noexcept { return raw_mass_; }
    double mass_of(NodeId node) const;

private:
    std::vector<Entry> entries_;  // ascending node id
    double raw_mass_ = 0.0;
};

struct PprScores {
    std::vector<double> scores;     // one entry per node
    std::uint32_t iterations_run = 0;  // power iterations, or pushes for ppr_push
    double residual_norm = 0.0;     // power: L1 change of the last step; push: leftover residual mass
    std::uint64_t edge_visits = 0;  // transition entries read
};

/// r0 = s; r_t = alpha*s + (1 - alpha) * P^T r_{t-1}, L1-renormalized after
/// every step so mass lost at dangling rows is restored.
PprScores ppr_power(const BipartiteGraph& graph, const SeedVector& seed, double alpha, std::uint32_t max_iter);

inline constexpr std::uint64_t kDefaultMaxPushes = 1'000'000;

/// Local push: while some node holds residual above epsilon * outdegree,
/// move alpha of it into the estimate and spread the rest to out-neighbours.
/// Highest residual first, lowest node id on ties.
PprScores ppr_push(const BipartiteGraph& graph, const SeedVector& seed, double alpha, double epsilon,
                   std::uint64_t max_pushes = kDefaultMaxPushes);

/// Top-k documents of the document slice, ties by document ordinal.
RankedList rank_documents(const BipartiteGraph& graph, const PprScores& scores, std::size_t k);

}  // namespace sprig
