#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sprig/dense.hpp"
#include "sprig/ranked_list.hpp"

namespace sprig {

struct HnswParams {
    std::size_t M = 32;
    std::size_t ef_construction = 200;
    std::uint64_t seed = 42;
};

/// Hierarchical navigable small-world graph over a VectorStore's rows.
/// Distance is 1 - cosine. Level draws come from a seeded RNG, so a build is
/// a pure function of (store, params).
class HnswIndex {
public:
    static HnswIndex build(const VectorStore& store, const HnswParams& params);

    /// Greedy descent through the upper layers, then a layer-0 beam of
    /// width ef_search; returns the top-k by cosine.
    RankedList search(const VectorStore& store, std::span<const float> query, std::size_t k,
                      std::size_t ef_search) const;

    std::size_t M() const noexcept { return M_; }
    std::size_t size() const noexcept { return links_.size(); }
    int max_level() const noexcept { return max_level_; }
    std::uint32_t entry_point() const noexcept { return entry_point_; }
    int level(std::uint32_t node) const { return static_cast<int>(links_[node].size()) - 1; }
    const std::vector<std::uint32_t>& neighbors(std::uint32_t node, int layer) const { return links_[node][layer]; }

    friend bool operator==(const HnswIndex& a, const HnswIndex& b) {
        return a.M_ == b.M_ && a.entry_point_ == b.entry_point_ && a.max_level_ == b.max_level_ && a.links_ == b.links_;
    }

private:
    using Candidate = std::pair<float, std::uint32_t>;  // (distance, node)

    std::vector<Candidate> search_layer(const VectorStore& store, std::span<const float> query,
                                        std::uint32_t entry, std::size_t ef, int layer,
                                        std::vector<std::uint32_t>& visited, std::uint32_t& epoch) const;
    std::vector<std::uint32_t> select_neighbors(const VectorStore& store, std::vector<Candidate> candidates,
                                                std::size_t limit) const;

    std::size_t M_ = 0;
    std::uint32_t entry_point_ = 0;
    int max_level_ = -1;
    std::vector<std::vector<std::vector<std::uint32_t>>> links_;  // node -> layer -> neighbours
};

}  // namespace sprig
