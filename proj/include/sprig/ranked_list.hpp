#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace sprig {

using DocId = std::uint32_t;

struct ScoredDoc {
    DocId doc = 0;
    double score = 0.0;

    friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

/// Wall-clock attribution for one query. For seeded graph methods the seed
/// stage (BM25 / dense / RRF) is reported separately from PPR traversal.
struct QueryTimings {
    double seed_seconds = 0.0;
    double traversal_seconds = 0.0;
    double total_seconds = 0.0;
};

/// Ordered results: descending score, ties by ascending doc ordinal.
struct RankedList {
    std::vector<ScoredDoc> items;
    QueryTimings timings;

    std::size_t size() const noexcept { return items.size(); }
    bool empty() const noexcept { return items.empty(); }
};

inline bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) noexcept {
    if (a.score != b.score) return a.score > b.score;
    return a.doc < b.doc;
}

/// Sorts by the canonical order and truncates to k (k == 0 keeps everything).
inline void sort_and_truncate(std::vector<ScoredDoc>& items, std::size_t k) {
    if (k > 0 && k < items.size()) {
        std::partial_sort(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(k), items.end(),
                          ranks_before);
        items.resize(k);
    } else {
        std::sort(items.begin(), items.end(), ranks_before);
    }
}

}  // namespace sprig
