#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace sprig {

/// Nearest-rank percentile of an ascending-sorted sample; 0 for an empty one.
template <typename T>
T nearest_rank(const std::vector<T>& sorted, double pct) {
    if (sorted.empty()) return T{};
    const double rank = std::ceil(pct * static_cast<double>(sorted.size()) / 100.0);
    const auto idx = static_cast<std::size_t>(std::clamp(rank, 1.0, static_cast<double>(sorted.size())));
    return sorted[idx - 1];
}

}  // namespace sprig
