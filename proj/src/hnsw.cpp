#include "sprig/hnsw.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>

#include "sprig/error.hpp"

namespace sprig {

namespace {

constexpr const char* kComponent = "dense_retrieval";

float distance(std::span<const float> a, std::span<const float> b) { return 1.0f - dot(a, b); }

}  // namespace

std::vector<HnswIndex::Candidate> HnswIndex::search_layer(const VectorStore& store, std::span<const float> query,
                                                          std::uint32_t entry, std::size_t ef, int layer,
                                                          std::vector<std::uint32_t>& visited,
                                                          std::uint32_t& epoch) const {
    if (++epoch == 0) {
        std::fill(visited.begin(), visited.end(), 0);
        epoch = 1;
    }
    std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> frontier;
    std::priority_queue<Candidate> best;  // worst kept result on top
    const Candidate start{distance(query, store.row(entry)), entry};
    frontier.push(start);
    best.push(start);
    visited[entry] = epoch;

    while (!frontier.empty()) {
        const Candidate current = frontier.top();
        if (best.size() >= ef && current.first > best.top().first) break;
        frontier.pop();
        for (std::uint32_t nb : links_[current.second][layer]) {
            if (visited[nb] == epoch) continue;
            visited[nb] = epoch;
            const Candidate c{distance(query, store.row(nb)), nb};
            if (best.size() < ef || c < best.top()) {
                frontier.push(c);
                best.push(c);
                if (best.size() > ef) best.pop();
            }
        }
    }
    std::vector<Candidate> out;
    out.reserve(best.size());
    while (!best.empty()) {
        out.push_back(best.top());
        best.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::vector<std::uint32_t> HnswIndex::select_neighbors(const VectorStore& store, std::vector<Candidate> candidates,
                                                       std::size_t limit) const {
    std::sort(candidates.begin(), candidates.end());
    std::vector<std::uint32_t> selected;
    selected.reserve(limit);
    for (const auto& [dist_to_base, node] : candidates) {
        if (selected.size() >= limit) break;
        // Keep a candidate only if it is closer to the base than to every
        // neighbour already chosen.
        const bool diverse = std::none_of(selected.begin(), selected.end(), [&](std::uint32_t s) {
            return distance(store.row(node), store.row(s)) < dist_to_base;
        });
        if (diverse) selected.push_back(node);
    }
    return selected;
}

HnswIndex HnswIndex::build(const VectorStore& store, const HnswParams& params) {
    if (params.M < 2) throw Error(kComponent, "HNSW M must be >= 2");
    if (params.ef_construction < 1) throw Error(kComponent, "efConstruction must be >= 1");
    HnswIndex index;
    index.M_ = params.M;
    const std::size_t n = store.count();
    index.links_.resize(n);
    if (n == 0) return index;

    std::mt19937_64 rng(params.seed);
    const double level_scale = 1.0 / std::log(static_cast<double>(params.M));
    std::vector<std::uint32_t> visited(n, 0);
    std::uint32_t epoch = 0;

    for (std::uint32_t node = 0; node < n; ++node) {
        const double u = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
        const int level = static_cast<int>(std::floor(-std::log(u) * level_scale));
        index.links_[node].resize(static_cast<std::size_t>(level) + 1);
        if (index.max_level_ < 0) {
            index.entry_point_ = node;
            index.max_level_ = level;
            continue;
        }
        const auto query = store.row(node);
        std::uint32_t current = index.entry_point_;
        float current_dist = distance(query, store.row(current));
        for (int layer = index.max_level_; layer > level; --layer) {
            for (bool improved = true; improved;) {
                improved = false;
                for (std::uint32_t nb : index.links_[current][layer]) {
                    const float d = distance(query, store.row(nb));
                    if (d < current_dist || (d == current_dist && nb < current)) {
                        current = nb;
                        current_dist = d;
                        improved = true;
                    }
                }
            }
        }
        for (int layer = std::min(level, index.max_level_); layer >= 0; --layer) {
            auto found = index.search_layer(store, query, current, params.ef_construction, layer, visited, epoch);
            auto chosen = index.select_neighbors(store, found, params.M);
            const std::size_t cap = layer == 0 ? 2 * params.M : params.M;
            for (std::uint32_t nb : chosen) {
                auto& back = index.links_[nb][layer];
                back.push_back(node);
                if (back.size() <= cap) continue;
                std::vector<Candidate> pool;
                pool.reserve(back.size());
                for (std::uint32_t x : back) pool.emplace_back(distance(store.row(nb), store.row(x)), x);
                back = index.select_neighbors(store, std::move(pool), cap);
            }
            index.links_[node][layer] = std::move(chosen);
            current = found.front().second;
        }
        if (level > index.max_level_) {
            index.max_level_ = level;
            index.entry_point_ = node;
        }
    }
    return index;
}

RankedList HnswIndex::search(const VectorStore& store, std::span<const float> query, std::size_t k,
                             std::size_t ef_search) const {
    if (ef_search < k) throw Error(kComponent, "efSearch must be >= k");
    if (query.size() != store.dim) throw Error(kComponent, "query dimension does not match the store");
    if (store.count() != links_.size()) throw Error(kComponent, "index was built over a different store");
    RankedList out;
    if (links_.empty() || k == 0) return out;

    std::vector<float> q(query.begin(), query.end());
    l2_normalize(q);
    std::uint32_t current = entry_point_;
    float current_dist = distance(q, store.row(current));
    for (int layer = max_level_; layer > 0; --layer) {
        for (bool improved = true; improved;) {
            improved = false;
            for (std::uint32_t nb : links_[current][layer]) {
                const float d = distance(q, store.row(nb));
                if (d < current_dist || (d == current_dist && nb < current)) {
                    current = nb;
                    current_dist = d;
                    improved = true;
                }
            }
        }
    }
    std::vector<std::uint32_t> visited(links_.size(), 0);
    std::uint32_t epoch = 0;
    const auto found = search_layer(store, q, current, ef_search, 0, visited, epoch);
    out.items.reserve(found.size());
    for (const auto& [dist, node] : found) out.items.push_back({node, static_cast<double>(dot(q, store.row(node)))});
    sort_and_truncate(out.items, k);
    return out;
}

}  // namespace sprig
