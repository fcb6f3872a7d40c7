#include "sprig/ppr.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "sprig/error.hpp"

namespace sprig {

namespace {

constexpr const char* kComponent = "ppr_engine";

void check_inputs(const BipartiteGraph& graph, const SeedVector& seed, double alpha) {
    if (seed.empty()) throw Error(kComponent, "empty seed vector; apply the fallback policy first");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(kComponent, "alpha must lie in (0, 1)");
    if (seed.entries().back().first >= graph.n_nodes()) throw Error(kComponent, "seed node outside the graph");
}

}  // namespace

SeedVector SeedVector::from_masses(std::vector<Entry> masses) {
    std::sort(masses.begin(), masses.end(), [](const Entry& a, const Entry& b) { return a.first < b.first; });
    SeedVector s;
    for (const auto& [node, mass] : masses) {
        if (!(mass > 0.0) || !std::isfinite(mass)) continue;
        if (!s.entries_.empty() && s.entries_.back().first == node)
            s.entries_.back().second += mass;
        else
            s.entries_.emplace_back(node, mass);
        s.raw_mass_ += mass;
    }
    for (auto& entry : s.entries_) entry.second /= s.raw_mass_;
    return s;
}

double SeedVector::mass_of(NodeId node) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), node,
                               [](const Entry& e, NodeId n) { return e.first < n; });
    return (it != entries_.end() && it->first == node) ? it->second : 0.0;
}

PprScores ppr_power(const BipartiteGraph& graph, const SeedVector& seed, double alpha, std::uint32_t max_iter) {
    check_inputs(graph, seed, alpha);
    if (max_iter < 1) throw Error(kComponent, "max_iter must be >= 1");

    const Csr& P = graph.forward();
    const std::size_t n = graph.n_nodes();
    PprScores out;
    std::vector<double> r(n, 0.0);
    std::vector<double> next(n, 0.0);
    for (const auto& [node, mass] : seed.entries()) r[node] = mass;

    for (std::uint32_t t = 0; t < max_iter; ++t) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t u = 0; u < n; ++u) {
            const double mass = r[u];
            if (mass == 0.0) continue;
            for (std::uint64_t i = P.offsets[u]; i < P.offsets[u + 1]; ++i) next[P.cols[i]] += P.values[i] * mass;
            out.edge_visits += P.offsets[u + 1] - P.offsets[u];
        }
        double total = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            next[v] *= (1.0 - alpha);
            total += next[v];
        }
        for (const auto& [node, mass] : seed.entries()) {
            next[node] += alpha * mass;
            total += alpha * mass;
        }
        double change = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            next[v] /= total;
            change += std::abs(next[v] - r[v]);
        }
        r.swap(next);
        out.residual_norm = change;
        ++out.iterations_run;
    }
    out.scores = std::move(r);
    return out;
}

PprScores ppr_push(const BipartiteGraph& graph, const SeedVector& seed, double alpha, double epsilon,
                   std::uint64_t max_pushes) {
    if (!(epsilon > 0.0)) throw Error(kComponent, "push epsilon must be > 0");
    check_inputs(graph, seed, alpha);

    const Csr& P = graph.forward();
    const std::size_t n = graph.n_nodes();
    std::vector<double> estimate(n, 0.0);
    std::vector<double> residual(n, 0.0);
    auto over_threshold = [&](NodeId u) {
        return residual[u] > epsilon * static_cast<double>(P.degree(u));
    };

    // Max-heap on residual; among equal residuals the smaller node id wins.
    using Item = std::pair<double, NodeId>;
    auto lower_priority = [](const Item& a, const Item& b) {
        return a.first != b.first ? a.first < b.first : a.second > b.second;
    };
    std::priority_queue<Item, std::vector<Item>, decltype(lower_priority)> heap(lower_priority);
    for (const auto& [node, mass] : seed.entries()) {
        residual[node] = mass;
        if (over_threshold(node)) heap.emplace(mass, node);
    }

    PprScores out;
    std::uint64_t pushes = 0;
    while (!heap.empty() && pushes < max_pushes) {
        const auto [value, u] = heap.top();
        heap.pop();
        if (residual[u] != value || !over_threshold(u)) continue;  // stale entry
        const double mass = residual[u];
        estimate[u] += alpha * mass;
        residual[u] = 0.0;
        const double spread = (1.0 - alpha) * mass;
        for (std::uint64_t i = P.offsets[u]; i < P.offsets[u + 1]; ++i) {
            const NodeId v = P.cols[i];
            residual[v] += spread * P.values[i];
            if (over_threshold(v)) heap.emplace(residual[v], v);
        }
        out.edge_visits += P.degree(u);
        ++pushes;
    }
    for (double res : residual) out.residual_norm += res;
    out.iterations_run = static_cast<std::uint32_t>(std::min<std::uint64_t>(pushes, UINT32_MAX));
    out.scores = std::move(estimate);
    return out;
}

RankedList rank_documents(const BipartiteGraph& graph, const PprScores& scores, std::size_t k) {
    if (k < 1) throw Error(kComponent, "k must be >= 1");
    if (scores.scores.size() != graph.n_nodes()) throw Error(kComponent, "score vector does not match the graph");
    RankedList out;
    out.items.reserve(graph.n_docs());
    for (DocId d = 0; d < graph.n_docs(); ++d) out.items.push_back({d, scores.scores[d]});
    sort_and_truncate(out.items, k);
    return out;
}

}  // namespace sprig
