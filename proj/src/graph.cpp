#include "sprig/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sprig/error.hpp"
#include "sprig/percentile.hpp"
#include "sprig/text.hpp"

namespace sprig {

namespace {

constexpr const char* kComponent = "graph_builder";

struct Occurrence {
    std::uint32_t term;
    std::uint32_t tf;
};

// Interned term occurrences per document, terms numbered by first appearance.
struct TermTable {
    std::vector<std::string> names;
    std::unordered_map<std::string, std::uint32_t> ids;
    std::vector<std::vector<Occurrence>> docs;

    std::uint32_t intern(const std::string& term) {
        auto [it, inserted] = ids.try_emplace(term, static_cast<std::uint32_t>(names.size()));
        if (inserted) names.push_back(term);
        return it->second;
    }
};

// Keeps terms whose df lies in [min_df, max_df] and emits raw TF-IDF rows.
BipartiteGraph filter_and_weight(TermTable table, std::size_t min_df, double max_df, double hub_penalty) {
    const std::size_t n_docs = table.docs.size();
    std::vector<std::uint32_t> df(table.names.size(), 0);
    for (const auto& occ : table.docs)
        for (const Occurrence& o : occ) ++df[o.term];

    std::vector<std::uint32_t> remap(table.names.size(), UINT32_MAX);
    std::vector<std::string> kept;
    for (std::uint32_t t = 0; t < table.names.size(); ++t) {
        if (df[t] < min_df || static_cast<double>(df[t]) > max_df) continue;
        remap[t] = static_cast<std::uint32_t>(kept.size());
        kept.push_back(std::move(table.names[t]));
    }

    Csr raw;
    raw.offsets.reserve(n_docs + 1);
    std::vector<std::pair<std::uint32_t, double>> row;
    const auto n = static_cast<double>(n_docs);
    for (const auto& occ : table.docs) {
        row.clear();
        for (const Occurrence& o : occ)
            if (remap[o.term] != UINT32_MAX)
                row.emplace_back(remap[o.term], tfidf_edge_weight(o.tf, n, df[o.term]));
        std::sort(row.begin(), row.end());
        for (const auto& [col, w] : row) {
            raw.cols.push_back(col);
            raw.values.push_back(w);
        }
        raw.offsets.push_back(raw.cols.size());
    }
    return BipartiteGraph::assemble(static_cast<std::uint32_t>(n_docs), std::move(kept), std::move(raw), hub_penalty);
}

void normalize_row(std::vector<double>& values, std::size_t begin, std::size_t end) {
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += values[i];
    if (sum <= 0.0) return;
    for (std::size_t i = begin; i < end; ++i) values[i] /= sum;
}

}  // namespace

double tfidf_edge_weight(double tf, double n_docs, double df) {
    return tf * std::log((n_docs + 1.0) / (df + 1.0)) + 1.0;
}

BipartiteGraph BipartiteGraph::assemble(std::uint32_t n_docs, std::vector<std::string> entity_names, Csr raw_doc_rows,
                                        double hub_penalty) {
    if (raw_doc_rows.rows() != n_docs) throw Error(kComponent, "raw weight rows must equal the document count");
    if (hub_penalty < 0.0) throw Error(kComponent, "hub penalty p must be >= 0");
    BipartiteGraph g;
    g.n_docs_ = n_docs;
    g.names_ = std::move(entity_names);
    g.hub_penalty_ = hub_penalty;
    const std::uint32_t n_entities = g.n_entities();
    g.vocab_.reserve(n_entities);
    for (std::uint32_t e = 0; e < n_entities; ++e)
        if (!g.vocab_.emplace(g.names_[e], e).second) throw Error(kComponent, "duplicate entity '" + g.names_[e] + "'");

    g.df_.assign(n_entities, 0);
    for (std::uint32_t col : raw_doc_rows.cols) {
        if (col >= n_entities) throw Error(kComponent, "raw weight column out of range");
        ++g.df_[col];
    }
    for (double w : raw_doc_rows.values)
        if (!(w > 0.0)) throw Error(kComponent, "raw edge weights must be positive");

    // Entity rows are the transpose of the document rows; walking documents
    // in order keeps each entity row sorted by document ordinal.
    std::vector<std::uint64_t> entity_offsets(n_entities + 1, 0);
    for (std::uint32_t e = 0; e < n_entities; ++e) entity_offsets[e + 1] = entity_offsets[e] + g.df_[e];

    Csr& fwd = g.forward_;
    const std::size_t nnz = raw_doc_rows.nnz();
    fwd.offsets.assign(static_cast<std::size_t>(n_docs) + n_entities + 1, 0);
    fwd.cols.resize(2 * nnz);
    fwd.values.resize(2 * nnz);
    for (std::uint32_t d = 0; d < n_docs; ++d) fwd.offsets[d + 1] = raw_doc_rows.offsets[d + 1];
    for (std::uint32_t e = 0; e < n_entities; ++e) fwd.offsets[n_docs + e + 1] = nnz + entity_offsets[e + 1];

    std::vector<std::uint64_t> cursor(entity_offsets.begin(), entity_offsets.end() - 1);
    for (std::uint32_t d = 0; d < n_docs; ++d) {
        for (std::uint64_t i = raw_doc_rows.offsets[d]; i < raw_doc_rows.offsets[d + 1]; ++i) {
            const std::uint32_t e = raw_doc_rows.cols[i];
            const double w = raw_doc_rows.values[i];
            fwd.cols[i] = n_docs + e;
            fwd.values[i] = hub_penalty == 0.0 ? w : w * std::pow(static_cast<double>(g.df_[e]), -hub_penalty);
            const std::uint64_t slot = nnz + cursor[e]++;
            fwd.cols[slot] = d;
            fwd.values[slot] = w;
        }
    }
    for (std::size_t r = 0; r < fwd.rows(); ++r) normalize_row(fwd.values, fwd.offsets[r], fwd.offsets[r + 1]);
    g.raw_ = std::move(raw_doc_rows);
    return g;
}

std::optional<std::uint32_t> BipartiteGraph::find_entity(const std::string& normalized) const {
    auto it = vocab_.find(normalized);
    if (it == vocab_.end()) return std::nullopt;
    return it->second;
}

BipartiteGraph build_entity_graph(std::size_t n_docs, const CorpusMentions& mentions, const GraphParams& params) {
    if (params.hub_penalty < 0.0) throw Error(kComponent, "hub penalty p must be >= 0");
    if (!(params.max_entity_df_ratio > 0.0 && params.max_entity_df_ratio <= 1.0))
        throw Error(kComponent, "max_entity_df_ratio must lie in (0, 1]");
    if (mentions.size() != n_docs) throw Error(kComponent, "mention lists must cover every document");

    TermTable table;
    table.docs.resize(n_docs);
    for (std::size_t d = 0; d < n_docs; ++d) {
        std::unordered_map<std::uint32_t, std::size_t> slot;
        auto& occ = table.docs[d];
        for (const EntityMention& m : mentions[d]) {
            if (m.normalized.empty() || m.normalized.size() < params.min_entity_len || m.count == 0) continue;
            const std::uint32_t id = table.intern(m.normalized);
            auto [it, inserted] = slot.try_emplace(id, occ.size());
            if (inserted)
                occ.push_back({id, m.count});
            else
                occ[it->second].tf += m.count;
        }
    }
    const double max_df = params.max_entity_df_ratio * static_cast<double>(n_docs);
    return filter_and_weight(std::move(table), params.min_entity_df, max_df, params.hub_penalty);
}

BipartiteGraph build_term_graph(const Corpus& corpus, const TermGraphParams& params) {
    if (!(params.max_df_ratio > 0.0 && params.max_df_ratio <= 1.0))
        throw Error(kComponent, "term max_df_ratio must lie in (0, 1]");
    TermTable table;
    table.docs.resize(corpus.size());
    for (DocId d = 0; d < corpus.size(); ++d) {
        std::unordered_map<std::uint32_t, std::size_t> slot;
        auto& occ = table.docs[d];
        for (const std::string& token : tokenize(corpus[d].content())) {
            const std::uint32_t id = table.intern(token);
            auto [it, inserted] = slot.try_emplace(id, occ.size());
            if (inserted)
                occ.push_back({id, 1});
            else
                ++occ[it->second].tf;
        }
    }
    const double max_df = params.max_df_ratio * static_cast<double>(corpus.size());
    return filter_and_weight(std::move(table), params.min_df, max_df, params.hub_penalty);
}

BipartiteGraph prune_graph(const BipartiteGraph& graph, double hub_top_pct, std::optional<std::size_t> outdegree_cap) {
    if (!(hub_top_pct >= 0.0 && hub_top_pct < 1.0)) throw Error(kComponent, "hub_top_pct must lie in [0, 1)");
    if (outdegree_cap && *outdegree_cap == 0) throw Error(kComponent, "outdegree cap L = 0 would orphan every entity");

    const std::uint32_t n_entities = graph.n_entities();
    const auto n_hubs = static_cast<std::size_t>(std::ceil(hub_top_pct * static_cast<double>(n_entities)));
    std::vector<bool> removed(n_entities, false);
    if (n_hubs > 0) {
        std::vector<std::uint32_t> order(n_entities);
        std::iota(order.begin(), order.end(), 0);
        const auto& df = graph.df();
        std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return df[a] > df[b]; });
        for (std::size_t i = 0; i < std::min<std::size_t>(n_hubs, n_entities); ++i) removed[order[i]] = true;
    }

    // Entity-major view of the raw weights to apply the per-entity cap.
    const Csr& raw = graph.raw();
    std::vector<bool> keep_edge(raw.nnz(), true);
    if (outdegree_cap) {
        std::vector<std::vector<std::pair<double, std::uint64_t>>> by_entity(n_entities);
        for (std::uint32_t d = 0; d < graph.n_docs(); ++d)
            for (std::uint64_t i = raw.offsets[d]; i < raw.offsets[d + 1]; ++i)
                by_entity[raw.cols[i]].emplace_back(raw.values[i], i);
        for (auto& edges : by_entity) {
            if (edges.size() <= *outdegree_cap) continue;
            // Edge slots increase with document ordinal, so the slot breaks ties.
            std::stable_sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
            for (std::size_t j = *outdegree_cap; j < edges.size(); ++j) keep_edge[edges[j].second] = false;
        }
    }

    std::vector<std::uint32_t> remap(n_entities, UINT32_MAX);
    std::vector<std::string> names;
    for (std::uint32_t e = 0; e < n_entities; ++e) {
        if (removed[e]) continue;
        remap[e] = static_cast<std::uint32_t>(names.size());
        names.push_back(graph.entity_names()[e]);
    }
    Csr pruned;
    pruned.offsets.reserve(graph.n_docs() + 1);
    for (std::uint32_t d = 0; d < graph.n_docs(); ++d) {
        for (std::uint64_t i = raw.offsets[d]; i < raw.offsets[d + 1]; ++i) {
            if (!keep_edge[i] || removed[raw.cols[i]]) continue;
            pruned.cols.push_back(remap[raw.cols[i]]);
            pruned.values.push_back(raw.values[i]);
        }
        pruned.offsets.push_back(pruned.cols.size());
    }
    return BipartiteGraph::assemble(graph.n_docs(), std::move(names), std::move(pruned), graph.hub_penalty());
}

GraphStats graph_stats(const BipartiteGraph& graph) {
    GraphStats stats;
    stats.nodes = graph.n_nodes();
    stats.edges = graph.edges();
    std::vector<std::size_t> doc_degrees(graph.n_docs());
    for (std::uint32_t d = 0; d < graph.n_docs(); ++d) doc_degrees[d] = graph.raw().degree(d);
    std::vector<std::size_t> entity_degrees(graph.df().begin(), graph.df().end());
    std::sort(doc_degrees.begin(), doc_degrees.end());
    std::sort(entity_degrees.begin(), entity_degrees.end());
    stats.p95_doc_degree = nearest_rank(doc_degrees, 95.0);
    stats.p95_entity_degree = nearest_rank(entity_degrees, 95.0);
    return stats;
}

}  // namespace sprig
