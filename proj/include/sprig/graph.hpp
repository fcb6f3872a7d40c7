#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sprig/corpus.hpp"
#include "sprig/entities.hpp"

namespace sprig {

using NodeId = std::uint32_t;

/// Compressed sparse rows. Column indices within a row are ascending.
struct Csr {
    std::vector<std::uint64_t> offsets{0};
    std::vector<std::uint32_t> cols;
    std::vector<double> values;

    std::size_t rows() const noexcept { return offsets.size() - 1; }
    std::size_t nnz() const noexcept { return cols.size(); }
    std::size_t degree(std::size_t row) const noexcept { return offsets[row + 1] - offsets[row]; }
    std::span<const std::uint32_t> row_cols(std::size_t row) const {
        return {cols.data() + offsets[row], degree(row)};
    }
    std::span<const double> row_values(std::size_t row) const { return {values.data() + offsets[row], degree(row)}; }

    friend bool operator==(const Csr&, const Csr&) = default;
};

/// Entity-document bipartite graph. Node ids put documents first
/// ([0, n_docs)) and entities after them ([n_docs, n_docs + n_entities)).
///
/// `raw()` keeps the pre-normalization TF-IDF weights, one row per
/// document with entity ordinals as columns. `forward()` holds the
/// row-stochastic transitions over all nodes; document rows carry the
/// df^-p hub penalty, entity rows plain TF-IDF.
class BipartiteGraph {
public:
    BipartiteGraph() = default;

    /// Derives df and the transition rows from raw document rows.
    static BipartiteGraph assemble(std::uint32_t n_docs, std::vector<std::string> entity_names, Csr raw_doc_rows,
                                   double hub_penalty);

    std::uint32_t n_docs() const noexcept { return n_docs_; }
    std::uint32_t n_entities() const noexcept { return static_cast<std::uint32_t>(names_.size()); }
    std::uint32_t n_nodes() const noexcept { return n_docs_ + n_entities(); }
    NodeId entity_node(std::uint32_t entity) const noexcept { return n_docs_ + entity; }
    bool is_doc(NodeId node) const noexcept { return node < n_docs_; }

    const std::vector<std::string>& entity_names() const noexcept { return names_; }
    std::optional<std::uint32_t> find_entity(const std::string& normalized) const;
    const std::vector<std::uint32_t>& df() const noexcept { return df_; }
    const Csr& raw() const noexcept { return raw_; }
    const Csr& forward() const noexcept { return forward_; }
    double hub_penalty() const noexcept { return hub_penalty_; }

    /// Undirected doc-entity edge count (nonzeros of raw).
    std::size_t edges() const noexcept { return raw_.nnz(); }

    friend bool operator==(const BipartiteGraph& a, const BipartiteGraph& b) {
        return a.n_docs_ == b.n_docs_ && a.names_ == b.names_ && a.df_ == b.df_ && a.raw_ == b.raw_ &&
               a.forward_ == b.forward_ && a.hub_penalty_ == b.hub_penalty_;
    }

private:
    std::uint32_t n_docs_ = 0;
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::uint32_t> vocab_;
    std::vector<std::uint32_t> df_;
    Csr raw_;
    Csr forward_;
    double hub_penalty_ = 0.0;
};

/// tf * ln((N + 1) / (df + 1)) + 1
double tfidf_edge_weight(double tf, double n_docs, double df);

struct GraphParams {
    std::size_t min_entity_len = 2;
    std::size_t min_entity_df = 1;
    double max_entity_df_ratio = 1.0;
    double hub_penalty = 0.5;
};

BipartiteGraph build_entity_graph(std::size_t n_docs, const CorpusMentions& mentions, const GraphParams& params);

struct TermGraphParams {
    std::size_t min_df = 3;
    double max_df_ratio = 0.1;
    double hub_penalty = 0.5;
};

/// Same construction with lowercase tokens standing in for entities.
BipartiteGraph build_term_graph(const Corpus& corpus, const TermGraphParams& params);

/// Removes the ceil(hub_top_pct * n_entities) highest-df entities, then keeps
/// each remaining entity's `outdegree_cap` strongest raw edges.
BipartiteGraph prune_graph(const BipartiteGraph& graph, double hub_top_pct, std::optional<std::size_t> outdegree_cap);

struct GraphStats {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::size_t p95_entity_degree = 0;
    std::size_t p95_doc_degree = 0;
};

GraphStats graph_stats(const BipartiteGraph& graph);

/// "SPRIGGRF" binary format, version 1, little-endian.
void save_graph(const BipartiteGraph& graph, std::ostream& out);
void save_graph(const BipartiteGraph& graph, const std::string& path);
BipartiteGraph load_graph(std::istream& in);
BipartiteGraph load_graph(const std::string& path);

}  // namespace sprig
