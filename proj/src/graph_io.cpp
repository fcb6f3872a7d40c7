#include <fstream>

#include "sprig/binary_io.hpp"
#include "sprig/graph.hpp"

namespace sprig {

namespace {

constexpr const char* kComponent = "graph_builder";
constexpr char kMagic[9] = "SPRIGGRF";
constexpr std::uint32_t kVersion = 1;

void write_csr(std::ostream& out, const Csr& m) {
    binary::write_array<std::uint64_t>(out, m.offsets);
    binary::write_array<std::uint32_t>(out, m.cols);
    binary::write_array<double>(out, m.values);
}

Csr read_csr(std::istream& in, std::size_t rows, std::uint64_t nnz, std::uint32_t col_limit) {
    Csr m;
    m.offsets = binary::read_array<std::uint64_t>(in, rows + 1, kComponent);
    if (m.offsets.front() != 0 || m.offsets.back() != nnz) throw Error(kComponent, "corrupt CSR offsets");
    for (std::size_t r = 0; r < rows; ++r)
        if (m.offsets[r] > m.offsets[r + 1]) throw Error(kComponent, "corrupt CSR offsets");
    m.cols = binary::read_array<std::uint32_t>(in, nnz, kComponent);
    for (std::uint32_t c : m.cols)
        if (c >= col_limit) throw Error(kComponent, "corrupt CSR column index");
    m.values = binary::read_array<double>(in, nnz, kComponent);
    return m;
}

}  // namespace

void save_graph(const BipartiteGraph& graph, std::ostream& out) {
    out.write(kMagic, 8);
    binary::write_le<std::uint32_t>(out, kVersion);
    binary::write_le<std::uint32_t>(out, graph.n_docs());
    binary::write_le<std::uint32_t>(out, graph.n_entities());
    binary::write_le<double>(out, graph.hub_penalty());
    binary::write_le<std::uint64_t>(out, graph.raw().nnz());
    binary::write_le<std::uint64_t>(out, graph.forward().nnz());
    for (const std::string& name : graph.entity_names()) binary::write_string(out, name);
    binary::write_array<std::uint32_t>(out, graph.df());
    write_csr(out, graph.raw());
    write_csr(out, graph.forward());
    if (!out) throw Error(kComponent, "write failed");
}

void save_graph(const BipartiteGraph& graph, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(kComponent, "cannot open '" + path + "' for writing");
    save_graph(graph, out);
}

BipartiteGraph load_graph(std::istream& in) {
    binary::expect_magic(in, kMagic, kComponent);
    const auto version = binary::read_le<std::uint32_t>(in, kComponent);
    if (version != kVersion) throw Error(kComponent, "unsupported graph format version " + std::to_string(version));
    const auto n_docs = binary::read_le<std::uint32_t>(in, kComponent);
    const auto n_entities = binary::read_le<std::uint32_t>(in, kComponent);
    const auto hub_penalty = binary::read_le<double>(in, kComponent);
    const auto raw_nnz = binary::read_le<std::uint64_t>(in, kComponent);
    const auto fwd_nnz = binary::read_le<std::uint64_t>(in, kComponent);
    if (fwd_nnz != 2 * raw_nnz) throw Error(kComponent, "forward/raw edge counts disagree");

    std::vector<std::string> names;
    names.reserve(n_entities);
    for (std::uint32_t e = 0; e < n_entities; ++e) names.push_back(binary::read_string(in, kComponent));
    const auto df = binary::read_array<std::uint32_t>(in, n_entities, kComponent);
    Csr raw = read_csr(in, n_docs, raw_nnz, n_entities);
    const Csr forward = read_csr(in, static_cast<std::size_t>(n_docs) + n_entities, fwd_nnz, n_docs + n_entities);

    // Transitions are re-derived and must match the stored ones bit for bit.
    BipartiteGraph g = BipartiteGraph::assemble(n_docs, std::move(names), std::move(raw), hub_penalty);
    if (g.df() != df || g.forward() != forward) throw Error(kComponent, "stored transitions do not match raw weights");
    return g;
}

BipartiteGraph load_graph(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(kComponent, "cannot open '" + path + "'");
    return load_graph(in);
}

}  // namespace sprig
