#include "sprig/dense.hpp"

#include <cmath>
#include <fstream>
#include <unordered_map>

#include "sprig/binary_io.hpp"
#include "sprig/error.hpp"
#include "sprig/text.hpp"

namespace sprig {

namespace {
constexpr const char* kComponent = "dense_retrieval";
constexpr char kMagic[9] = "SPRIGVEC";
constexpr std::uint32_t kVersion = 1;
}  // namespace

float dot(std::span<const float> a, std::span<const float> b) {
    // Eight independent lanes let the compiler vectorize without fast-math.
    float lanes[8] = {};
    const std::size_t n = a.size();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        for (std::size_t j = 0; j < 8; ++j) lanes[j] += a[i + j] * b[i + j];
    float sum = ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3])) + ((lanes[4] + lanes[5]) + (lanes[6] + lanes[7]));
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

void l2_normalize(std::span<float> v) {
    double norm = 0.0;
    for (float x : v) norm += static_cast<double>(x) * x;
    norm = std::sqrt(norm);
    if (!(norm > 0.0) || !std::isfinite(norm)) throw Error(kComponent, "cannot normalize a zero or non-finite vector");
    for (float& x : v) x = static_cast<float>(x / norm);
}

void write_vectors(const std::string& path, const std::string& ids_path, std::uint32_t dim,
                   std::span<const float> data, std::span<const std::string> ids) {
    if (dim == 0) throw Error(kComponent, "dimension must be positive");
    if (data.size() != static_cast<std::size_t>(dim) * ids.size())
        throw Error(kComponent, "payload size does not equal dim * id count");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(kComponent, "cannot open '" + path + "' for writing");
    out.write(kMagic, 8);
    binary::write_le<std::uint32_t>(out, kVersion);
    binary::write_le<std::uint32_t>(out, dim);
    binary::write_le<std::uint64_t>(out, ids.size());
    binary::write_array<float>(out, data);
    std::ofstream id_out(ids_path, std::ios::binary | std::ios::trunc);
    if (!id_out) throw Error(kComponent, "cannot open '" + ids_path + "' for writing");
    for (const std::string& id : ids) id_out << id << '\n';
    if (!out || !id_out) throw Error(kComponent, "vector write failed");
}

VectorStore read_vectors(std::istream& payload, std::istream& ids, bool normalize) {
    binary::expect_magic(payload, kMagic, kComponent);
    const auto version = binary::read_le<std::uint32_t>(payload, kComponent);
    if (version != kVersion) throw Error(kComponent, "unsupported SPRIGVEC version " + std::to_string(version));
    VectorStore store;
    store.dim = binary::read_le<std::uint32_t>(payload, kComponent);
    const auto count = binary::read_le<std::uint64_t>(payload, kComponent);
    if (store.dim == 0) throw Error(kComponent, "dimension must be positive");
    try {
        store.data = binary::read_array<float>(payload, count * store.dim, kComponent);
    } catch (const Error&) {
        throw Error(kComponent, "payload shorter than dim * count floats");
    }
    if (payload.peek() != std::char_traits<char>::eof()) throw Error(kComponent, "payload longer than dim * count floats");

    std::string line;
    while (std::getline(ids, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        store.ids.push_back(line);
    }
    if (store.ids.size() != count)
        throw Error(kComponent, "id count " + std::to_string(store.ids.size()) + " does not match vector count " +
                                    std::to_string(count));
    if (normalize)
        for (std::size_t i = 0; i < count; ++i) {
            try {
                l2_normalize({store.data.data() + i * store.dim, store.dim});
            } catch (const Error&) {
                throw Error(kComponent, "row " + std::to_string(i) + " ('" + store.ids[i] + "') is a zero vector");
            }
        }
    return store;
}

VectorStore load_vectors(const std::string& path, const std::string& ids_path) {
    std::ifstream payload(path, std::ios::binary);
    if (!payload) throw Error(kComponent, "cannot open '" + path + "'");
    std::ifstream ids(ids_path, std::ios::binary);
    if (!ids) throw Error(kComponent, "cannot open '" + ids_path + "'");
    return read_vectors(payload, ids);
}

VectorStore align_to_corpus(const VectorStore& store, const Corpus& corpus) {
    std::unordered_map<std::string, std::size_t> row_of;
    row_of.reserve(store.count());
    for (std::size_t i = 0; i < store.count(); ++i) row_of.emplace(store.ids[i], i);
    VectorStore out;
    out.dim = store.dim;
    out.data.reserve(corpus.size() * store.dim);
    for (const Passage& p : corpus.passages()) {
        auto it = row_of.find(p.id);
        if (it == row_of.end()) throw Error(kComponent, "no vector for passage '" + p.id + "'");
        auto row = store.row(it->second);
        out.data.insert(out.data.end(), row.begin(), row.end());
        out.ids.push_back(p.id);
    }
    return out;
}

RankedList exact_search(const VectorStore& store, std::span<const float> query, std::size_t k) {
    if (query.size() != store.dim)
        throw Error(kComponent, "query dimension " + std::to_string(query.size()) + " != store dimension " +
                                    std::to_string(store.dim));
    std::vector<float> q(query.begin(), query.end());
    l2_normalize(q);
    RankedList out;
    out.items.reserve(store.count());
    for (std::size_t i = 0; i < store.count(); ++i)
        out.items.push_back({static_cast<DocId>(i), static_cast<double>(dot(q, store.row(i)))});
    sort_and_truncate(out.items, k);
    return out;
}

}  // namespace sprig
