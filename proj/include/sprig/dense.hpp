#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sprig/corpus.hpp"
#include "sprig/ranked_list.hpp"

namespace sprig {

/// Row-major float32 matrix with one id per row. Rows are unit-L2 after
/// loading; the file keeps raw encoder output.
struct VectorStore {
    std::uint32_t dim = 0;
    std::vector<float> data;
    std::vector<std::string> ids;

    std::size_t count() const noexcept { return ids.size(); }
    std::span<const float> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
};

/// Writes the SPRIGVEC payload (magic, u32 version = 1, u32 dim, u64 count,
/// count * dim float32 LE) exactly as given, plus the one-id-per-line file.
void write_vectors(const std::string& path, const std::string& ids_path, std::uint32_t dim,
                   std::span<const float> data, std::span<const std::string> ids);

/// Reads and validates both files and L2-normalizes every row in place.
/// A zero row cannot be normalized and is rejected.
VectorStore load_vectors(const std::string& path, const std::string& ids_path);
VectorStore read_vectors(std::istream& payload, std::istream& ids, bool normalize = true);

/// Normalizes one row; throws on a zero vector.
void l2_normalize(std::span<float> v);

/// Permutes rows so row i belongs to corpus passage i. Every passage must
/// have a vector.
VectorStore align_to_corpus(const VectorStore& store, const Corpus& corpus);

/// Exhaustive cosine top-k (rows are unit vectors; the query is normalized
/// here). Ties by row ordinal.
RankedList exact_search(const VectorStore& store, std::span<const float> query, std::size_t k);

/// Dot product accumulated in float, the distance kernel for both searches.
float dot(std::span<const float> a, std::span<const float> b);

}  // namespace sprig
