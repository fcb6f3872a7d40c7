#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sprig/corpus.hpp"
#include "sprig/entities.hpp"
#include "sprig/ranked_list.hpp"

namespace sprig {

struct Posting {
    DocId doc;
    std::uint32_t tf;

    friend bool operator==(const Posting&, const Posting&) = default;
};

/// Term -> postings over lowercase alphanumeric tokens of each passage's
/// content. Postings are sorted by document ordinal.
class InvertedIndex {
public:
    InvertedIndex() = default;
    explicit InvertedIndex(const Corpus& corpus);

    std::size_t doc_count() const noexcept { return doc_lengths_.size(); }
    double avgdl() const noexcept { return avgdl_; }
    std::uint32_t doc_length(DocId d) const { return doc_lengths_[d]; }
    const std::vector<std::uint32_t>& doc_lengths() const noexcept { return doc_lengths_; }
    std::optional<std::uint32_t> term_id(std::string_view term) const;
    const std::string& term(std::uint32_t id) const { return terms_[id]; }
    std::size_t vocabulary_size() const noexcept { return terms_.size(); }
    const std::vector<Posting>& postings(std::uint32_t id) const { return postings_[id]; }
    std::size_t df(std::uint32_t id) const { return postings_[id].size(); }

    /// Term frequencies of one document, used by feedback models.
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& doc_terms(DocId d) const { return forward_[d]; }

    void save(std::ostream& out) const;
    static InvertedIndex load(std::istream& in);

    friend bool operator==(const InvertedIndex& a, const InvertedIndex& b) {
        return a.terms_ == b.terms_ && a.postings_ == b.postings_ && a.doc_lengths_ == b.doc_lengths_;
    }

private:
    void finalize();

    std::vector<std::string> terms_;
    std::unordered_map<std::string, std::uint32_t> term_ids_;
    std::vector<std::vector<Posting>> postings_;
    std::vector<std::uint32_t> doc_lengths_;
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> forward_;
    double avgdl_ = 0.0;
};

struct Bm25Params {
    double k1 = 1.5;
    double b = 0.75;
};

/// ln(1 + (N - df + 0.5) / (df + 0.5))
double bm25_idf(double n_docs, double df);

/// Okapi BM25 over a bag-of-words query; repeated terms count repeatedly.
RankedList bm25_search(const InvertedIndex& index, std::string_view query, std::size_t k, const Bm25Params& params = {});

/// BM25 with an explicit weight per term id (the per-term contribution is
/// multiplied by the weight). Documents with no matching term are omitted.
RankedList bm25_search_weighted(const InvertedIndex& index,
                                const std::vector<std::pair<std::uint32_t, double>>& term_weights, std::size_t k,
                                const Bm25Params& params = {});

struct Rm3Params {
    std::size_t fb_docs = 10;
    std::size_t fb_terms = 10;
    double lambda = 0.5;  // weight of the original query model
};

/// BM25, relevance model over the feedback set, interpolation with the
/// query model, BM25 rescoring with the interpolated term weights.
RankedList rm3_search(const InvertedIndex& index, std::string_view query, std::size_t k, const Rm3Params& rm3 = {},
                      const Bm25Params& params = {});

struct TwoStepParams {
    std::size_t stage1_k = 10;
    std::size_t m_entities = 3;
};

/// Stage 1 BM25, then the most frequent entities of the stage-1 passages
/// (ties lexicographic) are appended to the query for a second BM25 pass.
RankedList two_step_search(const InvertedIndex& index, const CorpusMentions& mentions, std::string_view query,
                           std::size_t k, const TwoStepParams& two_step = {}, const Bm25Params& params = {});

}  // namespace sprig
