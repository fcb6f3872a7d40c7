#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sprig/corpus.hpp"
#include "sprig/ranked_list.hpp"

namespace sprig {

struct RrfParams {
    double k_rrf = 60.0;
    std::size_t depth = 100;
};

/// score(d) = sum over lists ranking d within `depth` of 1 / (k_rrf + rank),
/// ranks 1-based. Ties: better rank in the first list, then doc ordinal.
RankedList rrf_fuse(std::span<const RankedList> lists, const RrfParams& params = {});

/// Min-max normalizes the RRF scores and the PPR document scores over the
/// union of RRF candidates and documents with PPR mass (a missing score is
/// 0), then ranks by w * rrf + (1 - w) * ppr. A constant component
/// contributes 0.5 everywhere.
RankedList score_fuse(const RankedList& rrf_list, std::span<const double> ppr_doc_scores, double weight);

/// (query id, passage id) -> score, one {"query_id","passage_id","score"}
/// object per line.
class ExternalScores {
public:
    ExternalScores() = default;
    static ExternalScores load(const std::string& path);
    void set(const std::string& query_id, const std::string& passage_id, double score);
    const double* find(const std::string& query_id, const std::string& passage_id) const;
    std::size_t size() const noexcept { return scores_.size(); }

private:
    std::map<std::pair<std::string, std::string>, double> scores_;
};

/// Reorders the first top_n candidates: scored pairs by external score
/// (stable), then unscored ones in their original order; the tail after
/// top_n is untouched. Output scores are positional (size - position) so
/// the list stays descending. With no scored pair the input is returned as is.
RankedList external_rerank(const RankedList& candidates, const std::string& query_id, const Corpus& corpus,
                           const ExternalScores& scores, std::size_t top_n = 100);

}  // namespace sprig
