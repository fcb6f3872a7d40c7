#include "sprig/fusion.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <unordered_map>

#include <json.hpp>

#include "sprig/error.hpp"
#include "sprig/text.hpp"

namespace sprig {

namespace {
constexpr const char* kComponent = "fusion_rerank";
}

RankedList rrf_fuse(std::span<const RankedList> lists, const RrfParams& params) {
    if (lists.empty()) throw Error(kComponent, "rrf_fuse needs at least one list");
    if (!(params.k_rrf >= 0.0)) throw Error(kComponent, "k_rrf must be >= 0");
    struct Acc {
        double score = 0.0;
        std::size_t first_rank = std::numeric_limits<std::size_t>::max();
    };
    std::unordered_map<DocId, Acc> fused;
    for (std::size_t l = 0; l < lists.size(); ++l) {
        const auto& items = lists[l].items;
        const std::size_t depth = std::min(params.depth, items.size());
        for (std::size_t i = 0; i < depth; ++i) {
            Acc& acc = fused[items[i].doc];
            acc.score += 1.0 / (params.k_rrf + static_cast<double>(i + 1));
            if (l == 0) acc.first_rank = std::min(acc.first_rank, i + 1);
        }
    }
    std::vector<std::pair<DocId, Acc>> ordered(fused.begin(), fused.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        if (a.second.score != b.second.score) return a.second.score > b.second.score;
        if (a.second.first_rank != b.second.first_rank) return a.second.first_rank < b.second.first_rank;
        return a.first < b.first;
    });
    RankedList out;
    out.items.reserve(ordered.size());
    for (const auto& [doc, acc] : ordered) out.items.push_back({doc, acc.score});
    return out;
}

RankedList score_fuse(const RankedList& rrf_list, std::span<const double> ppr_doc_scores, double weight) {
    if (!(weight >= 0.0 && weight <= 1.0)) throw Error(kComponent, "fusion weight must lie in [0, 1]");
    std::unordered_map<DocId, double> rrf;
    std::vector<DocId> candidates;
    for (const ScoredDoc& sd : rrf_list.items) {
        if (sd.doc >= ppr_doc_scores.size()) throw Error(kComponent, "RRF candidate outside the PPR document slice");
        if (rrf.emplace(sd.doc, sd.score).second) candidates.push_back(sd.doc);
    }
    for (DocId d = 0; d < ppr_doc_scores.size(); ++d)
        if (ppr_doc_scores[d] > 0.0 && !rrf.contains(d)) candidates.push_back(d);
    if (candidates.empty()) return {};

    auto rrf_of = [&](DocId d) {
        auto it = rrf.find(d);
        return it == rrf.end() ? 0.0 : it->second;
    };
    double rrf_lo = std::numeric_limits<double>::infinity(), rrf_hi = -rrf_lo;
    double ppr_lo = rrf_lo, ppr_hi = -rrf_lo;
    for (DocId d : candidates) {
        rrf_lo = std::min(rrf_lo, rrf_of(d));
        rrf_hi = std::max(rrf_hi, rrf_of(d));
        ppr_lo = std::min(ppr_lo, ppr_doc_scores[d]);
        ppr_hi = std::max(ppr_hi, ppr_doc_scores[d]);
    }
    auto scale = [](double v, double lo, double hi) { return hi > lo ? (v - lo) / (hi - lo) : 0.5; };
    RankedList out;
    out.items.reserve(candidates.size());
    for (DocId d : candidates)
        out.items.push_back({d, weight * scale(rrf_of(d), rrf_lo, rrf_hi) +
                                    (1.0 - weight) * scale(ppr_doc_scores[d], ppr_lo, ppr_hi)});
    sort_and_truncate(out.items, 0);
    return out;
}

ExternalScores ExternalScores::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(kComponent, "cannot open external scores file '" + path + "'");
    ExternalScores out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (normalize_text(line).empty()) continue;
        const std::string where = path + " line " + std::to_string(line_no);
        try {
            const auto obj = nlohmann::json::parse(line);
            out.set(obj.at("query_id").get<std::string>(), obj.at("passage_id").get<std::string>(),
                    obj.at("score").get<double>());
        } catch (const nlohmann::json::exception& e) {
            throw Error(kComponent, where + ": expected {\"query_id\", \"passage_id\", \"score\"}: " + e.what());
        }
    }
    return out;
}

void ExternalScores::set(const std::string& query_id, const std::string& passage_id, double score) {
    scores_[{query_id, passage_id}] = score;
}

const double* ExternalScores::find(const std::string& query_id, const std::string& passage_id) const {
    auto it = scores_.find({query_id, passage_id});
    return it == scores_.end() ? nullptr : &it->second;
}

RankedList external_rerank(const RankedList& candidates, const std::string& query_id, const Corpus& corpus,
                           const ExternalScores& scores, std::size_t top_n) {
    const std::size_t head = std::min(top_n, candidates.size());
    std::vector<std::pair<double, ScoredDoc>> scored;
    std::vector<ScoredDoc> unscored;
    for (std::size_t i = 0; i < head; ++i) {
        const ScoredDoc& sd = candidates.items[i];
        if (sd.doc >= corpus.size()) throw Error(kComponent, "candidate outside the corpus");
        if (const double* s = scores.find(query_id, corpus[sd.doc].id))
            scored.emplace_back(*s, sd);
        else
            unscored.push_back(sd);
    }
    if (scored.empty()) return candidates;
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

    RankedList out;
    out.timings = candidates.timings;
    out.items.reserve(candidates.size());
    for (const auto& [s, sd] : scored) out.items.push_back(sd);
    out.items.insert(out.items.end(), unscored.begin(), unscored.end());
    out.items.insert(out.items.end(), candidates.items.begin() + static_cast<std::ptrdiff_t>(head), candidates.items.end());
    const std::size_t n = out.items.size();
    for (std::size_t i = 0; i < n; ++i) out.items[i].score = static_cast<double>(n - i);
    return out;
}

}  // namespace sprig
