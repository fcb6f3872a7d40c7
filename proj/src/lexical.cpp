#include "sprig/lexical.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "sprig/binary_io.hpp"
#include "sprig/error.hpp"
#include "sprig/text.hpp"

namespace sprig {

namespace {

constexpr const char* kComponent = "lexical_retrieval";
constexpr char kMagic[9] = "SPRIGIDX";
constexpr std::uint32_t kVersion = 1;

// Query term ids with multiplicities, in order of first occurrence.
std::vector<std::pair<std::uint32_t, double>> query_term_counts(const InvertedIndex& index, std::string_view query,
                                                                std::size_t* query_length = nullptr) {
    std::vector<std::pair<std::uint32_t, double>> counts;
    std::size_t length = 0;
    for (const std::string& token : tokenize(query)) {
        ++length;
        auto id = index.term_id(token);
        if (!id) continue;
        auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& c) { return c.first == *id; });
        if (it == counts.end())
            counts.emplace_back(*id, 1.0);
        else
            it->second += 1.0;
    }
    if (query_length) *query_length = length;
    return counts;
}

}  // namespace

InvertedIndex::InvertedIndex(const Corpus& corpus) {
    doc_lengths_.resize(corpus.size(), 0);
    for (DocId d = 0; d < corpus.size(); ++d) {
        const auto tokens = tokenize(corpus[d].content());
        doc_lengths_[d] = static_cast<std::uint32_t>(tokens.size());
        for (const std::string& token : tokens) {
            auto [it, inserted] = term_ids_.try_emplace(token, static_cast<std::uint32_t>(terms_.size()));
            if (inserted) {
                terms_.push_back(token);
                postings_.emplace_back();
            }
            auto& list = postings_[it->second];
            if (!list.empty() && list.back().doc == d)
                ++list.back().tf;
            else
                list.push_back({d, 1});
        }
    }
    finalize();
}

void InvertedIndex::finalize() {
    forward_.assign(doc_lengths_.size(), {});
    for (std::uint32_t t = 0; t < postings_.size(); ++t)
        for (const Posting& p : postings_[t]) forward_[p.doc].emplace_back(t, p.tf);
    double total = 0.0;
    for (std::uint32_t len : doc_lengths_) total += len;
    avgdl_ = doc_lengths_.empty() ? 0.0 : total / static_cast<double>(doc_lengths_.size());
}

std::optional<std::uint32_t> InvertedIndex::term_id(std::string_view term) const {
    auto it = term_ids_.find(std::string(term));
    if (it == term_ids_.end()) return std::nullopt;
    return it->second;
}

void InvertedIndex::save(std::ostream& out) const {
    out.write(kMagic, 8);
    binary::write_le<std::uint32_t>(out, kVersion);
    binary::write_le<std::uint64_t>(out, doc_lengths_.size());
    binary::write_le<std::uint64_t>(out, terms_.size());
    binary::write_array<std::uint32_t>(out, doc_lengths_);
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        binary::write_string(out, terms_[t]);
        binary::write_le<std::uint64_t>(out, postings_[t].size());
        for (const Posting& p : postings_[t]) {
            binary::write_le<std::uint32_t>(out, p.doc);
            binary::write_le<std::uint32_t>(out, p.tf);
        }
    }
    if (!out) throw Error(kComponent, "index write failed");
}

InvertedIndex InvertedIndex::load(std::istream& in) {
    binary::expect_magic(in, kMagic, kComponent);
    if (binary::read_le<std::uint32_t>(in, kComponent) != kVersion) throw Error(kComponent, "unsupported index version");
    InvertedIndex index;
    const auto n_docs = binary::read_le<std::uint64_t>(in, kComponent);
    const auto n_terms = binary::read_le<std::uint64_t>(in, kComponent);
    index.doc_lengths_ = binary::read_array<std::uint32_t>(in, n_docs, kComponent);
    index.terms_.reserve(n_terms);
    index.postings_.resize(n_terms);
    for (std::uint64_t t = 0; t < n_terms; ++t) {
        index.terms_.push_back(binary::read_string(in, kComponent));
        if (!index.term_ids_.emplace(index.terms_.back(), static_cast<std::uint32_t>(t)).second)
            throw Error(kComponent, "duplicate term in index file");
        const auto count = binary::read_le<std::uint64_t>(in, kComponent);
        auto& list = index.postings_[t];
        list.reserve(count);
        for (std::uint64_t i = 0; i < count; ++i) {
            Posting p{binary::read_le<std::uint32_t>(in, kComponent), binary::read_le<std::uint32_t>(in, kComponent)};
            if (p.doc >= n_docs || (!list.empty() && list.back().doc >= p.doc))
                throw Error(kComponent, "corrupt postings list");
            list.push_back(p);
        }
    }
    index.finalize();
    return index;
}

double bm25_idf(double n_docs, double df) { return std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5)); }

RankedList bm25_search_weighted(const InvertedIndex& index,
                                const std::vector<std::pair<std::uint32_t, double>>& term_weights, std::size_t k,
                                const Bm25Params& params) {
    RankedList out;
    if (term_weights.empty() || index.doc_count() == 0) return out;
    const auto n = static_cast<double>(index.doc_count());
    std::vector<double> scores(index.doc_count(), 0.0);
    std::vector<DocId> touched;
    for (const auto& [term, weight] : term_weights) {
        if (weight == 0.0) continue;
        const double idf = bm25_idf(n, static_cast<double>(index.df(term)));
        for (const Posting& p : index.postings(term)) {
            const double tf = p.tf;
            const double norm = params.k1 * (1.0 - params.b + params.b * index.doc_length(p.doc) / index.avgdl());
            if (scores[p.doc] == 0.0) touched.push_back(p.doc);
            scores[p.doc] += weight * (idf * tf * (params.k1 + 1.0) / (tf + norm));
        }
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    out.items.reserve(touched.size());
    for (DocId d : touched)
        if (scores[d] > 0.0) out.items.push_back({d, scores[d]});
    sort_and_truncate(out.items, k);
    return out;
}

RankedList bm25_search(const InvertedIndex& index, std::string_view query, std::size_t k, const Bm25Params& params) {
    return bm25_search_weighted(index, query_term_counts(index, query), k, params);
}

RankedList rm3_search(const InvertedIndex& index, std::string_view query, std::size_t k, const Rm3Params& rm3,
                      const Bm25Params& params) {
    if (rm3.lambda < 0.0 || rm3.lambda > 1.0) throw Error(kComponent, "RM3 lambda must lie in [0, 1]");
    std::size_t query_length = 0;
    const auto counts = query_term_counts(index, query, &query_length);
    if (counts.empty()) return {};
    const RankedList feedback = bm25_search_weighted(index, counts, rm3.fb_docs, params);
    if (feedback.empty() || rm3.fb_terms == 0 || rm3.fb_docs == 0) return bm25_search_weighted(index, counts, k, params);

    // Document weights: softmax of the BM25 scores over the feedback set.
    const double top = feedback.items.front().score;
    std::vector<double> doc_weight;
    double z = 0.0;
    for (const ScoredDoc& sd : feedback.items) {
        doc_weight.push_back(std::exp(sd.score - top));
        z += doc_weight.back();
    }
    std::map<std::uint32_t, double> relevance;
    for (std::size_t i = 0; i < feedback.size(); ++i) {
        const DocId d = feedback.items[i].doc;
        const double dl = index.doc_length(d);
        if (dl == 0.0) continue;
        for (const auto& [term, tf] : index.doc_terms(d)) relevance[term] += (tf / dl) * (doc_weight[i] / z);
    }
    std::vector<std::pair<std::uint32_t, double>> expansion(relevance.begin(), relevance.end());
    std::sort(expansion.begin(), expansion.end(), [&](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return index.term(a.first) < index.term(b.first);
    });
    if (expansion.size() > rm3.fb_terms) expansion.resize(rm3.fb_terms);
    double mass = 0.0;
    for (const auto& e : expansion) mass += e.second;

    // Interpolated model scaled by |q| so that lambda = 1 reproduces the
    // plain BM25 term multipliers (the raw query counts) exactly.
    const auto qlen = static_cast<double>(query_length);
    std::vector<std::pair<std::uint32_t, double>> weights;
    for (const auto& [term, count] : counts) {
        double rm = 0.0;
        for (const auto& e : expansion)
            if (e.first == term) rm = e.second / mass;
        weights.emplace_back(term, rm3.lambda * count + (1.0 - rm3.lambda) * qlen * rm);
    }
    for (const auto& [term, value] : expansion) {
        if (std::any_of(counts.begin(), counts.end(), [&](const auto& c) { return c.first == term; })) continue;
        weights.emplace_back(term, (1.0 - rm3.lambda) * qlen * value / mass);
    }
    return bm25_search_weighted(index, weights, k, params);
}

RankedList two_step_search(const InvertedIndex& index, const CorpusMentions& mentions, std::string_view query,
                           std::size_t k, const TwoStepParams& two_step, const Bm25Params& params) {
    const RankedList stage1 = bm25_search(index, query, two_step.stage1_k, params);
    if (stage1.empty()) return {};
    if (two_step.m_entities == 0) return bm25_search(index, query, k, params);

    std::map<std::string, std::pair<std::uint64_t, std::string>> frequency;  // normalized -> (count, surface)
    for (const ScoredDoc& sd : stage1.items) {
        if (sd.doc >= mentions.size()) throw Error(kComponent, "mention table does not cover the index");
        for (const EntityMention& m : mentions[sd.doc]) {
            auto& slot = frequency[m.normalized];
            if (slot.first == 0) slot.second = m.surface;
            slot.first += m.count;
        }
    }
    if (frequency.empty()) return bm25_search(index, query, k, params);
    std::vector<std::pair<std::string, std::pair<std::uint64_t, std::string>>> ranked(frequency.begin(), frequency.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second.first > b.second.first; });
    std::string expanded(query);
    for (std::size_t i = 0; i < std::min(two_step.m_entities, ranked.size()); ++i) {
        expanded.push_back(' ');
        expanded += ranked[i].second.second;
    }
    return bm25_search(index, expanded, k, params);
}

}  // namespace sprig
