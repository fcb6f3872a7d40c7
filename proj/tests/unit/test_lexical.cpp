#include <doctest.h>

#include <cmath>
#include <map>
#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "sprig/entities.hpp"
#include "sprig/error.hpp"
#include "sprig/lexical.hpp"
#include "sprig/text.hpp"
#include "testing.hpp"

using namespace sprig;

namespace {

/// Okapi BM25 recomputed from token lists with no index.
std::vector<double> brute_bm25(const Corpus& corpus, const std::string& query, double k1 = 1.5, double b = 0.75) {
    std::vector<std::vector<std::string>> docs;
    double total = 0.0;
    for (const auto& p : corpus.passages()) {
        docs.push_back(tokenize(p.content()));
        total += static_cast<double>(docs.back().size());
    }
    const double N = static_cast<double>(docs.size());
    const double avgdl = total / N;
    std::vector<double> scores(docs.size(), 0.0);
    for (const auto& t : tokenize(query)) {
        double df = 0.0;
        for (const auto& d : docs) df += std::count(d.begin(), d.end(), t) > 0 ? 1.0 : 0.0;
        const double idf = std::log(1.0 + (N - df + 0.5) / (df + 0.5));
        for (std::size_t i = 0; i < docs.size(); ++i) {
            const double tf = static_cast<double>(std::count(docs[i].begin(), docs[i].end(), t));
            if (tf == 0.0) continue;
            const double dl = static_cast<double>(docs[i].size());
            scores[i] += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * dl / avgdl));
        }
    }
    return scores;
}

Corpus random_corpus(std::mt19937_64& rng, std::size_t n) {
    static const std::vector<std::string> vocab{"alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta"};
    std::vector<std::pair<std::string, std::string>> docs;
    for (std::size_t i = 0; i < n; ++i) {
        std::string text;
        for (std::size_t j = 0, len = 1 + rng() % 12; j < len; ++j) text += vocab[rng() % vocab.size()] + " ";
        docs.emplace_back("", normalize_text(text));
    }
    return testing::make_corpus(docs);
}

std::vector<DocId> order(const RankedList& r) {
    std::vector<DocId> out;
    for (const auto& it : r.items) out.push_back(it.doc);
    return out;
}

}  // namespace

TEST_CASE("bm25 golden value") {
    const auto corpus = testing::make_corpus({{"", "cat sat"}, {"", "dog ran fast"}});
    const InvertedIndex index(corpus);
    const auto r = bm25_search(index, "cat", 10);
    REQUIRE(r.size() == 1);
    CHECK(r.items[0].doc == 0);
    CHECK(std::abs(r.items[0].score - 0.7617) < 1e-4);
    CHECK(r.items[0].score == doctest::Approx(std::log(2.0) * 2.5 / 2.275).epsilon(1e-12));
    CHECK(bm25_search(index, "zebra", 10).empty());
    CHECK(bm25_search(index, "  ...  ", 10).empty());
}

TEST_CASE("inverted index invariants") {
    std::mt19937_64 rng(51);
    const auto corpus = random_corpus(rng, 40);
    const InvertedIndex index(corpus);
    std::vector<std::uint64_t> sums(corpus.size(), 0);
    for (std::uint32_t t = 0; t < index.vocabulary_size(); ++t) {
        DocId last = 0;
        bool first = true;
        for (const auto& p : index.postings(t)) {
            sums[p.doc] += p.tf;
            if (!first) CHECK(p.doc > last);
            last = p.doc;
            first = false;
        }
    }
    double mean = 0.0;
    for (DocId d = 0; d < corpus.size(); ++d) {
        CHECK(sums[d] == index.doc_length(d));
        mean += index.doc_length(d);
    }
    CHECK(index.avgdl() == doctest::Approx(mean / static_cast<double>(corpus.size())));
}

TEST_CASE("bm25 matches the brute-force scorer") {
    std::mt19937_64 rng(52);
    for (int trial = 0; trial < 100; ++trial) {
        const auto corpus = random_corpus(rng, 1 + rng() % 20);
        const InvertedIndex index(corpus);
        std::string query;
        for (std::size_t j = 0, n = 1 + rng() % 4; j < n; ++j)
            query += std::vector<std::string>{"alpha", "beta", "gamma", "nothere", "eta"}[rng() % 5] + " ";
        const auto expected = brute_bm25(corpus, query);
        const auto r = bm25_search(index, query, corpus.size());
        std::size_t positive = 0;
        for (double s : expected) positive += s > 0.0 ? 1 : 0;
        CHECK(r.size() == positive);
        std::set<DocId> seen;
        for (const auto& item : r.items) {
            CHECK(seen.insert(item.doc).second);
            CHECK(item.score == doctest::Approx(expected[item.doc]).epsilon(1e-12));
            CHECK(item.score > 0.0);
        }
        for (std::size_t i = 1; i < r.size(); ++i) CHECK(!ranks_before(r.items[i], r.items[i - 1]));
    }
}

TEST_CASE("duplicate query terms count twice") {
    const auto corpus = testing::make_corpus({{"", "cat sat"}, {"", "cat cat dog"}, {"", "dog"}});
    const InvertedIndex index(corpus);
    const auto once = bm25_search(index, "cat dog", 3);
    const auto twice = bm25_search(index, "cat cat dog", 3);
    const auto expected = brute_bm25(corpus, "cat cat dog");
    for (const auto& item : twice.items) CHECK(item.score == doctest::Approx(expected[item.doc]));
    CHECK(twice.items[0].score > once.items[0].score);
}

TEST_CASE("index save and load round trip") {
    std::mt19937_64 rng(53);
    const InvertedIndex index(random_corpus(rng, 30));
    std::stringstream buf;
    index.save(buf);
    CHECK(buf.str().substr(0, 8) == "SPRIGIDX");
    const auto back = InvertedIndex::load(buf);
    CHECK(back == index);
    CHECK(back.avgdl() == index.avgdl());
    std::stringstream bad("SPRIGXXX");
    CHECK_THROWS_AS(InvertedIndex::load(bad), Error);
}

TEST_CASE("rm3 identities") {
    std::mt19937_64 rng(54);
    for (int trial = 0; trial < 30; ++trial) {
        const auto corpus = random_corpus(rng, 20);
        const InvertedIndex index(corpus);
        const auto base = bm25_search(index, "alpha gamma", 20);
        Rm3Params lambda_one;
        lambda_one.lambda = 1.0;
        CHECK(order(rm3_search(index, "alpha gamma", 20, lambda_one)) == order(base));
        Rm3Params no_terms;
        no_terms.fb_terms = 0;
        CHECK(order(rm3_search(index, "alpha gamma", 20, no_terms)) == order(base));
        CHECK(order(rm3_search(index, "alpha gamma", 20)) == order(rm3_search(index, "alpha gamma", 20)));
    }
}

TEST_CASE("rm3 feedback can reach documents without query terms") {
    const auto corpus = testing::make_corpus(
        {{"", "apple banana"}, {"", "apple banana banana"}, {"", "banana split"}, {"", "cherry"}});
    const InvertedIndex index(corpus);
    CHECK(bm25_search(index, "apple", 10).size() == 2);
    Rm3Params p;
    p.fb_docs = 2;
    p.fb_terms = 2;
    const auto r = rm3_search(index, "apple", 10, p);
    CHECK(r.size() == 3);
    CHECK(rm3_search(index, "", 10).empty());
}

TEST_CASE("two-step expansion") {
    const auto corpus = testing::make_corpus({{"", "Paris is in France and Paris is big"},
                                              {"", "France has wine"},
                                              {"", "Berlin is in Germany"},
                                              {"", "Paris hosts the Louvre"}});
    const InvertedIndex index(corpus);
    const auto mentions = extract_corpus(corpus, {});

    TwoStepParams none;
    none.m_entities = 0;
    CHECK(order(two_step_search(index, mentions, "where is paris", 4, none)) ==
          order(bm25_search(index, "where is paris", 4)));

    CHECK(two_step_search(index, mentions, "zebra", 4).empty());

    TwoStepParams p;
    p.stage1_k = 1;
    p.m_entities = 2;
    // Stage 1 returns doc 0 whose entities are Paris (2) and France (1).
    const auto r = two_step_search(index, mentions, "big", 4, p);
    const auto expected = brute_bm25(corpus, "big Paris France");
    for (const auto& item : r.items) CHECK(item.score == doctest::Approx(expected[item.doc]));
    CHECK(r.size() == 3);
}

TEST_CASE("two-step with expansion already in the query keeps the BM25 order") {
    const auto corpus = testing::make_corpus(
        {{"", "Paris river walk"}, {"", "Paris Paris museum"}, {"", "river boats"}, {"", "museum hours"}});
    const InvertedIndex index(corpus);
    const auto mentions = extract_corpus(corpus, {});
    TwoStepParams p;
    p.m_entities = 1;
    const auto r = two_step_search(index, mentions, "paris", 4, p);
    CHECK(order(r) == order(bm25_search(index, "paris", 4)));
    const auto expected = brute_bm25(corpus, "paris Paris");
    for (const auto& item : r.items) CHECK(item.score == doctest::Approx(expected[item.doc]));
}
