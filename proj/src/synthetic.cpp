#include <algorithm>
#include <array>
#include <cstdio>
#include <numeric>
#include <random>

#include "sprig/corpus.hpp"
#include "sprig/error.hpp"

namespace sprig {

namespace {

// Consonant-vowel syllables for entity tokens, vowel-consonant for filler
// words: the two vocabularies never produce the same token.
constexpr std::array<const char*, 20> kNameSyllables = {"ka", "lo", "mi", "ra", "ve", "to", "se", "du", "ba", "qi",
                                                        "zo", "fe", "ga", "ho", "ni", "pu", "tu", "vo", "wy", "ye"};
constexpr std::array<const char*, 15> kFillerSyllables = {"ab", "ed", "ig", "ok", "ul", "ar", "es", "im",
                                                          "on", "us", "el", "ot", "un", "ax", "ir"};
constexpr std::size_t kFillerVocab = 3000;
constexpr std::size_t kBodyWords = 24;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

std::string encode(std::size_t value, std::size_t width, const auto& syllables) {
    std::string out;
    for (std::size_t i = 0; i < width; ++i) {
        out = syllables[value % syllables.size()] + out;
        value /= syllables.size();
    }
    return out;
}

std::size_t width_for(std::size_t count, std::size_t base) {
    std::size_t width = 2;
    std::size_t capacity = base * base;
    while (capacity < count) {
        capacity *= base;
        ++width;
    }
    return width;
}

std::string capitalize(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
}

class Vocabulary {
public:
    explicit Vocabulary(std::size_t n_entities) : name_width_(width_for(n_entities, kNameSyllables.size())) {
        names_.reserve(n_entities);
        for (std::size_t i = 0; i < n_entities; ++i) {
            const std::size_t family = (i * 7919 + 13) % (kNameSyllables.size() * kNameSyllables.size());
            names_.push_back(capitalize(encode(i, name_width_, kNameSyllables)) + " " +
                             capitalize(encode(family, 2, kNameSyllables)));
        }
        const std::size_t fw = width_for(kFillerVocab, kFillerSyllables.size());
        filler_.reserve(kFillerVocab);
        for (std::size_t i = 0; i < kFillerVocab; ++i) filler_.push_back(encode(i, fw, kFillerSyllables));
    }

    const std::string& name(std::size_t i) const { return names_[i]; }
    const std::string& word(std::size_t i) const { return filler_[i % filler_.size()]; }

private:
    std::size_t name_width_;
    std::vector<std::string> names_;
    std::vector<std::string> filler_;
};

std::string format_ordinal(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%05zu", prefix, i);
    return buf;
}

}  // namespace

Dataset generate_synthetic(const SyntheticParams& params) {
    if (params.hops < 1) throw Error("corpus_store", "synthetic corpus needs hops >= 1");
    if (params.n_docs < 2 * params.hops)
        throw Error("corpus_store", "synthetic corpus needs n_docs >= 2*hops");
    if (params.n_entities < params.hops + 1)
        throw Error("corpus_store", "synthetic corpus needs n_entities >= hops+1");

    Rng rng(params.seed);
    const Vocabulary vocab(params.n_entities);
    const std::size_t n_hubs = params.n_entities / 50;
    const std::size_t pool = params.n_entities - n_hubs;
    const double hub_rate = n_hubs ? std::min(1.0, 3.0 / static_cast<double>(n_hubs)) : 0.0;
    const std::size_t n_queries = params.n_docs / (2 * params.hops);

    // Chain documents occupy shuffled slots; the rest are distractors.
    std::vector<std::size_t> slots(params.n_docs);
    std::iota(slots.begin(), slots.end(), 0);
    for (std::size_t i = slots.size(); i > 1; --i) std::swap(slots[i - 1], slots[rng.below(i)]);

    std::vector<std::string> bodies(params.n_docs);
    auto filler = [&](std::string& out, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            out += ' ';
            out += vocab.word(rng.below(kFillerVocab));
        }
    };
    auto decorate = [&](std::string& body) {
        // One random non-hub mention plus the hub mentions, each followed by
        // a lowercase word so adjacent names never merge into one span.
        body += ' ';
        body += vocab.name(n_hubs + rng.below(pool));
        filler(body, 2);
        for (std::size_t h = 0; h < n_hubs; ++h) {
            if (rng.unit() >= hub_rate) continue;
            body += ' ';
            body += vocab.name(h);
            filler(body, 1);
        }
        filler(body, kBodyWords / 2);
        body += '.';
    };

    Dataset out;
    std::vector<std::string> questions(n_queries);
    std::vector<std::vector<std::size_t>> gold_slots(n_queries);
    for (std::size_t q = 0; q < n_queries; ++q) {
        auto entity = [&](std::size_t j) { return vocab.name(n_hubs + (q * (params.hops + 1) + j) % pool); };
        std::array<std::string, 3> topic;
        for (auto& t : topic) t = vocab.word(rng.below(kFillerVocab));
        for (std::size_t j = 0; j < params.hops; ++j) {
            const std::size_t slot = slots[q * params.hops + j];
            std::string body = entity(j);
            if (j == 0) body += " " + topic[0] + " " + topic[1] + " " + topic[2];
            filler(body, kBodyWords / 2);
            body += " " + entity(j + 1);
            filler(body, 2);
            body += '.';
            decorate(body);
            bodies[slot] = std::move(body);
            gold_slots[q].push_back(slot);
        }
        questions[q] = "what " + topic[0] + " " + topic[1] + " of " + entity(0) + " is " + topic[2];
    }
    for (std::size_t i = n_queries * params.hops; i < params.n_docs; ++i) {
        std::string body;
        filler(body, 3);
        body += ' ';
        body += vocab.name(n_hubs + rng.below(pool));
        filler(body, kBodyWords / 2);
        decorate(body);
        bodies[slots[i]] = body.substr(1);
    }

    for (std::size_t d = 0; d < params.n_docs; ++d)
        out.corpus.add(Passage{format_ordinal("syn-", d), format_ordinal("synthetic-", d), std::move(bodies[d])});
    for (std::size_t q = 0; q < n_queries; ++q) {
        Query query{format_ordinal("synq-", q), questions[q], {}};
        for (std::size_t slot : gold_slots[q]) query.gold_ids.push_back(out.corpus[static_cast<DocId>(slot)].id);
        std::sort(query.gold_ids.begin(), query.gold_ids.end());
        out.queries.push_back(std::move(query));
    }
    out.stats.records = params.n_docs + n_queries;
    return out;
}

}  // namespace sprig
