#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sprig/ranked_list.hpp"

namespace sprig {

struct Passage {
    std::string id;
    std::string title;
    std::string text;

    /// What retrieval and entity extraction see: "title text".
    std::string content() const { return title.empty() ? text : title + " " + text; }
};

struct Query {
    std::string id;
    std::string question;
    std::vector<std::string> gold_ids;  // sorted, unique
};

/// Ordered, immutable-after-load passage pool with an id -> ordinal index.
class Corpus {
public:
    /// Appends a passage; throws on empty or duplicate id, or empty text.
    DocId add(Passage passage);

    std::size_t size() const noexcept { return passages_.size(); }
    bool empty() const noexcept { return passages_.empty(); }
    const Passage& operator[](DocId i) const { return passages_[i]; }
    const std::vector<Passage>& passages() const noexcept { return passages_; }
    std::optional<DocId> find(std::string_view id) const;

private:
    std::vector<Passage> passages_;
    std::unordered_map<std::string, DocId> index_of_;
};

enum class CorpusFormat { hotpot_json, wiki2_json, generic_jsonl };

CorpusFormat parse_corpus_format(std::string_view name);
std::string_view to_string(CorpusFormat format);

/// Counters for everything the loader tolerated instead of failing on.
struct LoadStats {
    std::size_t records = 0;
    std::size_t duplicate_passages = 0;
    std::size_t missing_support_titles = 0;
    std::size_t unresolved_gold_ids = 0;
    std::size_t empty_passages = 0;
    std::size_t empty_gold_queries = 0;
};

struct Dataset {
    Corpus corpus;
    std::vector<Query> queries;
    LoadStats stats;
};

Dataset load_corpus(const std::string& path, CorpusFormat format);
Dataset parse_corpus(std::istream& in, CorpusFormat format);

/// Query-only file in the generic_jsonl query schema; gold ids are resolved
/// against `corpus` and unresolved ones dropped with a counter.
std::vector<Query> load_queries(const std::string& path, const Corpus& corpus, LoadStats* stats = nullptr);

/// Writes passages then queries in the generic_jsonl schemas.
void write_generic_jsonl(const Dataset& dataset, std::ostream& out);

/// Desk-scale multi-hop fixture. Each query plants an entity chain
/// e0 -> d1 -> e1 -> d2 ... of length `hops`; the question names e0 and a few
/// topic words found only in the first chain document.
struct SyntheticParams {
    std::size_t n_docs = 1000;
    std::size_t n_entities = 1500;
    std::size_t hops = 2;
    std::uint64_t seed = 7;
};

Dataset generate_synthetic(const SyntheticParams& params);

}  // namespace sprig
