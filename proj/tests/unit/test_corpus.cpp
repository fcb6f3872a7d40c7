#include <doctest.h>

#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "sprig/corpus.hpp"
#include "sprig/entities.hpp"
#include "sprig/error.hpp"
#include "sprig/text.hpp"
#include "testing.hpp"

using namespace sprig;

namespace {

Dataset parse(const std::string& s, CorpusFormat f) {
    std::istringstream in(s);
    return parse_corpus(in, f);
}

std::string dump(const Dataset& d) {
    std::ostringstream out;
    write_generic_jsonl(d, out);
    return out.str();
}

}  // namespace

TEST_CASE("normalize_text collapses whitespace and keeps case") {
    CHECK(normalize_text("  The \t Eiffel\n\nTower  ") == "The Eiffel Tower");
    CHECK(normalize_text("") == "");
    CHECK(normalize_text(" \r\n ") == "");
}

TEST_CASE("normalize_text is idempotent on random byte strings") {
    std::mt19937_64 rng(11);
    const std::string alphabet = "ab C\t\n\r\v\f.-";
    for (int trial = 0; trial < 500; ++trial) {
        std::string s;
        const std::size_t len = rng() % 40;
        for (std::size_t i = 0; i < len; ++i) s.push_back(alphabet[rng() % alphabet.size()]);
        const std::string once = normalize_text(s);
        CHECK(normalize_text(once) == once);
        CHECK(once.find("  ") == std::string::npos);
    }
}

TEST_CASE("tokenize lowercases alphanumeric runs") {
    CHECK(tokenize("The U.S. had 3-Way talks") ==
          std::vector<std::string>{"the", "u", "s", "had", "3", "way", "talks"});
}

TEST_CASE("single hotpot record maps to one passage and its gold") {
    const auto d = parse(R"([{"_id":"q1","question":"Q?","context":[["A",["s1","s2"]]],"supporting_facts":[["A",0]]}])",
                         CorpusFormat::hotpot_json);
    REQUIRE(d.corpus.size() == 1);
    CHECK(d.corpus[0].id == "q1::A");
    CHECK(d.corpus[0].text == "s1 s2");
    REQUIRE(d.queries.size() == 1);
    CHECK(d.queries[0].id == "q1");
    CHECK(d.queries[0].gold_ids == std::vector<std::string>{"q1::A"});
}

TEST_CASE("duplicate (title, text) across records keeps the first id") {
    const std::string doc = R"([
      {"_id":"a","question":"x","context":[["T",["same"]],["U",["u1"]]],"supporting_facts":[["T",0]]},
      {"_id":"b","question":"y","context":[["T",["same"]],["T",["other text"]]],"supporting_facts":[["T",0]]}
    ])";
    const auto d = parse(doc, CorpusFormat::wiki2_json);
    CHECK(d.corpus.size() == 3);
    CHECK(d.stats.duplicate_passages == 1);
    CHECK(d.corpus.find("a::T").has_value());
    CHECK(d.queries[1].gold_ids.front() == "a::T");
}

TEST_CASE("supporting title absent from context is counted and skipped") {
    const auto d = parse(R"([{"_id":"q","question":"x","context":[["A",["s"]]],"supporting_facts":[["B",0],["A",0]]}])",
                         CorpusFormat::hotpot_json);
    CHECK(d.stats.missing_support_titles == 1);
    CHECK(d.queries[0].gold_ids == std::vector<std::string>{"q::A"});
}

TEST_CASE("malformed record names its index") {
    const std::string doc = R"([{"_id":"q","question":"x","context":[]}, {"_id":"r","context":[]}])";
    try {
        parse(doc, CorpusFormat::hotpot_json);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("record 1") != std::string::npos);
        CHECK(e.component() == "corpus_store");
    }
}

TEST_CASE("generic jsonl passages and queries") {
    const std::string doc =
        "{\"id\":\"d1\",\"title\":\"T\",\"text\":\"  hello   world \"}\n"
        "{\"id\":\"d2\",\"text\":\"second\"}\n"
        "{\"id\":\"q1\",\"question\":\"hello?\",\"gold_ids\":[\"d2\",\"d1\",\"missing\"]}\n";
    const auto d = parse(doc, CorpusFormat::generic_jsonl);
    REQUIRE(d.corpus.size() == 2);
    CHECK(d.corpus[0].text == "hello world");
    CHECK(d.corpus[0].content() == "T hello world");
    CHECK(d.corpus[1].content() == "second");
    CHECK(d.queries[0].gold_ids == std::vector<std::string>{"d1", "d2"});
    CHECK(d.stats.unresolved_gold_ids == 1);

    CHECK_THROWS_AS(parse("{\"id\":\"x\",\"text\":\"a\"}\n{\"id\":\"x\",\"text\":\"b\"}\n", CorpusFormat::generic_jsonl),
                    Error);
    CHECK_THROWS_AS(parse("{not json}\n", CorpusFormat::generic_jsonl), Error);
}

TEST_CASE("generic jsonl round trip is stable") {
    const auto d = generate_synthetic({40, 30, 2, 3});
    const std::string first = dump(d);
    const auto back = parse(first, CorpusFormat::generic_jsonl);
    CHECK(dump(back) == first);
}

TEST_CASE("corpus rejects empty and duplicate ids") {
    Corpus c;
    CHECK_THROWS_AS(c.add({"", "", "x"}), Error);
    CHECK_THROWS_AS(c.add({"a", "", ""}), Error);
    c.add({"a", "", "x"});
    CHECK_THROWS_AS(c.add({"a", "", "y"}), Error);
    CHECK(c.find("a") == DocId{0});
    CHECK_FALSE(c.find("b").has_value());
}

TEST_CASE("index_of is a bijection and gold ids resolve") {
    const auto d = generate_synthetic({200, 300, 2, 9});
    std::set<std::string> ids;
    for (DocId i = 0; i < d.corpus.size(); ++i) {
        CHECK(d.corpus.find(d.corpus[i].id) == i);
        ids.insert(d.corpus[i].id);
    }
    CHECK(ids.size() == d.corpus.size());
    for (const auto& q : d.queries)
        for (const auto& g : q.gold_ids) CHECK(d.corpus.find(g).has_value());
}

TEST_CASE("synthetic generation is deterministic") {
    CHECK(dump(generate_synthetic({10, 6, 2, 7})) == dump(generate_synthetic({10, 6, 2, 7})));
    CHECK(dump(generate_synthetic({10, 6, 2, 7})) != dump(generate_synthetic({10, 6, 2, 8})));
}

TEST_CASE("synthetic preconditions") {
    CHECK_THROWS_AS(generate_synthetic({3, 6, 2, 7}), Error);
    CHECK_THROWS_AS(generate_synthetic({10, 2, 2, 7}), Error);
    CHECK_THROWS_AS(generate_synthetic({10, 6, 0, 7}), Error);
}

TEST_CASE("synthetic chains have hops gold docs sharing a bridge entity") {
    // std::regex stands in as an independent extractor for ASCII text.
    const std::regex pattern(R"(\b[A-Z][a-z]+(?:\s+[A-Z][a-z]+){0,3}\b)");
    auto mentions = [&](const std::string& text) {
        std::set<std::string> out;
        for (auto it = std::sregex_iterator(text.begin(), text.end(), pattern); it != std::sregex_iterator(); ++it)
            out.insert(it->str());
        return out;
    };
    for (std::size_t hops : {2u, 3u}) {
        const auto d = generate_synthetic({300, 450, hops, 5});
        REQUIRE_FALSE(d.queries.empty());
        for (const auto& q : d.queries) {
            REQUIRE(q.gold_ids.size() == hops);
            std::vector<std::set<std::string>> sets;
            for (const auto& g : q.gold_ids) sets.push_back(mentions(d.corpus[*d.corpus.find(g)].text));
            // Gold ids are sorted, not in chain order, so check that the
            // chain graph over gold docs is connected.
            std::vector<bool> reached(hops, false);
            reached[0] = true;
            for (std::size_t round = 0; round < hops; ++round)
                for (std::size_t a = 0; a < hops; ++a)
                    for (std::size_t b = 0; b < hops; ++b) {
                        if (!reached[a] || reached[b]) continue;
                        for (const auto& m : sets[a])
                            if (sets[b].count(m)) reached[b] = true;
                    }
            for (bool r : reached) CHECK(r);
        }
    }
}
