#include "sprig/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "sprig/error.hpp"
#include "sprig/text.hpp"

namespace sprig {

using json = nlohmann::json;

namespace {

constexpr const char* kComponent = "corpus_store";

[[noreturn]] void fail(const std::string& message) { throw Error(kComponent, message); }

void sort_unique(std::vector<std::string>& ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
}

std::string record_id(const json& record, std::size_t index) {
    for (const char* key : {"_id", "id"}) {
        auto it = record.find(key);
        if (it != record.end()) {
            if (it->is_string()) return it->get<std::string>();
            if (it->is_number_integer()) return std::to_string(it->get<long long>());
        }
    }
    fail("record " + std::to_string(index) + ": missing string field '_id'");
}

// Distractor-setting layout shared by HotpotQA and 2WikiMultiHopQA.
Dataset parse_multihop_json(std::istream& in) {
    json root;
    try {
        in >> root;
    } catch (const json::exception& e) {
        fail(std::string("malformed JSON document: ") + e.what());
    }
    if (!root.is_array()) fail("expected a top-level JSON array of records");

    Dataset out;
    std::unordered_map<std::string, DocId> by_title_text;
    for (std::size_t r = 0; r < root.size(); ++r) {
        const json& record = root[r];
        const std::string where = "record " + std::to_string(r);
        if (!record.is_object()) fail(where + ": not an object");
        const std::string rid = record_id(record, r);
        auto question = record.find("question");
        auto context = record.find("context");
        if (question == record.end() || !question->is_string())
            fail(where + " (" + rid + "): missing string field 'question'");
        if (context == record.end() || !context->is_array())
            fail(where + " (" + rid + "): missing array field 'context'");

        std::unordered_map<std::string, DocId> title_to_doc;
        for (const json& entry : *context) {
            if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() || !entry[1].is_array())
                fail(where + " (" + rid + "): context entries must be [title, [sentences]]");
            const std::string title = normalize_text(entry[0].get<std::string>());
            std::string joined;
            for (const json& sentence : entry[1]) {
                if (!sentence.is_string()) fail(where + " (" + rid + "): non-string sentence under '" + title + "'");
                if (!joined.empty()) joined.push_back(' ');
                joined += sentence.get<std::string>();
            }
            std::string text = normalize_text(joined);
            if (text.empty()) {
                ++out.stats.empty_passages;
                continue;
            }
            const std::string key = title + '\x1f' + text;
            DocId doc;
            if (auto it = by_title_text.find(key); it != by_title_text.end()) {
                doc = it->second;
                ++out.stats.duplicate_passages;
            } else {
                doc = out.corpus.add(Passage{rid + "::" + title, title, std::move(text)});
                by_title_text.emplace(key, doc);
            }
            title_to_doc.emplace(title, doc);
        }

        Query query{rid, normalize_text(question->get<std::string>()), {}};
        if (auto facts = record.find("supporting_facts"); facts != record.end()) {
            if (!facts->is_array()) fail(where + " (" + rid + "): 'supporting_facts' must be an array");
            for (const json& fact : *facts) {
                if (!fact.is_array() || fact.empty() || !fact[0].is_string())
                    fail(where + " (" + rid + "): supporting facts must be [title, sentence_index]");
                auto hit = title_to_doc.find(normalize_text(fact[0].get<std::string>()));
                if (hit == title_to_doc.end()) {
                    ++out.stats.missing_support_titles;
                    continue;
                }
                query.gold_ids.push_back(out.corpus[hit->second].id);
            }
        }
        sort_unique(query.gold_ids);
        if (query.gold_ids.empty()) ++out.stats.empty_gold_queries;
        out.queries.push_back(std::move(query));
        ++out.stats.records;
    }
    return out;
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) fail(where + ": missing string field '" + key + "'");
    return it->get<std::string>();
}

Query parse_query_object(const json& obj, const std::string& where) {
    Query q{string_field(obj, "id", where), normalize_text(string_field(obj, "question", where)), {}};
    if (auto gold = obj.find("gold_ids"); gold != obj.end()) {
        if (!gold->is_array()) fail(where + ": 'gold_ids' must be an array");
        for (const json& g : *gold) {
            if (!g.is_string()) fail(where + ": 'gold_ids' entries must be strings");
            q.gold_ids.push_back(g.get<std::string>());
        }
    }
    sort_unique(q.gold_ids);
    return q;
}

void resolve_gold(std::vector<Query>& queries, const Corpus& corpus, LoadStats& stats) {
    for (Query& q : queries) {
        auto keep = std::remove_if(q.gold_ids.begin(), q.gold_ids.end(), [&](const std::string& id) {
            return !corpus.find(id).has_value();
        });
        stats.unresolved_gold_ids += static_cast<std::size_t>(std::distance(keep, q.gold_ids.end()));
        q.gold_ids.erase(keep, q.gold_ids.end());
        if (q.gold_ids.empty()) ++stats.empty_gold_queries;
    }
}

Dataset parse_generic_jsonl(std::istream& in) {
    Dataset out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (normalize_text(line).empty()) continue;
        const std::string where = "line " + std::to_string(line_no);
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            fail(where + ": malformed JSON: " + e.what());
        }
        if (!obj.is_object()) fail(where + ": expected a JSON object");
        ++out.stats.records;
        if (obj.contains("question")) {
            out.queries.push_back(parse_query_object(obj, where));
            continue;
        }
        Passage p{string_field(obj, "id", where), obj.contains("title") ? normalize_text(string_field(obj, "title", where)) : "",
                  normalize_text(string_field(obj, "text", where))};
        if (p.text.empty()) {
            ++out.stats.empty_passages;
            continue;
        }
        if (out.corpus.find(p.id)) fail(where + ": duplicate passage id '" + p.id + "'");
        out.corpus.add(std::move(p));
    }
    resolve_gold(out.queries, out.corpus, out.stats);
    return out;
}

}  // namespace

DocId Corpus::add(Passage passage) {
    if (passage.id.empty()) fail("passage id must be nonempty");
    if (passage.text.empty()) fail("passage '" + passage.id + "' has empty text");
    const auto ordinal = static_cast<DocId>(passages_.size());
    if (!index_of_.emplace(passage.id, ordinal).second) fail("duplicate passage id '" + passage.id + "'");
    passages_.push_back(std::move(passage));
    return ordinal;
}

std::optional<DocId> Corpus::find(std::string_view id) const {
    auto it = index_of_.find(std::string(id));
    if (it == index_of_.end()) return std::nullopt;
    return it->second;
}

CorpusFormat parse_corpus_format(std::string_view name) {
    if (name == "hotpot_json") return CorpusFormat::hotpot_json;
    if (name == "wiki2_json") return CorpusFormat::wiki2_json;
    if (name == "generic_jsonl") return CorpusFormat::generic_jsonl;
    fail("unknown corpus format '" + std::string(name) + "'");
}

std::string_view to_string(CorpusFormat format) {
    switch (format) {
        case CorpusFormat::hotpot_json: return "hotpot_json";
        case CorpusFormat::wiki2_json: return "wiki2_json";
        case CorpusFormat::generic_jsonl: return "generic_jsonl";
    }
    return "unknown";
}

Dataset parse_corpus(std::istream& in, CorpusFormat format) {
    if (format == CorpusFormat::generic_jsonl) return parse_generic_jsonl(in);
    return parse_multihop_json(in);
}

Dataset load_corpus(const std::string& path, CorpusFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open '" + path + "'");
    return parse_corpus(in, format);
}

std::vector<Query> load_queries(const std::string& path, const Corpus& corpus, LoadStats* stats) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open '" + path + "'");
    LoadStats local;
    std::vector<Query> queries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (normalize_text(line).empty()) continue;
        const std::string where = path + " line " + std::to_string(line_no);
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            fail(where + ": malformed JSON: " + e.what());
        }
        if (!obj.is_object()) fail(where + ": expected a JSON object");
        queries.push_back(parse_query_object(obj, where));
    }
    resolve_gold(queries, corpus, local);
    if (stats) *stats = local;
    return queries;
}

void write_generic_jsonl(const Dataset& dataset, std::ostream& out) {
    for (const Passage& p : dataset.corpus.passages())
        out << json{{"id", p.id}, {"title", p.title}, {"text", p.text}}.dump() << '\n';
    for (const Query& q : dataset.queries)
        out << json{{"id", q.id}, {"question", q.question}, {"gold_ids", q.gold_ids}}.dump() << '\n';
}

}  // namespace sprig
