#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "sprig/commands.hpp"
#include "sprig/error.hpp"
#include "sprig/pipeline.hpp"
#include "testing.hpp"

using namespace sprig;
using nlohmann::json;

namespace {

RunConfig synthetic_config(const std::string& out, Method method = Method::graph_hybrid) {
    RunConfig c;
    c.dataset.synthetic = true;
    c.dataset.synthetic_params.n_docs = 200;
    c.dataset.synthetic_params.n_entities = 300;
    c.dataset.synthetic_params.seed = 11;
    c.method = method;
    c.output_dir = out;
    c.eval.threads = 2;
    return c;
}

std::size_t line_count(const std::string& path) {
    std::ifstream in(path);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) n += !line.empty();
    return n;
}

}  // namespace

TEST_CASE("indexing twice yields identical artifacts") {
    testing::TempDir a, b;
    const auto ma = cmd_index(synthetic_config(a.path()));
    const auto mb = cmd_index(synthetic_config(b.path()));
    CHECK(ma["artifacts"] == mb["artifacts"]);
    CHECK(ma["index_fingerprint"] == mb["index_fingerprint"]);
    CHECK(testing::read_file(a.file("graph.bin")) == testing::read_file(b.file("graph.bin")));
    CHECK(testing::read_file(a.file("lexical.idx")) == testing::read_file(b.file("lexical.idx")));
}

TEST_CASE("eval writes one prediction per query and is deterministic") {
    testing::TempDir a, b;
    auto ca = synthetic_config(a.path()), cb = synthetic_config(b.path());
    cb.eval.threads = 1;
    const auto sa = cmd_eval(ca);
    const auto sb = cmd_eval(cb);
    const auto dataset = load_dataset(ca);
    CHECK(line_count(a.file("graph_hybrid.predictions.jsonl")) == dataset->queries.size());
    CHECK(testing::read_file(a.file("graph_hybrid.predictions.jsonl")) ==
          testing::read_file(b.file("graph_hybrid.predictions.jsonl")));
    CHECK(sa.report.aggregates.recall_at_10 == sb.report.aggregates.recall_at_10);
    CHECK(std::filesystem::exists(a.file("graph_hybrid.summary.json")));

    // A following eval reuses the indexed artifacts and matches exactly.
    testing::TempDir c;
    auto cc = synthetic_config(c.path());
    cmd_index(cc);
    const auto sc = cmd_eval(cc);
    CHECK(sc.reused_artifacts);
    CHECK(testing::read_file(c.file("graph_hybrid.predictions.jsonl")) ==
          testing::read_file(a.file("graph_hybrid.predictions.jsonl")));
}

TEST_CASE("queries limit") {
    testing::TempDir a;
    auto c = synthetic_config(a.path(), Method::bm25);
    c.eval.queries_limit = 7;
    cmd_eval(c);
    CHECK(line_count(a.file("bm25.predictions.jsonl")) == 7);
}

TEST_CASE("every synthetic-compatible method returns ranked lists") {
    RunConfig base = synthetic_config("unused");
    auto dataset = load_dataset(base);
    for (Method m : {Method::bm25, Method::rm3, Method::bm25_2step, Method::graph, Method::graph_hybrid,
                     Method::tfidf_graph}) {
        RunConfig c = base;
        c.method = m;
        Engine engine(c, build_artifacts(c, dataset));
        const auto outcome = engine.run(dataset->queries.front());
        CHECK_MESSAGE(!outcome.ranked.empty(), to_string(m));
        CHECK(outcome.ranked.size() <= c.eval.top_k);
        for (std::size_t i = 1; i < outcome.ranked.size(); ++i)
            CHECK(outcome.ranked.items[i - 1].score >= outcome.ranked.items[i].score);
    }
}

TEST_CASE("graph retrieval falls back on queries without entities") {
    RunConfig c = synthetic_config("unused", Method::graph);
    auto dataset = load_dataset(c);
    Engine engine(c, build_artifacts(c, dataset));
    const Query plain{"none", "which of these is lowercase only", {}};
    const auto outcome = engine.run(plain);
    CHECK(outcome.fallback);
    CHECK_FALSE(outcome.ranked.empty());
    CHECK(outcome.edge_visits > 0);
}

TEST_CASE("dense methods fail before any query runs") {
    testing::TempDir dir;
    const auto corpus = dir.file("c.jsonl");
    testing::write_file(corpus, R"({"id":"a","title":"A","text":"Alpha text"}
{"query_id":"q","question":"Alpha?","gold_ids":["a"]}
)");
    RunConfig c;
    c.dataset.path = corpus;
    c.dataset.format = CorpusFormat::generic_jsonl;
    c.method = Method::dense;
    c.output_dir = dir.file("out");
    CHECK_THROWS_AS(cmd_eval(c), Error);
    CHECK_FALSE(std::filesystem::exists(dir.file("out/dense.predictions.jsonl")));
}

TEST_CASE("one-cell ablation reproduces eval") {
    testing::TempDir a, b;
    auto c = synthetic_config(a.path());
    c.ablate.grid = json{{"ppr.alpha", {0.15}}};
    c.ablate.subset_size = 10000;
    const auto rows = cmd_ablate(c);
    REQUIRE(rows.size() == 1);
    auto e = synthetic_config(b.path());
    const auto summary = cmd_eval(e);
    CHECK(rows[0].report.aggregates.recall_at_10 == summary.report.aggregates.recall_at_10);
    CHECK(rows[0].report.aggregates.mrr == summary.report.aggregates.mrr);
    CHECK(std::filesystem::exists(a.file("ablation.tsv")));
}

TEST_CASE("ablation cells share one query subset") {
    testing::TempDir a;
    auto c = synthetic_config(a.path());
    c.ablate.grid = json{{"ppr.alpha", {0.1, 0.5}}, {"seeds.k", {3, 10}}};
    c.ablate.subset_size = 20;
    const auto rows = cmd_ablate(c);
    REQUIRE(rows.size() == 4);
    for (const auto& r : rows) CHECK(r.report.aggregates.evaluated + r.report.empty_gold_queries == 20);
    for (std::size_t i = 1; i < rows.size(); ++i)
        CHECK(rows[i - 1].report.aggregates.recall_at_10 >= rows[i].report.aggregates.recall_at_10);

    const auto s1 = sample_subset(100, 20, 5), s2 = sample_subset(100, 20, 5);
    CHECK(s1 == s2);
    CHECK(std::is_sorted(s1.begin(), s1.end()));
    CHECK(sample_subset(10, 50, 5).size() == 10);
}

TEST_CASE("significance") {
    testing::TempDir dir;
    auto c = synthetic_config(dir.path(), Method::bm25);
    cmd_eval(c);
    c.method = Method::graph;
    cmd_eval(c);
    const auto bm25 = dir.file("bm25.predictions.jsonl"), graph = dir.file("graph.predictions.jsonl");

    const auto same = cmd_significance(c, bm25, {bm25});
    CHECK(same[0].result.delta_mean == 0.0);
    CHECK(same[0].result.wins == 0);
    CHECK(same[0].result.losses == 0);

    const auto forward = cmd_significance(c, bm25, {graph});
    const auto backward = cmd_significance(c, graph, {bm25});
    CHECK(forward[0].method == "graph");
    CHECK(forward[0].result.delta_mean == doctest::Approx(-backward[0].result.delta_mean));
    CHECK(forward[0].result.wins == backward[0].result.losses);
    CHECK(forward[0].result.ties == backward[0].result.ties);
    CHECK(std::filesystem::exists(dir.file("significance.tsv")));

    testing::write_file(dir.file("alien.predictions.jsonl"), R"({"query_id":"zzz","ranked_ids":[]})" "\n");
    CHECK_THROWS_AS(cmd_significance(c, bm25, {dir.file("alien.predictions.jsonl")}), Error);
}

TEST_CASE("stats and small bench") {
    testing::TempDir dir;
    auto c = synthetic_config(dir.path());
    const auto stats = cmd_stats(c);
    REQUIRE(stats.size() == 2);
    CHECK(stats[0].stats.edges > 0);

    c.bench.sizes = {100, 200};
    c.bench.trials = 1;
    c.bench.queries = 5;
    const auto bench = cmd_bench(c);
    CHECK(bench.rows.size() == 2);
    CHECK(bench.rows[1].graph_edges > bench.rows[0].graph_edges);
    CHECK(std::filesystem::exists(dir.file("bench.tsv")));
}

namespace {

/// Writes the synthetic corpus to disk with embeddings where every query
/// vector equals its first gold passage's vector, plus rerank scores that
/// favour gold passages.
RunConfig dense_fixture(const testing::TempDir& dir) {
    RunConfig s = synthetic_config("unused");
    const auto dataset = load_dataset(s);
    {
        std::ofstream out(dir.file("c.jsonl"));
        write_generic_jsonl(*dataset, out);
    }
    const std::uint32_t dim = 16;
    std::mt19937_64 rng(91);
    std::normal_distribution<float> normal;
    std::vector<float> pv;
    std::vector<std::string> pids;
    for (DocId d = 0; d < dataset->corpus.size(); ++d) {
        for (std::uint32_t j = 0; j < dim; ++j) pv.push_back(normal(rng));
        pids.push_back(dataset->corpus[d].id);
    }
    std::vector<float> qv;
    std::vector<std::string> qids;
    std::ofstream scores(dir.file("scores.jsonl"));
    for (const auto& q : dataset->queries) {
        if (q.gold_ids.empty()) continue;
        const auto row = *dataset->corpus.find(q.gold_ids.front());
        qv.insert(qv.end(), pv.begin() + row * dim, pv.begin() + (row + 1) * dim);
        qids.push_back(q.id);
        for (const auto& g : q.gold_ids)
            scores << json{{"query_id", q.id}, {"passage_id", g}, {"score", 100.0}}.dump() << "\n";
    }
    write_vectors(dir.file("p.vec"), dir.file("p.ids"), dim, pv, pids);
    write_vectors(dir.file("q.vec"), dir.file("q.ids"), dim, qv, qids);

    RunConfig c;
    c.dataset.path = dir.file("c.jsonl");
    c.dataset.format = CorpusFormat::generic_jsonl;
    c.dataset.passage_vectors = dir.file("p.vec");
    c.dataset.passage_vector_ids = dir.file("p.ids");
    c.dataset.query_vectors = dir.file("q.vec");
    c.dataset.query_vector_ids = dir.file("q.ids");
    c.dataset.rerank_scores = dir.file("scores.jsonl");
    c.output_dir = dir.file("out");
    return c;
}

}  // namespace

TEST_CASE("dense and rerank methods on disk fixtures") {
    testing::TempDir dir;
    RunConfig base = dense_fixture(dir);
    auto dataset = load_dataset(base);
    REQUIRE(dataset->queries.size() > 10);

    auto eval = [&](Method m, DenseSearch search = DenseSearch::exact) {
        RunConfig c = base;
        c.method = m;
        c.dense.search = search;
        validate(c);
        Engine engine(c, build_artifacts(c, dataset));
        return engine.evaluate(dataset->queries).report.aggregates;
    };
    CHECK(eval(Method::dense).hit_at_10 == 1.0);
    CHECK(eval(Method::dense).mrr == 1.0);
    CHECK(eval(Method::dense, DenseSearch::hnsw).hit_at_10 >= 0.95);
    const double bm25_hit = eval(Method::bm25).hit_at_10;
    CHECK(eval(Method::bm25_ce).hit_at_10 >= bm25_hit);
    CHECK(eval(Method::rrf_ce).mrr == 1.0);
    for (Method m : {Method::rrf, Method::graph_dense, Method::graph_rrf, Method::rrf_ppr_fusion})
        CHECK_MESSAGE(eval(m).hit_at_10 > 0.5, to_string(m));
}

TEST_CASE("missing query vectors are reported by query id") {
    testing::TempDir dir;
    RunConfig c = dense_fixture(dir);
    c.method = Method::dense;
    auto dataset = load_dataset(c);
    Engine engine(c, build_artifacts(c, dataset));
    try {
        engine.run(Query{"unembedded", "Who?", {}});
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("unembedded") != std::string::npos);
    }
}
