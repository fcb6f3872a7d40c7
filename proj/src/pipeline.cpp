#include "sprig/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include "sprig/error.hpp"
#include "sprig/ppr.hpp"
#include "sprig/seeds.hpp"

namespace sprig {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

ExtractOptions extract_options(const RunConfig& config) {
    return {config.ner.normalization, config.ner.min_entity_len};
}

bool needs_mentions(Method m) { return uses_entity_graph(m) || m == Method::bm25_2step; }

}  // namespace

std::shared_ptr<Dataset> load_dataset(const RunConfig& config) {
    auto dataset = std::make_shared<Dataset>();
    if (config.dataset.synthetic) {
        *dataset = generate_synthetic(config.dataset.synthetic_params);
    } else {
        *dataset = load_corpus(config.dataset.path, config.dataset.format);
    }
    if (!config.dataset.queries.empty())
        dataset->queries = load_queries(config.dataset.queries, dataset->corpus, &dataset->stats);
    return dataset;
}

std::shared_ptr<Artifacts> build_artifacts(const RunConfig& config, std::shared_ptr<const Dataset> dataset,
                                           std::optional<BipartiteGraph> prebuilt_graph,
                                           std::optional<InvertedIndex> prebuilt_lexical) {
    validate(config);
    auto art = std::make_shared<Artifacts>();
    art->dataset = dataset;
    const Corpus& corpus = dataset->corpus;
    const auto total_start = Clock::now();

    auto start = Clock::now();
    art->lexical = prebuilt_lexical ? std::move(*prebuilt_lexical) : InvertedIndex(corpus);
    art->timings.lexical_seconds = seconds_since(start);

    const Method m = config.method;
    if (needs_mentions(m) && !(uses_entity_graph(m) && prebuilt_graph && m != Method::bm25_2step)) {
        start = Clock::now();
        if (config.ner.alias) art->aliases = build_alias_map(corpus, config.ner.normalization);
        const AliasMap* aliases = config.ner.alias ? &art->aliases : nullptr;
        if (config.ner.mode == NerMode::external)
            art->mentions = load_external_entities(config.dataset.entities, corpus, extract_options(config), aliases);
        else
            art->mentions = extract_corpus(corpus, extract_options(config), aliases);
        art->timings.extract_seconds = seconds_since(start);
    } else if (config.ner.alias) {
        art->aliases = build_alias_map(corpus, config.ner.normalization);
    }

    start = Clock::now();
    if (uses_entity_graph(m)) {
        if (prebuilt_graph) {
            art->entity_graph = std::move(*prebuilt_graph);
        } else {
            GraphParams params{config.ner.min_entity_len, config.graph.min_entity_df, config.graph.max_entity_df_ratio,
                               config.graph.hub_penalty};
            BipartiteGraph g = build_entity_graph(corpus.size(), art->mentions, params);
            if (config.graph.prune_hub_pct > 0.0 || config.graph.outdegree_cap)
                g = prune_graph(g, config.graph.prune_hub_pct, config.graph.outdegree_cap);
            art->entity_graph = std::move(g);
        }
        if (art->entity_graph->n_docs() != corpus.size())
            throw Error("cli_app", "graph document count does not match the corpus");
    } else if (m == Method::tfidf_graph) {
        if (prebuilt_graph) {
            art->term_graph = std::move(*prebuilt_graph);
        } else {
            TermGraphParams params{config.graph.term_min_df, config.graph.term_max_df_ratio, config.graph.hub_penalty};
            art->term_graph = build_term_graph(corpus, params);
        }
        if (art->term_graph->n_docs() != corpus.size())
            throw Error("cli_app", "graph document count does not match the corpus");
    }
    art->timings.graph_seconds = seconds_since(start);

    if (uses_dense(m)) {
        start = Clock::now();
        VectorStore raw = load_vectors(config.dataset.passage_vectors, config.dataset.passage_vector_ids);
        art->passage_vectors = align_to_corpus(raw, corpus);
        art->query_vectors = load_vectors(config.dataset.query_vectors, config.dataset.query_vector_ids);
        if (art->query_vectors->dim != art->passage_vectors->dim)
            throw Error("cli_app", "query vectors have dim " + std::to_string(art->query_vectors->dim) +
                                       ", passage vectors have dim " + std::to_string(art->passage_vectors->dim));
        for (std::size_t i = 0; i < art->query_vectors->count(); ++i)
            art->query_rows.emplace(art->query_vectors->ids[i], i);
        if (config.dense.search == DenseSearch::hnsw) art->hnsw = HnswIndex::build(*art->passage_vectors, config.dense.hnsw);
        art->timings.dense_seconds = seconds_since(start);
    }

    if (uses_rerank(m)) art->rerank_scores = ExternalScores::load(config.dataset.rerank_scores);

    art->timings.total_seconds = seconds_since(total_start);
    return art;
}

Engine::Engine(RunConfig config, std::shared_ptr<const Artifacts> artifacts)
    : config_(std::move(config)), artifacts_(std::move(artifacts)) {
    validate(config_);
    const Method m = config_.method;
    if (uses_entity_graph(m) && !artifacts_->entity_graph) throw Error("cli_app", "artifacts lack an entity graph");
    if (m == Method::tfidf_graph && !artifacts_->term_graph) throw Error("cli_app", "artifacts lack a term graph");
    if (uses_dense(m) && !artifacts_->passage_vectors) throw Error("cli_app", "artifacts lack passage vectors");
    if (uses_dense(m) && config_.dense.search == DenseSearch::hnsw && !artifacts_->hnsw)
        throw Error("cli_app", "artifacts lack an HNSW index");
    if (uses_rerank(m) && !artifacts_->rerank_scores) throw Error("cli_app", "artifacts lack rerank scores");
    if (m == Method::bm25_2step && artifacts_->mentions.size() != artifacts_->dataset->corpus.size())
        throw Error("cli_app", "artifacts lack passage entities");
}

RankedList Engine::lexical(const Query& query, std::size_t k) const {
    return bm25_search(artifacts_->lexical, query.question, k, config_.bm25);
}

RankedList Engine::dense(const Query& query, std::size_t k) const {
    auto it = artifacts_->query_rows.find(query.id);
    if (it == artifacts_->query_rows.end()) throw Error("cli_app", "no query vector for query '" + query.id + "'");
    auto vec = artifacts_->query_vectors->row(it->second);
    if (config_.dense.search == DenseSearch::exact) return exact_search(*artifacts_->passage_vectors, vec, k);
    return artifacts_->hnsw->search(*artifacts_->passage_vectors, vec, k, std::max(config_.dense.ef_search, k));
}

RankedList Engine::fused(const Query& query) const {
    std::vector<RankedList> lists;
    lists.push_back(lexical(query, config_.rrf.depth));
    lists.push_back(dense(query, config_.rrf.depth));
    return rrf_fuse(lists, config_.rrf);
}

QueryOutcome Engine::traverse(const Query&, const BipartiteGraph& graph, const SeedVector& entity_seed,
                              const SeedVector& passage_seed, const RankedList* bm25_hint) const {
    QueryOutcome out;
    SeedVector seed;
    if (entity_seed.empty() && passage_seed.empty()) {
        auto fb = fallback_seed(graph.n_docs(), config_.seeds.fallback, bm25_hint);
        seed = std::move(fb.seed);
        out.fallback = true;
        out.fallback_degraded = fb.degraded;
    } else {
        seed = mix_seeds(entity_seed, passage_seed, config_.seeds.mixing);
    }
    PprScores scores = config_.ppr.mode == PprMode::power
                           ? ppr_power(graph, seed, config_.ppr.alpha, config_.ppr.max_iter)
                           : ppr_push(graph, seed, config_.ppr.alpha, config_.ppr.epsilon, config_.ppr.max_pushes);
    out.edge_visits = scores.edge_visits;
    out.ranked = rank_documents(graph, scores, config_.eval.top_k);
    return out;
}

QueryOutcome Engine::run(const Query& query) const {
    const auto start = Clock::now();
    const std::size_t top_k = config_.eval.top_k;
    const Artifacts& art = *artifacts_;
    const AliasMap* aliases = config_.ner.alias ? &art.aliases : nullptr;
    QueryOutcome out;
    double seed_seconds = 0.0;

    auto entity_side = [&](const BipartiteGraph& g) {
        auto matched = match_query_entities(query.question, g, extract_options(config_), aliases);
        return entity_seeds(g, matched, config_.seeds.q);
    };
    auto run_graph = [&](const SeedVector& se, const SeedVector& sd, const RankedList* hint) {
        seed_seconds = seconds_since(start);
        out = traverse(query, *art.entity_graph, se, sd, hint);
    };

    switch (config_.method) {
        case Method::bm25:
            out.ranked = lexical(query, top_k);
            break;
        case Method::rm3:
            out.ranked = rm3_search(art.lexical, query.question, top_k, config_.rm3, config_.bm25);
            break;
        case Method::bm25_2step:
            out.ranked = two_step_search(art.lexical, art.mentions, query.question, top_k, config_.two_step, config_.bm25);
            break;
        case Method::dense:
            out.ranked = dense(query, top_k);
            break;
        case Method::rrf:
            out.ranked = fused(query);
            sort_and_truncate(out.ranked.items, top_k);
            break;
        case Method::graph: {
            SeedVector se = entity_side(*art.entity_graph);
            RankedList hint;
            if (se.empty() && config_.seeds.fallback == FallbackPolicy::bm25_top1) hint = lexical(query, 1);
            run_graph(se, {}, &hint);
            break;
        }
        case Method::graph_hybrid: {
            SeedVector se = entity_side(*art.entity_graph);
            RankedList bm = lexical(query, config_.seeds.k);
            run_graph(se, passage_seeds(bm, config_.seeds.k, config_.seeds.weighting), &bm);
            break;
        }
        case Method::graph_dense: {
            SeedVector se = entity_side(*art.entity_graph);
            RankedList dn = dense(query, config_.dense_seed_k);
            RankedList hint;
            if (config_.seeds.fallback == FallbackPolicy::bm25_top1) hint = lexical(query, 1);
            run_graph(se, passage_seeds(dn, config_.dense_seed_k, config_.seeds.weighting), &hint);
            break;
        }
        case Method::graph_rrf: {
            SeedVector se = entity_side(*art.entity_graph);
            RankedList rr = fused(query);
            RankedList hint;
            if (config_.seeds.fallback == FallbackPolicy::bm25_top1) hint = lexical(query, 1);
            run_graph(se, passage_seeds(rr, config_.seeds.k, config_.seeds.weighting), &hint);
            break;
        }
        case Method::rrf_ppr_fusion: {
            const BipartiteGraph& g = *art.entity_graph;
            SeedVector se = entity_side(g);
            RankedList rr = fused(query);
            RankedList hint;
            if (config_.seeds.fallback == FallbackPolicy::bm25_top1) hint = lexical(query, 1);
            SeedVector sd = passage_seeds(rr, config_.seeds.k, config_.seeds.weighting);
            seed_seconds = seconds_since(start);
            SeedVector seed;
            if (se.empty() && sd.empty()) {
                auto fb = fallback_seed(g.n_docs(), config_.seeds.fallback, &hint);
                seed = std::move(fb.seed);
                out.fallback = true;
                out.fallback_degraded = fb.degraded;
            } else {
                seed = mix_seeds(se, sd, config_.seeds.mixing);
            }
            PprScores scores = config_.ppr.mode == PprMode::power
                                   ? ppr_power(g, seed, config_.ppr.alpha, config_.ppr.max_iter)
                                   : ppr_push(g, seed, config_.ppr.alpha, config_.ppr.epsilon, config_.ppr.max_pushes);
            out.edge_visits = scores.edge_visits;
            std::span<const double> doc_scores(scores.scores.data(), g.n_docs());
            out.ranked = score_fuse(rr, doc_scores, config_.fusion_weight);
            sort_and_truncate(out.ranked.items, top_k);
            break;
        }
        case Method::tfidf_graph: {
            const BipartiteGraph& g = *art.term_graph;
            auto matched = match_query_terms(query.question, g);
            SeedVector se = entity_seeds(g, matched, config_.seeds.q);
            RankedList hint;
            if (se.empty() && config_.seeds.fallback == FallbackPolicy::bm25_top1) hint = lexical(query, 1);
            seed_seconds = seconds_since(start);
            out = traverse(query, g, se, {}, &hint);
            break;
        }
        case Method::bm25_ce: {
            RankedList bm = lexical(query, std::max(top_k, config_.rerank_top_n));
            out.ranked = external_rerank(bm, query.id, art.dataset->corpus, *art.rerank_scores, config_.rerank_top_n);
            sort_and_truncate(out.ranked.items, top_k);
            break;
        }
        case Method::rrf_ce: {
            RankedList rr = fused(query);
            out.ranked = external_rerank(rr, query.id, art.dataset->corpus, *art.rerank_scores, config_.rerank_top_n);
            sort_and_truncate(out.ranked.items, top_k);
            break;
        }
    }

    const double total = seconds_since(start);
    out.ranked.timings.total_seconds = total;
    out.ranked.timings.seed_seconds = seed_seconds > 0.0 ? seed_seconds : total;
    out.ranked.timings.traversal_seconds = seed_seconds > 0.0 ? total - seed_seconds : 0.0;
    return out;
}

std::size_t Engine::thread_count(std::size_t jobs) const {
    std::size_t n = config_.eval.threads;
    if (n == 0) n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    return std::max<std::size_t>(1, std::min(n, jobs));
}

Evaluation Engine::evaluate(std::span<const Query> queries) const {
    std::vector<QueryOutcome> outcomes(queries.size());
    std::vector<std::exception_ptr> errors(queries.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < queries.size(); i = next++) {
            try {
                outcomes[i] = run(queries[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = thread_count(queries.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    Evaluation ev;
    const Corpus& corpus = artifacts_->dataset->corpus;
    std::size_t fallbacks = 0;
    double visits = 0.0;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto& o = outcomes[i];
        RunEntry entry;
        entry.timings = o.ranked.timings;
        entry.ranked_ids.reserve(o.ranked.size());
        for (const auto& item : o.ranked.items) entry.ranked_ids.push_back(corpus[item.doc].id);
        if (!ev.run.emplace(queries[i].id, std::move(entry)).second)
            throw Error("cli_app", "duplicate query id '" + queries[i].id + "'");
        fallbacks += o.fallback ? 1 : 0;
        ev.degraded_fallbacks += o.fallback_degraded ? 1 : 0;
        visits += static_cast<double>(o.edge_visits);
        ev.latencies.push_back(o.ranked.timings.total_seconds);
    }
    ev.report = compute_metrics(ev.run, queries, MetricOptions{config_.eval.include_empty_gold});
    ev.report.fallback_count = fallbacks;
    ev.report.fallback_rate = queries.empty() ? 0.0 : static_cast<double>(fallbacks) / static_cast<double>(queries.size());
    ev.report.config_hash = config_hash(config_);
    ev.mean_edge_visits = queries.empty() ? 0.0 : visits / static_cast<double>(queries.size());
    return ev;
}

double peak_rss_mib() {
    std::ifstream in("/proc/self/status");
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("VmHWM:", 0) == 0) {
            std::istringstream fields(line.substr(6));
            double kib = 0.0;
            fields >> kib;
            return kib / 1024.0;
        }
    }
    return 0.0;
}

}  // namespace sprig
