#include "sprig/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "sprig/error.hpp"

namespace sprig {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

constexpr const char* kGraphFile = "graph.bin";
constexpr const char* kLexicalFile = "lexical.idx";
constexpr const char* kManifestFile = "manifest.json";

fs::path prepare_output(const RunConfig& config) {
    fs::path dir(config.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cli_app", "cannot create output directory '" + dir.string() + "': " + ec.message());
    return dir;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cli_app", "cannot write '" + path.string() + "'");
    return out;
}

std::string file_fingerprint(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return fingerprint_bytes(buf.str());
}

bool has_graph(Method m) { return uses_entity_graph(m) || m == Method::tfidf_graph; }

const BipartiteGraph* graph_of(const Artifacts& art) {
    if (art.entity_graph) return &*art.entity_graph;
    if (art.term_graph) return &*art.term_graph;
    return nullptr;
}

json stats_json(const GraphStats& s) {
    return {{"nodes", s.nodes}, {"edges", s.edges}, {"p95_entity_degree", s.p95_entity_degree},
            {"p95_doc_degree", s.p95_doc_degree}};
}

json timings_json(const IndexTimings& t) {
    return {{"extract_seconds", t.extract_seconds}, {"graph_seconds", t.graph_seconds},
            {"lexical_seconds", t.lexical_seconds}, {"dense_seconds", t.dense_seconds},
            {"total_seconds", t.total_seconds}};
}

std::vector<Query> limited_queries(const RunConfig& config, const Dataset& dataset) {
    std::vector<Query> queries = dataset.queries;
    if (config.eval.queries_limit > 0 && queries.size() > config.eval.queries_limit)
        queries.resize(config.eval.queries_limit);
    return queries;
}

std::string format_value(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) {
        std::ostringstream s;
        s << v.get<double>();
        return s.str();
    }
    return v.dump();
}

/// Loads graph and inverted index from a previous cmd_index when the
/// manifest fingerprint matches.
std::shared_ptr<Artifacts> reuse_or_build(const RunConfig& config, std::shared_ptr<const Dataset> dataset,
                                          bool& reused) {
    reused = false;
    fs::path dir(config.output_dir);
    fs::path manifest_path = dir / kManifestFile;
    if (fs::exists(manifest_path)) {
        std::ifstream in(manifest_path);
        json manifest = json::parse(in, nullptr, false);
        if (!manifest.is_discarded() && manifest.value("index_fingerprint", "") == index_fingerprint(config)) {
            std::optional<BipartiteGraph> graph;
            if (has_graph(config.method) && fs::exists(dir / kGraphFile)) graph = load_graph((dir / kGraphFile).string());
            std::optional<InvertedIndex> lexical;
            if (fs::exists(dir / kLexicalFile)) {
                std::ifstream idx(dir / kLexicalFile, std::ios::binary);
                lexical = InvertedIndex::load(idx);
            }
            reused = graph.has_value() || lexical.has_value();
            return build_artifacts(config, dataset, std::move(graph), std::move(lexical));
        }
    }
    return build_artifacts(config, dataset);
}

}  // namespace

json cmd_index(const RunConfig& config) {
    validate(config);
    auto dataset = load_dataset(config);
    auto art = build_artifacts(config, dataset);
    fs::path dir = prepare_output(config);

    json manifest;
    manifest["method"] = to_string(config.method);
    manifest["config_hash"] = config_hash(config);
    manifest["index_fingerprint"] = index_fingerprint(config);
    manifest["config"] = to_json(config);
    manifest["timings"] = timings_json(art->timings);
    manifest["dataset"] = {{"passages", dataset->corpus.size()},
                           {"queries", dataset->queries.size()},
                           {"records", dataset->stats.records},
                           {"duplicate_passages", dataset->stats.duplicate_passages},
                           {"missing_support_titles", dataset->stats.missing_support_titles},
                           {"unresolved_gold_ids", dataset->stats.unresolved_gold_ids},
                           {"empty_gold_queries", dataset->stats.empty_gold_queries}};
    json files = json::object();

    {
        fs::path p = dir / kLexicalFile;
        auto out = open_out(p);
        art->lexical.save(out);
        out.close();
        files[kLexicalFile] = file_fingerprint(p);
    }
    if (const BipartiteGraph* g = graph_of(*art)) {
        fs::path p = dir / kGraphFile;
        save_graph(*g, p.string());
        files[kGraphFile] = file_fingerprint(p);
        manifest["graph"] = stats_json(graph_stats(*g));
        manifest["graph"]["kind"] = art->entity_graph ? "entity" : "term";
        manifest["graph"]["ms_per_doc"] =
            dataset->corpus.size() ? 1000.0 * (art->timings.extract_seconds + art->timings.graph_seconds) /
                                         static_cast<double>(dataset->corpus.size())
                                   : 0.0;
    } else {
        std::error_code ec;
        fs::remove(dir / kGraphFile, ec);
    }
    if (art->passage_vectors) {
        manifest["vectors"] = {{"path", config.dataset.passage_vectors},
                               {"ids", config.dataset.passage_vector_ids},
                               {"count", art->passage_vectors->count()},
                               {"dim", art->passage_vectors->dim}};
    }
    manifest["artifacts"] = files;
    manifest["peak_rss_mib"] = peak_rss_mib();

    auto out = open_out(dir / kManifestFile);
    out << manifest.dump(2) << '\n';
    std::clog << "index: " << to_string(config.method) << " built in " << std::fixed << std::setprecision(3)
              << art->timings.total_seconds << " s, fingerprint " << manifest["index_fingerprint"].get<std::string>()
              << '\n';
    return manifest;
}

EvalSummary cmd_eval(const RunConfig& config) {
    validate(config);
    auto dataset = load_dataset(config);
    EvalSummary summary;
    summary.method = std::string(to_string(config.method));
    auto art = reuse_or_build(config, dataset, summary.reused_artifacts);
    Engine engine(config, art);
    const auto queries = limited_queries(config, *dataset);
    Evaluation ev = engine.evaluate(queries);

    summary.report = ev.report;
    summary.latency = ev.latencies.empty() ? LatencyStats{} : latency_stats(ev.latencies);
    summary.mean_edge_visits = ev.mean_edge_visits;
    summary.degraded_fallbacks = ev.degraded_fallbacks;
    summary.index_timings = art->timings;
    summary.peak_rss_mib = peak_rss_mib();

    fs::path dir = prepare_output(config);
    const std::string stem = summary.method;
    {
        auto out = open_out(dir / (stem + ".predictions.jsonl"));
        write_predictions(ev.run, queries, out);
    }
    {
        auto out = open_out(dir / (stem + ".metrics.jsonl"));
        write_metrics_jsonl(ev.report, out);
    }
    {
        auto out = open_out(dir / (stem + ".report.tsv"));
        write_summary_table({{stem, ev.report}}, out);
    }
    {
        const auto& a = ev.report.aggregates;
        json s;
        s["method"] = stem;
        s["config_hash"] = ev.report.config_hash;
        s["queries"] = queries.size();
        s["evaluated"] = a.evaluated;
        s["missing_queries"] = ev.report.missing_queries;
        s["empty_gold_queries"] = ev.report.empty_gold_queries;
        s["recall_at_5"] = a.recall_at_5;
        s["recall_at_10"] = a.recall_at_10;
        s["hit_at_10"] = a.hit_at_10;
        s["mrr"] = a.mrr;
        s["qtime_seconds"] = a.qtime_seconds;
        s["seed_seconds"] = a.seed_seconds;
        s["traversal_seconds"] = a.traversal_seconds;
        s["latency"] = {{"p50", summary.latency.p50}, {"p95", summary.latency.p95}, {"p99", summary.latency.p99}};
        s["fallback_count"] = ev.report.fallback_count;
        s["fallback_rate"] = ev.report.fallback_rate;
        s["degraded_fallbacks"] = ev.degraded_fallbacks;
        s["mean_edge_visits"] = ev.mean_edge_visits;
        s["index_timings"] = timings_json(art->timings);
        s["reused_artifacts"] = summary.reused_artifacts;
        s["peak_rss_mib"] = summary.peak_rss_mib;
        auto out = open_out(dir / (stem + ".summary.json"));
        out << s.dump(2) << '\n';
    }
    return summary;
}

std::vector<std::size_t> sample_subset(std::size_t n_queries, std::size_t size, std::uint64_t seed) {
    std::vector<std::size_t> idx(n_queries);
    std::iota(idx.begin(), idx.end(), 0);
    if (size >= n_queries) return idx;
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(size);
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::vector<AblationRow> cmd_ablate(const RunConfig& config) {
    validate(config);
    auto dataset = load_dataset(config);
    const auto all = limited_queries(config, *dataset);
    std::vector<Query> subset;
    for (std::size_t i : sample_subset(all.size(), config.ablate.subset_size, config.seed)) subset.push_back(all[i]);

    std::vector<std::pair<std::string, std::vector<json>>> axes;
    for (const auto& [key, values] : config.ablate.grid.items())
        axes.emplace_back(key, std::vector<json>(values.begin(), values.end()));

    std::vector<json> cells{json::object()};
    for (const auto& [key, values] : axes) {
        std::vector<json> next;
        for (const auto& cell : cells)
            for (const auto& v : values) {
                json c = cell;
                c[key] = v;
                next.push_back(std::move(c));
            }
        cells = std::move(next);
    }

    std::map<std::string, std::shared_ptr<Artifacts>> cache;
    std::vector<AblationRow> rows;
    for (const auto& cell : cells) {
        RunConfig c = config;
        for (const auto& [key, value] : cell.items()) set_config_key(c, key, value);
        validate(c);
        const std::string fp = index_fingerprint(c) + "/" + std::string(to_string(c.method));
        auto it = cache.find(fp);
        if (it == cache.end()) it = cache.emplace(fp, build_artifacts(c, dataset)).first;
        Engine engine(c, it->second);
        rows.push_back({cell, c, engine.evaluate(subset).report});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const AblationRow& a, const AblationRow& b) {
        return a.report.aggregates.recall_at_10 > b.report.aggregates.recall_at_10;
    });

    fs::path dir = prepare_output(config);
    auto out = open_out(dir / "ablation.tsv");
    const std::vector<std::string> fixed{"ner.mode", "seeds.k", "ppr.alpha", "ppr.max_iter"};
    std::vector<std::string> extra;
    for (const auto& [key, values] : axes)
        if (std::find(fixed.begin(), fixed.end(), key) == fixed.end()) extra.push_back(key);
    out << "NER\tk\tα\tit";
    for (const auto& key : extra) out << '\t' << key;
    out << "\tR@5\tR@10\tMRR\tQTime\n";
    out << std::fixed;
    for (const auto& row : rows) {
        const RunConfig& c = row.config;
        const std::size_t k = c.method == Method::graph_dense ? c.dense_seed_k : c.seeds.k;
        out << (c.ner.mode == NerMode::regex ? "regex" : "external") << '\t' << k << '\t' << std::setprecision(2)
            << c.ppr.alpha << '\t' << c.ppr.max_iter;
        for (const auto& key : extra) out << '\t' << format_value(row.overrides.at(key));
        const auto& a = row.report.aggregates;
        out << std::setprecision(3) << '\t' << a.recall_at_5 << '\t' << a.recall_at_10 << '\t' << a.mrr << '\t'
            << a.qtime_seconds << '\n';
    }
    return rows;
}

ScalingResult scaling_sweep(const RunConfig& config) {
    if (uses_dense(config.method) || uses_rerank(config.method))
        throw Error("cli_app", "bench runs on synthetic corpora; method " + std::string(to_string(config.method)) +
                                   " needs external files");
    ScalingResult result;
    for (std::size_t n : config.bench.sizes) {
        RunConfig c = config;
        c.dataset.synthetic = true;
        c.dataset.synthetic_params.n_docs = n;
        c.dataset.synthetic_params.n_entities =
            std::max<std::size_t>(c.bench.hops + 1, static_cast<std::size_t>(std::llround(c.bench.entity_ratio * n)));
        c.dataset.synthetic_params.hops = c.bench.hops;
        auto dataset = std::shared_ptr<const Dataset>(load_dataset(c));

        BenchRow row;
        row.n_docs = n;
        row.index_seconds = std::numeric_limits<double>::infinity();
        std::shared_ptr<Artifacts> art;
        for (std::size_t t = 0; t < c.bench.trials; ++t) {
            const auto start = Clock::now();
            art = build_artifacts(c, dataset);
            row.index_seconds = std::min(row.index_seconds, std::chrono::duration<double>(Clock::now() - start).count());
        }
        if (const BipartiteGraph* g = graph_of(*art)) row.graph_edges = g->edges();
        row.ms_per_doc = 1000.0 * row.index_seconds / static_cast<double>(n);

        std::vector<Query> queries = dataset->queries;
        if (queries.size() > c.bench.queries) queries.resize(c.bench.queries);
        c.eval.threads = 1;
        Engine engine(c, art);
        const auto start = Clock::now();
        Evaluation ev = engine.evaluate(queries);
        row.query_seconds = std::chrono::duration<double>(Clock::now() - start).count();
        row.mean_edge_visits = ev.mean_edge_visits;
        result.rows.push_back(row);
    }
    if (result.rows.size() >= 2) {
        std::vector<double> xs, ys;
        for (const auto& r : result.rows) {
            xs.push_back(static_cast<double>(r.n_docs));
            ys.push_back(r.index_seconds);
        }
        result.fit = linear_fit(xs, ys);
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& r : result.rows) {
        lo = std::min(lo, r.ms_per_doc);
        hi = std::max(hi, r.ms_per_doc);
    }
    result.per_doc_spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    return result;
}

ScalingResult cmd_bench(const RunConfig& config) {
    ScalingResult result = scaling_sweep(config);
    fs::path dir = prepare_output(config);
    {
        auto out = open_out(dir / "bench.tsv");
        out << "Docs\tIndexSeconds\tMsPerDoc\tQuerySeconds\tEdgeVisits\tEdges\n" << std::fixed;
        for (const auto& r : result.rows)
            out << r.n_docs << '\t' << std::setprecision(4) << r.index_seconds << '\t' << r.ms_per_doc << '\t'
                << r.query_seconds << '\t' << std::setprecision(1) << r.mean_edge_visits << '\t' << r.graph_edges
                << '\n';
    }
    json j;
    j["method"] = to_string(config.method);
    j["slope_seconds_per_doc"] = result.fit.slope;
    j["intercept_seconds"] = result.fit.intercept;
    j["r2"] = result.fit.r2;
    j["per_doc_spread"] = result.per_doc_spread;
    auto out = open_out(dir / "bench.json");
    out << j.dump(2) << '\n';
    return result;
}

std::vector<StatsRow> cmd_stats(const RunConfig& config) {
    validate(config);
    auto dataset = load_dataset(config);
    std::vector<StatsRow> rows;

    RunConfig entity_cfg = config;
    entity_cfg.method = Method::graph;
    auto ea = build_artifacts(entity_cfg, dataset);
    rows.push_back({"entity", graph_stats(*ea->entity_graph)});

    RunConfig term_cfg = config;
    term_cfg.method = Method::tfidf_graph;
    auto ta = build_artifacts(term_cfg, dataset);
    rows.push_back({"term", graph_stats(*ta->term_graph)});

    fs::path dir = prepare_output(config);
    auto out = open_out(dir / "stats.tsv");
    out << "Graph\tDocs\tNodes\tEdges\tEntityDegP95\tDocDegP95\n";
    for (const auto& r : rows)
        out << r.graph << '\t' << dataset->corpus.size() << '\t' << r.stats.nodes << '\t' << r.stats.edges << '\t'
            << r.stats.p95_entity_degree << '\t' << r.stats.p95_doc_degree << '\n';
    return rows;
}

void write_significance_table(const std::vector<SignificanceRow>& rows, std::ostream& out) {
    out << "Method\tΔ\tCI\tW/T/L\n";
    const auto flags = out.flags();
    out << std::fixed << std::setprecision(3);
    for (const auto& r : rows) {
        const auto& b = r.result;
        out << r.method << '\t' << std::showpos << b.delta_mean << std::noshowpos << "\t[" << b.ci_low << ", "
            << b.ci_high << "]\t" << b.wins << '/' << b.ties << '/' << b.losses << '\n';
    }
    out.flags(flags);
}

std::vector<SignificanceRow> cmd_significance(const RunConfig& config, const std::string& baseline,
                                              const std::vector<std::string>& runs) {
    if (runs.empty()) throw Error("cli_app", "significance needs at least one --run file");
    auto dataset = load_dataset(config);
    std::map<std::string, const Query*> gold;
    for (const auto& q : dataset->queries) gold.emplace(q.id, &q);

    auto column = [&](const std::string& path) {
        MetricColumn col;
        std::vector<std::string> unknown;
        for (const auto& [id, ranked] : read_predictions(path)) {
            auto it = gold.find(id);
            if (it == gold.end()) {
                unknown.push_back(id);
                continue;
            }
            if (it->second->gold_ids.empty()) continue;
            col.emplace_back(id, recall_at(ranked, it->second->gold_ids, 10));
        }
        if (!unknown.empty()) {
            std::string list;
            for (std::size_t i = 0; i < std::min<std::size_t>(unknown.size(), 5); ++i)
                list += (i ? ", " : "") + unknown[i];
            throw Error("cli_app", "'" + path + "' has query ids absent from the gold queries: " + list);
        }
        return col;
    };

    const MetricColumn base = column(baseline);
    BootstrapParams params;
    params.seed = config.seed;
    std::vector<SignificanceRow> rows;
    for (const auto& path : runs) {
        const MetricColumn other = column(path);
        std::string name = fs::path(path).filename().string();
        if (auto pos = name.find(".predictions.jsonl"); pos != std::string::npos) name = name.substr(0, pos);
        try {
            rows.push_back({name, paired_bootstrap(other, base, params)});
        } catch (const Error& e) {
            throw Error("cli_app", "'" + path + "' vs '" + baseline + "': " + e.what());
        }
    }
    fs::path dir = prepare_output(config);
    auto out = open_out(dir / "significance.tsv");
    write_significance_table(rows, out);
    return rows;
}

}  // namespace sprig
