#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "sprig/commands.hpp"
#include "sprig/config.hpp"
#include "sprig/dense.hpp"
#include "sprig/entities.hpp"
#include "sprig/error.hpp"
#include "sprig/eval.hpp"
#include "sprig/fusion.hpp"
#include "sprig/graph.hpp"
#include "sprig/lexical.hpp"
#include "sprig/pipeline.hpp"
#include "sprig/ppr.hpp"
#include "sprig/seeds.hpp"

namespace py = pybind11;
using namespace sprig;

namespace {

RunConfig config_from(const std::string& text) { return parse_config(nlohmann::json::parse(text)); }

py::list ranked_pairs(const RankedList& r, const Corpus* corpus) {
    py::list out;
    for (const auto& it : r.items) {
        if (corpus) out.append(py::make_tuple((*corpus)[it.doc].id, it.score));
        else out.append(py::make_tuple(it.doc, it.score));
    }
    return out;
}

RankedList from_pairs(const std::vector<std::pair<DocId, double>>& pairs) {
    RankedList r;
    for (const auto& [doc, score] : pairs) r.items.push_back({doc, score});
    return r;
}

py::dict metrics_dict(const EvalReport& report) {
    py::dict d;
    d["recall_at_5"] = report.aggregates.recall_at_5;
    d["recall_at_10"] = report.aggregates.recall_at_10;
    d["hit_at_10"] = report.aggregates.hit_at_10;
    d["mrr"] = report.aggregates.mrr;
    d["evaluated"] = report.aggregates.evaluated;
    d["missing_queries"] = report.missing_queries;
    d["empty_gold_queries"] = report.empty_gold_queries;
    return d;
}

py::dict bootstrap_dict(const BootstrapResult& r) {
    py::dict d;
    d["delta_mean"] = r.delta_mean;
    d["ci_low"] = r.ci_low;
    d["ci_high"] = r.ci_high;
    d["wins"] = r.wins;
    d["ties"] = r.ties;
    d["losses"] = r.losses;
    return d;
}

PprScores run_ppr(const BipartiteGraph& g, const std::vector<std::pair<NodeId, double>>& seed, double alpha,
                  const std::string& mode, std::uint32_t max_iter, double epsilon) {
    std::vector<SeedVector::Entry> masses(seed.begin(), seed.end());
    const auto s = SeedVector::from_masses(masses);
    if (mode == "power") return ppr_power(g, s, alpha, max_iter);
    if (mode == "push") return ppr_push(g, s, alpha, epsilon);
    throw Error("ppr_engine", "unknown mode '" + mode + "' (expected power or push)");
}

/// Engine plus the artifacts it borrows, built from one config.
struct PyEngine {
    std::shared_ptr<const Dataset> dataset;
    std::unique_ptr<Engine> engine;

    explicit PyEngine(const std::string& config_json) {
        RunConfig c = config_from(config_json);
        validate(c);
        dataset = load_dataset(c);
        engine = std::make_unique<Engine>(c, build_artifacts(c, dataset));
    }
};

}  // namespace

PYBIND11_MODULE(_sprig, m) {
    m.doc() = "sprig graph retrieval core";
    py::register_exception<Error>(m, "SprigError", PyExc_ValueError);

    m.def("extract_entities",
          [](const std::string& text, const std::string& normalization) {
              ExtractOptions options;
              options.mode = parse_normalization_mode(normalization);
              py::list out;
              for (const auto& mention : extract_regex(text, 0, options))
                  out.append(py::make_tuple(mention.surface, mention.normalized, mention.count));
              return out;
          },
          py::arg("text"), py::arg("normalization") = "simple");

    m.def("tfidf_edge_weight", &tfidf_edge_weight, py::arg("tf"), py::arg("n_docs"), py::arg("df"));
    m.def("adaptive_mix_weight", &adaptive_mix_weight, py::arg("n_entity_seeds"), py::arg("n_passage_seeds"));

    py::class_<BipartiteGraph>(m, "Graph")
        .def_static(
            "from_mentions",
            [](const std::vector<std::vector<std::string>>& docs, double hub_penalty) {
                CorpusMentions mentions(docs.size());
                for (std::size_t d = 0; d < docs.size(); ++d) {
                    std::vector<EntityMention> row;
                    for (const auto& name : docs[d]) {
                        auto it = std::find_if(row.begin(), row.end(), [&](const auto& x) { return x.normalized == name; });
                        if (it == row.end()) row.push_back({name, name, static_cast<DocId>(d), 1});
                        else ++it->count;
                    }
                    mentions[d] = std::move(row);
                }
                GraphParams params;
                params.min_entity_len = 1;
                params.hub_penalty = hub_penalty;
                return build_entity_graph(docs.size(), mentions, params);
            },
            py::arg("docs"), py::arg("hub_penalty") = 0.5)
        .def_property_readonly("n_docs", &BipartiteGraph::n_docs)
        .def_property_readonly("n_entities", &BipartiteGraph::n_entities)
        .def_property_readonly("edges", &BipartiteGraph::edges)
        .def_property_readonly("entity_names", &BipartiteGraph::entity_names)
        .def("entity_node", &BipartiteGraph::entity_node)
        .def("ppr",
             [](const BipartiteGraph& g, const std::vector<std::pair<NodeId, double>>& seed, double alpha,
                const std::string& mode, std::uint32_t max_iter, double epsilon) {
                 const auto r = run_ppr(g, seed, alpha, mode, max_iter, epsilon);
                 return py::make_tuple(r.scores, r.edge_visits);
             },
             py::arg("seed"), py::arg("alpha") = 0.15, py::arg("mode") = "power", py::arg("max_iter") = 5,
             py::arg("epsilon") = 1e-6);

    py::class_<Corpus>(m, "Corpus")
        .def(py::init([](const std::vector<std::tuple<std::string, std::string, std::string>>& rows) {
                 Corpus c;
                 for (const auto& [id, title, text] : rows) c.add({id, title, text});
                 return c;
             }),
             py::arg("passages"))
        .def("__len__", &Corpus::size);

    py::class_<InvertedIndex>(m, "Bm25Index")
        .def(py::init<const Corpus&>(), py::arg("corpus"), py::keep_alive<1, 2>())
        .def("search",
             [](const InvertedIndex& index, const std::string& query, std::size_t k, double k1, double b) {
                 Bm25Params params;
                 params.k1 = k1;
                 params.b = b;
                 return ranked_pairs(bm25_search(index, query, k, params), nullptr);
             },
             py::arg("query"), py::arg("k") = 10, py::arg("k1") = 1.5, py::arg("b") = 0.75)
        .def_property_readonly("doc_count", &InvertedIndex::doc_count);

    m.def("rrf_fuse",
          [](const std::vector<std::vector<std::pair<DocId, double>>>& lists, double k_rrf, std::size_t depth) {
              std::vector<RankedList> in;
              for (const auto& l : lists) in.push_back(from_pairs(l));
              return ranked_pairs(rrf_fuse(in, {k_rrf, depth}), nullptr);
          },
          py::arg("lists"), py::arg("k_rrf") = 60.0, py::arg("depth") = 100);

    m.def("paired_bootstrap",
          [](const std::vector<double>& a, const std::vector<double>& b, std::size_t resamples, std::uint64_t seed) {
              BootstrapParams params;
              params.resamples = resamples;
              params.seed = seed;
              return bootstrap_dict(paired_bootstrap(a, b, params));
          },
          py::arg("a"), py::arg("b"), py::arg("resamples") = 10000, py::arg("seed") = 42);

    m.def("compute_metrics",
          [](const std::map<std::string, std::vector<std::string>>& run,
             const std::map<std::string, std::vector<std::string>>& gold) {
              Run r;
              for (const auto& [id, ranked] : run) r[id].ranked_ids = ranked;
              std::vector<Query> queries;
              for (const auto& [id, g] : gold) queries.push_back({id, "", g});
              return metrics_dict(compute_metrics(r, queries));
          },
          py::arg("run"), py::arg("gold"));

    m.def("write_vectors",
          [](const std::string& path, const std::string& ids_path,
             py::array_t<float, py::array::c_style | py::array::forcecast> data, const std::vector<std::string>& ids) {
              if (data.ndim() != 2) throw Error("dense_retrieval", "vectors must be a 2-d array");
              std::span<const float> flat(data.data(), static_cast<std::size_t>(data.size()));
              write_vectors(path, ids_path, static_cast<std::uint32_t>(data.shape(1)), flat, ids);
          },
          py::arg("path"), py::arg("ids_path"), py::arg("data"), py::arg("ids"));

    m.def("load_vectors",
          [](const std::string& path, const std::string& ids_path) {
              const auto store = load_vectors(path, ids_path);
              py::array_t<float> arr(std::vector<py::ssize_t>{static_cast<py::ssize_t>(store.count()), static_cast<py::ssize_t>(store.dim)});
              std::copy(store.data.begin(), store.data.end(), arr.mutable_data());
              return py::make_tuple(store.ids, arr);
          },
          py::arg("path"), py::arg("ids_path"));

    py::class_<PyEngine>(m, "Engine")
        .def(py::init<const std::string&>(), py::arg("config_json"))
        .def("search",
             [](const PyEngine& e, const std::string& question, const std::string& query_id) {
                 const auto outcome = e.engine->run(Query{query_id, question, {}});
                 return ranked_pairs(outcome.ranked, &e.dataset->corpus);
             },
             py::arg("question"), py::arg("query_id") = "")
        .def("evaluate",
             [](const PyEngine& e, std::size_t limit) {
                 std::span<const Query> queries(e.dataset->queries);
                 if (limit > 0 && limit < queries.size()) queries = queries.first(limit);
                 py::gil_scoped_release release;
                 auto eval = e.engine->evaluate(queries);
                 py::gil_scoped_acquire acquire;
                 auto d = metrics_dict(eval.report);
                 d["mean_edge_visits"] = eval.mean_edge_visits;
                 return d;
             },
             py::arg("limit") = 0)
        .def_property_readonly("n_passages", [](const PyEngine& e) { return e.dataset->corpus.size(); })
        .def_property_readonly("n_queries", [](const PyEngine& e) { return e.dataset->queries.size(); });

    m.def("config_hash", [](const std::string& config_json) { return config_hash(config_from(config_json)); },
          py::arg("config_json"));
    m.def("index", [](const std::string& config_json) { return cmd_index(config_from(config_json)).dump(); },
          py::arg("config_json"));
    m.def("evaluate",
          [](const std::string& config_json) {
              const auto s = cmd_eval(config_from(config_json));
              auto d = metrics_dict(s.report);
              d["mean_edge_visits"] = s.mean_edge_visits;
              d["p50_seconds"] = s.latency.p50;
              return d;
          },
          py::arg("config_json"));
    m.def("significance",
          [](const std::string& config_json, const std::string& baseline, const std::vector<std::string>& runs) {
              py::dict out;
              for (const auto& row : cmd_significance(config_from(config_json), baseline, runs))
                  out[py::str(row.method)] = bootstrap_dict(row.result);
              return out;
          },
          py::arg("config_json"), py::arg("baseline"), py::arg("runs"));
}
