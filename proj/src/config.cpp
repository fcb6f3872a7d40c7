#include "sprig/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>

#include "sprig/error.hpp"

namespace sprig {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) { throw Error("cli_app", message); }

const std::vector<std::pair<std::string_view, Method>>& method_table() {
    static const std::vector<std::pair<std::string_view, Method>> table{
        {"bm25", Method::bm25},
        {"rm3", Method::rm3},
        {"bm25_2step", Method::bm25_2step},
        {"dense", Method::dense},
        {"rrf", Method::rrf},
        {"graph", Method::graph},
        {"graph_hybrid", Method::graph_hybrid},
        {"graph_dense", Method::graph_dense},
        {"graph_rrf", Method::graph_rrf},
        {"rrf_ppr_fusion", Method::rrf_ppr_fusion},
        {"tfidf_graph", Method::tfidf_graph},
        {"bm25_ce", Method::bm25_ce},
        {"rrf_ce", Method::rrf_ce},
    };
    return table;
}

std::string get_string(const std::string& key, const json& v) {
    if (!v.is_string()) fail("config key '" + key + "' expects a string");
    return v.get<std::string>();
}

double get_double(const std::string& key, const json& v) {
    if (!v.is_number()) fail("config key '" + key + "' expects a number");
    return v.get<double>();
}

std::size_t get_size(const std::string& key, const json& v) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        fail("config key '" + key + "' expects a non-negative integer");
    return v.get<std::size_t>();
}

bool get_bool(const std::string& key, const json& v) {
    if (!v.is_boolean()) fail("config key '" + key + "' expects a boolean");
    return v.get<bool>();
}

template <typename F>
auto wrap_parse(const std::string& key, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        fail("config key '" + key + "': " + e.what());
    }
}

using Setter = std::function<void(RunConfig&, const std::string&, const json&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = [] {
        std::map<std::string, Setter, std::less<>> t;
        t["method"] = [](RunConfig& c, const std::string& k, const json& v) {
            auto s = get_string(k, v);
            c.method = wrap_parse(k, [&] { return parse_method(s); });
        };
        t["output_dir"] = [](RunConfig& c, const std::string& k, const json& v) { c.output_dir = get_string(k, v); };
        t["seed"] = [](RunConfig& c, const std::string& k, const json& v) { c.seed = get_size(k, v); };
        t["bundle"] = [](RunConfig& c, const std::string& k, const json& v) { apply_bundle(c, get_string(k, v)); };
        t["variant"] = [](RunConfig& c, const std::string& k, const json& v) { apply_variant(c, get_string(k, v)); };

        t["dataset.path"] = [](RunConfig& c, const std::string& k, const json& v) { c.dataset.path = get_string(k, v); };
        t["dataset.format"] = [](RunConfig& c, const std::string& k, const json& v) {
            auto s = get_string(k, v);
            if (s == "synthetic") {
                c.dataset.synthetic = true;
                return;
            }
            c.dataset.synthetic = false;
            c.dataset.format = wrap_parse(k, [&] { return parse_corpus_format(s); });
        };
        t["dataset.queries"] = [](RunConfig& c, const std::string& k, const json& v) { c.dataset.queries = get_string(k, v); };
        t["dataset.passage_vectors"] = [](RunConfig& c, const std::string& k, const json& v) {
            c.dataset.passage_vectors = get_string(k, v);
        };
        t["dataset.passage_vector_ids"] = [](RunConfig& c, const std::string& k, const json& v) {
            c.dataset.passage_vector_ids = get_string(k, v);
        };
        t["dataset.query_vectors"] = [](RunConfig& c, const std::string& k, const json& v) {
            c.dataset.query_vectors = get_string(k, v);
        };
        t["dataset.query_vector_ids"] = [](RunConfig& c, const std::string& k, const json& v) {
            c.dataset.query_vector_ids = get_string(k, v);
        };
        t["dataset.entities"] = [](RunConfig& c, const std::string& k, const json& v) { c.dataset.entities = get_string(k, v); };
        t["dataset.rerank_scores"] = [](RunConfig& c, const std::string& k, const json& v) {
            c.dataset.rerank_scores = get_string(k, v);
        };
        t["dataset.synthetic.n_docs"] = [](RunConfig& c, const std::string& k, const json& v) {
            c.dataset.synthetic_params.n_docs = get_size(k, v);
        };
        t["dataset.synthetic.n_entities"] = [](RunConfig& c, const std::string& k, const json& v) {
            c.dataset.synthetic_params.n_entities = get_size(k, v);
        };
        t["dataset.synthetic.hops"] = [](RunConfig& c, const std::string& k, const json& v) {
            c.dataset.synthetic_params.hops = get_size(k, v);
        };
        t["dataset.synthetic.seed"] = [](RunConfig& c, const std::string& k, const json& v) {
            c.dataset.synthetic_params.seed = get_size(k, v);
        };

        t["ner.mode"] = [](RunConfig& c, const std::string& k, const json& v) {
            auto s = get_string(k, v);
            if (s == "regex") c.ner.mode = NerMode::regex;
            else if (s == "external") c.ner.mode = NerMode::external;
            else fail("config key '" + k + "': unknown ner mode '" + s + "'");
        };
        t["ner.normalization"] = [](RunConfig& c, const std::string& k, const json& v) {
            auto s = get_string(k, v);
            c.ner.normalization = wrap_parse(k, [&] { return parse_normalization_mode(s); });
        };
        t["ner.min_entity_len"] = [](RunConfig& c, const std::string& k, const json& v) {
            c.ner.min_entity_len = get_size(k, v);
        };
        t["ner.alias"] = [](RunConfig& c, const std::string& k, const json& v) { c.ner.alias = get_bool(k, v); };

        t["graph.hub_penalty"] = [](RunConfig& c, const std::string& k, const json& v) {
            c.graph.hub_penalty = get_double(k, v);
        };
        t["graph.min_entity_df"] = [](RunConfig& c, const std::string& k, const json& v) {
            c.graph.min_entity_df = get_size(k, v);
        };
        t["graph.max_entity_df_ratio"] = [](RunConfig& c, const std::string& k, const json& v) {
            c.graph.max_entity_df_ratio = get_double(k, v);
        };
        t["graph.prune_hub_pct"] = [](RunConfig& c, const std::string& k, const json& v) {
            c.graph.prune_hub_pct = get_double(k, v);
        };
        t["graph.outdegree_cap"] = [](RunConfig& c, const std::string& k, const json& v) {
            if (v.is_null()) c.graph.outdegree_cap.reset();
            else c.graph.outdegree_cap = get_size(k, v);
        };
        t["graph.term_min_df"] = [](RunConfig& c, const std::string& k, const json& v) {
            c.graph.term_min_df = get_size(k, v);
        };
        t["graph.term_max_df_ratio"] = [](RunConfig& c, const std::string& k, const json& v) {
            c.graph.term_max_df_ratio = get_double(k, v);
        };

        t["ppr.mode"] = [](RunConfig& c, const std::string& k, const json& v) {
            auto s = get_string(k, v);
            if (s == "power") c.ppr.mode = PprMode::power;
            else if (s == "push") c.ppr.mode = PprMode::push;
            else fail("config key '" + k + "': unknown ppr mode '" + s + "'");
        };
        t["ppr.alpha"] = [](RunConfig& c, const std::string& k, const json& v) { c.ppr.alpha = get_double(k, v); };
        t["ppr.max_iter"] = [](RunConfig& c, const std::string& k, const json& v) {
            c.ppr.max_iter = static_cast<std::uint32_t>(get_size(k, v));
        };
        t["ppr.epsilon"] = [](RunConfig& c, const std::string& k, const json& v) { c.ppr.epsilon = get_double(k, v); };
        t["ppr.max_pushes"] = [](RunConfig& c, const std::string& k, const json& v) { c.ppr.max_pushes = get_size(k, v); };

        t["seeds.k"] = [](RunConfig& c, const std::string& k, const json& v) { c.seeds.k = get_size(k, v); };
        t["seeds.dense_k"] = [](RunConfig& c, const std::string& k, const json& v) { c.dense_seed_k = get_size(k, v); };
        t["seeds.weighting"] = [](RunConfig& c, const std::string& k, const json& v) {
            auto s = get_string(k, v);
            c.seeds.weighting = wrap_parse(k, [&] { return parse_seed_weighting(s); });
        };
        t["seeds.q"] = [](RunConfig& c, const std::string& k, const json& v) { c.seeds.q = get_double(k, v); };
        t["seeds.mixing"] = [](RunConfig& c, const std::string& k, const json& v) {
            auto s = get_string(k, v);
            c.seeds.mixing = wrap_parse(k, [&] { return parse_seed_mixing(s); });
        };
        t["seeds.fallback"] = [](RunConfig& c, const std::string& k, const json& v) {
            auto s = get_string(k, v);
            c.seeds.fallback = wrap_parse(k, [&] { return parse_fallback_policy(s); });
        };

        t["bm25.k1"] = [](RunConfig& c, const std::string& k, const json& v) { c.bm25.k1 = get_double(k, v); };
        t["bm25.b"] = [](RunConfig& c, const std::string& k, const json& v) { c.bm25.b = get_double(k, v); };
        t["rm3.fb_docs"] = [](RunConfig& c, const std::string& k, const json& v) { c.rm3.fb_docs = get_size(k, v); };
        t["rm3.fb_terms"] = [](RunConfig& c, const std::string& k, const json& v) { c.rm3.fb_terms = get_size(k, v); };
        t["rm3.lambda"] = [](RunConfig& c, const std::string& k, const json& v) { c.rm3.lambda = get_double(k, v); };
        t["two_step.stage1_k"] = [](RunConfig& c, const std::string& k, const json& v) {
            c.two_step.stage1_k = get_size(k, v);
        };
        t["two_step.m_entities"] = [](RunConfig& c, const std::string& k, const json& v) {
            c.two_step.m_entities = get_size(k, v);
        };

        t["dense.search"] = [](RunConfig& c, const std::string& k, const json& v) {
            auto s = get_string(k, v);
            if (s == "exact") c.dense.search = DenseSearch::exact;
            else if (s == "hnsw") c.dense.search = DenseSearch::hnsw;
            else fail("config key '" + k + "': unknown dense search '" + s + "'");
        };
        t["dense.M"] = [](RunConfig& c, const std::string& k, const json& v) { c.dense.hnsw.M = get_size(k, v); };
        t["dense.ef_construction"] = [](RunConfig& c, const std::string& k, const json& v) {
            c.dense.hnsw.ef_construction = get_size(k, v);
        };
        t["dense.ef_search"] = [](RunConfig& c, const std::string& k, const json& v) {
            c.dense.ef_search = get_size(k, v);
        };
        t["dense.seed"] = [](RunConfig& c, const std::string& k, const json& v) { c.dense.hnsw.seed = get_size(k, v); };

        t["fusion.k_rrf"] = [](RunConfig& c, const std::string& k, const json& v) { c.rrf.k_rrf = get_double(k, v); };
        t["fusion.depth"] = [](RunConfig& c, const std::string& k, const json& v) { c.rrf.depth = get_size(k, v); };
        t["fusion.weight"] = [](RunConfig& c, const std::string& k, const json& v) { c.fusion_weight = get_double(k, v); };
        t["rerank.top_n"] = [](RunConfig& c, const std::string& k, const json& v) { c.rerank_top_n = get_size(k, v); };

        t["eval.top_k"] = [](RunConfig& c, const std::string& k, const json& v) { c.eval.top_k = get_size(k, v); };
        t["eval.include_empty_gold"] = [](RunConfig& c, const std::string& k, const json& v) {
            c.eval.include_empty_gold = get_bool(k, v);
        };
        t["eval.threads"] = [](RunConfig& c, const std::string& k, const json& v) { c.eval.threads = get_size(k, v); };
        t["eval.queries_limit"] = [](RunConfig& c, const std::string& k, const json& v) {
            c.eval.queries_limit = get_size(k, v);
        };

        t["ablate.grid"] = [](RunConfig& c, const std::string& k, const json& v) {
            if (!v.is_object()) fail("config key '" + k + "' expects an object of dotted key -> value list");
            for (const auto& [key, values] : v.items()) {
                if (!values.is_array() || values.empty())
                    fail("ablate grid entry '" + key + "' must be a nonempty list");
                if (key == "ablate.grid" || setters().find(key) == setters().end())
                    fail("ablate grid entry '" + key + "' is not a known config key");
            }
            c.ablate.grid = v;
        };
        t["ablate.subset_size"] = [](RunConfig& c, const std::string& k, const json& v) {
            c.ablate.subset_size = get_size(k, v);
        };

        t["bench.sizes"] = [](RunConfig& c, const std::string& k, const json& v) {
            if (!v.is_array() || v.empty()) fail("config key '" + k + "' expects a nonempty list");
            c.bench.sizes.clear();
            for (const auto& x : v) c.bench.sizes.push_back(get_size(k, x));
        };
        t["bench.trials"] = [](RunConfig& c, const std::string& k, const json& v) { c.bench.trials = get_size(k, v); };
        t["bench.queries"] = [](RunConfig& c, const std::string& k, const json& v) { c.bench.queries = get_size(k, v); };
        t["bench.entity_ratio"] = [](RunConfig& c, const std::string& k, const json& v) {
            c.bench.entity_ratio = get_double(k, v);
        };
        t["bench.hops"] = [](RunConfig& c, const std::string& k, const json& v) { c.bench.hops = get_size(k, v); };
        return t;
    }();
    return table;
}

void flatten(const json& node, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
    for (const auto& [key, value] : node.items()) {
        std::string dotted = prefix.empty() ? key : prefix + "." + key;
        if (value.is_object() && dotted != "ablate.grid") flatten(value, dotted, out);
        else out.emplace_back(dotted, value);
    }
}

int key_priority(const std::string& key) {
    if (key == "bundle") return 0;
    if (key == "variant") return 1;
    return 2;
}

void require(bool ok, const std::string& message) {
    if (!ok) fail(message);
}

bool finite_in(double x, double lo, double hi) { return std::isfinite(x) && x >= lo && x <= hi; }

}  // namespace

Method parse_method(std::string_view id) {
    for (const auto& [name, m] : method_table())
        if (name == id) return m;
    fail("unknown method '" + std::string(id) + "'");
}

std::string_view to_string(Method method) {
    for (const auto& [name, m] : method_table())
        if (m == method) return name;
    return "unknown";
}

const std::vector<Method>& all_methods() {
    static const std::vector<Method> methods = [] {
        std::vector<Method> out;
        for (const auto& entry : method_table()) out.push_back(entry.second);
        return out;
    }();
    return methods;
}

bool uses_entity_graph(Method m) {
    return m == Method::graph || m == Method::graph_hybrid || m == Method::graph_dense || m == Method::graph_rrf ||
           m == Method::rrf_ppr_fusion;
}

bool uses_dense(Method m) {
    return m == Method::dense || m == Method::rrf || m == Method::graph_dense || m == Method::graph_rrf ||
           m == Method::rrf_ppr_fusion || m == Method::rrf_ce;
}

bool uses_rerank(Method m) { return m == Method::bm25_ce || m == Method::rrf_ce; }

void set_config_key(RunConfig& config, const std::string& key, const json& value) {
    auto it = setters().find(key);
    if (it == setters().end()) fail("unknown config key '" + key + "'");
    it->second(config, key, value);
}

void apply_bundle(RunConfig& config, std::string_view bundle) {
    if (bundle == "hotpot-defaults") {
        config.ppr.mode = PprMode::push;
        config.seeds.k = 10;
        config.dense_seed_k = 5;
        config.seeds.q = 0.5;
        config.ner.normalization = NormalizationMode::simple;
    } else if (bundle == "2wiki-defaults") {
        config.ppr.mode = PprMode::power;
        config.seeds.k = 5;
        config.dense_seed_k = 3;
        config.seeds.q = 1.0;
        config.ner.normalization = NormalizationMode::lower;
    } else {
        fail("unknown bundle '" + std::string(bundle) + "'");
    }
    config.bundle = bundle;
}

void apply_variant(RunConfig& config, std::string_view variant) {
    bool el = false, prune = false, mix = false;
    if (variant == "base" || variant == "Base") {
    } else if (variant == "+EL") {
        el = true;
    } else if (variant == "+PRUNE") {
        prune = true;
    } else if (variant == "+MIX") {
        mix = true;
    } else if (variant == "+ALL") {
        el = prune = mix = true;
    } else {
        fail("unknown variant '" + std::string(variant) + "' (expected Base, +EL, +PRUNE, +MIX or +ALL)");
    }
    config.ner.alias = el;
    config.graph.prune_hub_pct = prune ? 0.01 : 0.0;
    if (prune) config.graph.outdegree_cap = 64;
    else config.graph.outdegree_cap.reset();
    config.seeds.mixing = mix ? SeedMixing::adaptive : SeedMixing::mass_proportional;
    config.variant = variant == "Base" ? "base" : std::string(variant);
}

RunConfig parse_config(const json& doc) {
    if (!doc.is_object()) fail("config must be a JSON object");
    std::vector<std::pair<std::string, json>> entries;
    flatten(doc, "", entries);
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return key_priority(a.first) < key_priority(b.first); });
    RunConfig config;
    for (const auto& [key, value] : entries) set_config_key(config, key, value);
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open config '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        fail("config '" + path + "' is not valid JSON: " + e.what());
    }
    try {
        return parse_config(doc);
    } catch (const Error& e) {
        fail(std::string(e.what()) + " (config " + path + ")");
    }
}

void validate(const RunConfig& c) {
    require(c.dataset.synthetic || !c.dataset.path.empty(), "dataset.path is required unless dataset.format is synthetic");
    if (c.dataset.synthetic) {
        const auto& s = c.dataset.synthetic_params;
        require(s.hops >= 1, "dataset.synthetic.hops must be >= 1");
        require(s.n_docs >= 2 * s.hops, "dataset.synthetic.n_docs must be >= 2 * hops");
        require(s.n_entities >= s.hops + 1, "dataset.synthetic.n_entities must be >= hops + 1");
    }
    require(c.ner.min_entity_len >= 1, "ner.min_entity_len must be >= 1");
    require(c.ner.mode != NerMode::external || !c.dataset.entities.empty(),
            "ner.mode=external requires dataset.entities");
    require(finite_in(c.graph.hub_penalty, 0.0, 1e9), "graph.hub_penalty (p) must be >= 0");
    require(c.graph.min_entity_df >= 1, "graph.min_entity_df must be >= 1");
    require(finite_in(c.graph.max_entity_df_ratio, 0.0, 1.0) && c.graph.max_entity_df_ratio > 0.0,
            "graph.max_entity_df_ratio must be in (0, 1]");
    require(finite_in(c.graph.prune_hub_pct, 0.0, 1.0) && c.graph.prune_hub_pct < 1.0,
            "graph.prune_hub_pct must be in [0, 1)");
    require(!c.graph.outdegree_cap || *c.graph.outdegree_cap >= 1, "graph.outdegree_cap must be >= 1");
    require(c.graph.term_min_df >= 1, "graph.term_min_df must be >= 1");
    require(finite_in(c.graph.term_max_df_ratio, 0.0, 1.0) && c.graph.term_max_df_ratio > 0.0,
            "graph.term_max_df_ratio must be in (0, 1]");
    require(std::isfinite(c.ppr.alpha) && c.ppr.alpha > 0.0 && c.ppr.alpha < 1.0, "ppr.alpha must be in (0, 1)");
    require(c.ppr.max_iter >= 1, "ppr.max_iter must be >= 1");
    require(std::isfinite(c.ppr.epsilon) && c.ppr.epsilon > 0.0, "ppr.epsilon must be > 0");
    require(c.ppr.max_pushes >= 1, "ppr.max_pushes must be >= 1");
    require(c.seeds.k >= 1, "seeds.k must be >= 1");
    require(c.dense_seed_k >= 1, "seeds.dense_k must be >= 1");
    require(finite_in(c.seeds.q, 0.0, 1e9), "seeds.q must be >= 0");
    require(std::isfinite(c.bm25.k1) && c.bm25.k1 >= 0.0, "bm25.k1 must be >= 0");
    require(finite_in(c.bm25.b, 0.0, 1.0), "bm25.b must be in [0, 1]");
    require(c.rm3.fb_docs >= 1, "rm3.fb_docs must be >= 1");
    require(finite_in(c.rm3.lambda, 0.0, 1.0), "rm3.lambda must be in [0, 1]");
    require(c.two_step.stage1_k >= 1, "two_step.stage1_k must be >= 1");
    require(c.dense.hnsw.M >= 2, "dense.M must be >= 2");
    require(c.dense.hnsw.ef_construction >= 1, "dense.ef_construction must be >= 1");
    require(c.dense.ef_search >= 1, "dense.ef_search must be >= 1");
    require(std::isfinite(c.rrf.k_rrf) && c.rrf.k_rrf >= 0.0, "fusion.k_rrf must be >= 0");
    require(c.rrf.depth >= 1, "fusion.depth must be >= 1");
    require(finite_in(c.fusion_weight, 0.0, 1.0), "fusion.weight must be in [0, 1]");
    require(c.rerank_top_n >= 1, "rerank.top_n must be >= 1");
    require(c.eval.top_k >= 10, "eval.top_k must be >= 10 so R@10 is defined");
    require(c.ablate.subset_size >= 1, "ablate.subset_size must be >= 1");
    require(c.bench.trials >= 1, "bench.trials must be >= 1");
    require(c.bench.queries >= 1, "bench.queries must be >= 1");
    require(std::isfinite(c.bench.entity_ratio) && c.bench.entity_ratio > 0.0, "bench.entity_ratio must be > 0");
    require(c.bench.hops >= 1, "bench.hops must be >= 1");
    for (std::size_t n : c.bench.sizes) require(n >= 2 * c.bench.hops, "bench.sizes entries must be >= 2 * bench.hops");
    if (uses_dense(c.method) && !c.dataset.synthetic) {
        require(!c.dataset.passage_vectors.empty() && !c.dataset.passage_vector_ids.empty(),
                "method " + std::string(to_string(c.method)) +
                    " requires dataset.passage_vectors and dataset.passage_vector_ids");
        require(!c.dataset.query_vectors.empty() && !c.dataset.query_vector_ids.empty(),
                "method " + std::string(to_string(c.method)) +
                    " requires dataset.query_vectors and dataset.query_vector_ids");
    }
    if (uses_dense(c.method) && c.dataset.synthetic)
        fail("method " + std::string(to_string(c.method)) + " needs embedding files; the synthetic dataset has none");
    if (uses_rerank(c.method))
        require(!c.dataset.rerank_scores.empty(),
                "method " + std::string(to_string(c.method)) + " requires dataset.rerank_scores");
}

json to_json(const RunConfig& c) {
    json j;
    j["method"] = to_string(c.method);
    j["bundle"] = c.bundle;
    j["variant"] = c.variant;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    auto& d = j["dataset"];
    d["path"] = c.dataset.path;
    d["format"] = c.dataset.synthetic ? std::string("synthetic") : std::string(to_string(c.dataset.format));
    d["queries"] = c.dataset.queries;
    d["passage_vectors"] = c.dataset.passage_vectors;
    d["passage_vector_ids"] = c.dataset.passage_vector_ids;
    d["query_vectors"] = c.dataset.query_vectors;
    d["query_vector_ids"] = c.dataset.query_vector_ids;
    d["entities"] = c.dataset.entities;
    d["rerank_scores"] = c.dataset.rerank_scores;
    d["synthetic"] = {{"n_docs", c.dataset.synthetic_params.n_docs},
                      {"n_entities", c.dataset.synthetic_params.n_entities},
                      {"hops", c.dataset.synthetic_params.hops},
                      {"seed", c.dataset.synthetic_params.seed}};
    j["ner"] = {{"mode", c.ner.mode == NerMode::regex ? "regex" : "external"},
                {"normalization", to_string(c.ner.normalization)},
                {"min_entity_len", c.ner.min_entity_len},
                {"alias", c.ner.alias}};
    j["graph"] = {{"hub_penalty", c.graph.hub_penalty},
                  {"min_entity_df", c.graph.min_entity_df},
                  {"max_entity_df_ratio", c.graph.max_entity_df_ratio},
                  {"prune_hub_pct", c.graph.prune_hub_pct},
                  {"outdegree_cap", c.graph.outdegree_cap ? json(*c.graph.outdegree_cap) : json(nullptr)},
                  {"term_min_df", c.graph.term_min_df},
                  {"term_max_df_ratio", c.graph.term_max_df_ratio}};
    j["ppr"] = {{"mode", c.ppr.mode == PprMode::power ? "power" : "push"},
                {"alpha", c.ppr.alpha},
                {"max_iter", c.ppr.max_iter},
                {"epsilon", c.ppr.epsilon},
                {"max_pushes", c.ppr.max_pushes}};
    j["seeds"] = {{"k", c.seeds.k},
                  {"dense_k", c.dense_seed_k},
                  {"weighting", to_string(c.seeds.weighting)},
                  {"q", c.seeds.q},
                  {"mixing", to_string(c.seeds.mixing)},
                  {"fallback", to_string(c.seeds.fallback)}};
    j["bm25"] = {{"k1", c.bm25.k1}, {"b", c.bm25.b}};
    j["rm3"] = {{"fb_docs", c.rm3.fb_docs}, {"fb_terms", c.rm3.fb_terms}, {"lambda", c.rm3.lambda}};
    j["two_step"] = {{"stage1_k", c.two_step.stage1_k}, {"m_entities", c.two_step.m_entities}};
    j["dense"] = {{"search", c.dense.search == DenseSearch::exact ? "exact" : "hnsw"},
                  {"M", c.dense.hnsw.M},
                  {"ef_construction", c.dense.hnsw.ef_construction},
                  {"ef_search", c.dense.ef_search},
                  {"seed", c.dense.hnsw.seed}};
    j["fusion"] = {{"k_rrf", c.rrf.k_rrf}, {"depth", c.rrf.depth}, {"weight", c.fusion_weight}};
    j["rerank"] = {{"top_n", c.rerank_top_n}};
    j["eval"] = {{"top_k", c.eval.top_k},
                 {"include_empty_gold", c.eval.include_empty_gold},
                 {"threads", c.eval.threads},
                 {"queries_limit", c.eval.queries_limit}};
    j["ablate"] = {{"grid", c.ablate.grid}, {"subset_size", c.ablate.subset_size}};
    j["bench"] = {{"sizes", c.bench.sizes},
                  {"trials", c.bench.trials},
                  {"queries", c.bench.queries},
                  {"entity_ratio", c.bench.entity_ratio},
                  {"hops", c.bench.hops}};
    return j;
}

std::string fingerprint_bytes(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string fingerprint(const json& value) { return fingerprint_bytes(value.dump()); }

std::string config_hash(const RunConfig& config) {
    json j = to_json(config);
    j.erase("output_dir");
    j["eval"].erase("threads");
    return fingerprint(j);
}

std::string index_fingerprint(const RunConfig& config) {
    json full = to_json(config);
    json j;
    j["dataset"] = full["dataset"];
    j["ner"] = full["ner"];
    j["graph"] = full["graph"];
    j["dense"] = full["dense"];
    j["dense"].erase("ef_search");
    j["graph_kind"] = config.method == Method::tfidf_graph ? "term" : "entity";
    return fingerprint(j);
}

}  // namespace sprig
