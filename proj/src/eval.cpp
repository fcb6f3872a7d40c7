#include "sprig/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "sprig/error.hpp"
#include "sprig/percentile.hpp"
#include "sprig/text.hpp"

namespace sprig {

namespace {

constexpr const char* kComponent = "eval_bench";

bool contains(std::span<const std::string> gold, const std::string& id) {
    return std::find(gold.begin(), gold.end(), id) != gold.end();
}

std::size_t gold_in_top(std::span<const std::string> ranked, std::span<const std::string> gold, std::size_t k) {
    std::unordered_set<std::string_view> found;
    const std::size_t depth = std::min(k, ranked.size());
    for (std::size_t i = 0; i < depth; ++i)
        if (contains(gold, ranked[i])) found.insert(ranked[i]);
    return found.size();
}

}  // namespace

double recall_at(std::span<const std::string> ranked, std::span<const std::string> gold, std::size_t k) {
    if (gold.empty()) return 0.0;
    const std::set<std::string_view> distinct(gold.begin(), gold.end());
    return static_cast<double>(gold_in_top(ranked, gold, k)) / static_cast<double>(distinct.size());
}

double hit_at(std::span<const std::string> ranked, std::span<const std::string> gold, std::size_t k) {
    return gold_in_top(ranked, gold, k) > 0 ? 1.0 : 0.0;
}

double reciprocal_rank(std::span<const std::string> ranked, std::span<const std::string> gold) {
    for (std::size_t i = 0; i < ranked.size(); ++i)
        if (contains(gold, ranked[i])) return 1.0 / static_cast<double>(i + 1);
    return 0.0;
}

EvalReport compute_metrics(const Run& run, std::span<const Query> queries, const MetricOptions& options) {
    std::unordered_set<std::string_view> known;
    for (const Query& q : queries) known.insert(q.id);
    for (const auto& [id, entry] : run)
        if (!known.contains(id)) throw Error(kComponent, "run contains unknown query id '" + id + "'");

    EvalReport report;
    MetricAggregates& agg = report.aggregates;
    const std::vector<std::string> empty;
    for (const Query& q : queries) {
        QueryMetrics m;
        m.query_id = q.id;
        auto it = run.find(q.id);
        const std::vector<std::string>& ranked = it == run.end() ? empty : it->second.ranked_ids;
        if (it == run.end()) {
            m.missing_from_run = true;
            ++report.missing_queries;
        } else {
            m.timings = it->second.timings;
        }
        m.empty_gold = q.gold_ids.empty();
        if (m.empty_gold) ++report.empty_gold_queries;
        m.recall_at_5 = recall_at(ranked, q.gold_ids, 5);
        m.recall_at_10 = recall_at(ranked, q.gold_ids, 10);
        m.hit_at_10 = hit_at(ranked, q.gold_ids, 10);
        m.reciprocal_rank = reciprocal_rank(ranked, q.gold_ids);
        if (!m.empty_gold || options.include_empty_gold) {
            agg.recall_at_5 += m.recall_at_5;
            agg.recall_at_10 += m.recall_at_10;
            agg.hit_at_10 += m.hit_at_10;
            agg.mrr += m.reciprocal_rank;
            agg.qtime_seconds += m.timings.total_seconds;
            agg.seed_seconds += m.timings.seed_seconds;
            agg.traversal_seconds += m.timings.traversal_seconds;
            ++agg.evaluated;
        }
        report.per_query.push_back(std::move(m));
    }
    if (agg.evaluated > 0) {
        const auto n = static_cast<double>(agg.evaluated);
        agg.recall_at_5 /= n;
        agg.recall_at_10 /= n;
        agg.hit_at_10 /= n;
        agg.mrr /= n;
    }
    return report;
}

BootstrapResult paired_bootstrap(std::span<const double> a, std::span<const double> b, const BootstrapParams& params) {
    if (a.size() != b.size()) throw Error(kComponent, "paired bootstrap needs equally long metric columns");
    if (a.empty()) throw Error(kComponent, "paired bootstrap needs at least one query");
    if (params.resamples == 0) throw Error(kComponent, "resample count must be positive");
    if (!(params.confidence > 0.0 && params.confidence < 1.0)) throw Error(kComponent, "confidence must lie in (0, 1)");

    const std::size_t n = a.size();
    std::vector<double> delta(n);
    BootstrapResult out;
    out.resamples = params.resamples;
    out.rng_seed = params.seed;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        delta[i] = a[i] - b[i];
        total += delta[i];
        if (delta[i] > 0.0)
            ++out.wins;
        else if (delta[i] < 0.0)
            ++out.losses;
        else
            ++out.ties;
    }
    out.delta_mean = total / static_cast<double>(n);

    std::mt19937_64 rng(params.seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<double> means(params.resamples);
    for (double& mean : means) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += delta[pick(rng)];
        mean = sum / static_cast<double>(n);
    }
    std::sort(means.begin(), means.end());
    const double tail = 100.0 * (1.0 - params.confidence) / 2.0;
    out.ci_low = nearest_rank(means, tail);
    out.ci_high = nearest_rank(means, 100.0 - tail);
    return out;
}

BootstrapResult paired_bootstrap(const MetricColumn& a, const MetricColumn& b, const BootstrapParams& params) {
    std::map<std::string, double> left, right;
    for (const auto& [id, v] : a)
        if (!left.emplace(id, v).second) throw Error(kComponent, "duplicate query id '" + id + "' in run a");
    for (const auto& [id, v] : b)
        if (!right.emplace(id, v).second) throw Error(kComponent, "duplicate query id '" + id + "' in run b");
    std::vector<std::string> only_a, only_b;
    for (const auto& [id, v] : left)
        if (!right.contains(id)) only_a.push_back(id);
    for (const auto& [id, v] : right)
        if (!left.contains(id)) only_b.push_back(id);
    if (!only_a.empty() || !only_b.empty()) {
        auto list = [](const std::vector<std::string>& ids) {
            std::string s;
            for (std::size_t i = 0; i < std::min<std::size_t>(ids.size(), 5); ++i) s += (i ? ", " : "") + ids[i];
            if (ids.size() > 5) s += ", ... (" + std::to_string(ids.size()) + " total)";
            return s.empty() ? std::string("none") : s;
        };
        throw Error(kComponent, "query id sets differ; only in a: " + list(only_a) + "; only in b: " + list(only_b));
    }
    std::vector<double> xs, ys;
    for (const auto& [id, v] : left) {
        xs.push_back(v);
        ys.push_back(right.at(id));
    }
    return paired_bootstrap(xs, ys, params);
}

LatencyStats latency_stats(std::span<const double> samples) {
    if (samples.empty()) throw Error(kComponent, "latency statistics need at least one sample");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    return {nearest_rank(sorted, 50.0), nearest_rank(sorted, 95.0), nearest_rank(sorted, 99.0)};
}

LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw Error(kComponent, "linear fit needs paired samples");
    if (xs.size() < 2) throw Error(kComponent, "linear fit needs at least two points");
    const auto n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) throw Error(kComponent, "linear fit needs at least two distinct x values");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

void write_predictions(const Run& run, std::span<const Query> queries, std::ostream& out) {
    for (const Query& q : queries) {
        auto it = run.find(q.id);
        const nlohmann::json ids = it == run.end() ? nlohmann::json::array() : nlohmann::json(it->second.ranked_ids);
        out << nlohmann::json{{"query_id", q.id}, {"ranked_ids", ids}}.dump() << '\n';
    }
}

std::vector<std::pair<std::string, std::vector<std::string>>> read_predictions(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(kComponent, "cannot open predictions file '" + path + "'");
    std::vector<std::pair<std::string, std::vector<std::string>>> out;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (normalize_text(line).empty()) continue;
        try {
            const auto obj = nlohmann::json::parse(line);
            std::string id = obj.at("query_id").get<std::string>();
            if (!seen.insert(id).second) throw Error(kComponent, path + ": duplicate query id '" + id + "'");
            out.emplace_back(std::move(id), obj.at("ranked_ids").get<std::vector<std::string>>());
        } catch (const nlohmann::json::exception& e) {
            throw Error(kComponent, path + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void write_metrics_jsonl(const EvalReport& report, std::ostream& out) {
    for (const QueryMetrics& m : report.per_query) {
        out << nlohmann::json{{"query_id", m.query_id},
                              {"recall@5", m.recall_at_5},
                              {"recall@10", m.recall_at_10},
                              {"hit@10", m.hit_at_10},
                              {"rr", m.reciprocal_rank},
                              {"seed_s", m.timings.seed_seconds},
                              {"traversal_s", m.timings.traversal_seconds},
                              {"total_s", m.timings.total_seconds},
                              {"missing", m.missing_from_run},
                              {"empty_gold", m.empty_gold}}
                   .dump()
            << '\n';
    }
}

void write_summary_table(const std::vector<std::pair<std::string, EvalReport>>& rows, std::ostream& out) {
    out << "Method\tR@5\tR@10\tHit@10\tMRR\tQTime\n";
    const auto flags = out.flags();
    for (const auto& [method, report] : rows) {
        const MetricAggregates& a = report.aggregates;
        out << method << std::fixed << std::setprecision(3) << '\t' << a.recall_at_5 << '\t' << a.recall_at_10 << '\t'
            << a.hit_at_10 << '\t' << a.mrr << '\t' << a.qtime_seconds << '\n';
    }
    out.flags(flags);
}

}  // namespace sprig
