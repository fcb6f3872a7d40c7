#include <doctest.h>

#include <cmath>
#include <random>

#include "sprig/error.hpp"
#include "sprig/seeds.hpp"

using namespace sprig;

namespace {

/// Entity "alpha beta" in 2 docs, "gamma" in 8 docs, 10 docs total.
BipartiteGraph df_graph() {
    Csr raw;
    for (std::uint32_t d = 0; d < 10; ++d) {
        if (d < 2) {
            raw.cols.push_back(0);
            raw.values.push_back(1.0);
        }
        if (d >= 2) {
            raw.cols.push_back(1);
            raw.values.push_back(1.0);
        }
        raw.offsets.push_back(raw.cols.size());
    }
    return BipartiteGraph::assemble(10, {"alpha beta", "gamma"}, raw, 0.5);
}

RankedList ranked(std::vector<double> scores) {
    RankedList r;
    for (std::size_t i = 0; i < scores.size(); ++i) r.items.push_back({static_cast<DocId>(i), scores[i]});
    return r;
}

double l1(const SeedVector& s) {
    double t = 0.0;
    for (const auto& [n, m] : s.entries()) t += m;
    return t;
}

}  // namespace

TEST_CASE("entity seeds downweight by df^-q") {
    const auto g = df_graph();
    const auto matched = match_query_entities("Where did Alpha Beta meet Gamma?", g, {}, nullptr);
    REQUIRE(matched.size() == 2);
    const auto s = entity_seeds(g, matched, 1.0);
    CHECK(s.mass_of(g.entity_node(0)) == doctest::Approx(0.8));
    CHECK(s.mass_of(g.entity_node(1)) == doctest::Approx(0.2));
    CHECK(s.raw_mass() == doctest::Approx(0.625));

    const auto uniform = entity_seeds(g, matched, 0.0);
    CHECK(uniform.mass_of(g.entity_node(0)) == doctest::Approx(0.5));

    CHECK(match_query_entities("no capitals here", g, {}, nullptr).empty());
    CHECK(entity_seeds(g, {}, 0.5).empty());
}

TEST_CASE("query entities resolve through the alias map") {
    Csr raw;
    raw.offsets = {0, 1};
    raw.cols = {0};
    raw.values = {1.0};
    const auto g = BipartiteGraph::assemble(1, {"paris mythology"}, raw, 0.5);
    const AliasMap map(std::unordered_map<std::string, std::string>{{"paris", "paris mythology"}});
    CHECK(match_query_entities("Who was Paris?", g, {}, nullptr).empty());
    CHECK(match_query_entities("Who was Paris?", g, {}, &map).size() == 1);
}

TEST_CASE("passage seed weightings") {
    const auto rank = passage_seeds(ranked({9.0, 5.0, 1.0}), 2, SeedWeighting::rank);
    CHECK(rank.size() == 2);
    CHECK(rank.mass_of(0) == doctest::Approx(2.0 / 3.0));
    CHECK(rank.mass_of(1) == doctest::Approx(1.0 / 3.0));

    const auto soft = passage_seeds(ranked({2.0, 1.0}), 2, SeedWeighting::softmax);
    CHECK(soft.mass_of(0) == doctest::Approx(std::exp(2.0) / (std::exp(2.0) + std::exp(1.0))));
    CHECK(std::abs(soft.mass_of(0) - 0.731) < 1e-3);
    CHECK(std::abs(soft.mass_of(1) - 0.269) < 1e-3);

    const auto raw = passage_seeds(ranked({3.0, 3.0, 3.0}), 3, SeedWeighting::raw);
    for (DocId d = 0; d < 3; ++d) CHECK(raw.mass_of(d) == doctest::Approx(1.0 / 3.0));

    const auto shifted = passage_seeds(ranked({0.5, -0.5}), 2, SeedWeighting::raw);
    CHECK(l1(shifted) == doctest::Approx(1.0));

    CHECK(passage_seeds(RankedList{}, 3, SeedWeighting::rank).empty());
}

TEST_CASE("rank weighting ignores monotone rescaling") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> scores;
        double x = 100.0;
        for (int i = 0; i < 8; ++i) scores.push_back(x -= 1.0 + static_cast<double>(rng() % 10));
        std::vector<double> mapped;
        for (double v : scores) mapped.push_back(std::exp(v / 10.0) * 3.0 + 7.0);
        const auto a = passage_seeds(ranked(scores), 5, SeedWeighting::rank);
        const auto b = passage_seeds(ranked(mapped), 5, SeedWeighting::rank);
        CHECK(a.entries() == b.entries());
    }
}

TEST_CASE("seed mixing") {
    CHECK(adaptive_mix_weight(2, 3) == doctest::Approx(3.0 / 7.0));
    CHECK(std::abs(adaptive_mix_weight(2, 3) - 0.4286) < 1e-4);

    const auto se = SeedVector::from_masses({{10, 0.5}, {11, 0.125}});
    const auto sd = passage_seeds(ranked({3.0, 2.0, 1.0}), 3, SeedWeighting::rank);

    CHECK(mix_seeds(SeedVector{}, sd, SeedMixing::adaptive).entries() == sd.entries());
    CHECK(mix_seeds(se, SeedVector{}, SeedMixing::mass_proportional).entries() == se.entries());
    CHECK_THROWS_AS(mix_seeds(SeedVector{}, SeedVector{}, SeedMixing::adaptive), Error);

    SUBCASE("mass proportional concatenates raw masses") {
        const auto m = mix_seeds(se, sd, SeedMixing::mass_proportional);
        const double total = 0.625 + (1.0 + 0.5 + 1.0 / 3.0);
        CHECK(m.mass_of(10) == doctest::Approx(0.5 / total));
        CHECK(m.mass_of(0) == doctest::Approx(1.0 / total));
        CHECK(l1(m) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("adaptive weights the normalized sides") {
        const auto m = mix_seeds(se, sd, SeedMixing::adaptive);
        const double a = 3.0 / 7.0;
        CHECK(m.mass_of(10) == doctest::Approx(a * 0.8));
        CHECK(m.mass_of(0) == doctest::Approx((1.0 - a) * sd.mass_of(0)));
        CHECK(l1(m) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("mixing a seed with itself is the identity") {
        const auto m = mix_seeds(sd, sd, SeedMixing::mass_proportional);
        REQUIRE(m.size() == sd.size());
        for (const auto& [node, mass] : sd.entries()) CHECK(m.mass_of(node) == doctest::Approx(mass).epsilon(1e-12));
    }
}

TEST_CASE("mixed seeds are always normalized") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<SeedVector::Entry> a, b;
        for (std::size_t i = 0, n = rng() % 5; i < n; ++i) a.emplace_back(rng() % 20, 0.01 + (rng() % 100) / 7.0);
        for (std::size_t i = 0, n = rng() % 5; i < n; ++i) b.emplace_back(rng() % 20, 0.01 + (rng() % 100) / 3.0);
        const auto sa = SeedVector::from_masses(a), sb = SeedVector::from_masses(b);
        if (sa.empty() && sb.empty()) continue;
        for (auto mode : {SeedMixing::mass_proportional, SeedMixing::adaptive}) {
            const auto m = mix_seeds(sa, sb, mode);
            CHECK(l1(m) == doctest::Approx(1.0).epsilon(1e-9));
            for (const auto& [n, mass] : m.entries()) CHECK(mass > 0.0);
        }
    }
}

TEST_CASE("fallback seeds") {
    const auto u = fallback_seed(4, FallbackPolicy::uniform, nullptr);
    CHECK_FALSE(u.degraded);
    REQUIRE(u.seed.size() == 4);
    for (DocId d = 0; d < 4; ++d) CHECK(u.seed.mass_of(d) == doctest::Approx(0.25));

    const auto bm = ranked({5.0, 4.0});
    const auto top = fallback_seed(4, FallbackPolicy::bm25_top1, &bm);
    CHECK(top.seed.size() == 1);
    CHECK(top.seed.mass_of(0) == doctest::Approx(1.0));

    const RankedList none;
    const auto degraded = fallback_seed(4, FallbackPolicy::bm25_top1, &none);
    CHECK(degraded.degraded);
    CHECK(degraded.seed.size() == 4);
}

TEST_CASE("seed enum names round trip") {
    for (auto w : {SeedWeighting::raw, SeedWeighting::softmax, SeedWeighting::rank})
        CHECK(parse_seed_weighting(to_string(w)) == w);
    for (auto m : {SeedMixing::mass_proportional, SeedMixing::adaptive}) CHECK(parse_seed_mixing(to_string(m)) == m);
    for (auto f : {FallbackPolicy::uniform, FallbackPolicy::bm25_top1}) CHECK(parse_fallback_policy(to_string(f)) == f);
    CHECK_THROWS_AS(parse_seed_weighting("linear"), Error);
}
