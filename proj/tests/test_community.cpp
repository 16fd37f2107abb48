#include <catch_amalgamated.hpp>

#include <random>

#include <polarnet/polarnet.hpp>

#include "oracles.hpp"

using namespace polarnet;
using Catch::Matchers::WithinAbs;

namespace {

/// Two complete 5-node digraphs, optionally joined by one link 4 -> 5.
Layer clique_pair(bool bridge) {
    Layer l{"cliques", false, {}};
    for (NodeIndex base : {0u, 5u})
        for (NodeIndex i = 0; i < 5; ++i)
            for (NodeIndex j = 0; j < 5; ++j)
                if (i != j) l.links.push_back({base + i, base + j});
    if (bridge) l.links.push_back({4, 5});
    return l;
}

std::vector<ComboScript> scripts(std::initializer_list<const char*> names) {
    std::vector<ComboScript> out;
    for (auto n : names) out.push_back(ComboScript::parse(n));
    return out;
}

bool same_grouping(const Partition& a, const std::vector<GroupIndex>& b) {
    return a.canonical() == Partition::from_groups(b).canonical();
}

}  // namespace

TEST_CASE("combo scripts parse") {
    const auto s = ComboScript::parse("esrfr-30");
    CHECK(s.stages.size() == 5);
    CHECK(s.repetitions == 30);
    CHECK(s.to_string() == "esrfr-30");
    CHECK_THROWS_AS(ComboScript::parse("x-1"), ValidationError);
    CHECK_THROWS_AS(ComboScript::parse("e-0"), ValidationError);
    CHECK_THROWS_AS(ComboScript::parse("e"), ValidationError);
    CHECK_THROWS_AS(ComboScript::parse("-3"), ValidationError);
    CHECK_THROWS_AS(ComboScript::parse("e-1x"), ValidationError);
    CHECK(parse_portfolio("e-1, f-1").size() == 2);
    CHECK_THROWS_AS(parse_portfolio(" , "), ValidationError);
    CHECK(default_portfolio().size() == 7);
}

TEST_CASE("every algorithm separates disconnected cliques") {
    const auto l = clique_pair(false);
    const LayerGraph g(l, 10);
    const std::vector<GroupIndex> truth{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
    for (const auto& name : {"f-1", "s-1", "e-1", "rfr-1", "esrfr-3"}) {
        const auto r = run_combo(g, ComboScript::parse(name), 4);
        INFO(name);
        CHECK(r.group_count == 2);
        CHECK(same_grouping(r.partition, truth));
        CHECK_THAT(r.q, WithinAbs(0.5, 1e-12));
    }
}

TEST_CASE("bridged cliques reach the exhaustive optimum") {
    const auto l = clique_pair(true);
    const LayerGraph g(l, 10);
    const double best = oracle::optimum_q(oracle::adjacency(l, 10));
    for (const auto& name : {"f-1", "s-1", "e-1"}) {
        INFO(name);
        CHECK_THAT(run_combo(g, ComboScript::parse(name), 1).q, WithinAbs(best, 1e-9));
    }
    CHECK_THAT(run_portfolio(g, default_portfolio(), 1).q, WithinAbs(best, 1e-9));
}

TEST_CASE("default portfolio attains the optimum on small graphs") {
    std::mt19937_64 rng(2024);
    int graphs = 0;
    while (graphs < 50) {
        const std::size_t n = 4 + rng() % 7;
        auto l = oracle::random_layer(rng, n, 0.15 + 0.35 * static_cast<double>(rng() % 100) / 100.0,
                                      graphs % 2 == 0, false);
        if (l.links.size() < 2) continue;
        const LayerGraph g(l, n);
        const double best = oracle::optimum_q(oracle::adjacency(l, n));
        const auto r = run_portfolio(g, default_portfolio(), static_cast<std::uint64_t>(graphs));
        INFO("graph " << graphs << " n=" << n);
        CHECK_THAT(r.q, WithinAbs(best, 1e-9));
        ++graphs;
    }
}

TEST_CASE("planted partitions are recovered") {
    int good = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto [net, planted] = generate_planted_partition(2, 20, 0.5, 0.02, seed);
        const LayerGraph g(net.layers()[0], net.node_count());
        const auto r = run_portfolio(g, default_portfolio(), seed);
        const double v = partition_nmi(planted, r.partition, EntropyEstimator::MaximumLikelihood).raw;
        good += v >= 0.9;
    }
    CHECK(good >= 95);
}

TEST_CASE("reported Q is the directed Q of the partition") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 10 + rng() % 30;
        auto l = oracle::random_layer(rng, n, 0.15, rep % 2 == 0);
        l.links.push_back({0, 1, 1.0, std::nullopt});
        const LayerGraph g(l, n);
        for (const auto& s : scripts({"e-1", "s-2", "f-1", "r-1", "rsrfr-2"})) {
            const auto r = run_combo(g, s, 5);
            CHECK(r.q == q_modularity(l, r.partition));
            CHECK(r.group_count <= r.partition.occupied_count());
        }
    }
}

TEST_CASE("reposition never lowers Q and fixes optima") {
    std::mt19937_64 rng(41);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t n = 6 + rng() % 25;
        auto l = oracle::random_layer(rng, n, 0.2, rep % 2 == 0);
        l.links.push_back({0, 1, 1.0, std::nullopt});
        const std::size_t k = 1 + rng() % 5;
        const auto start = Partition::from_groups(oracle::random_groups(rng, n, k));
        const double before = q_modularity(l, start);
        const auto r = refine_reposition(LayerGraph(l, n), start);
        CHECK(r.q >= before - 1e-12);
        const auto again = refine_reposition(LayerGraph(l, n), r.partition);
        CHECK(again.partition.canonical() == r.partition.canonical());
    }
    const auto l = clique_pair(false);
    const auto singles = Partition::from_groups({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    const auto r = refine_reposition(LayerGraph(l, 10), singles);
    CHECK(r.group_count == 2);
    CHECK_THAT(r.q, WithinAbs(0.5, 1e-12));
    const auto opt = Partition::from_groups({0, 0, 0, 0, 0, 1, 1, 1, 1, 1});
    CHECK(refine_reposition(LayerGraph(l, 10), opt).partition.canonical() == opt.canonical());
}

TEST_CASE("portfolio keeps the best script") {
    std::mt19937_64 rng(51);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 15 + rng() % 20;
        auto l = oracle::random_layer(rng, n, 0.15, false);
        l.links.push_back({0, 1, 1.0, std::nullopt});
        const LayerGraph g(l, n);
        const auto p = scripts({"e-1", "f-1", "s-3", "r-1"});
        const auto best = run_portfolio(g, p, 9);
        for (const auto& s : p) CHECK(best.q >= run_combo(g, s, derive_seed(9, s.to_string())).q - 1e-15);
    }
    CHECK_THROWS_AS(run_portfolio(LayerGraph(clique_pair(false), 10), {}, 1), ValidationError);
}

TEST_CASE("detection is reproducible") {
    const auto [net, p] = generate_planted_partition(3, 15, 0.4, 0.05, 8);
    const LayerGraph g(net.layers()[0], net.node_count());
    for (const auto& s : scripts({"e-3", "s-3", "esrfr-4", "rsrfr-2"})) {
        const auto a = run_combo(g, s, 77), b = run_combo(g, s, 77);
        CHECK(a.partition == b.partition);
        CHECK(a.q == b.q);
    }
    const auto a = run_portfolio(g, default_portfolio(), 3), b = run_portfolio(g, default_portfolio(), 3);
    CHECK(a.partition == b.partition);
}

TEST_CASE("fast agglomeration is deterministic under any seed") {
    const auto [net, p] = generate_planted_partition(3, 12, 0.5, 0.05, 2);
    const LayerGraph g(net.layers()[0], net.node_count());
    const auto a = detect_fast(g, 1), b = detect_fast(g, 999);
    CHECK(a.partition == b.partition);
}

TEST_CASE("empty layer cannot be partitioned") {
    const LayerGraph g(Layer{}, 5);
    CHECK_THROWS_AS(detect_fast(g, 1), UndefinedMetricError);
    CHECK_THROWS_AS(detect_spectral(g, 1), UndefinedMetricError);
    CHECK_THROWS_AS(detect_extremal(g, 1), UndefinedMetricError);
}

TEST_CASE("isolated nodes share one group") {
    Layer l = clique_pair(false);
    const LayerGraph g(l, 13);  // nodes 10..12 carry no links
    const auto r = run_portfolio(g, default_portfolio(), 1);
    CHECK(r.group_count == 2);
    CHECK(r.partition.group_of(10) == r.partition.group_of(11));
    CHECK(r.partition.group_of(11) == r.partition.group_of(12));
    CHECK(r.partition.group_of(10) != r.partition.group_of(0));
}
