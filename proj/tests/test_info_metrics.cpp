#include <catch_amalgamated.hpp>

#include <random>
#include <set>

#include <polarnet/polarnet.hpp>

#include "oracles.hpp"

using namespace polarnet;
using Catch::Matchers::WithinAbs;

namespace {

Layer links(std::initializer_list<std::pair<NodeIndex, NodeIndex>> arcs) {
    Layer l{"l", false, {}};
    for (auto [s, t] : arcs) l.links.push_back({s, t});
    return l;
}

std::set<std::pair<NodeIndex, NodeIndex>> pair_set(const Layer& l) {
    std::set<std::pair<NodeIndex, NodeIndex>> s;
    for (const auto& x : l.links) s.emplace(x.source, x.target);
    return s;
}

double ml_bits(const std::vector<std::uint64_t>& c) {
    double n = 0;
    for (auto x : c) n += static_cast<double>(x);
    double h = 0;
    for (auto x : c)
        if (x) h -= x / n * std::log2(x / n);
    return h;
}

}  // namespace

TEST_CASE("jaccard on small sets") {
    const auto x = links({{1, 2}, {2, 3}});
    const auto y = links({{2, 3}, {3, 4}, {4, 5}});
    CHECK_THAT(jaccard(x, y), WithinAbs(0.25, 1e-15));
    CHECK_THAT(partial_jaccard(x, y), WithinAbs(1.0 / 3.0, 1e-15));
    CHECK(jaccard(x, x) == 1.0);
    CHECK(jaccard(x, links({{5, 6}})) == 0.0);
    CHECK(partial_jaccard(y, links({{3, 4}})) == 1.0);
    CHECK_THROWS_AS(jaccard(Layer{}, Layer{}), UndefinedMetricError);
    CHECK_THROWS_AS(partial_jaccard(x, Layer{}), UndefinedMetricError);
}

TEST_CASE("partial jaccard matches set arithmetic on random layers") {
    std::mt19937_64 rng(21);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 3 + rng() % 15;
        const auto x = oracle::random_layer(rng, n, 0.3, rep % 3 == 0, false);
        auto y = oracle::random_layer(rng, n, 0.3, rep % 2 == 0, false);
        if (y.links.empty()) y.links.push_back({0, 1});
        const auto a = pair_set(x), b = pair_set(y);
        std::size_t common = 0;
        for (auto& p : b) common += a.count(p);
        CHECK(partial_jaccard(x, y) == static_cast<double>(common) / static_cast<double>(b.size()));
        if (!a.empty()) {
            CHECK_THAT(partial_jaccard(x, y) * b.size(), WithinAbs(partial_jaccard(y, x) * a.size(), 1e-9));
            std::set<std::pair<NodeIndex, NodeIndex>> u = a;
            u.insert(b.begin(), b.end());
            CHECK(jaccard(x, y) == static_cast<double>(common) / static_cast<double>(u.size()));
        }
    }
}

TEST_CASE("entropy estimators") {
    const std::vector<std::uint64_t> c40{4, 0}, c22{2, 2}, c1111{1, 1, 1, 1};
    CHECK(entropy_ml(c40) == 0.0);
    CHECK(entropy_ml(c22) == 1.0);
    CHECK(entropy_ml(c1111) == 2.0);
    CHECK(entropy_mm(c40) == 0.0);
    CHECK(entropy_mm(c22) == 1.125);
    const std::vector<std::uint64_t> zero{0, 0};
    CHECK_THROWS_AS(entropy_ml(zero), UndefinedMetricError);
    CHECK_THROWS_AS(entropy_mm(zero), UndefinedMetricError);
}

TEST_CASE("Miller-Madow minus ML is the bias term exactly") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<std::uint64_t> c(1 + rng() % 6);
        std::uint64_t n = 0, occupied = 0;
        for (auto& x : c) {
            x = rng() % 4 == 0 ? 0 : rng() % 50;
            n += x;
            occupied += x > 0;
        }
        if (n == 0) continue;
        const double bias = (static_cast<double>(occupied) - 1.0) / (2.0 * static_cast<double>(n));
        CHECK(miller_madow_correction(c) == bias);
        CHECK(entropy_mm(c) == entropy_ml(c) + bias);
        CHECK_THAT(entropy_mm(c) - entropy_ml(c), WithinAbs(bias, 1e-15));
        CHECK_THAT(entropy_ml(c), WithinAbs(ml_bits(c), 1e-12));
    }
}

TEST_CASE("uniform counts maximize ML entropy") {
    // every count vector of total n over m outcomes, n <= 8, m <= 3
    for (std::uint64_t m = 1; m <= 3; ++m)
        for (std::uint64_t n = 1; n <= 8; ++n) {
            double best = -1.0;
            std::vector<std::uint64_t> best_c;
            std::vector<std::uint64_t> c(m, 0);
            std::function<void(std::size_t, std::uint64_t)> rec = [&](std::size_t i, std::uint64_t left) {
                if (i + 1 == m) {
                    c[i] = left;
                    const double h = entropy_ml(c);
                    if (h > best + 1e-12) {
                        best = h;
                        best_c = c;
                    }
                    return;
                }
                for (std::uint64_t v = 0; v <= left; ++v) {
                    c[i] = v;
                    rec(i + 1, left - v);
                }
            };
            rec(0, n);
            const auto [lo, hi] = std::minmax_element(best_c.begin(), best_c.end());
            CHECK(*hi - *lo <= 1);
        }
}

TEST_CASE("mutual information") {
    const CountTable indep(2, 2, {25, 25, 25, 25});
    CHECK(std::abs(mutual_information(indep, EntropyEstimator::MaximumLikelihood).raw) < 1e-9);
    const CountTable diag(2, 2, {50, 0, 0, 50});
    CHECK_THAT(mutual_information(diag, EntropyEstimator::MaximumLikelihood).raw, WithinAbs(1.0, 1e-12));
    const CountTable single(1, 1, {7});
    CHECK(mutual_information(single).degenerate);
    CHECK(mutual_information(single).raw == 0.0);

    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 50; ++rep) {
        CountTable t(2 + rng() % 3, 2 + rng() % 3);
        for (std::size_t r = 0; r < t.rows(); ++r)
            for (std::size_t c = 0; c < t.cols(); ++c) t(r, c) = rng() % 20;
        if (t.total() == 0) continue;
        for (auto est : {EntropyEstimator::MaximumLikelihood, EntropyEstimator::MillerMadow}) {
            const auto a = mutual_information(t, est), b = mutual_information(t.transposed(), est);
            CHECK_THAT(a.raw, WithinAbs(b.raw, 1e-12));
            CHECK(a.clamped >= 0.0);
        }
    }
}

TEST_CASE("NMI of identical and independent labelings") {
    const Partition x({0, 0, 1, 1, 2, 2, 2, 0}, {"a", "b", "c"});
    CHECK_THAT(partition_nmi(x, x, EntropyEstimator::MaximumLikelihood).raw, WithinAbs(1.0, 1e-12));
    CHECK_THAT(partition_nmi(x, x, EntropyEstimator::MillerMadow).raw, WithinAbs(1.0, 1e-12));
    // product table: rows and columns independent
    const CountTable indep(3, 2, {10, 30, 20, 60, 5, 15});
    const auto v = nmi(indep, Margin::Rows, EntropyEstimator::MaximumLikelihood);
    CHECK(std::abs(v.raw) < 1e-6);
    const auto w = nmi(indep, Margin::Cols, EntropyEstimator::MaximumLikelihood);
    CHECK(std::abs(w.raw) < 1e-6);
    CHECK_THROWS_AS(nmi(CountTable(1, 2, {3, 4}), Margin::Rows), UndefinedMetricError);
}

TEST_CASE("ML NMI stays in the unit interval") {
    std::mt19937_64 rng(12);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 5 + rng() % 40;
        const auto a = oracle::random_groups(rng, n, 1 + rng() % 4);
        const auto b = oracle::random_groups(rng, n, 1 + rng() % 4);
        const auto pa = Partition::from_groups(a), pb = Partition::from_groups(b);
        try {
            const auto v = partition_nmi(pa, pb, EntropyEstimator::MaximumLikelihood);
            CHECK(v.raw >= -1e-12);
            CHECK(v.raw <= 1.0 + 1e-12);
        } catch (const UndefinedMetricError&) {
            CHECK(pa.occupied_count() == 1);
        }
    }
}

TEST_CASE("link indicator counts cover all ordered pairs") {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t n = 2 + rng() % 10;
        const auto x = oracle::random_layer(rng, n, 0.4, false);
        const auto y = oracle::random_layer(rng, n, 0.4, true);
        const auto p = link_indicator_pair(x, y, n);
        CHECK(p.total() == n * (n - 1));
        auto nonself = [](const Layer& l) {
            std::set<std::pair<NodeIndex, NodeIndex>> s;
            for (const auto& e : l.links)
                if (e.source != e.target) s.emplace(e.source, e.target);
            return s;
        };
        const auto a = nonself(x), b = nonself(y);
        std::uint64_t both = 0;
        for (auto& e : a) both += b.count(e);
        CHECK(p.n11 == both);
        CHECK(p.n10 == a.size() - both);
        CHECK(p.n01 == b.size() - both);
    }
}

TEST_CASE("link NMI fixed points") {
    SECTION("identical layers") {
        const auto x = links({{0, 1}, {1, 2}, {2, 0}});
        const auto [a, b] = link_nmi(x, x, 4);
        CHECK_THAT(a.raw, WithinAbs(1.0, 1e-12));
        CHECK_THAT(b.raw, WithinAbs(1.0, 1e-12));
    }
    SECTION("complement layers on three nodes") {
        const auto x = links({{0, 1}, {1, 2}, {2, 0}});
        const auto y = links({{1, 0}, {2, 1}, {0, 2}});
        for (auto est : {EntropyEstimator::MaximumLikelihood, EntropyEstimator::MillerMadow}) {
            const auto [a, b] = link_nmi(x, y, 3, est);
            CHECK_THAT(a.raw, WithinAbs(1.0, 1e-12));
            CHECK_THAT(b.raw, WithinAbs(1.0, 1e-12));
        }
    }
    SECTION("disjoint sparse layers on four nodes") {
        // 12 ordered pairs; x has one link, y another: table (n00, n01, n10, n11) = (10, 1, 1, 0)
        const auto x = links({{0, 1}});
        const auto y = links({{2, 3}});
        const auto p = link_indicator_pair(x, y, 4);
        CHECK(p.n00 == 10);
        CHECK(p.n01 == 1);
        CHECK(p.n10 == 1);
        CHECK(p.n11 == 0);
        const auto [a, b] = link_nmi(x, y, 4, EntropyEstimator::MaximumLikelihood);
        const double h = ml_bits({11, 1});
        const double mi = 2 * h - ml_bits({10, 1, 1});
        CHECK_THAT(a.raw, WithinAbs(mi / h, 1e-12));
        CHECK(a.raw < 0.05);
        CHECK_THAT(b.raw, WithinAbs(a.raw, 1e-12));
    }
}

TEST_CASE("leave-one-out link tables match recomputation") {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 3 + rng() % 8;
        const auto x = oracle::random_layer(rng, n, 0.35, false);
        const auto y = oracle::random_layer(rng, n, 0.35, false);
        const auto loo = leave_one_out_link_pairs(x, y, n);
        REQUIRE(loo.size() == n);
        for (NodeIndex v = 0; v < n; ++v) {
            MultiplexNetwork net;
            for (std::size_t i = 0; i < n; ++i) net.nodes().intern(std::to_string(i));
            Layer xx = x, yy = y;
            xx.name = "x";
            yy.name = "y";
            net.add_layer(xx);
            net.add_layer(yy);
            std::vector<bool> keep(n, true);
            keep[v] = false;
            const auto [sub, part] = induced_subnetwork(net, Partition::single_group(n), keep);
            const auto ref = link_indicator_pair(sub.layers()[0], sub.layers()[1], n - 1);
            CHECK(loo[v].n11 == ref.n11);
            CHECK(loo[v].n10 == ref.n10);
            CHECK(loo[v].n01 == ref.n01);
            CHECK(loo[v].n00 == ref.n00);
        }
    }
}

TEST_CASE("jackknife of a constant metric has zero spread") {
    const auto [net, part] = generate_planted_partition(2, 6, 0.6, 0.1, 3);
    const auto est = jackknife(net, part, [](const MultiplexNetwork&, const Partition&) { return 0.1 + 0.2; });
    CHECK(est.two_sigma == 0.0);
    CHECK(est.std_error == 0.0);
    CHECK(est.jack_mean == 0.1 + 0.2);
    CHECK(est.samples == net.node_count());
    CHECK(est.skipped == 0);
    CHECK_FALSE(est.unreliable);
}

TEST_CASE("jackknife replicates on a three-node toy") {
    // metric = number of links; removing node i leaves the links not touching i
    MultiplexNetwork net;
    for (auto id : {"a", "b", "c"}) net.nodes().intern(id);
    net.add_layer(links({{0, 1}, {1, 2}, {2, 0}, {0, 2}}));
    const auto part = Partition::single_group(3);
    const auto est = jackknife(net, part, [](const MultiplexNetwork& n, const Partition&) {
        return static_cast<double>(n.layers()[0].links.size());
    });
    // drop a: {b->c} = 1; drop b: {c->a, a->c} = 2; drop c: {a->b} = 1
    const double mean = (1.0 + 2.0 + 1.0) / 3.0;
    CHECK_THAT(est.jack_mean, WithinAbs(mean, 1e-15));
    CHECK(est.point == 4.0);
    const double var = ((1 - mean) * (1 - mean) * 2 + (2 - mean) * (2 - mean)) / 3.0;
    CHECK_THAT(est.two_sigma, WithinAbs(2 * std::sqrt(var), 1e-15));
    CHECK_THAT(est.std_error, WithinAbs(std::sqrt(2.0 / 3.0 * 3 * var), 1e-15));
}

TEST_CASE("jackknife skips undefined replicates") {
    std::vector<std::optional<double>> reps{1.0, std::nullopt, 3.0, 2.0};
    const auto est = summarize_replicates(2.0, reps);
    CHECK(est.skipped == 1);
    CHECK(est.samples == 4);
    CHECK(est.unreliable);
    CHECK(est.jack_mean == 2.0);
    std::vector<std::optional<double>> none(3);
    CHECK(summarize_replicates(5.0, none).unreliable);
}
