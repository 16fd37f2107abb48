#include <catch_amalgamated.hpp>

#include <random>

#include <polarnet/polarnet.hpp>

#include "oracles.hpp"

using namespace polarnet;
using Catch::Matchers::WithinAbs;

namespace {

const Date kDay0 = Date::from_ymd(2011, 1, 1);

Layer dated_random(std::mt19937_64& rng, std::size_t n, double density, int span_days, bool weighted) {
    auto l = oracle::random_layer(rng, n, density, weighted);
    for (auto& x : l.links) x.timestamp = kDay0 + static_cast<int>(rng() % static_cast<unsigned>(span_days));
    return l;
}

double q_metric(const Layer& l, const Partition& p) { return q_modularity(l, p); }

}  // namespace

TEST_CASE("window slices are half-open") {
    Layer l{"t", false, {}};
    for (int d = 0; d < 10; ++d) l.links.push_back({0, 1, 1.0, kDay0 + d});
    CHECK(window_slice(l, kDay0, 10).links == l.links);
    CHECK(window_slice(l, kDay0 + 2, 3).links.size() == 3);
    CHECK(window_slice(l, kDay0 + 20, 5).links.empty());
    const auto s = window_slice(l, kDay0, 4);
    for (const auto& x : s.links) CHECK(*x.timestamp < kDay0 + 4);
    CHECK(s.links.size() == 4);
    CHECK_THROWS_AS(window_slice(l, kDay0, 0), ValidationError);
}

TEST_CASE("untimestamped links are rejected unless skipped") {
    Layer l{"t", false, {{0, 1, 1.0, kDay0}, {1, 0, 1.0, std::nullopt}}};
    CHECK_THROWS_AS(window_slice(l, kDay0, 5), ValidationError);
    CHECK(window_slice(l, kDay0, 5, true).links.size() == 1);
    const auto p = Partition::single_group(2);
    CHECK_THROWS_AS(sweep(l, p, q_metric), ValidationError);
    CHECK(sweep(l, p, q_metric, {}, true).records.size() == 1);
    CHECK_THROWS_AS(sweep(Layer{"e", false, {}}, p, q_metric), ValidationError);
}

TEST_CASE("window spec validation") {
    CHECK_THROWS_AS((WindowSpec{5, 6}.validate()), ValidationError);
    CHECK_THROWS_AS((WindowSpec{5, 0}.validate()), ValidationError);
    CHECK_NOTHROW((WindowSpec{60, 1}.validate()));
    CHECK(WindowSpec{}.width_days == 60);
    CHECK(WindowSpec{}.step_days == 1);
}

TEST_CASE("window counts and link counts match a brute-force filter") {
    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 6 + rng() % 20;
        const auto l = dated_random(rng, n, 0.3, 30 + static_cast<int>(rng() % 200), rep % 2 == 0);
        if (l.links.empty()) continue;
        const auto p = Partition::from_groups(oracle::random_groups(rng, n, 3));
        const WindowSpec spec{static_cast<std::int32_t>(5 + rng() % 40), static_cast<std::int32_t>(1 + rng() % 5)};
        const auto s = sweep(l, p, q_metric, spec);
        Date first = *l.links[0].timestamp, last = first;
        for (const auto& x : l.links) {
            first = std::min(first, *x.timestamp);
            last = std::max(last, *x.timestamp);
        }
        CHECK(s.records.size() == static_cast<std::size_t>((last - first) / spec.step_days) + 1);
        CHECK(s.records.size() == window_count(first, last, spec));
        for (std::size_t k = 0; k < s.records.size(); ++k) {
            const auto& r = s.records[k];
            CHECK(r.window_start == first + static_cast<int>(k) * spec.step_days);
            CHECK(r.links_in_window == oracle::links_in(l, r.window_start, spec.width_days));
            const auto slice = window_slice(l, r.window_start, spec.width_days);
            if (slice.total_weight() > 0) {
                REQUIRE(r.value);
                CHECK_THAT(*r.value, WithinAbs(q_modularity(slice, p), 1e-12));
            } else {
                CHECK_FALSE(r.value);
            }
        }
    }
}

TEST_CASE("a window covering the whole history reproduces the global value") {
    std::mt19937_64 rng(14);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 5 + rng() % 20;
        auto l = dated_random(rng, n, 0.3, 100, rep % 2 == 1);
        l.links.push_back({0, 1, 1.0, kDay0});
        l.links.push_back({1, 2, 1.0, kDay0 + 99});
        const auto p = Partition::from_groups(oracle::random_groups(rng, n, 3));
        const auto s = sweep(l, p, q_metric, WindowSpec{100, 100});
        REQUIRE(s.records.size() == 1);
        REQUIRE(s.records[0].value);
        CHECK_THAT(*s.records[0].value, WithinAbs(q_modularity(l, p), 1e-12));
        CHECK(s.records[0].links_in_window == l.links.size());
    }
}

TEST_CASE("windows holding the same links give the same value") {
    const auto [net, p] = generate_planted_partition(2, 6, 0.7, 0.1, 5);
    Layer l = net.layers()[0];
    for (auto& x : l.links) x.timestamp = kDay0 + 30;
    l.links.push_back({0, 1, 1.0, kDay0});
    const auto s = sweep(l, p, q_metric, WindowSpec{60, 1});
    const auto same_day = window_slice(l, kDay0 + 30, 1);
    for (const auto& r : s.records) {
        if (r.window_start + 60 <= kDay0 + 30) continue;
        REQUIRE(r.value);
        if (r.window_start > kDay0) CHECK_THAT(*r.value, WithinAbs(q_modularity(same_day, p), 1e-15));
    }
}

TEST_CASE("empty windows are gaps, not zeros") {
    Layer l{"t", false, {{0, 1, 1.0, kDay0}, {2, 3, 1.0, kDay0 + 100}}};
    const auto p = Partition({0, 0, 1, 1}, {"a", "b"});
    const auto s = sweep(l, p, q_metric, WindowSpec{10, 5});
    std::size_t gaps = 0;
    for (const auto& r : s.records) {
        if (r.links_in_window == 0) {
            CHECK_FALSE(r.value);
            ++gaps;
        }
    }
    CHECK(gaps > 0);
}

TEST_CASE("Q collapses when intra-group linking gives way to cross-group linking") {
    // Before the event only intra-group links, afterwards only cross-group links.
    const auto [net, p] = generate_planted_partition(2, 15, 0.3, 0.0, 21);
    const Date event = kDay0 + 120;
    Layer l{"t", false, {}};
    std::mt19937_64 rng(22);
    for (const auto& x : net.layers()[0].links)
        l.links.push_back({x.source, x.target, 1.0, kDay0 + static_cast<int>(rng() % 120)});
    for (NodeIndex i = 0; i < 30; ++i)
        for (NodeIndex j = 0; j < 30; ++j)
            if (p.group_of(i) != p.group_of(j) && rng() % 10 < 3)
                l.links.push_back({i, j, 1.0, event + static_cast<int>(rng() % 120)});
    const auto s = sweep(l, p, q_metric, WindowSpec{30, 1});
    double before = -1, after = 1;
    for (const auto& r : s.records) {
        if (!r.value) continue;
        if (r.window_start + 30 <= event) before = std::max(before, *r.value);
        if (r.window_start >= event) after = std::min(after, *r.value);
    }
    CHECK(before > 0.45);
    CHECK(after < 0.0);
}

TEST_CASE("event annotation") {
    Layer l{"t", false, {{0, 1, 1.0, kDay0}, {1, 0, 1.0, kDay0 + 10}}};
    const auto s = sweep(l, Partition::single_group(2), q_metric, WindowSpec{5, 1});
    SECTION("no events") {
        const auto a = event_annotation(s, {});
        CHECK(a.events.empty());
        CHECK(a.series.records.size() == s.records.size());
    }
    SECTION("event inside the span") {
        const auto a = event_annotation(s, {{kDay0 + 3, "vote"}});
        REQUIRE(a.events.size() == 1);
        CHECK(a.events[0].in_span);
        CHECK(a.annotations_for(a.series.records[0]) == std::vector<std::string>{"vote"});
        CHECK(a.annotations_for(a.series.records[4]).empty());
        for (std::size_t k = 0; k < s.records.size(); ++k) {
            CHECK(a.series.records[k].links_in_window == s.records[k].links_in_window);
            CHECK(a.series.records[k].value == s.records[k].value);
        }
    }
    SECTION("event outside the span is kept and flagged") {
        const auto a = event_annotation(s, {{kDay0 + 400, "later"}, {kDay0 + (-3), "earlier"}});
        REQUIRE(a.events.size() == 2);
        CHECK_FALSE(a.events[0].in_span);
        CHECK_FALSE(a.events[1].in_span);
    }
}
