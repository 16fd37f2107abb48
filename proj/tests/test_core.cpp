#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <sstream>

#include <polarnet/polarnet.hpp>

#include "oracles.hpp"

using namespace polarnet;

namespace {

Layer read(const std::string& text, NodeRegistry& reg, const std::string& name = "l") {
    std::istringstream in(text);
    return read_layer(in, "mem.csv", LayerSchema{name}, reg);
}

std::vector<std::tuple<std::string, std::string, double, std::string>> multiset(const Layer& l,
                                                                                 const NodeRegistry& reg) {
    std::vector<std::tuple<std::string, std::string, double, std::string>> out;
    for (const auto& x : l.links)
        out.emplace_back(reg.id(x.source), reg.id(x.target), x.weight, x.timestamp ? x.timestamp->to_string() : "");
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("plain rows give unit-weight links") {
    NodeRegistry reg;
    const auto l = read("a,b\nb,a\na,c\n", reg);
    CHECK(l.links.size() == 3);
    CHECK(reg.size() == 3);
    CHECK_FALSE(l.weighted);
    for (const auto& x : l.links) CHECK(x.weight == 1.0);
}

TEST_CASE("weight and date columns are mapped") {
    NodeRegistry reg;
    const auto l = read("a,b,2,2011-10-23\n", reg);
    REQUIRE(l.links.size() == 1);
    CHECK(l.weighted);
    CHECK(l.links[0].weight == 2.0);
    REQUIRE(l.links[0].timestamp);
    CHECK(l.links[0].timestamp->to_string() == "2011-10-23");
}

TEST_CASE("header names columns in any order") {
    NodeRegistry reg;
    const auto l = read("source,target,date,weight\nx,y,2012-01-05,1.5\n", reg);
    REQUIRE(l.links.size() == 1);
    CHECK(l.links[0].weight == 1.5);
    CHECK(l.links[0].timestamp->to_string() == "2012-01-05");
}

TEST_CASE("bad rows are rejected with their line") {
    NodeRegistry reg;
    CHECK_THROWS_AS(read("a,b,-1\n", reg), ValidationError);
    CHECK_THROWS_AS(read("a,b,0\n", reg), ValidationError);
    CHECK_THROWS_AS(read("a,b,2013-02-30\n", reg), ValidationError);
    CHECK_THROWS_AS(read("a,b,1,2011-13-01\n", reg), ValidationError);
    try {
        read("a,b\nc\n", reg);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("mem.csv:2") != std::string::npos);
    }
    CHECK_THROWS_AS(read("a,b,x\n", reg), ParseError);
}

TEST_CASE("duplicate rows merge by layer kind") {
    NodeRegistry reg;
    const auto set = read("a,b\na,b\nb,a\n", reg);
    CHECK(set.links.size() == 2);
    const auto w = read("a,b,1\na,b,2.5\n", reg);
    REQUIRE(w.links.size() == 1);
    CHECK(w.links[0].weight == 3.5);
}

TEST_CASE("self-links are kept on ingestion but ignored by Q") {
    NodeRegistry reg;
    const auto l = read("a,a\na,b\nb,a\n", reg);
    CHECK(l.links.size() == 3);
    CHECK(l.total_weight() == 2.0);
    const LayerGraph g(l, reg.size());
    CHECK(g.m() == 2.0);
}

TEST_CASE("layer write and read round-trips the link multiset") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 10; ++rep) {
        NodeRegistry reg;
        for (int i = 0; i < 12; ++i) reg.intern("v" + std::to_string(i));
        Layer l = oracle::random_layer(rng, 12, 0.2, rep % 2 == 0, false);
        // unique pairs only, so merging on ingestion is the identity
        std::sort(l.links.begin(), l.links.end(), [](auto& a, auto& b) {
            return std::tie(a.source, a.target) < std::tie(b.source, b.target);
        });
        l.links.erase(std::unique(l.links.begin(), l.links.end(),
                                  [](auto& a, auto& b) { return a.source == b.source && a.target == b.target; }),
                      l.links.end());
        for (std::size_t k = 0; k < l.links.size(); ++k)
            if (k % 3 == 0) l.links[k].timestamp = Date::from_ymd(2011, 1, 1) + static_cast<int>(k);
        std::ostringstream out;
        write_layer(out, l, reg);
        NodeRegistry reg2;
        std::istringstream in(out.str());
        const auto back = read_layer(in, "rt", LayerSchema{"random"}, reg2);
        CHECK(multiset(back, reg2) == multiset(l, reg));
    }
}

TEST_CASE("party merge maps raw affiliations") {
    NodeRegistry reg;
    for (auto id : {"n1", "n2", "n3", "n4", "n5"}) reg.intern(id);
    PartyMergeConfig cfg;
    cfg.canonical = {{"EDU", "SVP"}, {"SVP", "SVP"}, {"SP-Jugend", "SP"}, {"SP", "SP"}};
    const std::unordered_map<std::string, std::string> raw{
        {"n1", "EDU"}, {"n2", ""}, {"n3", "SP-Jugend"}, {"n4", "Piraten"}};
    const auto p = apply_party_merge(reg, raw, cfg);
    CHECK(p.label(p.group_of(0)) == "SVP");
    CHECK(p.label(p.group_of(1)) == "unaligned");
    CHECK(p.label(p.group_of(2)) == "SP");
    CHECK(p.label(p.group_of(3)) == "unaligned");
    CHECK(p.label(p.group_of(4)) == "unaligned");
    CHECK(p.labels().back() == "unaligned");
    CHECK_THROWS_AS(apply_party_merge(reg, raw, PartyMergeConfig{}), ValidationError);
}

TEST_CASE("merge config and node table readers") {
    std::istringstream merge("# comment\nEDU = SVP\nSVP=SVP\n\nJUSO=SP\n");
    const auto cfg = read_merge_config(merge, "merge.txt");
    CHECK(cfg.canonical.at("EDU") == "SVP");
    CHECK(cfg.canonical.at("JUSO") == "SP");
    std::istringstream bad("EDU SVP\n");
    CHECK_THROWS(read_merge_config(bad, "merge.txt"));

    NodeRegistry reg;
    std::istringstream nodes("node_id,affiliation\na,SVP\nb,\n");
    const auto table = read_node_table(nodes, "nodes.csv", reg);
    CHECK(table.at("a") == "SVP");
    CHECK(reg.size() == 2);
}

TEST_CASE("filtering a label removes its nodes and their links") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        MultiplexNetwork net;
        for (int i = 0; i < 10; ++i) net.nodes().intern("v" + std::to_string(i));
        net.add_layer(oracle::random_layer(rng, 10, 0.3, false));
        auto groups = oracle::random_groups(rng, 10, 3);
        const Partition part(groups, {"A", "B", "unaligned"});
        const auto [sub, sp] = filter_partition(net, part, "unaligned");
        const auto dropped = static_cast<std::size_t>(std::count(groups.begin(), groups.end(), 2u));
        CHECK(sub.node_count() == 10 - dropped);
        CHECK_FALSE(sp.find_label("unaligned"));
        for (const auto& l : sub.layers()[0].links) {
            const auto s = *net.nodes().find(sub.nodes().id(l.source));
            const auto t = *net.nodes().find(sub.nodes().id(l.target));
            CHECK(groups[s] != 2u);
            CHECK(groups[t] != 2u);
        }
        std::size_t kept = 0;
        for (const auto& l : net.layers()[0].links) kept += groups[l.source] != 2u && groups[l.target] != 2u;
        CHECK(sub.layers()[0].links.size() == kept);
    }
}

TEST_CASE("filtering an unused label is the identity") {
    MultiplexNetwork net;
    for (int i = 0; i < 4; ++i) net.nodes().intern("v" + std::to_string(i));
    net.add_layer(Layer{"l", false, {{0, 1}, {2, 3}}});
    const Partition part({0, 0, 1, 1}, {"A", "B", "unaligned"});
    const auto [sub, sp] = filter_partition(net, part, "unaligned");
    CHECK(sub.node_count() == 4);
    CHECK(sub.layers()[0].links == net.layers()[0].links);
}

TEST_CASE("planted partition generator") {
    SECTION("degenerate probabilities give disjoint complete digraphs") {
        const auto [net, part] = generate_planted_partition(2, 5, 1.0, 0.0, 9);
        const auto& links = net.layers()[0].links;
        CHECK(links.size() == 2 * 5 * 4);
        for (const auto& l : links) CHECK(part.group_of(l.source) == part.group_of(l.target));
    }
    SECTION("same seed, same links") {
        const auto a = generate_planted_partition(3, 10, 0.4, 0.05, 77);
        const auto b = generate_planted_partition(3, 10, 0.4, 0.05, 77);
        CHECK(a.first.layers()[0].links == b.first.layers()[0].links);
    }
    SECTION("invalid probabilities") {
        CHECK_THROWS_AS(generate_planted_partition(2, 5, 0.2, 0.3, 1), ValidationError);
        CHECK_THROWS_AS(generate_planted_partition(2, 5, 1.2, 0.0, 1), ValidationError);
    }
    SECTION("intra-group link count is binomial") {
        const std::size_t groups = 2, size = 20;
        const double p = 0.5;
        const double pairs = static_cast<double>(groups * size * (size - 1));
        const double sd = std::sqrt(pairs * p * (1 - p));
        double q_sum = 0.0;
        for (std::uint64_t s = 0; s < 20; ++s) {
            const auto [net, part] = generate_planted_partition(groups, size, p, 0.02, s);
            std::size_t intra = 0;
            for (const auto& l : net.layers()[0].links) intra += part.group_of(l.source) == part.group_of(l.target);
            CHECK(std::abs(static_cast<double>(intra) - pairs * p) < 5 * sd);
            q_sum += q_modularity(net.layers()[0], part);
        }
        CHECK(q_sum / 20 > 0.3);
    }
}

TEST_CASE("dates parse strictly") {
    CHECK(Date::parse("2011-10-23"));
    CHECK_FALSE(Date::parse("2011-10-2"));
    CHECK_FALSE(Date::parse("2011-02-29"));
    CHECK(Date::parse("2012-02-29"));
    CHECK_FALSE(Date::parse("2011/10/23"));
    const auto d = *Date::parse("2011-12-31");
    CHECK((d + 1).to_string() == "2012-01-01");
    for (int k = -800000; k < 800000; k += 997) {
        const Date x(k);
        CHECK(*Date::parse(x.to_string()) == x);
    }
}

TEST_CASE("csv reader handles quoting") {
    std::istringstream in("a,\"b,c\",\"say \"\"hi\"\"\"\n\n\"multi\nline\",x\n");
    csv::Reader r(in, "q.csv");
    csv::Row row;
    REQUIRE(r.next(row));
    CHECK(row.fields == std::vector<std::string>{"a", "b,c", "say \"hi\""});
    REQUIRE(r.next(row));
    CHECK(row.fields[0] == "multi\nline");
    CHECK(row.line == 3);
    CHECK_FALSE(r.next(row));
    CHECK(csv::quote("x,y") == "\"x,y\"");
    CHECK(csv::quote("plain") == "plain");
}

TEST_CASE("seed derivation is stable") {
    CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
    CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
    CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
    Rng a(5), b(5);
    for (int i = 0; i < 100; ++i) CHECK(a.below(17) == b.below(17));
}
