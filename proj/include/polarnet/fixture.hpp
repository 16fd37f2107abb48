#pragma once

// Synthetic multiplex fixture: party-labeled nodes, three timestamped layers
// with party homophily, party positions, comment texts and one event.

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "csv.hpp"
#include "date.hpp"
#include "io.hpp"
#include "network.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "topics.hpp"

namespace polarnet {

struct FixtureParty {
    std::string label;
    std::vector<std::string> raw;  ///< affiliation strings merged into the label
    double share = 0.0;
    double lr = 0.0;
    double cl = 0.0;
};

struct FixtureLayerSpec {
    std::string name;
    std::size_t links = 0;
    bool weighted = false;
    double homophily = 0.5;  ///< probability that a link stays inside the source's party
};

struct FixtureSpec {
    std::size_t nodes = 3500;
    std::vector<FixtureParty> parties = default_parties();
    std::vector<FixtureLayerSpec> layers = {
        {"supports", 15000, false, 0.85},
        {"likes", 25000, true, 0.7},
        {"comments", 35000, true, 0.45},
    };
    Date start = Date::from_ymd(2010, 11, 1);
    std::int32_t span_days = 730;
    Date event = Date::from_ymd(2011, 10, 23);
    std::string event_label = "federal election";
    double distance_scale = 1.5;  ///< cross-party target choice ~ exp(-distance / scale)
    std::uint64_t seed = 1;

    static std::vector<FixtureParty> default_parties() {
        return {
            {"SVP", {"SVP", "EDU", "JSVP"}, 0.20, 8.0, -5.0},
            {"SP", {"SP", "JUSO"}, 0.18, -7.0, 4.0},
            {"FDP", {"FDP", "JFDP"}, 0.16, 4.0, 6.0},
            {"CVP", {"CVP", "JCVP"}, 0.12, 1.0, -1.0},
            {"GPS", {"GPS", "Junge Grüne"}, 0.10, -6.0, 5.0},
            {"GLP", {"GLP"}, 0.07, 0.0, 5.5},
            {"BDP", {"BDP"}, 0.05, 2.0, 0.5},
        };
    }
};

struct Fixture {
    MultiplexNetwork network;
    std::unordered_map<std::string, std::string> affiliations;  ///< node id -> raw string
    PartyMergeConfig merge;
    std::vector<std::pair<std::string, std::array<double, 2>>> positions;
    std::vector<CommentRecord> comments;
    std::vector<std::pair<Date, std::string>> events;
};

namespace detail {

inline const std::vector<std::string>& fixture_common_words() {
    static const std::vector<std::string> words = {
        "Schweiz", "Politik", "Bürger", "Gemeinde", "Kanton", "Wahl", "Abstimmung", "Vorlage", "Meinung",
        "Frage", "Antwort", "Debatte", "Zukunft", "Arbeit", "Familie", "Jahr", "Woche", "heute", "morgen",
        "gut", "richtig", "wichtig", "klar", "danke", "Beitrag", "Rat", "Volk", "Land", "Stadt", "Idee",
    };
    return words;
}

inline const std::vector<std::string>& fixture_filler_words() {
    static const std::vector<std::string> words = {"die", "der", "und", "ist", "nicht", "das", "mit", "für",
                                                   "wir", "auch", "ein", "zu"};
    return words;
}

inline std::vector<std::string> fixture_topic_words(std::size_t party) {
    static const std::vector<std::vector<std::string>> topics = {
        {"Asyl", "Souveränität", "Zuwanderung", "Neutralität", "Armee", "Sicherheit"},
        {"Lohn", "Gerechtigkeit", "Mieten", "Service", "Solidarität", "Gleichstellung"},
        {"Freiheit", "Wirtschaft", "Steuern", "Bürokratie", "Unternehmen", "Standort"},
        {"Familienpolitik", "Mitte", "Werte", "Kompromiss", "Landwirtschaft", "Föderalismus"},
        {"Klima", "Energiewende", "Atomausstieg", "Biodiversität", "Velo", "Umwelt"},
        {"Innovation", "Cleantech", "Nachhaltigkeit", "Effizienz", "Fortschritt", "Bildung"},
        {"Stabilität", "Verlässlichkeit", "Konkordanz", "Lösungen", "Ausgleich", "Vernunft"},
    };
    if (party < topics.size()) return topics[party];
    std::vector<std::string> out;
    for (int k = 0; k < 6; ++k) out.push_back("thema" + std::to_string(party) + "x" + std::to_string(k));
    return out;
}

/// Weighted sampler over a fixed index set.
class Sampler {
public:
    Sampler() = default;
    Sampler(std::vector<NodeIndex> items, const std::vector<double>& weight_of) : items_(std::move(items)) {
        double acc = 0.0;
        for (auto i : items_) {
            acc += weight_of[i];
            cdf_.push_back(acc);
        }
    }
    bool empty() const { return items_.empty(); }
    NodeIndex draw(Rng& rng) const {
        const double u = rng.uniform() * cdf_.back();
        const auto k = static_cast<std::size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
        return items_[std::min(k, items_.size() - 1)];
    }

private:
    std::vector<NodeIndex> items_;
    std::vector<double> cdf_;
};

}  // namespace detail

/// Builds the fixture deterministically from spec.seed.
inline Fixture generate_fixture(const FixtureSpec& spec) {
    if (spec.parties.empty()) throw ValidationError("fixture needs at least one party");
    if (spec.nodes < 2 * spec.parties.size()) throw ValidationError("fixture needs more nodes");
    Fixture fx;
    Rng rng(spec.seed);
    const std::size_t P = spec.parties.size();
    const std::size_t U = P;  // unaligned pseudo-party index

    std::vector<std::size_t> party_of(spec.nodes, U);
    std::vector<std::size_t> quota(P);
    std::size_t assigned = 0;
    for (std::size_t p = 0; p < P; ++p) {
        quota[p] = static_cast<std::size_t>(std::floor(spec.parties[p].share * static_cast<double>(spec.nodes)));
        assigned += quota[p];
    }
    if (assigned > spec.nodes) throw ValidationError("party shares exceed one");
    std::vector<std::size_t> order(spec.nodes);
    for (std::size_t i = 0; i < spec.nodes; ++i) order[i] = i;
    rng.shuffle(order.begin(), order.end());
    std::size_t cursor = 0;
    for (std::size_t p = 0; p < P; ++p)
        for (std::size_t k = 0; k < quota[p]; ++k) party_of[order[cursor++]] = p;

    for (std::size_t i = 0; i < spec.nodes; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "p%05zu", i);
        fx.network.nodes().intern(id);
        std::string raw;
        if (party_of[i] < P) {
            const auto& variants = spec.parties[party_of[i]].raw;
            raw = variants[rng.below(variants.size())];
        }
        fx.affiliations.emplace(id, raw);
    }
    for (const auto& p : spec.parties) {
        for (const auto& r : p.raw) fx.merge.canonical[r] = p.label;
        fx.positions.push_back({p.label, {p.lr, p.cl}});
    }

    // Heavy-tailed activity and popularity.
    std::vector<double> activity(spec.nodes), popularity(spec.nodes);
    for (std::size_t i = 0; i < spec.nodes; ++i) {
        activity[i] = std::exp(0.9 * rng.normal());
        popularity[i] = std::exp(1.0 * rng.normal());
    }
    std::vector<NodeIndex> all(spec.nodes);
    for (std::size_t i = 0; i < spec.nodes; ++i) all[i] = static_cast<NodeIndex>(i);
    const detail::Sampler sources(all, activity);
    const detail::Sampler anyone(all, popularity);
    std::vector<detail::Sampler> members(P);
    for (std::size_t p = 0; p < P; ++p) {
        std::vector<NodeIndex> m;
        for (std::size_t i = 0; i < spec.nodes; ++i)
            if (party_of[i] == p) m.push_back(static_cast<NodeIndex>(i));
        members[p] = detail::Sampler(std::move(m), popularity);
    }
    // Cross-party target party weights decay with political distance.
    std::vector<std::vector<double>> cross(P, std::vector<double>(P, 0.0));
    for (std::size_t a = 0; a < P; ++a)
        for (std::size_t b = 0; b < P; ++b) {
            if (a == b) continue;
            const double d = std::hypot(spec.parties[a].lr - spec.parties[b].lr, spec.parties[a].cl - spec.parties[b].cl);
            cross[a][b] = spec.parties[b].share * std::exp(-d / spec.distance_scale);
        }

    auto pick_target = [&](NodeIndex s, double homophily) -> NodeIndex {
        const std::size_t p = party_of[s];
        if (p == U) return anyone.draw(rng);
        if (rng.bernoulli(homophily)) return members[p].draw(rng);
        double total = 0.0;
        for (std::size_t b = 0; b < P; ++b) total += cross[p][b];
        double u = rng.uniform() * total;
        std::size_t b = 0;
        for (; b + 1 < P; ++b) {
            if (u < cross[p][b]) break;
            u -= cross[p][b];
        }
        if (b == p) b = (p + 1) % P;
        return members[b].empty() ? anyone.draw(rng) : members[b].draw(rng);
    };

    const auto& common = detail::fixture_common_words();
    const auto& filler = detail::fixture_filler_words();
    for (const auto& ls : spec.layers) {
        Layer layer{ls.name, ls.weighted, {}};
        layer.links.reserve(ls.links);
        // Rows that ingestion would merge are redrawn.
        std::set<std::pair<NodeIndex, NodeIndex>> pairs;
        std::set<std::tuple<NodeIndex, NodeIndex, std::int32_t>> dated;
        const bool is_comments = ls.name == "comments";
        while (layer.links.size() < ls.links) {
            const NodeIndex s = sources.draw(rng);
            const NodeIndex t = pick_target(s, ls.homophily);
            if (s == t) continue;
            if (!ls.weighted && !pairs.emplace(s, t).second) continue;
            const Date when = spec.start + static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(spec.span_days)));
            if (ls.weighted && !dated.emplace(s, t, when.days()).second) continue;
            layer.links.push_back({s, t, 1.0, when});
            if (is_comments) {
                std::string text;
                const auto words = 6 + rng.below(7);
                const auto topics = party_of[s] < P ? detail::fixture_topic_words(party_of[s]) : std::vector<std::string>{};
                for (std::size_t w = 0; w < words; ++w) {
                    const double u = rng.uniform();
                    std::string word;
                    if (u < 0.3 && !topics.empty()) word = topics[rng.below(topics.size())];
                    else if (u < 0.6) word = filler[rng.below(filler.size())];
                    else word = common[rng.below(common.size())];
                    if (!text.empty()) text += ' ';
                    text += word;
                }
                text += rng.bernoulli(0.5) ? "!" : ".";
                fx.comments.push_back({s, when, std::move(text)});
            }
        }
        fx.network.add_layer(std::move(layer));
    }
    fx.events.push_back({spec.event, spec.event_label});
    return fx;
}

struct FixtureFiles {
    std::filesystem::path nodes, merge, positions, comments, events;
    std::vector<std::pair<std::string, std::filesystem::path>> layers;
};

/// Writes the fixture as input files into `dir` (created if missing).
inline FixtureFiles write_fixture(const Fixture& fx, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    FixtureFiles files;
    const auto& reg = fx.network.nodes();

    std::ostringstream nodes;
    nodes << "node_id,affiliation\n";
    for (NodeIndex i = 0; i < reg.size(); ++i)
        nodes << csv::quote(reg.id(i)) << ',' << csv::quote(fx.affiliations.at(reg.id(i))) << '\n';
    files.nodes = dir / "nodes.csv";
    report::write_atomic(files.nodes, nodes.str());

    std::ostringstream merge;
    merge << "# raw affiliation = party\n";
    for (const auto& [raw, label] : fx.merge.canonical) merge << raw << '=' << label << '\n';
    files.merge = dir / "merge.txt";
    report::write_atomic(files.merge, merge.str());

    std::ostringstream pos;
    pos << "party,lr,cl\n";
    for (const auto& [label, xy] : fx.positions)
        pos << csv::quote(label) << ',' << report::format_number(xy[0]) << ',' << report::format_number(xy[1]) << '\n';
    files.positions = dir / "positions.csv";
    report::write_atomic(files.positions, pos.str());

    for (const auto& layer : fx.network.layers()) {
        std::ostringstream out;
        write_layer(out, layer, reg);
        const auto path = dir / (layer.name + ".csv");
        report::write_atomic(path, out.str());
        files.layers.push_back({layer.name, path});
    }

    std::ostringstream comments;
    comments << "author,date,text\n";
    for (const auto& c : fx.comments)
        comments << csv::quote(reg.id(c.author)) << ',' << c.timestamp.to_string() << ',' << csv::quote(c.text) << '\n';
    files.comments = dir / "comment_texts.csv";
    report::write_atomic(files.comments, comments.str());

    std::ostringstream events;
    events << "date,label\n";
    for (const auto& [d, label] : fx.events) events << d.to_string() << ',' << csv::quote(label) << '\n';
    files.events = dir / "events.csv";
    report::write_atomic(files.events, events.str());
    return files;
}

}  // namespace polarnet
