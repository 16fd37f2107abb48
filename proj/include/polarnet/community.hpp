#pragma once

// Modularity-maximizing community detection: extremal optimization (e),
// spectral bisection (s), greedy agglomeration (f) and reposition
// fine-tuning (r), chained by combo scripts such as "esrfr-30".

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "community/agglomerate.hpp"
#include "community/extremal.hpp"
#include "community/reposition.hpp"
#include "community/spectral.hpp"
#include "community/work_graph.hpp"
#include "errors.hpp"
#include "modularity.hpp"
#include "network.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace polarnet {

enum class Stage : char { Extremal = 'e', Spectral = 's', Fast = 'f', Reposition = 'r' };

inline bool is_stochastic(Stage s) { return s == Stage::Extremal || s == Stage::Spectral; }

/// A stage sequence plus the repetition count applied to each stochastic
/// stage (e and s). "esrfr-30" runs e 30 times, s 30 times, then r, f, r.
struct ComboScript {
    std::vector<Stage> stages;
    unsigned repetitions = 1;

    static ComboScript parse(std::string_view text) {
        const auto dash = text.rfind('-');
        if (dash == std::string_view::npos || dash == 0 || dash + 1 == text.size())
            throw ValidationError("combo script must look like 'esrfr-30': '" + std::string(text) + "'");
        ComboScript script;
        for (char c : text.substr(0, dash)) {
            switch (c) {
                case 'e': case 's': case 'f': case 'r': script.stages.push_back(static_cast<Stage>(c)); break;
                default: throw ValidationError("unknown combo stage '" + std::string(1, c) + "' in '" + std::string(text) + "'");
            }
        }
        const auto digits = text.substr(dash + 1);
        auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), script.repetitions);
        if (ec != std::errc{} || p != digits.data() + digits.size() || script.repetitions == 0)
            throw ValidationError("combo script repetitions must be a positive integer: '" + std::string(text) + "'");
        return script;
    }

    std::string to_string() const {
        std::string out;
        for (auto s : stages) out += static_cast<char>(s);
        return out + "-" + std::to_string(repetitions);
    }

    bool operator==(const ComboScript&) const = default;
};

/// The portfolio whose best partition defines the detected modularity.
inline std::vector<ComboScript> default_portfolio() {
    std::vector<ComboScript> out;
    for (auto s : {"e-1", "esrfr-30", "r-1", "f-1", "s-10", "rfr-1", "rsrfr-30"}) out.push_back(ComboScript::parse(s));
    return out;
}

inline std::vector<ComboScript> parse_portfolio(std::string_view text) {
    std::vector<ComboScript> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        auto item = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (!item.empty()) out.push_back(ComboScript::parse(item));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw ValidationError("empty detection portfolio");
    return out;
}

struct DetectionResult {
    Partition partition;
    double q = 0.0;
    ComboScript script;
    std::uint64_t seed = 0;
    std::size_t group_count = 0;  ///< groups containing at least one non-isolated node
    bool converged = true;        ///< false if a spectral eigen-iteration hit its budget
};

namespace community {

struct Candidate {
    std::vector<GroupIndex> groups;  // compacted
    double q = 0.0;
    bool converged = true;
};

/// (Q, then lexicographically smaller canonical assignment) ordering used
/// to pick winners deterministically.
inline bool better(const Candidate& a, const Candidate& b) {
    if (a.q != b.q) return a.q > b.q;
    return a.groups < b.groups;
}

inline Candidate make_candidate(const WorkGraph& g, std::vector<GroupIndex> groups, bool converged = true) {
    compact_labels(groups);
    const double q = evaluate(g, groups);
    return {std::move(groups), q, converged};
}

/// Isolated nodes carry no modularity; they are gathered into one group of
/// their own so that they neither inflate the group count nor blur the
/// active groups.
inline std::vector<GroupIndex> gather_isolated(const WorkGraph& g, std::vector<GroupIndex> groups) {
    const auto k = static_cast<GroupIndex>(compact_labels(groups));
    bool any = false;
    for (NodeIndex i = 0; i < g.size(); ++i)
        if (g.isolated(i)) {
            groups[i] = k;
            any = true;
        }
    if (any) compact_labels(groups);
    return groups;
}

inline DetectionResult finish(const WorkGraph& g, const Candidate& c, const ComboScript& script, std::uint64_t seed) {
    auto groups = gather_isolated(g, c.groups);
    std::vector<bool> active(g.size() + 1, false);
    for (NodeIndex i = 0; i < g.size(); ++i)
        if (!g.isolated(i)) active[groups[i]] = true;
    DetectionResult r;
    r.partition = Partition::from_groups(groups);
    r.q = q_modularity(*g.layer, r.partition);
    r.script = script;
    r.seed = seed;
    r.group_count = static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
    r.converged = c.converged;
    return r;
}

inline std::vector<GroupIndex> singletons(std::size_t n) {
    std::vector<GroupIndex> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<GroupIndex>(i);
    return out;
}

/// Runs one stage once. e and s split the groups of `start` (everything
/// in one group when there is no start); f and r improve `start` (all
/// singletons when there is no start).
inline Candidate run_stage(const WorkGraph& g, Stage stage, const std::optional<std::vector<GroupIndex>>& start,
                           std::uint64_t seed) {
    const std::size_t n = g.size();
    Rng rng(seed);
    bool converged = true;
    std::vector<GroupIndex> groups;
    switch (stage) {
        case Stage::Extremal:
            groups = start ? *start : std::vector<GroupIndex>(n, 0);
            extremal_split(g, groups, rng);
            break;
        case Stage::Spectral:
            groups = start ? *start : std::vector<GroupIndex>(n, 0);
            converged = spectral_split(g, groups, rng);
            break;
        case Stage::Fast:
            groups = start ? *start : singletons(n);
            agglomerate(g, groups);
            break;
        case Stage::Reposition:
            groups = start ? *start : singletons(n);
            reposition(g, groups);
            break;
    }
    return make_candidate(g, std::move(groups), converged);
}

inline Candidate run_script(const WorkGraph& g, const ComboScript& script, std::uint64_t seed) {
    if (script.stages.empty()) throw ValidationError("combo script has no stages");
    std::optional<std::vector<GroupIndex>> state;
    Candidate current;
    bool converged = true;
    for (std::size_t k = 0; k < script.stages.size(); ++k) {
        const Stage stage = script.stages[k];
        const unsigned reps = is_stochastic(stage) ? script.repetitions : 1;
        std::vector<Candidate> runs(reps);
        parallel_for(reps, [&](std::size_t r) {
            runs[r] = run_stage(g, stage, state, derive_seed(seed, (std::uint64_t{k} << 32) | r));
        });
        std::size_t best = 0;
        for (std::size_t r = 0; r < reps; ++r) {
            converged = converged && runs[r].converged;
            if (better(runs[r], runs[best])) best = r;
        }
        current = std::move(runs[best]);
        state = current.groups;
    }
    current.converged = converged;
    return current;
}

}  // namespace community

inline DetectionResult run_combo(const LayerGraph& layer, const ComboScript& script, std::uint64_t seed) {
    if (!(layer.m() > 0.0)) throw UndefinedMetricError("community detection on an empty layer");
    const community::WorkGraph g(layer);
    return community::finish(g, community::run_script(g, script, seed), script, seed);
}

/// Runs every script (each with its own derived seed) and keeps the best
/// partition by (Q, canonical assignment).
inline DetectionResult run_portfolio(const LayerGraph& layer, const std::vector<ComboScript>& portfolio,
                                     std::uint64_t seed) {
    if (portfolio.empty()) throw ValidationError("empty detection portfolio");
    if (!(layer.m() > 0.0)) throw UndefinedMetricError("community detection on an empty layer");
    const community::WorkGraph g(layer);
    std::optional<community::Candidate> best;
    const ComboScript* best_script = nullptr;
    bool converged = true;
    for (const auto& script : portfolio) {
        auto c = community::run_script(g, script, derive_seed(seed, script.to_string()));
        converged = converged && c.converged;
        if (!best || community::better(c, *best)) {
            best = std::move(c);
            best_script = &script;
        }
    }
    best->converged = converged;
    return community::finish(g, *best, *best_script, seed);
}

inline DetectionResult detect_fast(const LayerGraph& layer, std::uint64_t seed) {
    return run_combo(layer, ComboScript::parse("f-1"), seed);
}

inline DetectionResult detect_spectral(const LayerGraph& layer, std::uint64_t seed) {
    return run_combo(layer, ComboScript::parse("s-1"), seed);
}

inline DetectionResult detect_extremal(const LayerGraph& layer, std::uint64_t seed) {
    return run_combo(layer, ComboScript::parse("e-1"), seed);
}

/// Reposition fine-tuning from a given partition. Q never decreases.
inline DetectionResult refine_reposition(const LayerGraph& layer, const Partition& start) {
    detail::check_partition(layer, start);
    if (!(layer.m() > 0.0)) throw UndefinedMetricError("community detection on an empty layer");
    const community::WorkGraph g(layer);
    std::vector<GroupIndex> groups = start.assignment();
    community::reposition(g, groups);
    auto cand = community::make_candidate(g, std::move(groups));
    return community::finish(g, cand, ComboScript::parse("r-1"), 0);
}

}  // namespace polarnet
