#pragma once

// tau-EO recursive bisection (extremal optimization). A group is split in
// random halves; every node has a fitness (how much it prefers its own half,
// per unit degree), nodes are ranked worst-first and at each step the node
// of rank r, drawn with P(r) ~ r^-tau, switches halves. The best split seen
// is kept if it raises Q, and both halves are bisected again.

#include <algorithm>
#include <cmath>
#include <deque>
#include <iterator>
#include <set>
#include <vector>

#include "../rng.hpp"
#include "work_graph.hpp"

namespace polarnet::community {

struct ExtremalOptions {
    double tau = 1.4;
    double patience_factor = 0.5;  ///< stop after patience_factor * |G| steps without improvement
    double max_steps_factor = 4.0; ///< hard cap of max_steps_factor * |G| steps
};

namespace detail {

/// Returns the side (0/1) of each member for the best split found, or an
/// empty vector if no split improves Q.
inline std::vector<char> eo_bisect(const WorkGraph& g, const std::vector<NodeIndex>& members,
                                   std::vector<int>& local, Rng& rng, const ExtremalOptions& opt) {
    const std::size_t n = members.size();
    if (n < 2) return {};
    const double m = g.m();
    const double inv_m = 1.0 / m;
    for (std::size_t a = 0; a < n; ++a) local[members[a]] = static_cast<int>(a);

    std::vector<std::size_t> order(n);
    for (std::size_t a = 0; a < n; ++a) order[a] = a;
    rng.shuffle(order.begin(), order.end());
    std::vector<char> side(n, 0);
    for (std::size_t r = 0; r < n; ++r) side[order[r]] = r < n / 2 ? 0 : 1;

    std::vector<double> ko(n), ki(n), deg(n);
    std::vector<double> acc0(n, 0.0), acc1(n, 0.0);  // sym weight towards side 0 / side 1
    double kout[2] = {0.0, 0.0}, kin[2] = {0.0, 0.0};
    double inside[2] = {0.0, 0.0};
    for (std::size_t a = 0; a < n; ++a) {
        const NodeIndex v = members[a];
        ko[a] = g.k_out(v);
        ki[a] = g.k_in(v);
        deg[a] = ko[a] + ki[a];
        kout[side[a] != 0] += ko[a];
        kin[side[a] != 0] += ki[a];
        const auto nb = g.neighbors(v);
        const auto wt = g.weights(v);
        for (std::size_t q = 0; q < nb.size(); ++q) {
            const int b = local[nb[q]];
            if (b < 0) continue;
            (side[b] == 0 ? acc0 : acc1)[a] += wt[q];
        }
    }
    for (std::size_t a = 0; a < n; ++a) inside[side[a] != 0] += side[a] == 0 ? acc0[a] : acc1[a];
    // value(split) = sum_s [W_s - Kout_s Kin_s / m], W_s = 1/2 sum_{i in s} w(i, s)
    auto split_value = [&] {
        return 0.5 * inside[0] - kout[0] * kin[0] * inv_m + 0.5 * inside[1] - kout[1] * kin[1] * inv_m;
    };
    double whole_inside = 0.0;
    for (std::size_t a = 0; a < n; ++a) whole_inside += acc0[a] + acc1[a];
    const double whole_value = 0.5 * whole_inside - (kout[0] + kout[1]) * (kin[0] + kin[1]) * inv_m;

    double value = split_value();
    double best_value = value;
    std::vector<char> best_side = side;

    // Rank sampling table, P(r) proportional to r^-tau for r = 1..n.
    std::vector<double> cdf(n);
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        total += std::pow(static_cast<double>(r + 1), -opt.tau);
        cdf[r] = total;
    }

    // f(a, s): preference of node a for side s with a itself excluded.
    auto pref = [&](std::size_t a, int s) {
        const bool own = side[a] == s;
        const double out_s = kout[s] - (own ? ko[a] : 0.0);
        const double in_s = kin[s] - (own ? ki[a] : 0.0);
        return (s == 0 ? acc0[a] : acc1[a]) - (ko[a] * in_s + ki[a] * out_s) * inv_m;
    };

    // Ranking: an ordered set keyed by fitness. The moved node and its
    // neighbours are re-keyed every step; the group totals inside the null
    // term drift for everyone else, so the whole set is rebuilt every
    // `refresh` steps.
    using Key = std::pair<double, std::uint32_t>;
    std::set<Key> ranked;
    std::vector<double> key(n);
    auto fitness = [&](std::size_t a) {
        const int s = side[a];
        return deg[a] > 0.0 ? (pref(a, s) - pref(a, 1 - s)) / deg[a] : 0.0;
    };
    std::vector<Key> buffer(n);
    std::vector<std::set<Key>::iterator> slot(n);
    auto rebuild = [&] {
        for (std::size_t a = 0; a < n; ++a) {
            key[a] = fitness(a);
            buffer[a] = {key[a], static_cast<std::uint32_t>(a)};
        }
        std::sort(buffer.begin(), buffer.end());
        ranked.clear();
        for (const auto& k : buffer) slot[k.second] = ranked.emplace_hint(ranked.end(), k);
    };
    auto rekey = [&](std::size_t a) {
        const double next = fitness(a);
        if (next == key[a]) return;
        ranked.erase(slot[a]);
        key[a] = next;
        slot[a] = ranked.emplace(next, static_cast<std::uint32_t>(a)).first;
    };
    const auto refresh = static_cast<std::size_t>(2.0 * std::ceil(std::sqrt(static_cast<double>(n))));
    const auto patience = static_cast<std::size_t>(std::max(1.0, opt.patience_factor * static_cast<double>(n)));
    const auto max_steps = static_cast<std::size_t>(std::max(1.0, opt.max_steps_factor * static_cast<double>(n)));
    std::size_t since_best = 0;

    for (std::size_t step = 0; step < max_steps && since_best < patience; ++step) {
        if (step % refresh == 0) rebuild();
        const double u = rng.uniform() * total;
        const auto r = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        const std::size_t pick_rank = std::min(r, n - 1);
        std::size_t a;
        if (pick_rank < n / 2) {
            auto it = ranked.begin();
            std::advance(it, static_cast<std::ptrdiff_t>(pick_rank));
            a = it->second;
        } else {
            auto it = ranked.rbegin();
            std::advance(it, static_cast<std::ptrdiff_t>(n - 1 - pick_rank));
            a = it->second;
        }
        const int from = side[a], to = 1 - from;

        value += pref(a, to) - pref(a, from);
        inside[from] -= 2.0 * (from == 0 ? acc0[a] : acc1[a]);
        inside[to] += 2.0 * (to == 0 ? acc0[a] : acc1[a]);
        kout[from] -= ko[a];
        kin[from] -= ki[a];
        kout[to] += ko[a];
        kin[to] += ki[a];
        side[a] = static_cast<char>(to);
        const NodeIndex v = members[a];
        const auto nb = g.neighbors(v);
        const auto wt = g.weights(v);
        for (std::size_t q = 0; q < nb.size(); ++q) {
            const int b = local[nb[q]];
            if (b < 0) continue;
            (from == 0 ? acc0 : acc1)[b] -= wt[q];
            (to == 0 ? acc0 : acc1)[b] += wt[q];
        }
        rekey(a);
        for (std::size_t q = 0; q < nb.size(); ++q) {
            const int b = local[nb[q]];
            if (b >= 0) rekey(static_cast<std::size_t>(b));
        }

        if (value > best_value + kGainEpsilon * m) {
            best_value = value;
            best_side = side;
            since_best = 0;
        } else {
            ++since_best;
        }
    }
    for (auto v : members) local[v] = -1;

    const bool both = std::find(best_side.begin(), best_side.end(), 0) != best_side.end() &&
                      std::find(best_side.begin(), best_side.end(), 1) != best_side.end();
    if (!both || !((best_value - whole_value) * inv_m > kGainEpsilon)) return {};
    return best_side;
}

}  // namespace detail

/// Splits every current group by recursive EO bisection.
inline void extremal_split(const WorkGraph& g, std::vector<GroupIndex>& groups, Rng& rng,
                           const ExtremalOptions& opt = {}) {
    const std::size_t n = g.size();
    const std::size_t k = compact_labels(groups);
    std::deque<std::vector<NodeIndex>> queue(k);
    for (NodeIndex i = 0; i < n; ++i) queue[groups[i]].push_back(i);
    std::vector<int> local(n, -1);
    GroupIndex next_label = 0;
    while (!queue.empty()) {
        std::vector<NodeIndex> members = std::move(queue.front());
        queue.pop_front();
        const auto sides = detail::eo_bisect(g, members, local, rng, opt);
        if (sides.empty()) {
            for (auto v : members) groups[v] = next_label;
            ++next_label;
            continue;
        }
        std::vector<NodeIndex> left, right;
        for (std::size_t a = 0; a < members.size(); ++a) (sides[a] == 0 ? left : right).push_back(members[a]);
        queue.push_back(std::move(left));
        queue.push_back(std::move(right));
    }
    compact_labels(groups);
}

}  // namespace polarnet::community
