#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include "work_graph.hpp"

namespace polarnet::community {

/// Greedy agglomeration: repeatedly merges the pair of groups with the
/// largest positive modularity gain, starting from `groups`. Ties go to the
/// pair with the smallest labels; the merged group keeps the smaller label.
///
/// Merge gain for groups a, b:
///   dQ = (e_ab + e_ba) / m - (Kout_a Kin_b + Kout_b Kin_a) / m^2
/// Groups that share no link can only lose, so only adjacent pairs are kept
/// in the candidate set.
inline void agglomerate(const WorkGraph& g, std::vector<GroupIndex>& groups) {
    const std::size_t k = compact_labels(groups);
    if (k < 2) return;
    const double m = g.m();
    const double inv_m = 1.0 / m, inv_m2 = 1.0 / (m * m);

    std::vector<double> kout(k, 0.0), kin(k, 0.0);
    for (NodeIndex i = 0; i < g.size(); ++i) {
        kout[groups[i]] += g.k_out(i);
        kin[groups[i]] += g.k_in(i);
    }
    std::vector<std::map<GroupIndex, double>> links(k);
    for (const auto& a : g.layer->arcs) {
        const GroupIndex x = groups[a.source], y = groups[a.target];
        if (x == y) continue;
        links[x][y] += a.weight;
        links[y][x] += a.weight;
    }

    // Max-heap with lazy deletion: an entry is stale once either group has
    // merged since it was pushed (version mismatch).
    struct Candidate {
        double gain;
        GroupIndex a, b;  // a < b
        std::uint32_t va, vb;
    };
    auto worse = [](const Candidate& x, const Candidate& y) {
        if (x.gain != y.gain) return x.gain < y.gain;
        if (x.a != y.a) return x.a > y.a;
        return x.b > y.b;
    };
    std::vector<std::uint32_t> version(k, 0);
    auto gain = [&](GroupIndex a, GroupIndex b, double e) {
        return e * inv_m - (kout[a] * kin[b] + kout[b] * kin[a]) * inv_m2;
    };
    auto make = [&](GroupIndex a, GroupIndex b, double e) {
        if (b < a) std::swap(a, b);
        return Candidate{gain(a, b, e), a, b, version[a], version[b]};
    };

    std::vector<Candidate> heap;
    for (GroupIndex a = 0; a < k; ++a)
        for (const auto& [b, e] : links[a])
            if (a < b) heap.push_back(make(a, b, e));
    std::make_heap(heap.begin(), heap.end(), worse);
    std::size_t heap_floor = std::max<std::size_t>(heap.size(), 1024);

    std::vector<GroupIndex> parent(k);
    for (GroupIndex a = 0; a < k; ++a) parent[a] = a;

    while (!heap.empty()) {
        std::pop_heap(heap.begin(), heap.end(), worse);
        const Candidate top = heap.back();
        heap.pop_back();
        if (top.va != version[top.a] || top.vb != version[top.b]) continue;
        if (!(top.gain > kGainEpsilon)) break;
        const GroupIndex a = top.a, b = top.b;

        kout[a] += kout[b];
        kin[a] += kin[b];
        kout[b] = kin[b] = 0.0;
        links[a].erase(b);
        links[b].erase(a);
        for (const auto& [x, e] : links[b]) {
            links[a][x] += e;
            auto& row = links[x];
            row.erase(b);
            row[a] += e;
        }
        links[b].clear();
        parent[b] = a;
        ++version[a];
        ++version[b];
        for (const auto& [x, e] : links[a]) {
            heap.push_back(make(a, x, e));
            std::push_heap(heap.begin(), heap.end(), worse);
        }
        if (heap.size() > 4 * heap_floor) {
            std::erase_if(heap, [&](const Candidate& c) {
                return c.va != version[c.a] || c.vb != version[c.b];
            });
            std::make_heap(heap.begin(), heap.end(), worse);
            heap_floor = std::max(heap_floor, heap.size());
        }
    }

    for (auto& grp : groups) {
        GroupIndex r = grp;
        while (parent[r] != r) r = parent[r];
        grp = r;
    }
    compact_labels(groups);
}

}  // namespace polarnet::community
