#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "../modularity.hpp"

namespace polarnet::community {

/// Directed layer plus a symmetric CSR view. Neighbour weights are
/// w_ij = A_ij + A_ji, so sum_{i,j in S} A_ij = 1/2 sum_{i in S} w(i, S).
/// Q of any partition equals Q of the symmetrized modularity matrix, which
/// is what the heuristics below operate on.
struct WorkGraph {
    const LayerGraph* layer = nullptr;
    std::vector<std::size_t> offset;
    std::vector<NodeIndex> neighbor;
    std::vector<double> weight;

    explicit WorkGraph(const LayerGraph& g) : layer(&g) {
        const std::size_t n = g.node_count;
        std::vector<std::size_t> deg(n + 1, 0);
        for (const auto& a : g.arcs) {
            ++deg[a.source];
            ++deg[a.target];
        }
        std::vector<std::size_t> start(n + 1, 0);
        for (std::size_t i = 0; i < n; ++i) start[i + 1] = start[i] + deg[i];
        std::vector<std::pair<NodeIndex, double>> tmp(start[n]);
        std::vector<std::size_t> fill(start.begin(), start.end() - 1);
        for (const auto& a : g.arcs) {
            tmp[fill[a.source]++] = {a.target, a.weight};
            tmp[fill[a.target]++] = {a.source, a.weight};
        }
        offset.assign(n + 1, 0);
        neighbor.reserve(tmp.size());
        weight.reserve(tmp.size());
        for (std::size_t i = 0; i < n; ++i) {
            auto b = tmp.begin() + static_cast<std::ptrdiff_t>(start[i]);
            auto e = tmp.begin() + static_cast<std::ptrdiff_t>(start[i + 1]);
            std::sort(b, e, [](const auto& x, const auto& y) { return x.first < y.first; });
            for (auto it = b; it != e; ++it) {
                if (neighbor.size() > offset[i] && neighbor.back() == it->first) {
                    weight.back() += it->second;
                } else {
                    neighbor.push_back(it->first);
                    weight.push_back(it->second);
                }
            }
            offset[i + 1] = neighbor.size();
        }
    }

    std::size_t size() const { return layer->node_count; }
    double m() const { return layer->m(); }
    double k_out(NodeIndex i) const { return layer->degrees.k_out[i]; }
    double k_in(NodeIndex i) const { return layer->degrees.k_in[i]; }
    bool isolated(NodeIndex i) const { return offset[i] == offset[i + 1]; }

    std::span<const NodeIndex> neighbors(NodeIndex i) const {
        return {neighbor.data() + offset[i], offset[i + 1] - offset[i]};
    }
    std::span<const double> weights(NodeIndex i) const {
        return {weight.data() + offset[i], offset[i + 1] - offset[i]};
    }
};

/// Minimum modularity improvement treated as real; smaller changes are
/// rounding noise.
inline constexpr double kGainEpsilon = 1e-12;

/// Relabels groups by first appearance and returns the group count.
inline std::size_t compact_labels(std::vector<GroupIndex>& groups) {
    std::vector<GroupIndex> remap(groups.size() + 1, UINT32_MAX);
    GroupIndex next = 0;
    for (auto& g : groups) {
        if (g >= remap.size()) remap.resize(g + 1, UINT32_MAX);
        if (remap[g] == UINT32_MAX) remap[g] = next++;
        g = remap[g];
    }
    return next;
}

inline double evaluate(const WorkGraph& g, std::span<const GroupIndex> groups) {
    GroupIndex k = 0;
    for (auto x : groups) k = std::max(k, x);
    return q_modularity(*g.layer, groups, groups.empty() ? 1 : k + 1);
}

}  // namespace polarnet::community
