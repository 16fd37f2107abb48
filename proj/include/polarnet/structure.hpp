#pragma once

// Intra-group structure: in-degree centralization, average path length and
// k-core decomposition on the subnetwork induced by one group.

#include <algorithm>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "errors.hpp"
#include "network.hpp"

namespace polarnet {

/// Directed simple graph induced by one group (local indices 0..n-1,
/// no self-links, no parallel links).
struct GroupSubnetwork {
    std::string label;
    std::vector<NodeIndex> members;               ///< network indices, ascending
    std::vector<std::vector<std::uint32_t>> out;  ///< sorted successor lists

    std::size_t size() const { return members.size(); }
    std::size_t link_count() const {
        std::size_t c = 0;
        for (const auto& o : out) c += o.size();
        return c;
    }

    /// Builds a subnetwork directly from local arcs (used for tests and
    /// synthetic inputs).
    static GroupSubnetwork from_arcs(std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& arcs,
                                     std::string label = {}) {
        GroupSubnetwork g;
        g.label = std::move(label);
        g.members.resize(n);
        for (std::size_t i = 0; i < n; ++i) g.members[i] = static_cast<NodeIndex>(i);
        g.out.assign(n, {});
        for (auto [s, t] : arcs) {
            if (s >= n || t >= n) throw ValidationError("arc endpoint outside the subnetwork");
            if (s != t) g.out[s].push_back(t);
        }
        for (auto& o : g.out) {
            std::sort(o.begin(), o.end());
            o.erase(std::unique(o.begin(), o.end()), o.end());
        }
        return g;
    }
};

inline GroupSubnetwork group_subnetwork(const Layer& layer, const Partition& partition, GroupIndex group) {
    GroupSubnetwork g;
    g.label = partition.label(group);
    std::vector<std::uint32_t> local(partition.size(), UINT32_MAX);
    for (NodeIndex i = 0; i < partition.size(); ++i)
        if (partition.group_of(i) == group) {
            local[i] = static_cast<std::uint32_t>(g.members.size());
            g.members.push_back(i);
        }
    g.out.assign(g.members.size(), {});
    for (const auto& l : layer.links) {
        if (l.source >= partition.size() || l.target >= partition.size()) throw ValidationError("link outside node range");
        const auto s = local[l.source], t = local[l.target];
        if (s == UINT32_MAX || t == UINT32_MAX || s == t) continue;
        g.out[s].push_back(t);
    }
    for (auto& o : g.out) {
        std::sort(o.begin(), o.end());
        o.erase(std::unique(o.begin(), o.end()), o.end());
    }
    return g;
}

/// sum_i (k_in* - k_in_i) / (n-1)^2, with k_in* the largest in-degree.
/// (n-1)^2 is the value reached by a directed in-star.
inline double in_degree_centralization(const GroupSubnetwork& g) {
    const std::size_t n = g.size();
    if (n < 2) throw UndefinedMetricError("centralization needs at least two nodes");
    std::vector<std::size_t> in(n, 0);
    for (const auto& o : g.out)
        for (auto t : o) ++in[t];
    const std::size_t top = *std::max_element(in.begin(), in.end());
    double sum = 0.0;
    for (auto k : in) sum += static_cast<double>(top - k);
    const double denom = static_cast<double>(n - 1) * static_cast<double>(n - 1);
    return sum / denom;
}

/// Mean shortest directed path length over ordered pairs joined by a path.
/// nullopt when no pair is connected. `symmetrize` treats links as
/// undirected.
inline std::optional<double> average_path_length(const GroupSubnetwork& g, bool symmetrize = false) {
    const std::size_t n = g.size();
    if (n < 2) throw UndefinedMetricError("average path length needs at least two nodes");
    std::vector<std::vector<std::uint32_t>> adj = g.out;
    if (symmetrize) {
        for (std::uint32_t s = 0; s < n; ++s)
            for (auto t : g.out[s]) adj[t].push_back(s);
        for (auto& a : adj) {
            std::sort(a.begin(), a.end());
            a.erase(std::unique(a.begin(), a.end()), a.end());
        }
    }
    std::vector<std::int64_t> dist(n);
    std::vector<std::uint32_t> frontier;
    double total = 0.0;
    std::uint64_t pairs = 0;
    for (std::uint32_t src = 0; src < n; ++src) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[src] = 0;
        frontier.assign(1, src);
        for (std::size_t head = 0; head < frontier.size(); ++head) {
            const auto v = frontier[head];
            for (auto w : adj[v]) {
                if (dist[w] >= 0) continue;
                dist[w] = dist[v] + 1;
                total += static_cast<double>(dist[w]);
                ++pairs;
                frontier.push_back(w);
            }
        }
    }
    if (pairs == 0) return std::nullopt;
    return total / static_cast<double>(pairs);
}

enum class KCoreDegree {
    Undirected,   ///< links collapsed to undirected edges; a mutual pair counts once
    TotalDegree,  ///< in-degree + out-degree of the directed graph
};

struct KCoreResult {
    std::vector<std::uint32_t> core;  ///< core number per local node
    std::uint32_t max_core = 0;
};

/// Core numbers by repeated pruning of minimum-degree nodes (bucket queue,
/// Batagelj-Zaversnik).
inline KCoreResult kcore_decomposition(const GroupSubnetwork& g, KCoreDegree convention = KCoreDegree::Undirected) {
    const std::size_t n = g.size();
    std::vector<std::vector<std::uint32_t>> adj(n);
    for (std::uint32_t s = 0; s < n; ++s)
        for (auto t : g.out[s]) {
            adj[s].push_back(t);
            adj[t].push_back(s);
        }
    if (convention == KCoreDegree::Undirected)
        for (auto& a : adj) {
            std::sort(a.begin(), a.end());
            a.erase(std::unique(a.begin(), a.end()), a.end());
        }
    KCoreResult res;
    res.core.assign(n, 0);
    if (n == 0) return res;

    std::vector<std::uint32_t> deg(n);
    std::uint32_t maxdeg = 0;
    for (std::size_t v = 0; v < n; ++v) {
        deg[v] = static_cast<std::uint32_t>(adj[v].size());
        maxdeg = std::max(maxdeg, deg[v]);
    }
    std::vector<std::uint32_t> bin(maxdeg + 1, 0), pos(n), vert(n);
    for (auto d : deg) ++bin[d];
    std::uint32_t start = 0;
    for (auto& b : bin) {
        const auto count = b;
        b = start;
        start += count;
    }
    for (std::uint32_t v = 0; v < n; ++v) {
        pos[v] = bin[deg[v]];
        vert[pos[v]] = v;
        ++bin[deg[v]];
    }
    for (std::size_t d = maxdeg; d > 0; --d) bin[d] = bin[d - 1];
    bin[0] = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
        const auto v = vert[i];
        for (auto u : adj[v]) {
            if (deg[u] > deg[v]) {
                const auto du = deg[u];
                const auto pu = pos[u];
                const auto pw = bin[du];
                const auto w = vert[pw];
                if (u != w) {
                    pos[u] = pw;
                    vert[pu] = w;
                    pos[w] = pu;
                    vert[pw] = u;
                }
                ++bin[du];
                --deg[u];
            }
        }
    }
    res.core = deg;
    res.max_core = n ? *std::max_element(deg.begin(), deg.end()) : 0;
    return res;
}

struct StructureReport {
    std::string group;
    std::size_t n = 0;
    std::size_t links = 0;
    std::optional<double> in_degree_centralization;
    std::optional<double> avg_path_length;
    std::uint32_t max_kcore = 0;
};

struct StructureOptions {
    bool symmetrize_paths = false;
    KCoreDegree kcore = KCoreDegree::Undirected;
};

/// One report per group with at least `min_group_size` members, in label order.
inline std::vector<StructureReport> structure_report(const Layer& layer, const Partition& partition,
                                                     std::size_t min_group_size,
                                                     const StructureOptions& opt = {}) {
    std::vector<StructureReport> out;
    const auto sizes = partition.group_sizes();
    for (GroupIndex gi = 0; gi < partition.label_count(); ++gi) {
        if (sizes[gi] < min_group_size || sizes[gi] == 0) continue;
        const auto g = group_subnetwork(layer, partition, gi);
        StructureReport r;
        r.group = g.label;
        r.n = g.size();
        r.links = g.link_count();
        if (r.n >= 2) {
            r.in_degree_centralization = in_degree_centralization(g);
            r.avg_path_length = average_path_length(g, opt.symmetrize_paths);
        }
        r.max_kcore = kcore_decomposition(g, opt.kcore).max_core;
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace polarnet
