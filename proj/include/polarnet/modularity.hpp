#pragma once

// Directed Q-modularity and the group-pair demodularity.
//
// Conventions:
//  * self-links are dropped before anything is computed: they enter
//    neither A, nor the strengths, nor m;
//  * the null-model term runs over all ordered pairs including i == j, so
//    the single-group partition scores exactly 0 and
//    sum_{f != t} m_f Qbar_ft + m Q = 0;
//  * unweighted layers count each ordered pair once, weighted layers sum
//    the weights of all records of the pair.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "network.hpp"

namespace polarnet {

struct WeightedArc {
    NodeIndex source;
    NodeIndex target;
    double weight;
};

struct DegreeVectors {
    std::vector<double> k_out;
    std::vector<double> k_in;
    double m = 0.0;
};

/// Collapsed form of a layer: one arc per ordered pair (sorted by source,
/// then target) plus strengths. This is what every modularity-type
/// computation actually reads.
struct LayerGraph {
    std::size_t node_count = 0;
    std::vector<WeightedArc> arcs;
    DegreeVectors degrees;

    LayerGraph() = default;

    LayerGraph(const Layer& layer, std::size_t n) : node_count(n) {
        arcs.reserve(layer.links.size());
        for (const auto& l : layer.links) {
            if (l.source >= n || l.target >= n) throw ValidationError("link endpoint outside the node range");
            if (l.source != l.target) arcs.push_back({l.source, l.target, layer.weighted ? l.weight : 1.0});
        }
        std::sort(arcs.begin(), arcs.end(), [](const WeightedArc& a, const WeightedArc& b) {
            return a.source != b.source ? a.source < b.source : a.target < b.target;
        });
        std::size_t out = 0;
        for (std::size_t k = 0; k < arcs.size(); ++k) {
            if (out > 0 && arcs[out - 1].source == arcs[k].source && arcs[out - 1].target == arcs[k].target) {
                if (layer.weighted) arcs[out - 1].weight += arcs[k].weight;
                continue;
            }
            arcs[out++] = arcs[k];
        }
        arcs.resize(out);
        degrees.k_out.assign(n, 0.0);
        degrees.k_in.assign(n, 0.0);
        for (const auto& a : arcs) {
            degrees.k_out[a.source] += a.weight;
            degrees.k_in[a.target] += a.weight;
            degrees.m += a.weight;
        }
    }

    double m() const { return degrees.m; }
};

inline DegreeVectors degree_vectors(const Layer& layer, std::size_t node_count) {
    return LayerGraph(layer, node_count).degrees;
}

namespace detail {

inline void check_partition(const LayerGraph& g, const Partition& p) {
    if (p.size() != g.node_count)
        throw ValidationError("partition covers " + std::to_string(p.size()) + " nodes, layer has " +
                              std::to_string(g.node_count));
}

inline double checked_q(double q) {
    if (!std::isfinite(q) || q > 1.0 + 1e-12 || q < -1.0 - 1e-12)
        throw ConsistencyError("modularity " + std::to_string(q) + " outside [-1, 1]");
    return q;
}

}  // namespace detail

/// Q over a raw group assignment (no label bookkeeping).
inline double q_modularity(const LayerGraph& g, std::span<const GroupIndex> groups, std::size_t group_count) {
    const double m = g.m();
    if (!(m > 0.0)) throw UndefinedMetricError("modularity of an empty layer");
    double inside = 0.0;
    for (const auto& a : g.arcs)
        if (groups[a.source] == groups[a.target]) inside += a.weight;
    std::vector<double> kout(group_count, 0.0), kin(group_count, 0.0);
    for (std::size_t i = 0; i < g.node_count; ++i) {
        kout[groups[i]] += g.degrees.k_out[i];
        kin[groups[i]] += g.degrees.k_in[i];
    }
    // Groups are summed in order of first appearance so that Q depends on
    // the grouping only, never on the label values.
    double expected = 0.0;
    std::vector<bool> done(group_count, false);
    for (std::size_t i = 0; i < g.node_count; ++i) {
        const auto c = groups[i];
        if (done[c]) continue;
        done[c] = true;
        expected += kout[c] * kin[c];
    }
    return detail::checked_q((inside - expected / m) / m);
}

inline double q_modularity(const LayerGraph& g, const Partition& partition) {
    detail::check_partition(g, partition);
    return q_modularity(g, partition.assignment(), partition.label_count());
}

inline double q_modularity(const Layer& layer, const Partition& partition) {
    return q_modularity(LayerGraph(layer, partition.size()), partition);
}

/// Exact leave-one-node-out values of Q for a fixed partition, in O(m).
/// Entry i is Q of the layer with node i and its links removed; nullopt
/// when nothing is left.
inline std::vector<std::optional<double>> leave_one_out_q(const LayerGraph& g, const Partition& partition) {
    detail::check_partition(g, partition);
    const auto& grp = partition.assignment();
    const std::size_t n = g.node_count;
    const std::size_t groups = partition.label_count();

    std::vector<std::vector<std::size_t>> in_arcs(n);
    std::vector<std::size_t> out_begin(n + 1, 0);
    for (std::size_t k = 0; k < g.arcs.size(); ++k) {
        ++out_begin[g.arcs[k].source + 1];
        in_arcs[g.arcs[k].target].push_back(k);
    }
    for (std::size_t i = 0; i < n; ++i) out_begin[i + 1] += out_begin[i];

    double inside = 0.0;
    for (const auto& a : g.arcs)
        if (grp[a.source] == grp[a.target]) inside += a.weight;
    std::vector<double> kout(groups, 0.0), kin(groups, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        kout[grp[i]] += g.degrees.k_out[i];
        kin[grp[i]] += g.degrees.k_in[i];
    }
    double expected = 0.0;
    for (std::size_t c = 0; c < groups; ++c) expected += kout[c] * kin[c];

    std::vector<std::optional<double>> out(n);
    std::vector<double> d_out(groups, 0.0), d_in(groups, 0.0);
    std::vector<GroupIndex> touched;
    std::vector<bool> is_touched(groups, false);
    auto touch = [&](GroupIndex c) {
        if (!is_touched[c]) {
            is_touched[c] = true;
            touched.push_back(c);
        }
    };
    for (std::size_t i = 0; i < n; ++i) {
        const GroupIndex c = grp[i];
        const double m2 = g.m() - g.degrees.k_out[i] - g.degrees.k_in[i];
        double inside2 = inside;
        touch(c);
        d_out[c] += g.degrees.k_out[i];
        d_in[c] += g.degrees.k_in[i];
        for (std::size_t k = out_begin[i]; k < out_begin[i + 1]; ++k) {
            const auto& a = g.arcs[k];
            const GroupIndex t = grp[a.target];
            if (t == c) inside2 -= a.weight;
            touch(t);
            d_in[t] += a.weight;
        }
        for (std::size_t k : in_arcs[i]) {
            const auto& a = g.arcs[k];
            const GroupIndex s = grp[a.source];
            if (s == c) inside2 -= a.weight;
            touch(s);
            d_out[s] += a.weight;
        }
        double expected2 = expected;
        for (auto t : touched) {
            expected2 -= kout[t] * kin[t];
            expected2 += (kout[t] - d_out[t]) * (kin[t] - d_in[t]);
            d_out[t] = d_in[t] = 0.0;
            is_touched[t] = false;
        }
        touched.clear();
        if (m2 > 1e-12 * g.m()) out[i] = (inside2 - expected2 / m2) / m2;
    }
    return out;
}

/// How a demodularity row is normalized.
enum class DemodNormalization {
    OutWeight,  ///< total outgoing weight of the source group (default)
    LinkCount,  ///< number of arcs leaving nodes of the source group
    Total,      ///< total weight m of the layer
};

/// Directed preference of group `from` for group `to`:
/// (1/m_f) sum_{i in f, j in t} [A_ij - k_out_i k_in_j / m].
inline double demodularity(const LayerGraph& g, const Partition& partition, GroupIndex from, GroupIndex to,
                           DemodNormalization norm = DemodNormalization::OutWeight) {
    detail::check_partition(g, partition);
    if (from == to) throw ValidationError("demodularity needs two distinct groups");
    if (from >= partition.label_count() || to >= partition.label_count()) throw ValidationError("unknown group");
    const double m = g.m();
    if (!(m > 0.0)) throw UndefinedMetricError("demodularity of an empty layer");
    const auto& grp = partition.assignment();
    double cross = 0.0, out_weight = 0.0, out_links = 0.0;
    for (const auto& a : g.arcs) {
        if (grp[a.source] != from) continue;
        out_weight += a.weight;
        out_links += 1.0;
        if (grp[a.target] == to) cross += a.weight;
    }
    double kout_f = 0.0, kin_t = 0.0;
    for (std::size_t i = 0; i < g.node_count; ++i) {
        if (grp[i] == from) kout_f += g.degrees.k_out[i];
        if (grp[i] == to) kin_t += g.degrees.k_in[i];
    }
    const double m_f = norm == DemodNormalization::OutWeight   ? out_weight
                       : norm == DemodNormalization::LinkCount ? out_links
                                                               : m;
    if (!(m_f > 0.0))
        throw UndefinedMetricError("group '" + partition.label(from) + "' has no outgoing links");
    return (cross - kout_f * kin_t / m) / m_f;
}

inline double demodularity(const Layer& layer, const Partition& partition, std::string_view from,
                           std::string_view to, DemodNormalization norm = DemodNormalization::OutWeight) {
    const auto f = partition.find_label(from);
    const auto t = partition.find_label(to);
    if (!f || !t) throw ValidationError("unknown group label in demodularity");
    return demodularity(LayerGraph(layer, partition.size()), partition, *f, *t, norm);
}

/// Row = from-group, column = to-group. Diagonal entries and rows of groups
/// without outgoing links are nullopt.
struct DemodularityMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<std::optional<double>>> values;

    const std::optional<double>& at(std::size_t from, std::size_t to) const { return values.at(from).at(to); }
    std::size_t defined_count() const {
        std::size_t c = 0;
        for (const auto& row : values)
            for (const auto& v : row) c += v.has_value();
        return c;
    }
};

inline DemodularityMatrix demodularity_matrix(const LayerGraph& g, const Partition& partition,
                                              DemodNormalization norm = DemodNormalization::OutWeight) {
    detail::check_partition(g, partition);
    const std::size_t k = partition.label_count();
    if (k < 2) throw ValidationError("demodularity matrix needs at least two groups");
    const double m = g.m();
    if (!(m > 0.0)) throw UndefinedMetricError("demodularity of an empty layer");
    const auto& grp = partition.assignment();

    std::vector<std::vector<double>> cross(k, std::vector<double>(k, 0.0));
    std::vector<double> out_weight(k, 0.0), out_links(k, 0.0), kout(k, 0.0), kin(k, 0.0);
    for (const auto& a : g.arcs) {
        cross[grp[a.source]][grp[a.target]] += a.weight;
        out_weight[grp[a.source]] += a.weight;
        out_links[grp[a.source]] += 1.0;
    }
    for (std::size_t i = 0; i < g.node_count; ++i) {
        kout[grp[i]] += g.degrees.k_out[i];
        kin[grp[i]] += g.degrees.k_in[i];
    }
    DemodularityMatrix out{partition.labels(), std::vector<std::vector<std::optional<double>>>(
                                                   k, std::vector<std::optional<double>>(k))};
    for (std::size_t f = 0; f < k; ++f) {
        const double m_f = norm == DemodNormalization::OutWeight   ? out_weight[f]
                           : norm == DemodNormalization::LinkCount ? out_links[f]
                                                                   : m;
        if (!(m_f > 0.0)) continue;
        for (std::size_t t = 0; t < k; ++t)
            if (t != f) out.values[f][t] = (cross[f][t] - kout[f] * kin[t] / m) / m_f;
    }
    return out;
}

inline DemodularityMatrix demodularity_matrix(const Layer& layer, const Partition& partition,
                                              DemodNormalization norm = DemodNormalization::OutWeight) {
    return demodularity_matrix(LayerGraph(layer, partition.size()), partition, norm);
}

enum class Polarization { polarized, not_polarized };

/// Modularity at or above this value counts as a polarized network.
inline constexpr double kPolarizationThreshold = 0.3;

inline Polarization classify_polarization(double q) {
    if (!(q >= -1.0 && q <= 1.0)) throw ValidationError("modularity must lie in [-1, 1]");
    return q >= kPolarizationThreshold ? Polarization::polarized : Polarization::not_polarized;
}

inline const char* to_string(Polarization p) {
    return p == Polarization::polarized ? "polarized" : "not_polarized";
}

}  // namespace polarnet
