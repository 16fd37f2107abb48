#pragma once

#include <vector>

#include "work_graph.hpp"

namespace polarnet::community {

/// Fine-tuning by reposition: sweeps the nodes in index order and moves each
/// one to the group (a neighbouring group or a fresh empty one) with the
/// largest modularity gain, until a full sweep moves nothing. Every move
/// raises Q by more than kGainEpsilon, so Q never decreases and the loop
/// terminates.
inline void reposition(const WorkGraph& g, std::vector<GroupIndex>& groups) {
    const std::size_t n = g.size();
    if (n == 0) return;
    const double m = g.m();
    compact_labels(groups);

    std::vector<double> kout(n, 0.0), kin(n, 0.0);
    std::vector<std::size_t> members(n, 0);
    for (NodeIndex i = 0; i < n; ++i) {
        kout[groups[i]] += g.k_out(i);
        kin[groups[i]] += g.k_in(i);
        ++members[groups[i]];
    }
    std::vector<GroupIndex> free_labels;
    for (GroupIndex c = static_cast<GroupIndex>(n); c-- > 0;)
        if (members[c] == 0) free_labels.push_back(c);

    std::vector<double> acc(n, 0.0);
    std::vector<GroupIndex> touched;
    const double inv_m = 1.0 / m, inv_m2 = 1.0 / (m * m);

    for (bool moved = true; moved;) {
        moved = false;
        for (NodeIndex i = 0; i < n; ++i) {
            if (g.isolated(i)) continue;
            const GroupIndex c = groups[i];
            const double ko = g.k_out(i), ki = g.k_in(i);
            const auto nb = g.neighbors(i);
            const auto wt = g.weights(i);
            for (std::size_t k = 0; k < nb.size(); ++k) {
                const GroupIndex t = groups[nb[k]];
                if (acc[t] == 0.0) touched.push_back(t);
                acc[t] += wt[k];
            }
            kout[c] -= ko;
            kin[c] -= ki;
            --members[c];

            auto gain = [&](GroupIndex t) { return acc[t] * inv_m - (ko * kin[t] + ki * kout[t]) * inv_m2; };
            GroupIndex best = c;
            double best_gain = gain(c);
            for (auto t : touched) {
                if (t == c) continue;
                const double gt = gain(t);
                if (gt > best_gain + kGainEpsilon || (gt == best_gain && t < best && best != c)) {
                    best = t;
                    best_gain = gt;
                }
            }
            bool fresh = false;
            if (members[c] > 0 && 0.0 > best_gain + kGainEpsilon && !free_labels.empty()) {
                best = free_labels.back();
                best_gain = 0.0;
                fresh = true;
            }
            for (auto t : touched) acc[t] = 0.0;
            touched.clear();

            if (best != c) {
                moved = true;
                if (fresh) free_labels.pop_back();
                if (members[c] == 0) free_labels.push_back(c);
                groups[i] = best;
            }
            kout[best] += ko;
            kin[best] += ki;
            ++members[best];
        }
    }
    compact_labels(groups);
}

}  // namespace polarnet::community
