#pragma once

#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "network.hpp"
#include "rng.hpp"

namespace polarnet {

/// Directed planted-partition graph in a single layer named "planted".
/// Every ordered intra-group pair is linked with probability p_in, every
/// inter-group pair with p_out. Nodes are n0..n{groups*size-1}, groups G1..Gk.
inline std::pair<MultiplexNetwork, Partition> generate_planted_partition(std::size_t groups, std::size_t size,
                                                                         double p_in, double p_out,
                                                                         std::uint64_t seed) {
    if (!(p_out >= 0.0 && p_out < p_in && p_in <= 1.0))
        throw ValidationError("planted partition needs 0 <= p_out < p_in <= 1");
    if (groups == 0 || size == 0) throw ValidationError("planted partition needs groups >= 1 and size >= 1");

    MultiplexNetwork net;
    const std::size_t n = groups * size;
    std::vector<GroupIndex> assignment(n);
    std::vector<std::string> labels;
    for (std::size_t g = 0; g < groups; ++g) labels.push_back("G" + std::to_string(g + 1));
    for (std::size_t i = 0; i < n; ++i) {
        net.nodes().intern("n" + std::to_string(i));
        assignment[i] = static_cast<GroupIndex>(i / size);
    }

    Rng rng(seed);
    Layer layer{"planted", false, {}};
    for (NodeIndex i = 0; i < n; ++i) {
        for (NodeIndex j = 0; j < n; ++j) {
            if (i == j) continue;
            const double p = assignment[i] == assignment[j] ? p_in : p_out;
            if (rng.bernoulli(p)) layer.links.push_back({i, j, 1.0, std::nullopt});
        }
    }
    net.add_layer(std::move(layer));
    return {std::move(net), Partition(std::move(assignment), std::move(labels))};
}

}  // namespace polarnet
