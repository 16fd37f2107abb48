#pragma once

// Leave-one-node-out resampling.

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "errors.hpp"
#include "network.hpp"

namespace polarnet {

struct MetricEstimate {
    double point = 0.0;       ///< value on the full network
    double jack_mean = 0.0;   ///< mean of the defined replicates
    double two_sigma = 0.0;   ///< twice the standard deviation of the replicates
    double std_error = 0.0;   ///< jackknife standard error sqrt((k-1)/k * sum (x_i - mean)^2)
    std::size_t samples = 0;  ///< number of replicates (one per node)
    std::size_t skipped = 0;  ///< replicates on which the metric was undefined
    bool unreliable = false;  ///< more than 10% of replicates skipped
};

/// Aggregates replicate values in index order. Deviations are taken from
/// the first defined replicate before averaging, so a constant metric
/// yields jack_mean == point and two_sigma == 0 exactly.
inline MetricEstimate summarize_replicates(double point, std::span<const std::optional<double>> replicates) {
    MetricEstimate est;
    est.point = point;
    est.samples = replicates.size();
    std::optional<double> anchor;
    double shift_sum = 0.0;
    std::size_t k = 0;
    for (const auto& r : replicates) {
        if (!r) {
            ++est.skipped;
            continue;
        }
        if (!anchor) anchor = *r;
        shift_sum += *r - *anchor;
        ++k;
    }
    est.unreliable = est.samples == 0 || 10 * est.skipped > est.samples;
    if (k == 0) {
        est.jack_mean = point;
        est.unreliable = true;
        return est;
    }
    const double shift_mean = shift_sum / static_cast<double>(k);
    double ss = 0.0;
    for (const auto& r : replicates) {
        if (!r) continue;
        const double d = (*r - *anchor) - shift_mean;
        ss += d * d;
    }
    est.jack_mean = *anchor + shift_mean;
    est.two_sigma = 2.0 * std::sqrt(ss / static_cast<double>(k));
    est.std_error = std::sqrt(ss * static_cast<double>(k - 1) / static_cast<double>(k));
    return est;
}

/// Generic jackknife: evaluates `metric(network, partition)` on the full
/// network and on each leave-one-node-out subnetwork (node removed from all
/// layers). Replicates that throw UndefinedMetricError are skipped.
template <class Metric>
MetricEstimate jackknife(const MultiplexNetwork& net, const Partition& partition, Metric&& metric) {
    const double point = metric(net, partition);
    std::vector<std::optional<double>> replicates(net.node_count());
    std::vector<bool> keep(net.node_count(), true);
    for (NodeIndex i = 0; i < net.node_count(); ++i) {
        keep[i] = false;
        auto [sub, part] = induced_subnetwork(net, partition, keep);
        keep[i] = true;
        try {
            replicates[i] = metric(sub, part);
        } catch (const UndefinedMetricError&) {
        }
    }
    return summarize_replicates(point, replicates);
}

}  // namespace polarnet
