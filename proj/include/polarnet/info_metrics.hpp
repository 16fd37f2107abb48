#pragma once

// Set overlap and information-theoretic comparison of layers and of
// partitions. All entropies are in bits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "network.hpp"

namespace polarnet {

enum class EntropyEstimator { MaximumLikelihood, MillerMadow };

namespace detail {

/// Distinct non-self ordered pairs of a layer, as sorted 64-bit keys.
inline std::vector<std::uint64_t> link_keys(const Layer& layer) {
    std::vector<std::uint64_t> keys;
    keys.reserve(layer.links.size());
    for (const auto& l : layer.links)
        if (l.source != l.target) keys.push_back((std::uint64_t{l.source} << 32) | l.target);
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return keys;
}

inline std::size_t intersection_size(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
    std::size_t count = 0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) ++i;
        else if (*j < *i) ++j;
        else {
            ++count;
            ++i;
            ++j;
        }
    }
    return count;
}

}  // namespace detail

/// |X ∩ Y| / |X ∪ Y| over the binarized link sets (self-links ignored).
inline double jaccard(const Layer& x, const Layer& y) {
    const auto a = detail::link_keys(x);
    const auto b = detail::link_keys(y);
    const std::size_t both = detail::intersection_size(a, b);
    const std::size_t uni = a.size() + b.size() - both;
    if (uni == 0) throw UndefinedMetricError("jaccard of two empty layers");
    return static_cast<double>(both) / static_cast<double>(uni);
}

/// |X ∩ Y| / |Y|: the share of Y's links that also appear in X.
inline double partial_jaccard(const Layer& x, const Layer& y) {
    const auto a = detail::link_keys(x);
    const auto b = detail::link_keys(y);
    if (b.empty()) throw UndefinedMetricError("partial jaccard normalized by an empty layer");
    return static_cast<double>(detail::intersection_size(a, b)) / static_cast<double>(b.size());
}

inline double entropy_ml(std::span<const std::uint64_t> counts) {
    std::uint64_t n = 0;
    for (auto c : counts) n += c;
    if (n == 0) throw UndefinedMetricError("entropy of an empty sample");
    const double total = static_cast<double>(n);
    double h = 0.0;
    for (auto c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / total;
        h -= p * std::log2(p);
    }
    return h == 0.0 ? 0.0 : h;  // no negative zero
}

/// Miller-Madow bias term (observed outcomes - 1) / (2n).
inline double miller_madow_correction(std::span<const std::uint64_t> counts) {
    std::uint64_t n = 0, observed = 0;
    for (auto c : counts) {
        n += c;
        observed += c > 0;
    }
    if (n == 0) throw UndefinedMetricError("entropy of an empty sample");
    return static_cast<double>(observed - 1) / (2.0 * static_cast<double>(n));
}

inline double entropy_mm(std::span<const std::uint64_t> counts) {
    return entropy_ml(counts) + miller_madow_correction(counts);
}

inline double entropy(std::span<const std::uint64_t> counts, EntropyEstimator est) {
    return est == EntropyEstimator::MillerMadow ? entropy_mm(counts) : entropy_ml(counts);
}

/// Dense rows x cols contingency table of counts.
class CountTable {
public:
    CountTable(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), cells_(rows * cols, 0) {
        if (rows == 0 || cols == 0) throw ValidationError("count table needs at least one row and column");
    }
    CountTable(std::size_t rows, std::size_t cols, std::vector<std::uint64_t> cells)
        : rows_(rows), cols_(cols), cells_(std::move(cells)) {
        if (rows == 0 || cols == 0 || cells_.size() != rows * cols)
            throw ValidationError("count table shape does not match its cells");
    }

    std::uint64_t& operator()(std::size_t r, std::size_t c) { return cells_[r * cols_ + c]; }
    std::uint64_t operator()(std::size_t r, std::size_t c) const { return cells_[r * cols_ + c]; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::span<const std::uint64_t> cells() const { return cells_; }

    std::uint64_t total() const { return std::accumulate(cells_.begin(), cells_.end(), std::uint64_t{0}); }

    std::vector<std::uint64_t> row_margin() const {
        std::vector<std::uint64_t> m(rows_, 0);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) m[r] += (*this)(r, c);
        return m;
    }
    std::vector<std::uint64_t> col_margin() const {
        std::vector<std::uint64_t> m(cols_, 0);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) m[c] += (*this)(r, c);
        return m;
    }

    CountTable transposed() const {
        CountTable t(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
        return t;
    }

private:
    std::size_t rows_, cols_;
    std::vector<std::uint64_t> cells_;
};

struct MutualInformation {
    double raw = 0.0;      ///< H(X) + H(Y) - H(X,Y) as estimated
    double clamped = 0.0;  ///< max(raw, 0)
    bool degenerate = false;
};

/// I(X;Y) with rows as X and columns as Y.
inline MutualInformation mutual_information(const CountTable& joint,
                                            EntropyEstimator est = EntropyEstimator::MillerMadow) {
    if (joint.total() == 0) throw UndefinedMetricError("mutual information of an empty table");
    const auto nonzero = std::count_if(joint.cells().begin(), joint.cells().end(), [](auto c) { return c > 0; });
    if (joint.cells().size() == 1 || nonzero <= 1) return {0.0, 0.0, true};
    const auto rows = joint.row_margin();
    const auto cols = joint.col_margin();
    const double raw = entropy(rows, est) + entropy(cols, est) - entropy(joint.cells(), est);
    return {raw, std::max(raw, 0.0), false};
}

/// Which margin an uncertainty coefficient is normalized by.
enum class Margin { Rows, Cols };

struct NmiValue {
    double raw = 0.0;
    double clamped = 0.0;  ///< raw clipped to [0, 1]
};

/// Uncertainty coefficient I(X;Y) / H(X) where X is the `respect_to` margin.
inline NmiValue nmi(const CountTable& joint, Margin respect_to = Margin::Rows,
                    EntropyEstimator est = EntropyEstimator::MillerMadow) {
    const auto margin = respect_to == Margin::Rows ? joint.row_margin() : joint.col_margin();
    const double h = entropy(margin, est);
    if (!(h > 0.0)) throw UndefinedMetricError("normalized mutual information with a zero-entropy margin");
    const auto mi = mutual_information(joint, est);
    const double raw = mi.raw / h;
    return {raw, std::clamp(raw, 0.0, 1.0)};
}

/// Joint presence counts of two binarized layers over all ordered non-self
/// node pairs.
struct LinkIndicatorPair {
    std::uint64_t n11 = 0, n10 = 0, n01 = 0, n00 = 0;

    /// Rows: X absent/present, columns: Y absent/present.
    CountTable table() const { return CountTable(2, 2, {n00, n01, n10, n11}); }
    std::uint64_t total() const { return n11 + n10 + n01 + n00; }
};

inline LinkIndicatorPair link_indicator_pair(const Layer& x, const Layer& y, std::size_t node_count) {
    const auto a = detail::link_keys(x);
    const auto b = detail::link_keys(y);
    const std::uint64_t both = detail::intersection_size(a, b);
    const std::uint64_t pairs = std::uint64_t{node_count} * (node_count > 0 ? node_count - 1 : 0);
    LinkIndicatorPair p;
    p.n11 = both;
    p.n10 = a.size() - both;
    p.n01 = b.size() - both;
    if (p.n11 + p.n10 + p.n01 > pairs) throw ValidationError("layer links exceed the node pair universe");
    p.n00 = pairs - p.n11 - p.n10 - p.n01;
    return p;
}

/// Leave-one-node-out indicator tables: entry i describes the two layers
/// with node i and all pairs touching it removed. O(m log m).
inline std::vector<LinkIndicatorPair> leave_one_out_link_pairs(const Layer& x, const Layer& y,
                                                               std::size_t node_count) {
    const auto full = link_indicator_pair(x, y, node_count);
    const auto a = detail::link_keys(x);
    const auto b = detail::link_keys(y);
    std::vector<std::uint64_t> n11(node_count, 0), n10(node_count, 0), n01(node_count, 0);
    auto credit = [](std::vector<std::uint64_t>& v, std::uint64_t key) {
        ++v[key >> 32];
        ++v[key & 0xffffffffULL];
    };
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() || j != b.end()) {
        if (j == b.end() || (i != a.end() && *i < *j)) credit(n10, *i++);
        else if (i == a.end() || *j < *i) credit(n01, *j++);
        else {
            credit(n11, *i);
            ++i;
            ++j;
        }
    }
    std::vector<LinkIndicatorPair> out(node_count);
    const std::uint64_t removed_pairs = node_count > 0 ? 2 * (std::uint64_t{node_count} - 1) : 0;
    for (std::size_t v = 0; v < node_count; ++v) {
        auto& p = out[v];
        p.n11 = full.n11 - n11[v];
        p.n10 = full.n10 - n10[v];
        p.n01 = full.n01 - n01[v];
        p.n00 = full.n00 - (removed_pairs - n11[v] - n10[v] - n01[v]);
    }
    return out;
}

/// (NMI(X|Y), NMI(Y|X)) of the link indicator variables of two layers.
inline std::pair<NmiValue, NmiValue> link_nmi(const Layer& x, const Layer& y, std::size_t node_count,
                                              EntropyEstimator est = EntropyEstimator::MillerMadow) {
    if (node_count < 2) throw ValidationError("link NMI needs at least two nodes");
    const auto table = link_indicator_pair(x, y, node_count).table();
    return {nmi(table, Margin::Rows, est), nmi(table, Margin::Cols, est)};
}

/// Contingency table of two labelings of the same node set
/// (rows: a's labels, columns: b's labels).
inline CountTable partition_table(const Partition& a, const Partition& b) {
    if (a.size() != b.size()) throw ValidationError("partitions cover different node sets");
    CountTable t(a.label_count(), b.label_count());
    for (std::size_t i = 0; i < a.size(); ++i) ++t(a.group_of(static_cast<NodeIndex>(i)), b.group_of(static_cast<NodeIndex>(i)));
    return t;
}

/// NMI(A|B): the fraction of A's label entropy explained by B.
inline NmiValue partition_nmi(const Partition& a, const Partition& b,
                              EntropyEstimator est = EntropyEstimator::MillerMadow) {
    return nmi(partition_table(a, b), Margin::Rows, est);
}

}  // namespace polarnet
