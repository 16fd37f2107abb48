#pragma once

// Leading-eigenvector bisection on the symmetrized generalized modularity
// matrix of a group G:
//   Bs_ij  = (A_ij + A_ji)/2 - (kout_i kin_j + kin_i kout_j) / (2m)
//   B^G_ij = Bs_ij - delta_ij * sum_{k in G} Bs_ik
// Groups are split recursively by the sign of the leading eigenvector while
// the split raises Q.

#include <Eigen/Dense>
#include <cmath>
#include <deque>
#include <optional>
#include <vector>

#include "../rng.hpp"
#include "work_graph.hpp"

namespace polarnet::community {

struct SpectralOptions {
    double tolerance = 1e-10;        ///< residual tolerance relative to max(1, |lambda|)
    std::size_t iteration_factor = 10;  ///< matrix-vector budget = factor * |G|
    std::size_t krylov_dim = 40;
    std::size_t dense_limit = 64;    ///< groups up to this size use a dense solver
};

namespace detail {

/// Restricted operator for one group, in local indices.
class GroupOperator {
public:
    GroupOperator(const WorkGraph& g, const std::vector<NodeIndex>& members, std::vector<int>& local)
        : g_(g), members_(members), local_(local), rowsum_(members.size()) {
        for (std::size_t a = 0; a < members.size(); ++a) local_[members[a]] = static_cast<int>(a);
        double kout_g = 0.0, kin_g = 0.0;
        for (auto v : members) {
            kout_g += g.k_out(v);
            kin_g += g.k_in(v);
        }
        const double m = g.m();
        for (std::size_t a = 0; a < members.size(); ++a) {
            const NodeIndex v = members[a];
            double inside = 0.0;
            const auto nb = g.neighbors(v);
            const auto wt = g.weights(v);
            for (std::size_t k = 0; k < nb.size(); ++k)
                if (local_[nb[k]] >= 0) inside += wt[k];
            rowsum_[a] = 0.5 * inside - (g.k_out(v) * kin_g + g.k_in(v) * kout_g) / (2.0 * m);
        }
    }

    ~GroupOperator() {
        for (auto v : members_) local_[v] = -1;
    }

    std::size_t size() const { return members_.size(); }

    void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
        const double m = g_.m();
        double sin = 0.0, sout = 0.0;
        for (std::size_t a = 0; a < members_.size(); ++a) {
            sin += g_.k_in(members_[a]) * x[a];
            sout += g_.k_out(members_[a]) * x[a];
        }
        for (std::size_t a = 0; a < members_.size(); ++a) {
            const NodeIndex v = members_[a];
            double acc = 0.0;
            const auto nb = g_.neighbors(v);
            const auto wt = g_.weights(v);
            for (std::size_t k = 0; k < nb.size(); ++k) {
                const int b = local_[nb[k]];
                if (b >= 0) acc += wt[k] * x[b];
            }
            y[a] = 0.5 * acc - (g_.k_out(v) * sin + g_.k_in(v) * sout) / (2.0 * m) - rowsum_[a] * x[a];
        }
    }

    Eigen::MatrixXd dense() const {
        const std::size_t n = size();
        Eigen::MatrixXd b(n, n);
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n), col(n);
        for (std::size_t c = 0; c < n; ++c) {
            e[c] = 1.0;
            apply(e, col);
            b.col(c) = col;
            e[c] = 0.0;
        }
        return 0.5 * (b + b.transpose());
    }

private:
    const WorkGraph& g_;
    const std::vector<NodeIndex>& members_;
    std::vector<int>& local_;
    std::vector<double> rowsum_;
};

struct EigenPair {
    double value = 0.0;
    Eigen::VectorXd vector;
    bool converged = true;
};

/// Largest algebraic eigenpair by restarted Lanczos with full
/// reorthogonalization, starting from a seeded random vector.
inline EigenPair leading_eigenpair(const GroupOperator& op, Rng& rng, const SpectralOptions& opt) {
    const std::size_t n = op.size();
    if (n <= opt.dense_limit) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(op.dense());
        const auto idx = n - 1;  // eigenvalues ascending
        return {solver.eigenvalues()[static_cast<Eigen::Index>(idx)],
                solver.eigenvectors().col(static_cast<Eigen::Index>(idx)), true};
    }
    Eigen::VectorXd start(n);
    for (std::size_t a = 0; a < n; ++a) start[a] = rng.normal();
    start.normalize();

    const std::size_t k = std::min(opt.krylov_dim, n);
    const std::size_t budget = opt.iteration_factor * n;
    std::size_t used = 0;
    Eigen::MatrixXd basis(n, k);
    Eigen::VectorXd w(n);
    EigenPair best{0.0, start, false};

    while (used < budget) {
        std::vector<double> alpha, beta;
        basis.col(0) = start;
        std::size_t steps = 0;
        double residual_beta = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            op.apply(basis.col(static_cast<Eigen::Index>(j)), w);
            ++used;
            ++steps;
            const double a = basis.col(static_cast<Eigen::Index>(j)).dot(w);
            alpha.push_back(a);
            for (int pass = 0; pass < 2; ++pass) {
                const auto cols = static_cast<Eigen::Index>(j + 1);
                const Eigen::VectorXd coeff = basis.leftCols(cols).transpose() * w;
                w -= basis.leftCols(cols) * coeff;
            }
            const double b = w.norm();
            residual_beta = b;
            if (j + 1 == k || b < 1e-14) break;
            beta.push_back(b);
            basis.col(static_cast<Eigen::Index>(j + 1)) = w / b;
        }
        const auto s = static_cast<Eigen::Index>(steps);
        Eigen::VectorXd diag(s), sub(std::max<Eigen::Index>(s - 1, 0));
        for (Eigen::Index i = 0; i < s; ++i) diag[i] = alpha[static_cast<std::size_t>(i)];
        for (Eigen::Index i = 0; i + 1 < s; ++i) sub[i] = beta[static_cast<std::size_t>(i)];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
        tri.computeFromTridiagonal(diag, sub);
        const double theta = tri.eigenvalues()[s - 1];
        const Eigen::VectorXd coeffs = tri.eigenvectors().col(s - 1);
        Eigen::VectorXd ritz = basis.leftCols(s) * coeffs;
        ritz.normalize();
        const double residual = std::abs(residual_beta * coeffs[s - 1]);
        best = {theta, ritz, false};
        if (residual <= opt.tolerance * std::max(1.0, std::abs(theta))) {
            best.converged = true;
            break;
        }
        start = ritz;
    }
    return best;
}

}  // namespace detail

/// Splits every current group by recursive spectral bisection. Returns
/// false if some eigen-iteration ran out of budget (that group was left
/// unsplit).
inline bool spectral_split(const WorkGraph& g, std::vector<GroupIndex>& groups, Rng& rng,
                           const SpectralOptions& opt = {}) {
    const std::size_t n = g.size();
    const std::size_t k = compact_labels(groups);
    std::vector<std::vector<NodeIndex>> initial(k);
    for (NodeIndex i = 0; i < n; ++i) initial[groups[i]].push_back(i);

    const double m = g.m();
    bool all_converged = true;
    std::vector<int> local(n, -1);
    std::deque<std::vector<NodeIndex>> queue(initial.begin(), initial.end());
    GroupIndex next_label = 0;

    while (!queue.empty()) {
        std::vector<NodeIndex> members = std::move(queue.front());
        queue.pop_front();
        auto finalize = [&](const std::vector<NodeIndex>& mem) {
            for (auto v : mem) groups[v] = next_label;
            ++next_label;
        };
        if (members.size() < 2) {
            finalize(members);
            continue;
        }
        std::vector<NodeIndex> left, right;
        {
            detail::GroupOperator op(g, members, local);
            auto pair = detail::leading_eigenpair(op, rng, opt);
            if (!pair.converged) all_converged = false;
            if (!pair.converged || !(pair.value > kGainEpsilon)) {
                finalize(members);
                continue;
            }
            for (std::size_t a = 0; a < members.size(); ++a) {
                const double x = pair.vector[static_cast<Eigen::Index>(a)];
                const bool side = x > 0.0 || (x == 0.0 && rng.bernoulli(0.5));
                (side ? left : right).push_back(members[a]);
            }
        }
        if (left.empty() || right.empty()) {
            finalize(members);
            continue;
        }
        // Exact gain of the split: -2/m * sum_{i in L, j in R} Bs_ij.
        for (auto v : left) local[v] = 0;
        for (auto v : right) local[v] = 1;
        double cross = 0.0, kout_l = 0.0, kin_l = 0.0, kout_r = 0.0, kin_r = 0.0;
        for (auto v : left) {
            kout_l += g.k_out(v);
            kin_l += g.k_in(v);
            const auto nb = g.neighbors(v);
            const auto wt = g.weights(v);
            for (std::size_t q = 0; q < nb.size(); ++q)
                if (local[nb[q]] == 1) cross += wt[q];
        }
        for (auto v : right) {
            kout_r += g.k_out(v);
            kin_r += g.k_in(v);
        }
        for (auto v : members) local[v] = -1;
        const double gain = (-cross + (kout_l * kin_r + kin_l * kout_r) / m) / m;
        if (gain > kGainEpsilon) {
            queue.push_back(std::move(left));
            queue.push_back(std::move(right));
        } else {
            finalize(members);
        }
    }
    compact_labels(groups);
    return all_converged;
}

}  // namespace polarnet::community
