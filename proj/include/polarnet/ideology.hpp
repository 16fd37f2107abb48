#pragma once

// Party positions, political distance and its correlation with
// demodularity.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "csv.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "modularity.hpp"
#include "network.hpp"

namespace polarnet {

struct PartyPosition {
    std::string party;
    double lr = 0.0;  ///< left-right
    double cl = 0.0;  ///< conservative-liberal
};

/// Positions CSV `party,lr,cl` (header optional). A party may appear once.
inline std::vector<PartyPosition> read_positions(std::istream& in, const std::string& source_name) {
    csv::Reader reader(in, source_name);
    csv::Row row;
    std::vector<PartyPosition> out;
    std::map<std::string, std::size_t> seen;
    bool first = true;
    while (reader.next(row)) {
        auto& f = row.fields;
        if (first) {
            first = false;
            if (f.size() == 3 && detail::lower(csv::trim(f[0])) == "party") continue;
        }
        if (f.size() != 3) throw ParseError(source_name, row.line, "expected party,lr,cl");
        const auto lr = detail::parse_double(csv::trim(f[1]));
        const auto cl = detail::parse_double(csv::trim(f[2]));
        if (!lr || !cl || !std::isfinite(*lr) || !std::isfinite(*cl))
            throw ParseError(source_name, row.line, "position coordinates must be finite numbers");
        std::string party(csv::trim(f[0]));
        if (!seen.emplace(party, out.size()).second)
            throw ValidationError(source_name + ":" + std::to_string(row.line) + ": duplicate party '" + party + "'");
        out.push_back({std::move(party), *lr, *cl});
    }
    return out;
}

inline std::vector<PartyPosition> read_positions(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    return read_positions(in, path.string());
}

inline double euclidean_distance(const PartyPosition& a, const PartyPosition& b) {
    return std::hypot(a.lr - b.lr, a.cl - b.cl);
}

/// Product-moment correlation coefficient.
inline double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw ValidationError("pearson needs sequences of equal length");
    if (xs.size() < 3) throw UndefinedMetricError("pearson needs at least three points");
    const auto n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw UndefinedMetricError("pearson of a constant sequence");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Two-sided p-value of r under H0: rho = 0, from t = r sqrt((n-2)/(1-r^2))
/// on n-2 degrees of freedom.
inline double pearson_p_value(double r, std::size_t n) {
    if (n < 3) throw UndefinedMetricError("p-value needs at least three points");
    if (std::abs(r) >= 1.0) return 0.0;
    const double dof = static_cast<double>(n - 2);
    const double t = r * std::sqrt(dof / (1.0 - r * r));
    const boost::math::students_t dist(dof);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

struct DistanceDemodPair {
    std::string from;
    std::string to;
    double distance = 0.0;
    double demod = 0.0;
};

struct DemodDistanceAnalysis {
    std::vector<DistanceDemodPair> pairs;
    double r = 0.0;
    double p = 1.0;
};

struct DemodDistanceOptions {
    bool unordered = false;  ///< average the two directions of each unordered pair
    DemodNormalization normalization = DemodNormalization::OutWeight;
};

/// Pairs every ordered pair of groups with known positions and defined
/// demodularity, then correlates demodularity with distance.
inline DemodDistanceAnalysis demod_distance_analysis(const DemodularityMatrix& matrix,
                                                     const std::vector<PartyPosition>& positions,
                                                     const DemodDistanceOptions& opt = {}) {
    std::map<std::string, const PartyPosition*> pos;
    for (const auto& p : positions) pos[p.party] = &p;
    DemodDistanceAnalysis out;
    const auto k = matrix.labels.size();
    for (std::size_t f = 0; f < k; ++f) {
        const auto pf = pos.find(matrix.labels[f]);
        if (pf == pos.end()) continue;
        for (std::size_t t = opt.unordered ? f + 1 : 0; t < k; ++t) {
            if (t == f) continue;
            const auto pt = pos.find(matrix.labels[t]);
            if (pt == pos.end()) continue;
            std::optional<double> value;
            if (opt.unordered) {
                const auto& a = matrix.at(f, t);
                const auto& b = matrix.at(t, f);
                if (a && b) value = 0.5 * (*a + *b);
                else if (a) value = *a;
                else if (b) value = *b;
            } else {
                value = matrix.at(f, t);
            }
            if (!value) continue;
            out.pairs.push_back({matrix.labels[f], matrix.labels[t], euclidean_distance(*pf->second, *pt->second), *value});
        }
    }
    if (out.pairs.size() < 3) throw UndefinedMetricError("fewer than three usable party pairs");
    std::vector<double> xs, ys;
    for (const auto& p : out.pairs) {
        xs.push_back(p.distance);
        ys.push_back(p.demod);
    }
    out.r = pearson(xs, ys);
    out.p = pearson_p_value(out.r, out.pairs.size());
    return out;
}

inline DemodDistanceAnalysis demod_distance_analysis(const Layer& layer, const Partition& partition,
                                                     const std::vector<PartyPosition>& positions,
                                                     const DemodDistanceOptions& opt = {}) {
    return demod_distance_analysis(demodularity_matrix(layer, partition, opt.normalization), positions, opt);
}

}  // namespace polarnet
