#pragma once

// One function per analysis report. Each loads its inputs from a RunConfig,
// computes, and writes deterministic tables under the output directory.
//
// Seeds: every stochastic computation uses derive_seed(seed, key) with a
// key naming the analysis, e.g. "detect/incl/supports". Commands that need
// the same detected partition use the same key, so partial runs agree with
// full runs.

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "community.hpp"
#include "errors.hpp"
#include "ideology.hpp"
#include "info_metrics.hpp"
#include "io.hpp"
#include "jackknife.hpp"
#include "modularity.hpp"
#include "network.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "structure.hpp"
#include "temporal.hpp"
#include "topics.hpp"

namespace polarnet {

struct RunConfig {
    std::vector<std::pair<std::string, std::filesystem::path>> layers;
    std::optional<std::filesystem::path> nodes;
    std::optional<std::filesystem::path> merge;
    std::optional<std::filesystem::path> positions;
    std::optional<std::filesystem::path> comments;
    std::optional<std::filesystem::path> events;
    std::optional<std::filesystem::path> stopwords;
    WindowSpec window;
    std::vector<ComboScript> portfolio = default_portfolio();
    double alpha = 0.01;
    bool exclude_unaligned = false;
    bool keep_unaligned_group = false;  ///< keep the unaligned label in structure and correlation
    std::optional<std::uint64_t> seed;
    std::filesystem::path out = ".";
    report::Format format = report::Format::Csv;
    bool jackknife = true;
    std::size_t min_group_size = 200;
    std::size_t top_k = 10;
    EntropyEstimator estimator = EntropyEstimator::MillerMadow;
    DemodNormalization normalization = DemodNormalization::OutWeight;
    StructureOptions structure;
    bool unordered_pairs = false;
    SignificanceTest test = SignificanceTest::GTest;
};

/// Network and party partition loaded from a RunConfig.
struct Dataset {
    MultiplexNetwork network;
    Partition parties;
    std::string unaligned = "unaligned";
};

namespace detail {

inline void require_file(const std::optional<std::filesystem::path>& p, const char* flag) {
    if (!p) throw ValidationError(std::string(flag) + " is required for this command");
    if (!std::filesystem::is_regular_file(*p)) throw ValidationError("input file not found: " + p->string());
}

inline void check_inputs(const RunConfig& cfg) {
    if (cfg.layers.empty()) throw ValidationError("at least one --layer name=path is required");
    std::set<std::string> names;
    for (const auto& [name, path] : cfg.layers) {
        if (!names.insert(name).second) throw ValidationError("duplicate layer name '" + name + "'");
        if (!std::filesystem::is_regular_file(path)) throw ValidationError("input file not found: " + path.string());
    }
    for (const auto* p : {&cfg.nodes, &cfg.merge, &cfg.positions, &cfg.comments, &cfg.events, &cfg.stopwords})
        if (*p && !std::filesystem::is_regular_file(**p)) throw ValidationError("input file not found: " + (*p)->string());
}

inline std::uint64_t require_seed(const RunConfig& cfg) {
    if (!cfg.seed) throw ValidationError("--seed is required for this command");
    return *cfg.seed;
}

inline void ensure_out(const RunConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (!std::filesystem::is_directory(cfg.out)) throw ValidationError("cannot create output directory: " + cfg.out.string());
}

}  // namespace detail

/// Node table first (if any), then layers in the given order. Without a
/// merge config every distinct non-empty affiliation is its own party.
inline Dataset load_dataset(const RunConfig& cfg, bool need_parties) {
    detail::check_inputs(cfg);
    if (need_parties) detail::require_file(cfg.nodes, "--nodes");
    Dataset ds;
    std::unordered_map<std::string, std::string> raw;
    if (cfg.nodes) raw = read_node_table(*cfg.nodes, ds.network.nodes());
    for (const auto& [name, path] : cfg.layers) ds.network.add_layer(ingest_layer(path, {name, ','}, ds.network.nodes()));

    PartyMergeConfig merge;
    if (cfg.merge) {
        merge = read_merge_config(*cfg.merge);
    } else {
        for (const auto& [id, aff] : raw)
            if (!aff.empty()) merge.canonical[aff] = aff;
    }
    ds.unaligned = merge.unaligned_label;
    if (merge.canonical.empty()) {
        ds.parties = Partition::single_group(ds.network.node_count(), ds.unaligned);
    } else {
        ds.parties = apply_party_merge(ds.network.nodes(), raw, merge);
    }
    return ds;
}

/// The dataset restricted per --exclude-unaligned.
inline Dataset analysis_view(const Dataset& ds, bool exclude_unaligned) {
    if (!exclude_unaligned) return ds;
    auto [net, part] = filter_partition(ds.network, ds.parties, ds.unaligned);
    return {std::move(net), std::move(part), ds.unaligned};
}

inline std::string variant_name(bool exclude_unaligned) { return exclude_unaligned ? "excl" : "incl"; }

/// Portfolio detection on one layer; the seed key ties it to the variant
/// and the layer name.
inline DetectionResult detect_layer(const RunConfig& cfg, const Layer& layer, std::size_t node_count,
                                    bool exclude_unaligned) {
    const auto seed = derive_seed(detail::require_seed(cfg), "detect/" + variant_name(exclude_unaligned) + "/" + layer.name);
    return run_portfolio(LayerGraph(layer, node_count), cfg.portfolio, seed);
}

/// Link overlap and NMI for every ordered pair of distinct layers.
inline std::vector<std::filesystem::path> cmd_layer_similarity(const RunConfig& cfg) {
    const auto ds = analysis_view(load_dataset(cfg, false), cfg.exclude_unaligned);
    detail::ensure_out(cfg);
    const auto& layers = ds.network.layers();
    if (layers.size() < 2) throw ValidationError("layer similarity needs at least two layers");
    const std::size_t n = ds.network.node_count();
    report::Table t{"layer_similarity",
                    {"layer_x", "layer_y", "links_x", "links_y", "shared", "partial_jaccard", "partial_jaccard_2sigma",
                     "jaccard", "nmi", "nmi_raw", "nmi_2sigma", "samples"},
                    {}};
    for (const auto& x : layers)
        for (const auto& y : layers) {
            if (&x == &y) continue;
            const auto pair = link_indicator_pair(x, y, n);
            const std::uint64_t nx = pair.n11 + pair.n10, ny = pair.n11 + pair.n01;
            auto pj_of = [](const LinkIndicatorPair& p) -> std::optional<double> {
                const auto denom = p.n11 + p.n01;
                if (denom == 0) return std::nullopt;
                return static_cast<double>(p.n11) / static_cast<double>(denom);
            };
            auto nmi_of = [&](const LinkIndicatorPair& p) -> std::optional<NmiValue> {
                try {
                    return nmi(p.table(), Margin::Rows, cfg.estimator);
                } catch (const UndefinedMetricError&) {
                    return std::nullopt;
                }
            };
            const auto pj = pj_of(pair);
            const auto nm = nmi_of(pair);
            std::optional<double> jac;
            if (pair.n11 + pair.n10 + pair.n01 > 0)
                jac = static_cast<double>(pair.n11) / static_cast<double>(pair.n11 + pair.n10 + pair.n01);
            std::optional<double> pj_2s, nmi_2s;
            std::size_t samples = 0;
            if (cfg.jackknife && n > 2) {
                const auto reps = leave_one_out_link_pairs(x, y, n);
                std::vector<std::optional<double>> pj_reps, nmi_reps;
                for (const auto& r : reps) {
                    pj_reps.push_back(pj_of(r));
                    const auto v = nmi_of(r);
                    nmi_reps.push_back(v ? std::optional<double>(v->clamped) : std::nullopt);
                }
                if (pj) pj_2s = summarize_replicates(*pj, pj_reps).two_sigma;
                if (nm) nmi_2s = summarize_replicates(nm->clamped, nmi_reps).two_sigma;
                samples = reps.size();
            }
            t.add({report::cell(x.name), report::cell(y.name), report::cell(static_cast<std::size_t>(nx)),
                   report::cell(static_cast<std::size_t>(ny)), report::cell(static_cast<std::size_t>(pair.n11)),
                   report::cell(pj), report::cell(pj_2s), report::cell(jac),
                   report::cell(nm ? std::optional<double>(nm->clamped) : std::nullopt),
                   report::cell(nm ? std::optional<double>(nm->raw) : std::nullopt), report::cell(nmi_2s),
                   report::cell(samples)});
        }
    return {report::write_table(cfg.out, t, cfg.format)};
}

/// Q of the party partition and of the best detected partition, per layer,
/// with and without unaligned nodes.
inline std::vector<std::filesystem::path> cmd_polarization(const RunConfig& cfg) {
    detail::require_seed(cfg);
    const auto full = load_dataset(cfg, true);
    detail::ensure_out(cfg);
    std::vector<std::filesystem::path> written;
    report::Table t{"polarization",
                    {"variant", "layer", "nodes", "links", "q_party", "q_party_jack_mean", "q_party_2sigma",
                     "q_party_class", "groups_party", "q_comp", "q_comp_jack_mean", "q_comp_2sigma", "q_comp_class",
                     "groups_comp", "script", "converged"},
                    {}};
    for (bool excl : {false, true}) {
        const auto ds = analysis_view(full, excl);
        const std::size_t n = ds.network.node_count();
        for (const auto& layer : ds.network.layers()) {
            const LayerGraph g(layer, n);
            std::optional<double> qp, qp_mean, qp_2s, qc, qc_mean, qc_2s;
            std::string qp_class, qc_class, script;
            std::optional<std::size_t> groups_comp;
            bool converged = true;
            if (g.m() > 0.0) {
                qp = q_modularity(g, ds.parties);
                qp_class = to_string(classify_polarization(*qp));
                if (cfg.jackknife) {
                    const auto est = summarize_replicates(*qp, leave_one_out_q(g, ds.parties));
                    qp_mean = est.jack_mean;
                    qp_2s = est.two_sigma;
                }
                const auto det = detect_layer(cfg, layer, n, excl);
                qc = det.q;
                qc_class = to_string(classify_polarization(det.q));
                groups_comp = det.group_count;
                script = det.script.to_string();
                converged = det.converged;
                if (cfg.jackknife) {
                    const auto est = summarize_replicates(det.q, leave_one_out_q(g, det.partition));
                    qc_mean = est.jack_mean;
                    qc_2s = est.two_sigma;
                }
                report::Table parts{"communities_" + variant_name(excl) + "_" + layer.name, {"node_id", "community"}, {}};
                for (NodeIndex i = 0; i < n; ++i)
                    parts.add({report::cell(ds.network.nodes().id(i)),
                               report::cell(det.partition.label(det.partition.group_of(i)))});
                written.push_back(report::write_table(cfg.out, parts, cfg.format));
            }
            t.add({report::cell(variant_name(excl)), report::cell(layer.name), report::cell(n),
                   report::cell(g.arcs.size()), report::cell(qp), report::cell(qp_mean), report::cell(qp_2s),
                   report::cell(qp_class), report::cell(ds.parties.occupied_count()), report::cell(qc),
                   report::cell(qc_mean), report::cell(qc_2s), report::cell(qc_class),
                   groups_comp ? report::cell(*groups_comp) : report::Cell{}, report::cell(script),
                   report::cell(converged)});
        }
    }
    written.insert(written.begin(), report::write_table(cfg.out, t, cfg.format));
    return written;
}

/// NMI(A|B) between the party labels and the detected partition of each layer.
inline std::vector<std::filesystem::path> cmd_group_nmi(const RunConfig& cfg) {
    detail::require_seed(cfg);
    const auto ds = analysis_view(load_dataset(cfg, true), cfg.exclude_unaligned);
    detail::ensure_out(cfg);
    const std::size_t n = ds.network.node_count();
    std::vector<std::pair<std::string, Partition>> parts{{"parties", ds.parties}};
    for (const auto& layer : ds.network.layers()) {
        if (!(layer.total_weight() > 0.0)) continue;
        parts.emplace_back("detected:" + layer.name, detect_layer(cfg, layer, n, cfg.exclude_unaligned).partition);
    }
    report::Table t{"group_nmi", {"a", "b", "nmi", "nmi_raw"}, {}};
    for (const auto& [an, a] : parts)
        for (const auto& [bn, b] : parts) {
            if (an == bn) continue;
            std::optional<NmiValue> v;
            try {
                v = partition_nmi(a, b, cfg.estimator);
            } catch (const UndefinedMetricError&) {
            }
            t.add({report::cell(an), report::cell(bn), report::cell(v ? std::optional<double>(v->clamped) : std::nullopt),
                   report::cell(v ? std::optional<double>(v->raw) : std::nullopt)});
        }
    return {report::write_table(cfg.out, t, cfg.format)};
}

inline std::vector<std::pair<Date, std::string>> read_events(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    csv::Reader reader(in, path.string());
    csv::Row row;
    std::vector<std::pair<Date, std::string>> out;
    bool first = true;
    while (reader.next(row)) {
        auto& f = row.fields;
        if (first) {
            first = false;
            if (!f.empty() && detail::lower(csv::trim(f[0])) == "date") continue;
        }
        if (f.size() != 2) throw ParseError(path.string(), row.line, "expected date,label");
        const auto d = Date::parse(csv::trim(f[0]));
        if (!d) throw ValidationError(path.string() + ":" + std::to_string(row.line) + ": bad date");
        out.emplace_back(*d, std::string(csv::trim(f[1])));
    }
    return out;
}

/// Sliding-window Q of the party partition for every timestamped layer.
inline std::vector<std::filesystem::path> cmd_timeseries(const RunConfig& cfg) {
    cfg.window.validate();
    const auto ds = analysis_view(load_dataset(cfg, true), cfg.exclude_unaligned);
    detail::ensure_out(cfg);
    std::vector<std::pair<Date, std::string>> events;
    if (cfg.events) events = read_events(*cfg.events);
    std::vector<std::filesystem::path> written;
    report::Table ev{"timeseries_events", {"layer", "date", "label", "in_span"}, {}};
    const LayerMetric metric = [](const Layer& l, const Partition& p) { return q_modularity(l, p); };
    bool any = false;
    for (const auto& layer : ds.network.layers()) {
        if (!layer.timestamped()) continue;
        any = true;
        const auto series = event_annotation(sweep(layer, ds.parties, metric, cfg.window, true), events);
        report::Table t{"timeseries_" + layer.name, {"window_start", "value", "links_in_window", "annotations"}, {}};
        for (const auto& r : series.series.records) {
            std::string notes;
            for (const auto& a : series.annotations_for(r)) notes += (notes.empty() ? "" : ";") + a;
            t.add({report::cell(r.window_start.to_string()), report::cell(r.value), report::cell(r.links_in_window),
                   report::cell(notes)});
        }
        for (const auto& e : series.events)
            ev.add({report::cell(layer.name), report::cell(e.date.to_string()), report::cell(e.label),
                    report::cell(e.in_span)});
        written.push_back(report::write_table(cfg.out, t, cfg.format));
    }
    if (!any) throw ValidationError("no layer carries timestamps");
    written.push_back(report::write_table(cfg.out, ev, cfg.format));
    return written;
}

namespace detail {

inline std::map<std::string, PartyPosition> position_map(const RunConfig& cfg) {
    std::map<std::string, PartyPosition> out;
    if (cfg.positions)
        for (auto& p : read_positions(*cfg.positions)) out.emplace(p.party, p);
    return out;
}

}  // namespace detail

/// Centralization, path length and k-core of each large party's subnetwork.
inline std::vector<std::filesystem::path> cmd_structure(const RunConfig& cfg) {
    const auto ds = analysis_view(load_dataset(cfg, true), cfg.exclude_unaligned);
    detail::ensure_out(cfg);
    const auto positions = detail::position_map(cfg);
    report::Table t{"structure",
                    {"layer", "group", "n", "links", "in_degree_centralization", "avg_path_length", "max_kcore", "lr",
                     "cl"},
                    {}};
    for (const auto& layer : ds.network.layers()) {
        for (const auto& r : structure_report(layer, ds.parties, cfg.min_group_size, cfg.structure)) {
            if (r.group == ds.unaligned && !cfg.keep_unaligned_group) continue;
            const auto pos = positions.find(r.group);
            std::optional<double> lr, cl;
            if (pos != positions.end()) {
                lr = pos->second.lr;
                cl = pos->second.cl;
            }
            t.add({report::cell(layer.name), report::cell(r.group), report::cell(r.n), report::cell(r.links),
                   report::cell(r.in_degree_centralization), report::cell(r.avg_path_length),
                   report::cell(static_cast<std::size_t>(r.max_kcore)), report::cell(lr), report::cell(cl)});
        }
    }
    return {report::write_table(cfg.out, t, cfg.format)};
}

/// Demodularity matrix per layer and its correlation with party distance.
inline std::vector<std::filesystem::path> cmd_demodularity(const RunConfig& cfg) {
    const auto ds = analysis_view(load_dataset(cfg, true), cfg.exclude_unaligned);
    detail::ensure_out(cfg);
    const std::size_t n = ds.network.node_count();
    std::vector<PartyPosition> positions;
    if (cfg.positions) positions = read_positions(*cfg.positions);
    const auto sizes = ds.parties.group_sizes();
    std::vector<PartyPosition> eligible;
    for (const auto& p : positions) {
        const auto g = ds.parties.find_label(p.party);
        if (!g || sizes[*g] < cfg.min_group_size) continue;
        if (p.party == ds.unaligned && !cfg.keep_unaligned_group) continue;
        eligible.push_back(p);
    }
    if (ds.parties.label_count() < 2) throw ValidationError("demodularity needs at least two party labels");

    std::vector<std::filesystem::path> written;
    report::Table corr{"demodularity_correlation", {"layer", "pairs", "r", "p", "note"}, {}};
    for (const auto& layer : ds.network.layers()) {
        const LayerGraph g(layer, n);
        if (!(g.m() > 0.0)) {
            corr.add({report::cell(layer.name), report::cell(std::size_t{0}), report::Cell{}, report::Cell{},
                      report::cell("empty layer")});
            continue;
        }
        const auto matrix = demodularity_matrix(g, ds.parties, cfg.normalization);
        std::vector<std::string> cols{"from"};
        for (const auto& l : matrix.labels) cols.push_back(l);
        report::Table mt{"demodularity_" + layer.name, cols, {}};
        for (std::size_t f = 0; f < matrix.labels.size(); ++f) {
            std::vector<report::Cell> row{report::cell(matrix.labels[f])};
            for (std::size_t to = 0; to < matrix.labels.size(); ++to) row.push_back(report::cell(matrix.at(f, to)));
            mt.add(std::move(row));
        }
        written.push_back(report::write_table(cfg.out, mt, cfg.format));

        report::Table pt{"demodularity_pairs_" + layer.name, {"from", "to", "distance", "demod"}, {}};
        try {
            const auto res = demod_distance_analysis(matrix, eligible, {cfg.unordered_pairs, cfg.normalization});
            for (const auto& p : res.pairs)
                pt.add({report::cell(p.from), report::cell(p.to), report::cell(p.distance), report::cell(p.demod)});
            corr.add({report::cell(layer.name), report::cell(res.pairs.size()), report::cell(res.r),
                      report::cell(res.p), report::cell("")});
        } catch (const UndefinedMetricError& e) {
            corr.add({report::cell(layer.name), report::cell(std::size_t{0}), report::Cell{}, report::Cell{},
                      report::cell(e.what())});
        }
        written.push_back(report::write_table(cfg.out, pt, cfg.format));
    }
    written.insert(written.begin(), report::write_table(cfg.out, corr, cfg.format));
    return written;
}

/// Characteristic words of each party's comments.
inline std::vector<std::filesystem::path> cmd_topics(const RunConfig& cfg) {
    detail::require_file(cfg.comments, "--comments");
    const auto full = load_dataset(cfg, true);
    const auto ds = analysis_view(full, cfg.exclude_unaligned);
    detail::ensure_out(cfg);
    // Authors are resolved against the full node set, then mapped into the
    // view; comments by removed authors are dropped.
    std::vector<CommentRecord> kept;
    for (auto& c : read_comments(*cfg.comments, full.network.nodes())) {
        const auto idx = ds.network.nodes().find(full.network.nodes().id(c.author));
        if (!idx) continue;
        c.author = *idx;
        kept.push_back(std::move(c));
    }
    const auto stopwords = cfg.stopwords ? read_stopwords(*cfg.stopwords) : german_stopwords();
    const auto rep = topic_report(kept, ds.parties, stopwords, {cfg.top_k, cfg.alpha, cfg.test});
    report::Table words{"topics", {"group", "rank", "word", "pmi", "p_value", "count_in_group", "count_total"}, {}};
    report::Table summary{"topics_summary", {"group", "words", "comments", "users"}, {}};
    for (const auto& g : rep.groups) {
        for (std::size_t r = 0; r < g.words.size(); ++r) {
            const auto& w = g.words[r];
            words.add({report::cell(g.group), report::cell(r + 1), report::cell(w.word), report::cell(w.pmi),
                       report::cell(w.p_value), report::cell(static_cast<std::size_t>(w.count_in_group)),
                       report::cell(static_cast<std::size_t>(w.count_total))});
        }
        summary.add({report::cell(g.group), report::cell(static_cast<std::size_t>(g.word_count)),
                     report::cell(g.comment_count), report::cell(g.user_count)});
    }
    return {report::write_table(cfg.out, words, cfg.format), report::write_table(cfg.out, summary, cfg.format)};
}

}  // namespace polarnet
