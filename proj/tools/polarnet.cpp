// polarnet: polarization analyses of multiplex directed networks.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <polarnet/polarnet.hpp>

namespace {

using polarnet::RunConfig;

struct Options {
    std::vector<std::string> layers;
    std::string nodes, merge, positions, comments, events, stopwords;
    std::string portfolio;
    std::string format = "csv";
    std::string estimator = "mm";
    std::string normalization = "out-weight";
    std::string kcore = "undirected";
    std::string test = "g";
    bool no_jackknife = false;
    bool symmetrize = false;
    std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, Options& o, RunConfig& cfg) {
    cmd->add_option("--layer", o.layers, "Layer as name=path (repeatable)")->required();
    cmd->add_option("--nodes", o.nodes, "Node table CSV (node_id,affiliation)");
    cmd->add_option("--merge", o.merge, "Party merge config (raw=label lines)");
    cmd->add_option("--out", cfg.out, "Output directory")->default_str(".");
    cmd->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_flag("--exclude-unaligned", cfg.exclude_unaligned, "Drop unaligned nodes before the analysis");
    cmd->add_option("--seed", o.seed, "Seed for every stochastic step");
}

void add_seeded(CLI::App* cmd, Options& o) {
    cmd->add_option("--portfolio", o.portfolio, "Comma-separated combo scripts, e.g. e-1,esrfr-30");
    cmd->add_option("--estimator", o.estimator, "Entropy estimator")->check(CLI::IsMember({"ml", "mm"}));
}

RunConfig finish(const Options& o, RunConfig cfg) {
    for (const auto& spec : o.layers) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
            throw polarnet::ValidationError("--layer expects name=path, got '" + spec + "'");
        cfg.layers.emplace_back(spec.substr(0, eq), spec.substr(eq + 1));
    }
    auto opt_path = [](const std::string& s) -> std::optional<std::filesystem::path> {
        if (s.empty()) return std::nullopt;
        return std::filesystem::path(s);
    };
    cfg.nodes = opt_path(o.nodes);
    cfg.merge = opt_path(o.merge);
    cfg.positions = opt_path(o.positions);
    cfg.comments = opt_path(o.comments);
    cfg.events = opt_path(o.events);
    cfg.stopwords = opt_path(o.stopwords);
    if (!o.portfolio.empty()) cfg.portfolio = polarnet::parse_portfolio(o.portfolio);
    cfg.format = polarnet::report::parse_format(o.format);
    cfg.estimator = o.estimator == "ml" ? polarnet::EntropyEstimator::MaximumLikelihood
                                        : polarnet::EntropyEstimator::MillerMadow;
    cfg.normalization = o.normalization == "link-count" ? polarnet::DemodNormalization::LinkCount
                        : o.normalization == "total"    ? polarnet::DemodNormalization::Total
                                                        : polarnet::DemodNormalization::OutWeight;
    cfg.structure.kcore = o.kcore == "total" ? polarnet::KCoreDegree::TotalDegree : polarnet::KCoreDegree::Undirected;
    cfg.structure.symmetrize_paths = o.symmetrize;
    cfg.test = o.test == "pearson" ? polarnet::SignificanceTest::PearsonChi2 : polarnet::SignificanceTest::GTest;
    cfg.jackknife = !o.no_jackknife;
    if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
    return cfg;
}

void print_written(const std::vector<std::filesystem::path>& files) {
    for (const auto& f : files) std::cout << f.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Polarization analysis of multiplex directed networks"};
    app.require_subcommand(1);
    Options o;
    RunConfig cfg;

    auto* sim = app.add_subcommand("layer-similarity", "Link overlap and NMI across layers");
    add_common(sim, o, cfg);
    sim->add_option("--estimator", o.estimator, "Entropy estimator")->check(CLI::IsMember({"ml", "mm"}));
    sim->add_flag("--no-jackknife", o.no_jackknife, "Skip leave-one-node-out error bars");

    auto* pol = app.add_subcommand("polarization", "Q of party labels and detected communities");
    add_common(pol, o, cfg);
    add_seeded(pol, o);
    pol->add_flag("--no-jackknife", o.no_jackknife, "Skip leave-one-node-out error bars");

    auto* gn = app.add_subcommand("group-nmi", "NMI between party labels and detected partitions");
    add_common(gn, o, cfg);
    add_seeded(gn, o);

    auto* ts = app.add_subcommand("timeseries", "Sliding-window Q of the party labels");
    add_common(ts, o, cfg);
    ts->add_option("--window-days", cfg.window.width_days, "Window width in days")->default_val(60);
    ts->add_option("--step-days", cfg.window.step_days, "Window step in days")->default_val(1);
    ts->add_option("--events", o.events, "Events CSV (date,label)");

    auto* st = app.add_subcommand("structure", "Centralization, path length and k-core per party");
    add_common(st, o, cfg);
    st->add_option("--positions", o.positions, "Party positions CSV (party,lr,cl)");
    st->add_option("--min-group-size", cfg.min_group_size, "Smallest party analysed")->default_val(200);
    st->add_option("--kcore", o.kcore, "k-core degree convention")->check(CLI::IsMember({"undirected", "total"}));
    st->add_flag("--symmetrize-paths", o.symmetrize, "Treat links as undirected for path lengths");
    st->add_flag("--keep-unaligned-group", cfg.keep_unaligned_group, "Report the unaligned label as a group");

    auto* dm = app.add_subcommand("demodularity", "Demodularity matrices and correlation with distance");
    add_common(dm, o, cfg);
    dm->add_option("--positions", o.positions, "Party positions CSV (party,lr,cl)");
    dm->add_option("--min-group-size", cfg.min_group_size, "Smallest party in the correlation")->default_val(200);
    dm->add_option("--normalization", o.normalization, "Row normalization")
        ->check(CLI::IsMember({"out-weight", "link-count", "total"}));
    dm->add_flag("--unordered-pairs", cfg.unordered_pairs, "Average both directions of each party pair");
    dm->add_flag("--keep-unaligned-group", cfg.keep_unaligned_group, "Allow the unaligned label in the correlation");

    auto* tp = app.add_subcommand("topics", "Characteristic words of each party's comments");
    add_common(tp, o, cfg);
    tp->add_option("--comments", o.comments, "Comments CSV (author,date,text)")->required();
    tp->add_option("--alpha", cfg.alpha, "Significance level")->default_val(0.01);
    tp->add_option("--top-k", cfg.top_k, "Words per group")->default_val(10);
    tp->add_option("--stopwords", o.stopwords, "Stopword file (one word per line)");
    tp->add_option("--test", o.test, "Significance test")->check(CLI::IsMember({"g", "pearson"}));

    std::string synth_out;
    polarnet::FixtureSpec synth_spec;
    std::uint64_t synth_seed = 1;
    auto* sy = app.add_subcommand("synth", "Write a synthetic fixture (inputs for every command)");
    sy->add_option("--out", synth_out, "Output directory")->required();
    sy->add_option("--seed", synth_seed, "Generator seed")->default_val(1);
    sy->add_option("--node-count", synth_spec.nodes, "Number of nodes")->default_val(3500);
    double link_scale = 1.0;
    sy->add_option("--link-scale", link_scale, "Multiplier on the default link count of every layer")
        ->default_val(1.0)
        ->check(CLI::PositiveNumber);

    std::string export_format = "graphml";
    auto* ex = app.add_subcommand("export", "Export one layer for external graph viewers");
    ex->add_option("--layer", o.layers, "Layer as name=path")->required();
    ex->add_option("--nodes", o.nodes, "Node table CSV");
    ex->add_option("--merge", o.merge, "Party merge config");
    ex->add_option("--out", cfg.out, "Output directory");
    ex->add_option("--graph-format", export_format, "graphml or edgelist")
        ->check(CLI::IsMember({"graphml", "edgelist"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (sy->parsed()) {
            synth_spec.seed = synth_seed;
            for (auto& l : synth_spec.layers)
                l.links = static_cast<std::size_t>(std::llround(static_cast<double>(l.links) * link_scale));
            const auto fx = polarnet::generate_fixture(synth_spec);
            const auto files = polarnet::write_fixture(fx, synth_out);
            std::vector<std::filesystem::path> all{files.nodes, files.merge, files.positions, files.comments,
                                                   files.events};
            for (const auto& [name, p] : files.layers) all.push_back(p);
            print_written(all);
            return 0;
        }
        const auto run = finish(o, cfg);
        if (sim->parsed()) print_written(polarnet::cmd_layer_similarity(run));
        else if (pol->parsed()) print_written(polarnet::cmd_polarization(run));
        else if (gn->parsed()) print_written(polarnet::cmd_group_nmi(run));
        else if (ts->parsed()) print_written(polarnet::cmd_timeseries(run));
        else if (st->parsed()) print_written(polarnet::cmd_structure(run));
        else if (dm->parsed()) print_written(polarnet::cmd_demodularity(run));
        else if (tp->parsed()) print_written(polarnet::cmd_topics(run));
        else if (ex->parsed()) {
            const auto ds = polarnet::load_dataset(run, false);
            std::filesystem::create_directories(run.out);
            std::vector<std::filesystem::path> written;
            for (const auto& layer : ds.network.layers()) {
                std::ostringstream buf;
                if (export_format == "graphml") polarnet::export_graphml(buf, layer, ds.network.nodes(), &ds.parties);
                else polarnet::export_edge_list(buf, layer, ds.network.nodes());
                const auto path = run.out / (layer.name + (export_format == "graphml" ? ".graphml" : ".edges"));
                polarnet::report::write_atomic(path, buf.str());
                written.push_back(path);
            }
            print_written(written);
        }
    } catch (const polarnet::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
