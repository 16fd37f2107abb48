#pragma once

// File formats: layer CSV, node table, party merge config, graph export.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>

#include "csv.hpp"
#include "date.hpp"
#include "errors.hpp"
#include "network.hpp"

namespace polarnet {

struct LayerSchema {
    std::string name;
    char delimiter = ',';
};

namespace detail {

inline std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

inline std::optional<double> parse_double(std::string_view s) {
    s = csv::trim(s);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

/// YYYY-MM-DD shape, regardless of whether the day exists.
inline bool looks_like_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path.string());
    return in;
}

}  // namespace detail

/// Reads a layer from CSV. A header row `source,target[,weight][,date]`
/// (any order after the first two) is recognised; without one, columns are
/// positional and a third column is a date if it looks like YYYY-MM-DD,
/// otherwise a weight. Rows sharing (source, target, date) are merged:
/// weights add up in weighted layers, duplicates collapse otherwise.
inline Layer read_layer(std::istream& in, const std::string& source_name, const LayerSchema& schema,
                        NodeRegistry& registry) {
    csv::Reader reader(in, source_name, schema.delimiter);
    csv::Row row;
    Layer layer{schema.name, false, {}};

    int col_weight = -1, col_date = -1;
    bool header_known = false;
    bool positional = false;
    std::map<std::tuple<NodeIndex, NodeIndex, std::int32_t, bool>, std::size_t> seen;

    while (reader.next(row)) {
        auto& f = row.fields;
        if (!header_known) {
            header_known = true;
            if (f.size() >= 2 && detail::lower(csv::trim(f[0])) == "source" &&
                detail::lower(csv::trim(f[1])) == "target") {
                for (std::size_t c = 2; c < f.size(); ++c) {
                    const auto name = detail::lower(csv::trim(f[c]));
                    if (name == "weight") col_weight = static_cast<int>(c);
                    else if (name == "date" || name == "timestamp") col_date = static_cast<int>(c);
                    else throw ParseError(source_name, row.line, "unknown column '" + f[c] + "'");
                }
                layer.weighted = col_weight >= 0;
                continue;
            }
            positional = true;
        }
        if (f.size() < 2) throw ParseError(source_name, row.line, "expected at least source,target");
        if (positional) {
            col_weight = col_date = -1;
            if (f.size() == 3) {
                if (detail::looks_like_date(csv::trim(f[2]))) col_date = 2;
                else col_weight = 2;
            } else if (f.size() == 4) {
                col_weight = 2;
                col_date = 3;
            } else if (f.size() > 4) {
                throw ParseError(source_name, row.line, "too many columns");
            }
            if (col_weight >= 0) layer.weighted = true;
        } else {
            const int needed = std::max({1, col_weight, col_date}) + 1;
            if (static_cast<int>(f.size()) < needed)
                throw ParseError(source_name, row.line, "row has fewer columns than the header");
        }

        const auto src = csv::trim(f[0]);
        const auto dst = csv::trim(f[1]);
        if (src.empty() || dst.empty()) throw ParseError(source_name, row.line, "empty node id");

        double weight = 1.0;
        if (col_weight >= 0) {
            auto w = detail::parse_double(f[col_weight]);
            if (!w) throw ParseError(source_name, row.line, "weight is not a number: '" + f[col_weight] + "'");
            if (!(*w > 0.0) || !std::isfinite(*w))
                throw ValidationError(source_name + ":" + std::to_string(row.line) + ": weight must be positive");
            weight = *w;
        }
        std::optional<Date> ts;
        if (col_date >= 0 && !csv::trim(f[col_date]).empty()) {
            ts = Date::parse(csv::trim(f[col_date]));
            if (!ts)
                throw ValidationError(source_name + ":" + std::to_string(row.line) + ": invalid date '" +
                                      f[col_date] + "'");
        }

        const NodeIndex s = registry.intern(src);
        const NodeIndex t = registry.intern(dst);
        const auto key = std::make_tuple(s, t, ts ? ts->days() : 0, ts.has_value());
        if (auto it = seen.find(key); it != seen.end()) {
            if (layer.weighted) layer.links[it->second].weight += weight;
            continue;
        }
        seen.emplace(key, layer.links.size());
        layer.links.push_back({s, t, weight, ts});
    }
    if (!layer.weighted)
        for (auto& l : layer.links) l.weight = 1.0;
    return layer;
}

inline Layer ingest_layer(const std::filesystem::path& path, const LayerSchema& schema, NodeRegistry& registry) {
    auto in = detail::open_input(path);
    return read_layer(in, path.string(), schema, registry);
}

/// Writes the layer in the format read_layer accepts (header included).
inline void write_layer(std::ostream& out, const Layer& layer, const NodeRegistry& registry) {
    const bool dated = std::any_of(layer.links.begin(), layer.links.end(),
                                   [](const LayerLink& l) { return l.timestamp.has_value(); });
    out << "source,target";
    if (layer.weighted) out << ",weight";
    if (dated) out << ",date";
    out << '\n';
    char buf[64];
    for (const auto& l : layer.links) {
        out << csv::quote(registry.id(l.source)) << ',' << csv::quote(registry.id(l.target));
        if (layer.weighted) {
            auto [p, ec] = std::to_chars(buf, buf + sizeof buf, l.weight);
            out << ',' << std::string_view(buf, p - buf);
        }
        if (dated) out << ',' << (l.timestamp ? l.timestamp->to_string() : std::string{});
        out << '\n';
    }
}

/// Node table `node_id,affiliation` (header optional). Registers every node
/// and returns the raw affiliation strings.
inline std::unordered_map<std::string, std::string> read_node_table(std::istream& in, const std::string& source_name,
                                                                    NodeRegistry& registry) {
    csv::Reader reader(in, source_name);
    csv::Row row;
    std::unordered_map<std::string, std::string> out;
    bool first = true;
    while (reader.next(row)) {
        auto& f = row.fields;
        if (first) {
            first = false;
            if (!f.empty() && (detail::lower(csv::trim(f[0])) == "node_id" || detail::lower(csv::trim(f[0])) == "id"))
                continue;
        }
        if (f.empty() || f.size() > 2) throw ParseError(source_name, row.line, "expected node_id,affiliation");
        const auto id = csv::trim(f[0]);
        if (id.empty()) throw ParseError(source_name, row.line, "empty node id");
        registry.intern(id);
        out[std::string(id)] = f.size() == 2 ? std::string(csv::trim(f[1])) : std::string{};
    }
    return out;
}

inline std::unordered_map<std::string, std::string> read_node_table(const std::filesystem::path& path,
                                                                    NodeRegistry& registry) {
    auto in = detail::open_input(path);
    return read_node_table(in, path.string(), registry);
}

/// key=value lines; `#` starts a comment; `@unaligned=<label>` sets the
/// unaligned label.
inline PartyMergeConfig read_merge_config(std::istream& in, const std::string& source_name) {
    PartyMergeConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto body = csv::trim(line);
        if (body.empty() || body == "\r") continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ParseError(source_name, lineno, "expected key=value");
        auto key = std::string(csv::trim(body.substr(0, eq)));
        auto value = std::string(csv::trim(body.substr(eq + 1)));
        if (!value.empty() && value.back() == '\r') value.pop_back();
        if (key.empty() || value.empty()) throw ParseError(source_name, lineno, "empty key or value");
        if (key == "@unaligned") cfg.unaligned_label = value;
        else cfg.canonical[key] = value;
    }
    return cfg;
}

inline PartyMergeConfig read_merge_config(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    return read_merge_config(in, path.string());
}

/// Plain `source target weight` lines, one per link.
inline void export_edge_list(std::ostream& out, const Layer& layer, const NodeRegistry& registry) {
    char buf[64];
    for (const auto& l : layer.links) {
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, l.weight);
        out << registry.id(l.source) << ' ' << registry.id(l.target) << ' ' << std::string_view(buf, p - buf) << '\n';
    }
}

namespace detail {
inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}
}  // namespace detail

/// GraphML document with a `group` node attribute and `weight`/`date` edge
/// attributes, readable by Gephi, Cytoscape and networkx.
inline void export_graphml(std::ostream& out, const Layer& layer, const NodeRegistry& registry,
                           const Partition* partition = nullptr) {
    char buf[64];
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
           "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
           "  <key id=\"group\" for=\"node\" attr.name=\"group\" attr.type=\"string\"/>\n"
           "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
           "  <key id=\"date\" for=\"edge\" attr.name=\"date\" attr.type=\"string\"/>\n"
        << "  <graph id=\"" << detail::xml_escape(layer.name) << "\" edgedefault=\"directed\">\n";
    for (NodeIndex i = 0; i < registry.size(); ++i) {
        out << "    <node id=\"" << detail::xml_escape(registry.id(i)) << "\"";
        if (partition && i < partition->size())
            out << "><data key=\"group\">" << detail::xml_escape(partition->label(partition->group_of(i)))
                << "</data></node>\n";
        else
            out << "/>\n";
    }
    for (std::size_t e = 0; e < layer.links.size(); ++e) {
        const auto& l = layer.links[e];
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, l.weight);
        out << "    <edge id=\"e" << e << "\" source=\"" << detail::xml_escape(registry.id(l.source))
            << "\" target=\"" << detail::xml_escape(registry.id(l.target)) << "\"><data key=\"weight\">"
            << std::string_view(buf, p - buf) << "</data>";
        if (l.timestamp) out << "<data key=\"date\">" << l.timestamp->to_string() << "</data>";
        out << "</edge>\n";
    }
    out << "  </graph>\n</graphml>\n";
}

}  // namespace polarnet
