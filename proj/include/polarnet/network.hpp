#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "date.hpp"
#include "errors.hpp"

namespace polarnet {

using NodeIndex = std::uint32_t;
using GroupIndex = std::uint32_t;

/// Maps external node ids to dense indices in [0, N).
class NodeRegistry {
public:
    NodeIndex intern(std::string_view id) {
        auto it = index_.find(std::string(id));
        if (it != index_.end()) return it->second;
        const auto idx = static_cast<NodeIndex>(ids_.size());
        ids_.emplace_back(id);
        index_.emplace(ids_.back(), idx);
        return idx;
    }

    std::optional<NodeIndex> find(std::string_view id) const {
        auto it = index_.find(std::string(id));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& id(NodeIndex i) const { return ids_.at(i); }
    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }

private:
    std::vector<std::string> ids_;
    std::unordered_map<std::string, NodeIndex> index_;
};

struct LayerLink {
    NodeIndex source = 0;
    NodeIndex target = 0;
    double weight = 1.0;
    std::optional<Date> timestamp;

    bool operator==(const LayerLink&) const = default;
};

/// One directed layer. Links reference indices of the owning network's registry.
struct Layer {
    std::string name;
    bool weighted = false;
    std::vector<LayerLink> links;

    double total_weight() const {
        double m = 0.0;
        for (const auto& l : links)
            if (l.source != l.target) m += l.weight;
        return m;
    }

    bool timestamped() const {
        return !links.empty() &&
               std::all_of(links.begin(), links.end(), [](const LayerLink& l) { return l.timestamp.has_value(); });
    }
};

/// Node -> group assignment. Labels are kept in their given order; group
/// indices point into that order.
class Partition {
public:
    Partition() = default;

    Partition(std::vector<GroupIndex> assignment, std::vector<std::string> labels)
        : assignment_(std::move(assignment)), labels_(std::move(labels)) {
        if (labels_.empty() && !assignment_.empty())
            throw ValidationError("partition needs at least one label");
        for (auto g : assignment_)
            if (g >= labels_.size()) throw ValidationError("partition assignment references an unknown label");
    }

    /// Builds a partition from arbitrary integer group ids. Groups are
    /// ordered by decreasing size (ties: smallest first node) and labelled
    /// prefix1, prefix2, ...
    static Partition from_groups(const std::vector<GroupIndex>& raw, std::string_view prefix = "C") {
        std::map<GroupIndex, std::pair<std::size_t, std::size_t>> stats;  // raw -> (size, first node)
        for (std::size_t i = 0; i < raw.size(); ++i) {
            auto [it, fresh] = stats.try_emplace(raw[i], 0, i);
            ++it->second.first;
        }
        std::vector<std::pair<GroupIndex, std::pair<std::size_t, std::size_t>>> order(stats.begin(), stats.end());
        std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
            if (a.second.first != b.second.first) return a.second.first > b.second.first;
            return a.second.second < b.second.second;
        });
        std::map<GroupIndex, GroupIndex> remap;
        std::vector<std::string> labels;
        for (std::size_t k = 0; k < order.size(); ++k) {
            remap[order[k].first] = static_cast<GroupIndex>(k);
            labels.push_back(std::string(prefix) + std::to_string(k + 1));
        }
        std::vector<GroupIndex> assignment(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) assignment[i] = remap[raw[i]];
        return Partition(std::move(assignment), std::move(labels));
    }

    static Partition single_group(std::size_t n, std::string label = "all") {
        return Partition(std::vector<GroupIndex>(n, 0), {std::move(label)});
    }

    std::size_t size() const { return assignment_.size(); }
    GroupIndex group_of(NodeIndex node) const { return assignment_.at(node); }
    const std::string& label(GroupIndex g) const { return labels_.at(g); }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<GroupIndex>& assignment() const { return assignment_; }
    std::size_t label_count() const { return labels_.size(); }

    std::optional<GroupIndex> find_label(std::string_view label) const {
        for (std::size_t g = 0; g < labels_.size(); ++g)
            if (labels_[g] == label) return static_cast<GroupIndex>(g);
        return std::nullopt;
    }

    /// Number of labels that have at least one member.
    std::size_t occupied_count() const {
        std::vector<bool> seen(labels_.size(), false);
        for (auto g : assignment_) seen[g] = true;
        return static_cast<std::size_t>(std::count(seen.begin(), seen.end(), true));
    }

    std::vector<std::size_t> group_sizes() const {
        std::vector<std::size_t> sizes(labels_.size(), 0);
        for (auto g : assignment_) ++sizes[g];
        return sizes;
    }

    /// Assignment relabelled by first appearance (node 0's group becomes 0).
    /// Two partitions describe the same grouping iff their canonical forms match.
    std::vector<GroupIndex> canonical() const {
        std::vector<GroupIndex> remap(labels_.size(), UINT32_MAX);
        std::vector<GroupIndex> out(assignment_.size());
        GroupIndex next = 0;
        for (std::size_t i = 0; i < assignment_.size(); ++i) {
            auto& r = remap[assignment_[i]];
            if (r == UINT32_MAX) r = next++;
            out[i] = r;
        }
        return out;
    }

    bool operator==(const Partition&) const = default;

private:
    std::vector<GroupIndex> assignment_;
    std::vector<std::string> labels_;
};

/// Node registry plus named directed layers over the shared node set.
class MultiplexNetwork {
public:
    NodeRegistry& nodes() { return nodes_; }
    const NodeRegistry& nodes() const { return nodes_; }
    std::size_t node_count() const { return nodes_.size(); }

    Layer& add_layer(Layer layer) {
        for (const auto& l : layer.links)
            if (l.source >= nodes_.size() || l.target >= nodes_.size())
                throw ValidationError("layer '" + layer.name + "' references an unregistered node");
        if (find_layer(layer.name)) throw ValidationError("duplicate layer name '" + layer.name + "'");
        layers_.push_back(std::move(layer));
        return layers_.back();
    }

    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }

    const Layer* find_layer(std::string_view name) const {
        for (const auto& l : layers_)
            if (l.name == name) return &l;
        return nullptr;
    }

    const Layer& layer(std::string_view name) const {
        if (auto* l = find_layer(name)) return *l;
        throw ValidationError("no layer named '" + std::string(name) + "'");
    }

private:
    NodeRegistry nodes_;
    std::vector<Layer> layers_;
};

/// Restricts a network and partition to the nodes flagged in `keep`,
/// re-indexing densely and dropping every incident link of removed nodes.
inline std::pair<MultiplexNetwork, Partition> induced_subnetwork(const MultiplexNetwork& net,
                                                                 const Partition& partition,
                                                                 const std::vector<bool>& keep) {
    if (keep.size() != net.node_count() || partition.size() != net.node_count())
        throw ValidationError("keep mask / partition size does not match the network");
    std::vector<NodeIndex> remap(net.node_count(), UINT32_MAX);
    MultiplexNetwork out;
    std::vector<GroupIndex> assignment;
    for (NodeIndex i = 0; i < net.node_count(); ++i) {
        if (!keep[i]) continue;
        remap[i] = out.nodes().intern(net.nodes().id(i));
        assignment.push_back(partition.group_of(i));
    }
    for (const auto& layer : net.layers()) {
        Layer sub{layer.name, layer.weighted, {}};
        sub.links.reserve(layer.links.size());
        for (const auto& l : layer.links) {
            if (!keep[l.source] || !keep[l.target]) continue;
            sub.links.push_back({remap[l.source], remap[l.target], l.weight, l.timestamp});
        }
        out.add_layer(std::move(sub));
    }
    return {std::move(out), Partition(std::move(assignment), partition.labels())};
}

/// Removes all nodes carrying `drop_label` together with their links.
/// The label itself disappears from the returned partition.
inline std::pair<MultiplexNetwork, Partition> filter_partition(const MultiplexNetwork& net,
                                                               const Partition& partition,
                                                               std::string_view drop_label) {
    const auto drop = partition.find_label(drop_label);
    if (!drop) return {net, partition};
    std::vector<bool> keep(net.node_count());
    for (NodeIndex i = 0; i < net.node_count(); ++i) keep[i] = partition.group_of(i) != *drop;
    auto [sub, part] = induced_subnetwork(net, partition, keep);
    std::vector<std::string> labels;
    std::vector<GroupIndex> remap(partition.label_count(), UINT32_MAX);
    for (GroupIndex g = 0; g < partition.label_count(); ++g) {
        if (g == *drop) continue;
        remap[g] = static_cast<GroupIndex>(labels.size());
        labels.push_back(partition.label(g));
    }
    std::vector<GroupIndex> assignment;
    assignment.reserve(part.size());
    for (auto g : part.assignment()) assignment.push_back(remap[g]);
    if (labels.empty()) labels.push_back(std::string(drop_label));  // degenerate: everything dropped
    return {std::move(sub), Partition(std::move(assignment), std::move(labels))};
}

/// Canonical-label mapping for raw affiliation strings.
struct PartyMergeConfig {
    std::map<std::string, std::string> canonical;  // raw -> canonical
    std::string unaligned_label = "unaligned";

    std::set<std::string> canonical_labels() const {
        std::set<std::string> out;
        for (const auto& [raw, label] : canonical) out.insert(label);
        return out;
    }
};

/// Labels every registered node. Raw strings are looked up in the config;
/// a raw string that already equals a canonical label maps to itself;
/// anything else (including nodes with no entry) becomes unaligned.
/// Labels are ordered lexicographically with the unaligned label last.
inline Partition apply_party_merge(const NodeRegistry& nodes,
                                   const std::unordered_map<std::string, std::string>& raw_affiliations,
                                   const PartyMergeConfig& config) {
    const auto canon = config.canonical_labels();
    if (canon.empty()) throw ValidationError("party merge config has no canonical labels");
    std::vector<std::string> labels(canon.begin(), canon.end());
    labels.erase(std::remove(labels.begin(), labels.end(), config.unaligned_label), labels.end());
    labels.push_back(config.unaligned_label);
    std::unordered_map<std::string, GroupIndex> label_index;
    for (std::size_t g = 0; g < labels.size(); ++g) label_index.emplace(labels[g], static_cast<GroupIndex>(g));

    const GroupIndex unaligned = label_index.at(config.unaligned_label);
    std::vector<GroupIndex> assignment(nodes.size(), unaligned);
    for (NodeIndex i = 0; i < nodes.size(); ++i) {
        auto raw_it = raw_affiliations.find(nodes.id(i));
        if (raw_it == raw_affiliations.end()) continue;
        std::string raw = raw_it->second;
        raw.erase(0, raw.find_first_not_of(" \t"));
        raw.erase(raw.find_last_not_of(" \t") + 1);
        if (auto it = config.canonical.find(raw); it != config.canonical.end()) {
            assignment[i] = label_index.at(it->second);
        } else if (auto lt = label_index.find(raw); lt != label_index.end()) {
            assignment[i] = lt->second;
        }
    }
    return Partition(std::move(assignment), std::move(labels));
}

}  // namespace polarnet
