#include "treetrace/subtrace.hpp"

#include <algorithm>
#include <stdexcept>

namespace treetrace {

namespace {

// Child ranges of a BFS-encoded trace.
struct TraceIndex {
    std::vector<std::size_t> first_child;
    std::vector<std::size_t> parent;
    std::vector<int> level;
    int depth = 0;

    explicit TraceIndex(const Trace& trace) {
        const std::size_t total = trace.child_counts.size();
        first_child.assign(total, 0);
        parent.assign(total, 0);
        level.assign(total, 0);
        std::size_t next = 1;
        for (std::size_t v = 0; v < total; ++v) {
            first_child[v] = next;
            for (int c = 0; c < trace.child_counts[v]; ++c) {
                parent[next] = v;
                level[next] = level[v] + 1;
                depth = std::max(depth, level[next]);
                ++next;
            }
        }
        if (next != total) {
            throw std::invalid_argument("trace: malformed child counts");
        }
    }
};

} // namespace

Trace extract_subtrace(const Trace& trace, int d) {
    if (d < 1) throw std::invalid_argument("subtrace: depth must be >= 1");
    const TraceIndex index(trace);
    const std::size_t total = trace.child_counts.size();

    // A node belongs to the subtrace iff some descendant-or-self sits at
    // depth d; sweep bottom-up in reverse BFS order.
    std::vector<std::uint8_t> keep(total, 0);
    for (std::size_t v = total; v-- > 1;) {
        if (index.level[v] == d) keep[v] = 1;
        if (keep[v]) keep[index.parent[v]] |= 1;
    }
    keep[0] = 1;

    Trace sub;
    sub.child_counts.reserve(total);
    for (std::size_t v = 0; v < total; ++v) {
        if (!keep[v]) continue;
        int kept_children = 0;
        const std::size_t begin = index.first_child[v];
        for (std::size_t c = begin; c < begin + static_cast<std::size_t>(trace.child_counts[v]); ++c) {
            kept_children += keep[c];
        }
        sub.child_counts.push_back(kept_children);
        if (v != 0) {
            sub.labels.push_back(trace.labels[v - 1]);
            sub.provenance.push_back(trace.provenance[v - 1]);
        }
    }
    return sub;
}

AugmentedSlots augment_slots(const Trace& trace, const Topology& reference) {
    const auto& arities = reference.level_arities(); // throws unless level-regular
    const TraceIndex index(trace);

    AugmentedSlots out;
    out.origin.resize(static_cast<std::size_t>(reference.depth()));

    // Frontier of reference slots for the current level, each holding the
    // attached trace node or -1 for padding. Children of an attached node
    // fill the leftmost child slots; the rest of the row is padding.
    std::vector<std::int64_t> frontier{0};
    std::vector<std::int64_t> next;
    for (int level = 0; level < reference.depth(); ++level) {
        const int arity = arities[static_cast<std::size_t>(level)];
        auto& row = out.origin[static_cast<std::size_t>(level)];
        row.reserve(frontier.size() * static_cast<std::size_t>(arity));
        next.clear();
        for (std::int64_t slot : frontier) {
            int filled = 0;
            if (slot >= 0) {
                const auto v = static_cast<std::size_t>(slot);
                filled = trace.child_counts[v];
                if (filled > arity) {
                    throw std::invalid_argument(
                        "augment: trace node has more children than the reference arity");
                }
                const std::size_t begin = index.first_child[v];
                for (int c = 0; c < filled; ++c) {
                    const std::size_t child = begin + static_cast<std::size_t>(c);
                    next.push_back(static_cast<std::int64_t>(child));
                    row.push_back(static_cast<std::int64_t>(trace.provenance[child - 1]));
                }
            }
            for (int c = filled; c < arity; ++c) {
                next.push_back(-1);
                row.push_back(-1);
            }
        }
        frontier.swap(next);
    }
    return out;
}

AugmentedSubtrace augment(const Trace& trace, const Topology& reference) {
    const AugmentedSlots slots = augment_slots(trace, reference);

    // Slot origins index original nodes, but the labels must come from the
    // trace, so map back through provenance order: the trace stores labels by
    // surviving node. Rebuild a lookup from original index to label.
    AugmentedSubtrace out;
    out.levels.resize(slots.origin.size());
    std::vector<std::uint8_t> label_of;
    for (std::size_t i = 0; i < trace.provenance.size(); ++i) {
        const std::size_t orig = trace.provenance[i];
        if (orig >= label_of.size()) label_of.resize(orig + 1, 0);
        label_of[orig] = trace.labels[i];
    }
    for (std::size_t level = 0; level < slots.origin.size(); ++level) {
        auto& row = out.levels[level];
        row.reserve(slots.origin[level].size());
        for (std::int64_t orig : slots.origin[level]) {
            row.push_back(orig >= 0 ? label_of[static_cast<std::size_t>(orig)] : 0);
        }
    }
    return out;
}

RegularizedTopology regularize_topology(const Topology& topo) {
    const int k_max = topo.max_arity();
    RegularizedTopology reg{Topology::complete_kary(k_max, topo.depth()),
                            std::vector<std::size_t>(topo.non_root_count())};

    // Walk the original tree top-down accumulating the mixed-radix value of
    // each node's sibling-position digits; digits are unchanged by the
    // embedding, only the radix widens to k_max.
    std::vector<std::size_t> linear(topo.node_count(), 0);
    for (std::size_t v = 1; v < topo.node_count(); ++v) {
        const std::size_t parent = topo.parent_of(v);
        linear[v] = linear[parent] * static_cast<std::size_t>(k_max) +
                    static_cast<std::size_t>(topo.sibling_position(v));
        const int level = topo.level_of(v);
        reg.node_map[v - 1] = reg.topology.level_offset(level) - 1 + linear[v];
    }
    return reg;
}

LabeledTree embed_labels(const LabeledTree& tree, const RegularizedTopology& reg) {
    std::vector<std::uint8_t> labels(reg.topology.non_root_count(), 0);
    for (std::size_t i = 0; i < tree.labels.size(); ++i) {
        labels[reg.node_map[i]] = tree.labels[i];
    }
    return LabeledTree(reg.topology, std::move(labels));
}

std::vector<std::uint8_t> restrict_labels(const std::vector<std::uint8_t>& regular_labels,
                                          const RegularizedTopology& reg) {
    std::vector<std::uint8_t> labels(reg.node_map.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        labels[i] = regular_labels[reg.node_map[i]];
    }
    return labels;
}

Topology channel_reference(const Topology& topo, DeletionModel model) {
    if (model == DeletionModel::TED) {
        if (!topo.is_level_regular()) {
            throw std::invalid_argument(
                "channel: the TED subtrace pipeline requires a level-regular topology");
        }
        return topo;
    }
    return regularize_topology(topo).topology;
}

AugmentedSubtrace channel_augmented_subtrace(const LabeledTree& tree, const ChannelConfig& cfg,
                                             const Topology& reference, const DeletionMask& mask) {
    if (cfg.model == DeletionModel::TED) {
        const Trace trace = apply_ted(tree, mask);
        return augment(extract_subtrace(trace, tree.topology.depth()), reference);
    }
    return augment(apply_aon(tree, mask), reference);
}

AugmentedSubtrace sample_augmented_subtrace(const LabeledTree& tree, const ChannelConfig& cfg,
                                            const Topology& reference, Rng& rng) {
    validate(cfg);
    return channel_augmented_subtrace(tree, cfg, reference, sample_mask(tree.topology, cfg.q, rng));
}

} // namespace treetrace
