#include "treetrace/channels.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <string>

namespace treetrace {

const char* to_string(DeletionModel model) {
    return model == DeletionModel::TED ? "ted" : "aon";
}

DeletionModel deletion_model_from_string(const std::string& name) {
    if (name == "ted" || name == "TED") return DeletionModel::TED;
    if (name == "aon" || name == "AON") return DeletionModel::AON;
    throw std::invalid_argument("unknown deletion model: " + name);
}

void validate(const ChannelConfig& cfg) {
    if (!(cfg.q >= 0.0 && cfg.q < 1.0)) {
        throw std::invalid_argument("channel: q must lie in [0,1)");
    }
}

int Trace::depth() const {
    int depth = 0;
    std::size_t begin = 0, end = 1;
    while (true) {
        std::size_t next = 0;
        for (std::size_t v = begin; v < end; ++v) {
            next += static_cast<std::size_t>(child_counts[v]);
        }
        if (next == 0) break;
        begin = end;
        end += next;
        ++depth;
    }
    return depth;
}

namespace {

void check_mask(const LabeledTree& tree, const DeletionMask& mask) {
    if (mask.size() != tree.topology.non_root_count()) {
        throw std::invalid_argument("channel: mask length must equal non-root node count");
    }
}

// BFS over surviving nodes given per-node surviving-children lists.
Trace build_trace(const LabeledTree& tree, const std::vector<std::vector<std::size_t>>& kids) {
    Trace trace;
    std::deque<std::size_t> queue{0};
    while (!queue.empty()) {
        const std::size_t v = queue.front();
        queue.pop_front();
        trace.child_counts.push_back(static_cast<int>(kids[v].size()));
        if (v != 0) {
            trace.labels.push_back(tree.labels[v - 1]);
            trace.provenance.push_back(v - 1);
        }
        for (std::size_t c : kids[v]) queue.push_back(c);
    }
    return trace;
}

} // namespace

Trace apply_ted(const LabeledTree& tree, const DeletionMask& mask) {
    check_mask(tree, mask);
    const Topology& topo = tree.topology;
    const std::size_t total = topo.node_count();

    std::vector<std::vector<std::size_t>> kids(total);
    for (std::size_t v = 1; v < total; ++v) {
        kids[topo.parent_of(v)].push_back(v);
    }

    // Deepest level first: by the time a node is spliced into its parent, its
    // own child list already holds only survivors.
    for (int level = topo.depth(); level >= 1; --level) {
        const std::size_t off = topo.level_offset(level);
        for (std::size_t v = off; v < off + topo.level_size(level); ++v) {
            if (!mask[v - 1]) continue;
            auto& siblings = kids[topo.parent_of(v)];
            const auto pos = std::find(siblings.begin(), siblings.end(), v);
            const auto at = siblings.erase(pos);
            siblings.insert(at, kids[v].begin(), kids[v].end());
            kids[v].clear();
        }
    }

    return build_trace(tree, kids);
}

Trace apply_aon(const LabeledTree& tree, const DeletionMask& mask) {
    check_mask(tree, mask);
    const Topology& topo = tree.topology;
    const std::size_t total = topo.node_count();

    std::vector<std::uint8_t> alive(total, 0);
    alive[0] = 1;
    for (std::size_t v = 1; v < total; ++v) {
        alive[v] = alive[topo.parent_of(v)] && !mask[v - 1];
    }

    std::vector<std::vector<std::size_t>> kids(total);
    for (std::size_t v = 1; v < total; ++v) {
        if (alive[v]) kids[topo.parent_of(v)].push_back(v);
    }
    return build_trace(tree, kids);
}

DeletionMask sample_mask(const Topology& topo, double q, Rng& rng) {
    if (!(q >= 0.0 && q < 1.0)) {
        throw std::invalid_argument("channel: q must lie in [0,1)");
    }
    DeletionMask mask(topo.non_root_count());
    for (auto& m : mask) m = rng.bernoulli(q);
    return mask;
}

Trace sample_trace(const LabeledTree& tree, const ChannelConfig& cfg, Rng& rng) {
    validate(cfg);
    const DeletionMask mask = sample_mask(tree.topology, cfg.q, rng);
    return cfg.model == DeletionModel::TED ? apply_ted(tree, mask) : apply_aon(tree, mask);
}

std::vector<std::uint8_t> random_labels(const Topology& topo, Rng& rng) {
    std::vector<std::uint8_t> labels(topo.non_root_count());
    for (auto& b : labels) b = rng.bernoulli(0.5);
    return labels;
}

} // namespace treetrace
