#include "treetrace/oracle.hpp"

#include <deque>
#include <stdexcept>

namespace treetrace {

namespace {

constexpr std::size_t kMaxEnumerationNodes = 20;

void check_size(const Topology& topo) {
    if (topo.non_root_count() > kMaxEnumerationNodes) {
        throw std::invalid_argument("oracle: enumeration is capped at 20 non-root nodes");
    }
}

// Probability of a mask with the given popcount, built by repeated
// multiplication so tiny weights stay exact products.
std::vector<long double> mask_weights(std::size_t n, double q) {
    std::vector<long double> by_popcount(n + 1);
    for (std::size_t w = 0; w <= n; ++w) {
        long double weight = 1.0L;
        for (std::size_t i = 0; i < w; ++i) weight *= static_cast<long double>(q);
        for (std::size_t i = w; i < n; ++i) weight *= static_cast<long double>(1.0 - q);
        by_popcount[w] = weight;
    }
    return by_popcount;
}

template <typename Visit>
void for_each_mask(const LabeledTree& tree, const ChannelConfig& cfg, const Visit& visit) {
    validate(cfg);
    check_size(tree.topology);
    const std::size_t n = tree.topology.non_root_count();
    const Topology reference = channel_reference(tree.topology, cfg.model);
    const auto weights = mask_weights(n, cfg.q);

    DeletionMask mask(n, 0);
    const std::uint64_t count = std::uint64_t{1} << n;
    for (std::uint64_t bits = 0; bits < count; ++bits) {
        int popcount = 0;
        for (std::size_t i = 0; i < n; ++i) {
            mask[i] = (bits >> i) & 1;
            popcount += mask[i];
        }
        const Trace trace =
            cfg.model == DeletionModel::TED ? apply_ted(tree, mask) : apply_aon(tree, mask);
        const Trace* staged = &trace;
        Trace sub;
        if (cfg.model == DeletionModel::TED) {
            sub = extract_subtrace(trace, tree.topology.depth());
            staged = &sub;
        }
        visit(augment_slots(*staged, reference), weights[static_cast<std::size_t>(popcount)]);
    }
}

} // namespace

ExactExpectation exact_expected_subtrace(const LabeledTree& tree, const ChannelConfig& cfg) {
    const Topology reference = channel_reference(tree.topology, cfg.model);

    std::vector<std::vector<long double>> sums(static_cast<std::size_t>(reference.depth()));
    for (int level = 1; level <= reference.depth(); ++level) {
        sums[static_cast<std::size_t>(level - 1)].assign(reference.level_size(level), 0.0L);
    }
    long double mass = 0.0L;

    for_each_mask(tree, cfg, [&](const AugmentedSlots& slots, long double weight) {
        mass += weight;
        for (std::size_t level = 0; level < slots.origin.size(); ++level) {
            const auto& row = slots.origin[level];
            for (std::size_t j = 0; j < row.size(); ++j) {
                if (row[j] >= 0 && tree.labels[static_cast<std::size_t>(row[j])]) {
                    sums[level][j] += weight;
                }
            }
        }
    });

    ExactExpectation out;
    out.total_mass = static_cast<double>(mass);
    out.levels.resize(sums.size());
    for (std::size_t level = 0; level < sums.size(); ++level) {
        out.levels[level].assign(sums[level].begin(), sums[level].end());
    }
    return out;
}

double exact_survival_prob(const LabeledTree& tree, const ChannelConfig& cfg,
                           std::size_t node_index) {
    if (node_index >= tree.topology.non_root_count()) {
        throw std::out_of_range("oracle: node index out of range");
    }
    long double prob = 0.0L;
    for_each_mask(tree, cfg, [&](const AugmentedSlots& slots, long double weight) {
        for (const auto& row : slots.origin) {
            for (std::int64_t origin : row) {
                if (origin == static_cast<std::int64_t>(node_index)) {
                    prob += weight;
                    return;
                }
            }
        }
    });
    return static_cast<double>(prob);
}

std::vector<LevelMatrix> exact_transition_matrices(const Topology& topo, const ChannelConfig& cfg) {
    const Topology reference = channel_reference(topo, cfg.model);
    const LabeledTree tree(topo, std::vector<std::uint8_t>(topo.non_root_count(), 0));
    const RegularizedTopology reg =
        cfg.model == DeletionModel::AON ? regularize_topology(topo)
                                        : RegularizedTopology{topo, {}};

    std::vector<std::vector<long double>> sums(static_cast<std::size_t>(reference.depth()));
    std::vector<LevelMatrix> out(static_cast<std::size_t>(reference.depth()));
    for (int level = 1; level <= reference.depth(); ++level) {
        const std::size_t size = reference.level_size(level);
        out[static_cast<std::size_t>(level - 1)].size = size;
        sums[static_cast<std::size_t>(level - 1)].assign(size * size, 0.0L);
    }

    for_each_mask(tree, cfg, [&](const AugmentedSlots& slots, long double weight) {
        for (std::size_t level = 0; level < slots.origin.size(); ++level) {
            const auto& row = slots.origin[level];
            const std::size_t size = row.size();
            const std::size_t offset = reference.level_offset(static_cast<int>(level) + 1) - 1;
            for (std::size_t j = 0; j < size; ++j) {
                if (row[j] < 0) continue;
                // Column index is the node's position on the reference shape.
                std::size_t node = static_cast<std::size_t>(row[j]);
                if (cfg.model == DeletionModel::AON) node = reg.node_map[node];
                sums[level][j * size + (node - offset)] += weight;
            }
        }
    });

    for (std::size_t level = 0; level < out.size(); ++level) {
        out[level].a.assign(sums[level].begin(), sums[level].end());
    }
    return out;
}

namespace {

struct RecNode {
    std::size_t original; // BFS id in the source tree
    std::vector<RecNode> children;
};

// Contract the subtree rooted at `v`: a deleted node is replaced, in place,
// by the list its own subtree contracts to.
std::vector<RecNode> contract(const LabeledTree& tree, const DeletionMask& mask, std::size_t v) {
    std::vector<RecNode> merged;
    const std::size_t first = tree.topology.first_child_of(v);
    for (int c = 0; c < tree.topology.child_count_of(v); ++c) {
        auto contracted = contract(tree, mask, first + static_cast<std::size_t>(c));
        merged.insert(merged.end(), std::make_move_iterator(contracted.begin()),
                      std::make_move_iterator(contracted.end()));
    }
    if (v != 0 && mask[v - 1]) return merged;
    RecNode node{v, std::move(merged)};
    std::vector<RecNode> self;
    self.push_back(std::move(node));
    return self;
}

} // namespace

Trace apply_ted_recursive(const LabeledTree& tree, const DeletionMask& mask) {
    if (mask.size() != tree.topology.non_root_count()) {
        throw std::invalid_argument("channel: mask length must equal non-root node count");
    }
    std::vector<RecNode> roots = contract(tree, mask, 0);

    Trace trace;
    std::deque<const RecNode*> queue{&roots.front()};
    while (!queue.empty()) {
        const RecNode* node = queue.front();
        queue.pop_front();
        trace.child_counts.push_back(static_cast<int>(node->children.size()));
        if (node->original != 0) {
            trace.labels.push_back(tree.labels[node->original - 1]);
            trace.provenance.push_back(node->original - 1);
        }
        for (const RecNode& child : node->children) queue.push_back(&child);
    }
    return trace;
}

} // namespace treetrace
