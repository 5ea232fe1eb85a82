#pragma once

#include <cstdint>
#include <vector>

#include "treetrace/channels.hpp"
#include "treetrace/topology.hpp"

namespace treetrace {

// A trace padded out to the full reference shape: level l of the reference
// topology contributes exactly level_size(l) entries, each 0 or 1. This flat
// per-level form is what the estimators and accumulators consume.
struct AugmentedSubtrace {
    std::vector<std::vector<std::uint8_t>> levels; // levels[l-1] = labels at level l

    bool operator==(const AugmentedSubtrace&) const = default;
};

// Same walk as augment(), but records which original non-root node landed in
// each slot (-1 for padding). Used by the enumeration oracle and by tests.
struct AugmentedSlots {
    std::vector<std::vector<std::int64_t>> origin;
};

// The subgraph of `trace` formed by all root-to-leaf paths of length exactly
// d; a trace with no depth-d leaf yields the bare root.
Trace extract_subtrace(const Trace& trace, int d);

// Pads each node's child list on the right with 0-labeled children until it
// reaches the reference arity, level by level from the top. The reference
// topology must be level-regular; throws if a trace node has more children
// than the reference arity allows (impossible for valid channel output).
AugmentedSubtrace augment(const Trace& trace, const Topology& reference);
AugmentedSlots augment_slots(const Trace& trace, const Topology& reference);

// The complete k_max-ary topology of the same depth, together with the map
// from original non-root nodes to their slots in it. Original nodes keep
// their sibling-position digits, so node_map is the digit-preserving
// embedding.
struct RegularizedTopology {
    Topology topology;
    std::vector<std::size_t> node_map; // original non-root index -> regular non-root index
};

RegularizedTopology regularize_topology(const Topology& topo);

// Labels carried over through the embedding; padding slots get 0.
LabeledTree embed_labels(const LabeledTree& tree, const RegularizedTopology& reg);

// Pull labels on the regularized shape back to the original topology.
std::vector<std::uint8_t> restrict_labels(const std::vector<std::uint8_t>& regular_labels,
                                          const RegularizedTopology& reg);

// Reference shape the channel pipeline augments to: the tree's own topology
// for TED (which must be level-regular), the k_max-regularization for AON.
Topology channel_reference(const Topology& topo, DeletionModel model);

// One sampled augmented subtrace: mask -> channel -> (extract for TED) ->
// augment against `reference`.
AugmentedSubtrace sample_augmented_subtrace(const LabeledTree& tree, const ChannelConfig& cfg,
                                            const Topology& reference, Rng& rng);

// Deterministic counterpart of sample_augmented_subtrace for a given mask.
AugmentedSubtrace channel_augmented_subtrace(const LabeledTree& tree, const ChannelConfig& cfg,
                                             const Topology& reference, const DeletionMask& mask);

} // namespace treetrace
