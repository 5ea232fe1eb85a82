#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "treetrace/rng.hpp"
#include "treetrace/topology.hpp"

namespace treetrace {

enum class DeletionModel { TED, AON };

const char* to_string(DeletionModel model);
DeletionModel deletion_model_from_string(const std::string& name);

struct ChannelConfig {
    DeletionModel model = DeletionModel::TED;
    double q = 0.0; // per-node deletion probability, in [0,1)
};

void validate(const ChannelConfig& cfg);

// One decision per non-root node in BFS order; true means deleted (TED) or
// marked (AON). The root is never deletable and carries no entry.
using DeletionMask = std::vector<std::uint8_t>;

// Channel output: an ordered rooted labeled tree in the same BFS encoding,
// plus the original non-root index of every surviving node.
struct Trace {
    std::vector<int> child_counts;       // BFS, root first
    std::vector<std::uint8_t> labels;    // one per surviving non-root node
    std::vector<std::size_t> provenance; // surviving node -> original non-root index

    std::size_t non_root_count() const { return labels.size(); }
    int depth() const;

    bool operator==(const Trace&) const = default;
};

// TED: a deleted node's children are spliced into its position among its
// siblings (edge contraction). Deletions are associative, so the result does
// not depend on processing order; this implementation works bottom-up.
Trace apply_ted(const LabeledTree& tree, const DeletionMask& mask);

// AON: a node survives iff neither it nor any ancestor is marked.
Trace apply_aon(const LabeledTree& tree, const DeletionMask& mask);

// Each entry independently true with probability q.
DeletionMask sample_mask(const Topology& topo, double q, Rng& rng);

Trace sample_trace(const LabeledTree& tree, const ChannelConfig& cfg, Rng& rng);

// Fair-coin label per non-root node.
std::vector<std::uint8_t> random_labels(const Topology& topo, Rng& rng);

} // namespace treetrace
