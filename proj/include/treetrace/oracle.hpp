#pragma once

#include <vector>

#include "treetrace/analytic.hpp"
#include "treetrace/channels.hpp"
#include "treetrace/subtrace.hpp"

namespace treetrace {

// Ground truth by brute force: every quantity below is a sum over all 2^n
// deletion masks, weighted by q^|mask| (1-q)^(n-|mask|). Slow on purpose;
// n is capped at 20.
struct ExactExpectation {
    std::vector<std::vector<double>> levels;
    double total_mass = 0.0; // accumulated mask probability, must be ~1
};

ExactExpectation exact_expected_subtrace(const LabeledTree& tree, const ChannelConfig& cfg);

// P(the given original non-root node appears anywhere in the augmented
// output).
double exact_survival_prob(const LabeledTree& tree, const ChannelConfig& cfg, std::size_t node_index);

// P(slot j at each level holds original node i), as one matrix per level on
// the reference shape. Entrywise ground truth for the transition model.
std::vector<LevelMatrix> exact_transition_matrices(const Topology& topo, const ChannelConfig& cfg);

// Independent re-implementation of TED semantics by structural recursion,
// for cross-checking apply_ted; shares no code with it.
Trace apply_ted_recursive(const LabeledTree& tree, const DeletionMask& mask);

} // namespace treetrace
