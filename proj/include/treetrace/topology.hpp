#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace treetrace {

// Shape of a rooted ordered tree. Nodes are numbered in breadth-first
// left-to-right order with the root at 0, so the children of any node form a
// contiguous block and each level occupies a contiguous index range.
// Immutable after construction; safe to share across threads.
class Topology {
public:
    // Builds and validates a topology from per-node child counts in BFS
    // order. Throws std::invalid_argument if the counts do not describe a
    // single rooted tree with at least one non-root node.
    static Topology from_child_counts(std::vector<int> child_counts);

    // Every node above the leaf level has exactly k children.
    static Topology complete_kary(int k, int depth);

    // One arity per level, level 0 (root) first; all leaves end up on the
    // last level.
    static Topology from_level_arities(const std::vector<int>& arities);

    std::size_t node_count() const { return child_counts_.size(); }
    std::size_t non_root_count() const { return child_counts_.size() - 1; }
    int depth() const { return depth_; }

    const std::vector<int>& child_counts() const { return child_counts_; }
    const std::vector<std::size_t>& level_sizes() const { return level_sizes_; }
    std::size_t level_size(int level) const;
    // BFS index of the leftmost node on `level`.
    std::size_t level_offset(int level) const;
    int level_of(std::size_t node) const;

    std::size_t parent_of(std::size_t node) const;
    std::size_t first_child_of(std::size_t node) const;
    int child_count_of(std::size_t node) const { return child_counts_[node]; }
    // Position of `node` among its parent's children, counted from the left.
    int sibling_position(std::size_t node) const;

    // True when every node on a level has the same number of children, so
    // every leaf sits on the last level. This is the shape the per-level
    // transition machinery is defined on.
    bool is_level_regular() const { return level_regular_; }
    bool is_complete_kary() const;
    // Arity of each level 0..d-1; throws unless is_level_regular().
    const std::vector<int>& level_arities() const;
    int max_arity() const { return max_arity_; }

    bool operator==(const Topology& other) const {
        return child_counts_ == other.child_counts_;
    }

private:
    Topology() = default;

    std::vector<int> child_counts_;
    std::vector<std::size_t> level_sizes_;   // indexed by level, size depth_+1
    std::vector<std::size_t> level_offsets_; // size depth_+2, sentinel at end
    std::vector<std::size_t> parents_;
    std::vector<std::size_t> first_child_;
    std::vector<int> level_arities_;         // filled only when level_regular_
    int depth_ = 0;
    int max_arity_ = 0;
    bool level_regular_ = false;
};

// Mixed-radix address of a node at a given level. digits[s] is the position,
// among its siblings, of the node's ancestor at level s+1; digits.front()
// addresses the child of the root on the path, digits.back() the node
// itself. Digit s runs over [0, arity of level s).
struct NodeAddress {
    int level = 0;
    std::vector<int> digits;

    bool operator==(const NodeAddress&) const = default;
};

// Linear position of the addressed node within its level (0 = leftmost).
// Requires a level-regular topology; throws on radix or level violations.
std::size_t addr_to_index(const NodeAddress& addr, const Topology& topo);
NodeAddress index_to_addr(std::size_t index, int level, const Topology& topo);

// True when every digit of `a` is <= the corresponding digit of `b`. This is
// the partial order of feasible leftward shifts in a channel output.
bool digitwise_leq(const NodeAddress& a, const NodeAddress& b);

// A topology plus one binary label per non-root node. Label i belongs to BFS
// node i+1, so labels are ordered level by level, left to right.
struct LabeledTree {
    Topology topology;
    std::vector<std::uint8_t> labels;

    LabeledTree(Topology topo, std::vector<std::uint8_t> node_labels);

    std::uint8_t label_at(int level, std::size_t index_in_level) const;

    bool operator==(const LabeledTree&) const = default;
};

} // namespace treetrace
