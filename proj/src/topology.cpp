#include "treetrace/topology.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace treetrace {

Topology Topology::from_child_counts(std::vector<int> child_counts) {
    if (child_counts.empty()) {
        throw std::invalid_argument("topology: empty tree");
    }
    if (child_counts.size() < 2) {
        throw std::invalid_argument("topology: tree needs at least one non-root node");
    }
    for (int c : child_counts) {
        if (c < 0) throw std::invalid_argument("topology: negative child count");
    }

    const std::size_t total = child_counts.size();

    Topology t;
    t.child_counts_ = std::move(child_counts);
    t.level_offsets_.push_back(0);
    t.level_sizes_.push_back(1);

    // Peel off one level at a time; each level must be exactly the block of
    // children produced by the previous one.
    std::size_t begin = 0, end = 1;
    while (true) {
        std::size_t next = 0;
        for (std::size_t v = begin; v < end; ++v) {
            next += static_cast<std::size_t>(t.child_counts_[v]);
        }
        if (next == 0) {
            if (end != total) {
                throw std::invalid_argument(
                    "topology: level sizes inconsistent with child counts (" +
                    std::to_string(total - end) + " unreachable nodes)");
            }
            break;
        }
        begin = end;
        end += next;
        if (end > total) {
            throw std::invalid_argument(
                "topology: child counts reference nodes past the end of the array");
        }
        t.level_sizes_.push_back(next);
        t.level_offsets_.push_back(begin);
        ++t.depth_;
    }
    t.level_offsets_.push_back(total);

    t.parents_.assign(total, 0);
    t.first_child_.assign(total, 0);
    std::size_t next_child = 1;
    for (std::size_t v = 0; v < total; ++v) {
        t.first_child_[v] = next_child;
        for (int c = 0; c < t.child_counts_[v]; ++c) {
            t.parents_[next_child++] = v;
        }
    }

    t.max_arity_ = *std::max_element(t.child_counts_.begin(), t.child_counts_.end());

    t.level_regular_ = true;
    for (int level = 0; level < t.depth_ && t.level_regular_; ++level) {
        const std::size_t off = t.level_offsets_[level];
        const int arity = t.child_counts_[off];
        if (arity < 1) {
            t.level_regular_ = false;
            break;
        }
        for (std::size_t v = off; v < off + t.level_sizes_[level]; ++v) {
            if (t.child_counts_[v] != arity) {
                t.level_regular_ = false;
                break;
            }
        }
        if (t.level_regular_) t.level_arities_.push_back(arity);
    }
    if (!t.level_regular_) t.level_arities_.clear();

    return t;
}

Topology Topology::complete_kary(int k, int depth) {
    return from_level_arities(std::vector<int>(static_cast<std::size_t>(depth), k));
}

Topology Topology::from_level_arities(const std::vector<int>& arities) {
    if (arities.empty()) throw std::invalid_argument("topology: depth must be >= 1");
    for (int k : arities) {
        if (k < 1) throw std::invalid_argument("topology: level arities must be >= 1");
    }
    std::vector<int> counts;
    std::size_t width = 1;
    for (int k : arities) {
        counts.insert(counts.end(), width, k);
        width *= static_cast<std::size_t>(k);
    }
    counts.insert(counts.end(), width, 0);
    return from_child_counts(std::move(counts));
}

std::size_t Topology::level_size(int level) const {
    if (level < 0 || level > depth_) throw std::out_of_range("topology: level out of range");
    return level_sizes_[static_cast<std::size_t>(level)];
}

std::size_t Topology::level_offset(int level) const {
    if (level < 0 || level > depth_) throw std::out_of_range("topology: level out of range");
    return level_offsets_[static_cast<std::size_t>(level)];
}

int Topology::level_of(std::size_t node) const {
    if (node >= node_count()) throw std::out_of_range("topology: node out of range");
    int level = 0;
    while (level_offsets_[static_cast<std::size_t>(level) + 1] <= node) ++level;
    return level;
}

std::size_t Topology::parent_of(std::size_t node) const {
    if (node == 0 || node >= node_count()) {
        throw std::out_of_range("topology: node has no parent");
    }
    return parents_[node];
}

std::size_t Topology::first_child_of(std::size_t node) const {
    if (node >= node_count()) throw std::out_of_range("topology: node out of range");
    return first_child_[node];
}

int Topology::sibling_position(std::size_t node) const {
    return static_cast<int>(node - first_child_[parent_of(node)]);
}

bool Topology::is_complete_kary() const {
    if (!level_regular_) return false;
    for (int k : level_arities_) {
        if (k != level_arities_.front()) return false;
    }
    return true;
}

const std::vector<int>& Topology::level_arities() const {
    if (!level_regular_) {
        throw std::logic_error("topology: level arities undefined for non-level-regular trees");
    }
    return level_arities_;
}

std::size_t addr_to_index(const NodeAddress& addr, const Topology& topo) {
    if (addr.level < 1 || addr.level > topo.depth()) {
        throw std::out_of_range("address: level exceeds depth");
    }
    const auto& arities = topo.level_arities();
    if (addr.digits.size() != static_cast<std::size_t>(addr.level)) {
        throw std::invalid_argument("address: digit count must equal level");
    }
    std::size_t index = 0;
    for (int s = 0; s < addr.level; ++s) {
        const int digit = addr.digits[static_cast<std::size_t>(s)];
        const int radix = arities[static_cast<std::size_t>(s)];
        if (digit < 0 || digit >= radix) {
            throw std::out_of_range("address: digit out of radix range");
        }
        index = index * static_cast<std::size_t>(radix) + static_cast<std::size_t>(digit);
    }
    return index;
}

NodeAddress index_to_addr(std::size_t index, int level, const Topology& topo) {
    if (level < 1 || level > topo.depth()) {
        throw std::out_of_range("address: level exceeds depth");
    }
    if (index >= topo.level_size(level)) {
        throw std::out_of_range("address: index out of range for level");
    }
    const auto& arities = topo.level_arities();
    NodeAddress addr;
    addr.level = level;
    addr.digits.assign(static_cast<std::size_t>(level), 0);
    for (int s = level - 1; s >= 0; --s) {
        const auto radix = static_cast<std::size_t>(arities[static_cast<std::size_t>(s)]);
        addr.digits[static_cast<std::size_t>(s)] = static_cast<int>(index % radix);
        index /= radix;
    }
    return addr;
}

bool digitwise_leq(const NodeAddress& a, const NodeAddress& b) {
    if (a.level != b.level) throw std::invalid_argument("address: level mismatch");
    for (std::size_t s = 0; s < a.digits.size(); ++s) {
        if (a.digits[s] > b.digits[s]) return false;
    }
    return true;
}

LabeledTree::LabeledTree(Topology topo, std::vector<std::uint8_t> node_labels)
    : topology(std::move(topo)), labels(std::move(node_labels)) {
    if (labels.size() != topology.non_root_count()) {
        throw std::invalid_argument("labeled tree: label count must equal non-root node count");
    }
    for (std::uint8_t b : labels) {
        if (b > 1) throw std::invalid_argument("labeled tree: labels must be 0 or 1");
    }
}

std::uint8_t LabeledTree::label_at(int level, std::size_t index_in_level) const {
    if (level < 1 || level > topology.depth()) {
        throw std::out_of_range("labeled tree: level out of range");
    }
    if (index_in_level >= topology.level_size(level)) {
        throw std::out_of_range("labeled tree: index out of range");
    }
    return labels[topology.level_offset(level) - 1 + index_in_level];
}

} // namespace treetrace
