#include <doctest.h>

#include <stdexcept>

#include "treetrace/topology.hpp"

using namespace treetrace;

TEST_CASE("complete binary tree d=2") {
    const Topology topo = Topology::from_child_counts({2, 2, 2, 0, 0, 0, 0});
    CHECK(topo.depth() == 2);
    CHECK(topo.non_root_count() == 6);
    CHECK(topo.is_level_regular());
    CHECK(topo.is_complete_kary());
    CHECK(topo.level_arities() == std::vector<int>{2, 2});
    CHECK(topo.level_sizes() == std::vector<std::size_t>{1, 2, 4});
}

TEST_CASE("level-regular arities (2,3)") {
    const Topology topo = Topology::from_child_counts({2, 3, 3, 0, 0, 0, 0, 0, 0});
    CHECK(topo.non_root_count() == 8);
    CHECK(topo.depth() == 2);
    CHECK(topo.is_level_regular());
    CHECK_FALSE(topo.is_complete_kary());
    CHECK(topo.level_arities() == std::vector<int>{2, 3});
    CHECK(topo == Topology::from_level_arities({2, 3}));
}

TEST_CASE("malformed child counts rejected") {
    CHECK_THROWS_AS(Topology::from_child_counts({}), std::invalid_argument);
    CHECK_THROWS_AS(Topology::from_child_counts({0}), std::invalid_argument);
    // Unreachable tail nodes.
    CHECK_THROWS_AS(Topology::from_child_counts({1, 2, 0, 0, 3, 0, 0, 0}), std::invalid_argument);
    // Counts run past the end of the array.
    CHECK_THROWS_AS(Topology::from_child_counts({3, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(Topology::from_child_counts({2, -1, 0, 0}), std::invalid_argument);
}

TEST_CASE("irregular topology properties") {
    const Topology topo = Topology::from_child_counts({2, 1, 0, 0});
    CHECK(topo.non_root_count() == 3);
    CHECK(topo.depth() == 2);
    CHECK_FALSE(topo.is_level_regular());
    CHECK(topo.max_arity() == 2);
    CHECK_THROWS_AS(topo.level_arities(), std::logic_error);
    CHECK(topo.parent_of(3) == 1);
    CHECK(topo.sibling_position(2) == 1);
}

TEST_CASE("level sizes sum to node count") {
    for (const auto& topo :
         {Topology::complete_kary(2, 3), Topology::from_level_arities({3, 1, 2}),
          Topology::from_child_counts({2, 1, 3, 0, 0, 0, 0})}) {
        std::size_t total = 0;
        for (std::size_t s : topo.level_sizes()) total += s;
        CHECK(total == topo.non_root_count() + 1);
    }
}

TEST_CASE("complete k-ary level sizes are powers of k") {
    const Topology topo = Topology::complete_kary(3, 3);
    std::size_t expected = 1;
    for (int level = 0; level <= topo.depth(); ++level) {
        CHECK(topo.level_size(level) == expected);
        expected *= 3;
    }
}

TEST_CASE("mixed-radix address evaluation") {
    const Topology mixed = Topology::from_level_arities({2, 3});
    CHECK(addr_to_index({2, {0, 0}}, mixed) == 0);
    CHECK(addr_to_index({2, {1, 2}}, mixed) == 5);

    const Topology binary = Topology::complete_kary(2, 3);
    CHECK(addr_to_index({3, {1, 0, 1}}, binary) == 5);

    CHECK_THROWS_AS(addr_to_index({2, {1, 3}}, mixed), std::out_of_range);
    CHECK_THROWS_AS(addr_to_index({4, {0, 0, 0, 0}}, binary), std::out_of_range);
    CHECK_THROWS_AS(addr_to_index({2, {1}}, mixed), std::invalid_argument);
}

TEST_CASE("address decoding") {
    const Topology mixed = Topology::from_level_arities({2, 3});
    CHECK(index_to_addr(0, 2, mixed) == NodeAddress{2, {0, 0}});
    CHECK(index_to_addr(5, 2, mixed) == NodeAddress{2, {1, 2}});

    const Topology binary = Topology::complete_kary(2, 3);
    CHECK(index_to_addr(7, 3, binary) == NodeAddress{3, {1, 1, 1}});

    CHECK_THROWS_AS(index_to_addr(6, 2, mixed), std::out_of_range);
}

TEST_CASE("address round trip is the identity") {
    for (const auto& topo : {Topology::complete_kary(2, 4), Topology::from_level_arities({3, 2, 4}),
                             Topology::from_level_arities({1, 5, 2})}) {
        for (int level = 1; level <= topo.depth(); ++level) {
            for (std::size_t i = 0; i < topo.level_size(level); ++i) {
                const NodeAddress addr = index_to_addr(i, level, topo);
                CHECK(addr_to_index(addr, topo) == i);
            }
        }
    }
}

TEST_CASE("labels index level by level") {
    const Topology topo = Topology::complete_kary(2, 2);
    const LabeledTree tree(topo, {1, 0, 1, 1, 0, 0});
    CHECK(tree.label_at(1, 0) == 1);
    CHECK(tree.label_at(1, 1) == 0);
    CHECK(tree.label_at(2, 0) == 1);
    CHECK(tree.label_at(2, 3) == 0);

    CHECK_THROWS_AS(LabeledTree(topo, {1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(LabeledTree(topo, {2, 0, 0, 0, 0, 0}), std::invalid_argument);
}
