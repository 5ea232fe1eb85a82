#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>

#include "treetrace/oracle.hpp"

using namespace treetrace;

namespace {

double max_difference(const std::vector<std::vector<double>>& a,
                      const std::vector<std::vector<double>>& b) {
    double worst = 0.0;
    REQUIRE(a.size() == b.size());
    for (std::size_t level = 0; level < a.size(); ++level) {
        REQUIRE(a[level].size() == b[level].size());
        for (std::size_t j = 0; j < a[level].size(); ++j) {
            worst = std::max(worst, std::abs(a[level][j] - b[level][j]));
        }
    }
    return worst;
}

} // namespace

TEST_CASE("q=0 enumeration returns the labels themselves") {
    const Topology topo = Topology::complete_kary(2, 2);
    const LabeledTree tree(topo, {1, 0, 1, 1, 0, 1});
    for (auto model : {DeletionModel::TED, DeletionModel::AON}) {
        const ExactExpectation exact = exact_expected_subtrace(tree, {model, 0.0});
        CHECK(exact.total_mass == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(exact.levels[0] == std::vector<double>{1, 0});
        CHECK(exact.levels[1] == std::vector<double>{1, 1, 0, 1});
    }
}

TEST_CASE("all-zero labels give an all-zero expectation") {
    const Topology topo = Topology::from_level_arities({2, 3});
    const LabeledTree tree(topo, std::vector<std::uint8_t>(8, 0));
    const ExactExpectation exact = exact_expected_subtrace(tree, {DeletionModel::TED, 0.3});
    for (const auto& level : exact.levels) {
        for (double v : level) CHECK(v == 0.0);
    }
}

TEST_CASE("mask probability mass always sums to one") {
    Rng rng(4242);
    const Topology topos[] = {Topology::complete_kary(2, 2), Topology::from_level_arities({2, 3}),
                              Topology::from_child_counts({2, 1, 0, 0})};
    for (const auto& topo : topos) {
        const LabeledTree tree(topo, random_labels(topo, rng));
        for (double q : {0.1, 0.5, 0.9}) {
            for (auto model : {DeletionModel::TED, DeletionModel::AON}) {
                if (model == DeletionModel::TED && !topo.is_level_regular()) continue;
                const ExactExpectation exact = exact_expected_subtrace(tree, {model, q});
                CHECK(std::abs(exact.total_mass - 1.0) <= 1e-12);
            }
        }
    }
}

TEST_CASE("enumeration matches the analytic model") {
    const Topology binary = Topology::complete_kary(2, 2);
    const TransitionModel tm = build_transition_model(binary, {DeletionModel::TED, 0.5});
    const LabeledTree tree(binary, {1, 0, 1, 0, 1, 0});
    const ExactExpectation exact = exact_expected_subtrace(tree, {DeletionModel::TED, 0.5});
    CHECK(max_difference(exact.levels, expected_subtrace(tree, tm)) <= 1e-10);
}

TEST_CASE("exact survival probabilities on the d=2 binary tree") {
    const Topology topo = Topology::complete_kary(2, 2);
    const LabeledTree tree(topo, {1, 1, 1, 1, 1, 1});
    CHECK(exact_survival_prob(tree, {DeletionModel::TED, 0.0}, 3) == 1.0);

    const ChannelConfig cfg{DeletionModel::TED, 0.5};
    const SurvivalTable table = survival_recurrence(0.5, 2, 2);
    for (std::size_t node : {2, 3, 4, 5}) {
        CHECK(exact_survival_prob(tree, cfg, node) == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(node_survival_prob(2, table) == doctest::Approx(0.25).epsilon(1e-15));
    }
    for (std::size_t node : {0, 1}) {
        CHECK(exact_survival_prob(tree, cfg, node) == doctest::Approx(0.375).epsilon(1e-12));
    }
    CHECK_THROWS_AS(exact_survival_prob(tree, cfg, 6), std::out_of_range);
}

TEST_CASE("exact transition matrices match the analytic kernels entrywise") {
    const struct {
        Topology topo;
        ChannelConfig cfg;
    } cases[] = {
        {Topology::complete_kary(2, 2), {DeletionModel::TED, 0.5}},
        {Topology::complete_kary(2, 2), {DeletionModel::AON, 0.3}},
        {Topology::from_level_arities({2, 3}), {DeletionModel::TED, 0.2}},
        {Topology::from_level_arities({2, 3}), {DeletionModel::AON, 0.4}},
        {Topology::from_child_counts({2, 1, 0, 0}), {DeletionModel::AON, 0.4}},
    };
    for (const auto& t : cases) {
        const Topology reference = channel_reference(t.topo, t.cfg.model);
        const TransitionModel tm = build_transition_model(reference, t.cfg);
        const auto exact = exact_transition_matrices(t.topo, t.cfg);
        REQUIRE(exact.size() == static_cast<std::size_t>(tm.depth()));

        // Padding columns never receive mass from the enumeration (no
        // original node maps there), so compare only embedded columns.
        std::vector<std::uint8_t> embedded(reference.non_root_count(),
                                           t.cfg.model == DeletionModel::TED);
        if (t.cfg.model == DeletionModel::AON) {
            for (std::size_t v : regularize_topology(t.topo).node_map) embedded[v] = 1;
        }

        for (int level = 1; level <= tm.depth(); ++level) {
            const LevelMatrix& analytic = tm.level(level);
            const LevelMatrix& brute = exact[static_cast<std::size_t>(level - 1)];
            REQUIRE(analytic.size == brute.size);
            const std::size_t offset = reference.level_offset(level) - 1;
            for (std::size_t i = 0; i < analytic.size; ++i) {
                if (!embedded[offset + i]) continue;
                for (std::size_t j = 0; j < analytic.size; ++j) {
                    CHECK(std::abs(analytic.at(j, i) - brute.at(j, i)) <= 1e-12);
                }
            }
        }
    }
}

TEST_CASE("mirroring labels mirrors expectations at q=0 only") {
    const Topology topo = Topology::complete_kary(2, 2);
    const std::vector<std::uint8_t> labels{1, 0, 1, 1, 0, 0};
    // Mirror of the tree: level-1 swaps, level 2 reverses.
    const std::vector<std::uint8_t> mirrored{0, 1, 0, 0, 1, 1};
    const auto mirror_levels = [](std::vector<std::vector<double>> levels) {
        for (auto& level : levels) std::reverse(level.begin(), level.end());
        return levels;
    };

    const auto at0 = exact_expected_subtrace(LabeledTree(topo, labels), {DeletionModel::TED, 0.0});
    const auto at0_mirror =
        exact_expected_subtrace(LabeledTree(topo, mirrored), {DeletionModel::TED, 0.0});
    CHECK(max_difference(mirror_levels(at0.levels), at0_mirror.levels) == 0.0);

    // With deletions the channel shifts left only: position 0 can receive
    // bit i, position i never receives bit 0.
    const auto exact = exact_transition_matrices(topo, {DeletionModel::TED, 0.5});
    for (const auto& m : exact) {
        for (std::size_t i = 1; i < m.size; ++i) {
            CHECK(m.at(0, i) > 0.0);
            CHECK(m.at(i, 0) == 0.0);
        }
    }
}

TEST_CASE("oracle rejects oversized enumerations") {
    const Topology topo = Topology::complete_kary(2, 4); // n = 30
    const LabeledTree tree(topo, std::vector<std::uint8_t>(30, 1));
    CHECK_THROWS_AS(exact_expected_subtrace(tree, {DeletionModel::TED, 0.5}),
                    std::invalid_argument);
}
