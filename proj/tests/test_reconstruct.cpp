#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "treetrace/oracle.hpp"
#include "treetrace/reconstruct.hpp"

using namespace treetrace;

namespace {

const Topology& binary_d2() {
    static const Topology topo = Topology::complete_kary(2, 2);
    return topo;
}

LabeledTree labeled(const Topology& topo, std::uint64_t bits) {
    std::vector<std::uint8_t> labels(topo.non_root_count());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = (bits >> i) & 1;
    return LabeledTree(topo, std::move(labels));
}

TraceBatchSummary summarize(const LabeledTree& tree, const ChannelConfig& cfg,
                            const Topology& reference, std::uint64_t seed, std::uint64_t samples) {
    TraceBatchSummary summary = TraceBatchSummary::zero(reference);
    for (std::uint64_t t = 0; t < samples; ++t) {
        Rng rng = Rng::for_stream(seed, t + 1);
        summary.accumulate(sample_augmented_subtrace(tree, cfg, reference, rng));
    }
    return summary;
}

} // namespace

TEST_CASE("summary accumulate and merge") {
    const LabeledTree tree(binary_d2(), {1, 0, 1, 1, 0, 1});
    const AugmentedSubtrace sub =
        channel_augmented_subtrace(tree, {DeletionModel::TED, 0.0}, binary_d2(), DeletionMask(6, 0));

    TraceBatchSummary summary = TraceBatchSummary::zero(binary_d2());
    CHECK_THROWS_AS(summary.means(), std::logic_error);
    summary.accumulate(sub);
    CHECK(summary.count == 1);
    CHECK(summary.sums[0] == std::vector<double>{1, 0});

    // Merge associativity/commutativity up to float reassociation.
    TraceBatchSummary a = TraceBatchSummary::zero(binary_d2());
    TraceBatchSummary b = TraceBatchSummary::zero(binary_d2());
    Rng rng(10);
    for (int t = 0; t < 40; ++t) {
        const auto s = sample_augmented_subtrace(tree, {DeletionModel::TED, 0.4}, binary_d2(), rng);
        (t % 2 ? a : b).accumulate(s);
    }
    TraceBatchSummary ab = a;
    ab.merge(b);
    TraceBatchSummary ba = b;
    ba.merge(a);
    CHECK(ab.count == ba.count);
    for (std::size_t level = 0; level < ab.sums.size(); ++level) {
        for (std::size_t j = 0; j < ab.sums[level].size(); ++j) {
            CHECK(ab.sums[level][j] == doctest::Approx(ba.sums[level][j]).epsilon(1e-9));
        }
    }

    // q=0 means are the labels exactly.
    const TraceBatchSummary exact =
        summarize(tree, {DeletionModel::TED, 0.0}, binary_d2(), 3, 100);
    CHECK(exact.means()[1] == std::vector<double>{1, 1, 0, 1});

    AugmentedSubtrace wrong;
    wrong.levels = {{1, 0, 0}};
    CHECK_THROWS_AS(summary.accumulate(wrong), std::invalid_argument);
}

TEST_CASE("discriminator identifies the first differing level") {
    const TransitionModel identity =
        build_transition_model(binary_d2(), {DeletionModel::TED, 0.0});

    // Candidates differing in exactly one level-1 label, q=0: gap 1 there.
    const CandidatePair pair =
        discriminator(labeled(binary_d2(), 0b000001), labeled(binary_d2(), 0), identity);
    CHECK(pair.level == 1);
    CHECK(pair.index == 0);
    CHECK(pair.gap == 1.0);
    CHECK(pair.diff == std::vector<std::int8_t>{1, 0});

    CHECK_THROWS_AS(
        discriminator(labeled(binary_d2(), 5), labeled(binary_d2(), 5), identity),
        std::invalid_argument);
}

TEST_CASE("discriminator reads the gap off the transition matrix") {
    const TransitionModel tm = build_transition_model(binary_d2(), {DeletionModel::TED, 0.5});
    // Difference e_0 at level 2: M column 0 has its only nonzero at row 0.
    const CandidatePair pair =
        discriminator(labeled(binary_d2(), 0b000100), labeled(binary_d2(), 0), tm);
    CHECK(pair.level == 2);
    CHECK(pair.index == 0);
    CHECK(pair.gap == doctest::Approx(tm.level(2).at(0, 0)).epsilon(1e-15));

    // Swapping the candidates flips the sign but not the magnitude.
    const CandidatePair swapped =
        discriminator(labeled(binary_d2(), 0), labeled(binary_d2(), 0b000100), tm);
    CHECK(swapped.level == pair.level);
    CHECK(swapped.index == pair.index);
    CHECK(swapped.gap == doctest::Approx(pair.gap).epsilon(1e-15));

    // Equal extra labels on other levels do not move the discriminator.
    const CandidatePair shifted = discriminator(labeled(binary_d2(), 0b110100),
                                                labeled(binary_d2(), 0b110000), tm);
    CHECK(shifted.level == pair.level);
    CHECK(shifted.gap == doctest::Approx(pair.gap).epsilon(1e-15));
}

TEST_CASE("noiseless identifiability: every candidate pair separates") {
    const Topology topos[] = {binary_d2(), Topology::from_level_arities({2, 4})};
    for (const auto& topo : topos) {
        const TransitionModel tm = build_transition_model(topo, {DeletionModel::TED, 0.25});
        const std::uint64_t candidates = std::uint64_t{1} << topo.non_root_count();
        for (std::uint64_t a = 0; a < candidates; ++a) {
            for (std::uint64_t b = a + 1; b < candidates; ++b) {
                CHECK(discriminator(labeled(topo, a), labeled(topo, b), tm).gap > 0.0);
            }
        }
    }
}

TEST_CASE("beats prefers the candidate that generated the data") {
    const ChannelConfig cfg{DeletionModel::TED, 0.5};
    const TransitionModel tm = build_transition_model(binary_d2(), cfg);
    const LabeledTree truth = labeled(binary_d2(), 0b101101);

    const TraceBatchSummary summary =
        TraceBatchSummary::from_means(expected_subtrace(truth, tm));
    for (std::uint64_t other = 0; other < 64; ++other) {
        if (other == 0b101101) continue;
        CHECK(beats(truth, labeled(binary_d2(), other), summary, tm));
        CHECK_FALSE(beats(labeled(binary_d2(), other), truth, summary, tm));
    }
}

TEST_CASE("beats is antisymmetric on noisy summaries") {
    const ChannelConfig cfg{DeletionModel::TED, 0.4};
    const TransitionModel tm = build_transition_model(binary_d2(), cfg);
    const LabeledTree truth = labeled(binary_d2(), 0b011010);
    const TraceBatchSummary summary = summarize(truth, cfg, binary_d2(), 77, 500);
    Rng rng(31);
    for (int round = 0; round < 200; ++round) {
        const std::uint64_t a = rng.below(64), b = rng.below(64);
        if (a == b) continue;
        const LabeledTree ta = labeled(binary_d2(), a), tb = labeled(binary_d2(), b);
        const bool ab = beats(ta, tb, summary, tm);
        const bool ba = beats(tb, ta, summary, tm);
        CHECK_FALSE((ab && ba));
    }
}

TEST_CASE("beats wins against a fixed wrong candidate in seeded trials") {
    const ChannelConfig cfg{DeletionModel::TED, 0.3};
    const TransitionModel tm = build_transition_model(binary_d2(), cfg);
    const LabeledTree truth = labeled(binary_d2(), 0b100110);
    const LabeledTree wrong = labeled(binary_d2(), 0b100011);
    int wins = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::uint64_t seed = derive_stream_seed(606, static_cast<std::uint64_t>(trial));
        const TraceBatchSummary summary = summarize(truth, cfg, binary_d2(), seed, 5000);
        wins += beats(truth, wrong, summary, tm);
    }
    CHECK(wins >= 99);
}

TEST_CASE("exhaustive reconstruction from one noiseless trace") {
    const ChannelConfig cfg{DeletionModel::TED, 0.0};
    const TransitionModel tm = build_transition_model(binary_d2(), cfg);
    const LabeledTree truth = labeled(binary_d2(), 0b110101);
    const TraceBatchSummary summary = summarize(truth, cfg, binary_d2(), 1, 1);
    const ExhaustiveResult result = reconstruct_exhaustive(summary, binary_d2(), tm);
    REQUIRE(result.ok);
    CHECK(result.tree->labels == truth.labels);
}

TEST_CASE("exhaustive reconstruction from exact expectations is deterministic") {
    const ChannelConfig cfg{DeletionModel::TED, 0.35};
    const TransitionModel tm = build_transition_model(binary_d2(), cfg);
    const LabeledTree truth = labeled(binary_d2(), 0b010110);
    const TraceBatchSummary summary =
        TraceBatchSummary::from_means(expected_subtrace(truth, tm));
    const ExhaustiveResult result = reconstruct_exhaustive(summary, binary_d2(), tm);
    REQUIRE(result.ok);
    CHECK(result.tree->labels == truth.labels);
}

TEST_CASE("exhaustive scan respects its size caps") {
    const Topology big = Topology::complete_kary(2, 3); // n = 14
    const TransitionModel tm = build_transition_model(big, {DeletionModel::TED, 0.25});
    const TraceBatchSummary summary =
        TraceBatchSummary::from_means(expected_subtrace(labeled(big, 5), tm));
    CHECK_THROWS_AS(reconstruct_exhaustive(summary, big, tm), std::invalid_argument);
    ExhaustiveOptions options;
    options.max_nodes = 14;
    CHECK(reconstruct_exhaustive(summary, big, tm, options).ok);
}

TEST_CASE("level solve recovers exact expectations with tiny residual") {
    Rng rng(909);
    const struct {
        Topology topo;
        DeletionModel model;
    } cases[] = {{binary_d2(), DeletionModel::TED},
                 {Topology::complete_kary(2, 3), DeletionModel::TED},
                 {Topology::from_level_arities({2, 3}), DeletionModel::TED},
                 {Topology::from_child_counts({2, 1, 0, 0}), DeletionModel::AON}};
    for (const auto& t : cases) {
        const Topology reference = channel_reference(t.topo, t.model);
        for (double q : {0.1, 0.25, 0.4}) {
            const TransitionModel tm = build_transition_model(reference, {t.model, q});
            for (int round = 0; round < 20; ++round) {
                const LabeledTree truth(t.topo, random_labels(t.topo, rng));
                const LabeledTree embedded =
                    t.model == DeletionModel::AON
                        ? embed_labels(truth, regularize_topology(t.topo))
                        : truth;
                const TraceBatchSummary summary =
                    TraceBatchSummary::from_means(expected_subtrace(embedded, tm));
                const LevelSolveResult solved = reconstruct_level_solve(summary, tm);
                CHECK(solved.tree.labels == embedded.labels);
                for (std::size_t level = 0; level < solved.raw.size(); ++level) {
                    const std::size_t offset = reference.level_offset(static_cast<int>(level) + 1) - 1;
                    for (std::size_t j = 0; j < solved.raw[level].size(); ++j) {
                        CHECK(std::abs(solved.raw[level][j] -
                                       static_cast<double>(embedded.labels[offset + j])) <= 1e-9);
                    }
                }
            }
        }
    }
}

TEST_CASE("level solve at q=0 rounds the means") {
    const TransitionModel tm = build_transition_model(binary_d2(), {DeletionModel::TED, 0.0});
    TraceBatchSummary summary = TraceBatchSummary::from_means({{0.7, 0.2}, {0.9, 0.49, 0.51, 0.5}});
    const LevelSolveResult solved = reconstruct_level_solve(summary, tm);
    CHECK(solved.tree.labels == std::vector<std::uint8_t>{1, 0, 1, 0, 1, 0});
}

TEST_CASE("level solve recovery under Monte Carlo noise") {
    const ChannelConfig cfg{DeletionModel::TED, 0.25};
    const Topology topo = Topology::complete_kary(2, 3);
    const TransitionModel tm = build_transition_model(topo, cfg);
    int successes = 0;
    for (int trial = 0; trial < 10; ++trial) {
        const std::uint64_t seed = derive_stream_seed(2024, static_cast<std::uint64_t>(trial));
        Rng label_rng = Rng::for_stream(seed, 0);
        const LabeledTree truth(topo, random_labels(topo, label_rng));
        const TraceBatchSummary summary = summarize(truth, cfg, topo, seed, 20000);
        successes += reconstruct_level_solve(summary, tm).tree.labels == truth.labels;
    }
    CHECK(successes >= 9);
}

TEST_CASE("chernoff sample-size planner") {
    CHECK(plan_sample_size(6, 0.25, 0.05) == 229);
    // Substituting the answer back satisfies the bound; one fewer does not.
    const double gap = 0.25, delta = 0.05;
    const double at = 64.0 * std::exp(-229.0 * gap * gap / 2.0);
    const double below = 64.0 * std::exp(-228.0 * gap * gap / 2.0);
    CHECK(at <= delta);
    CHECK(below > delta);

    CHECK(plan_sample_size(0, 1.0, 0.05) ==
          static_cast<std::uint64_t>(std::ceil(2.0 * std::log(20.0))));

    // Monotone in n.
    std::uint64_t previous = 0;
    for (std::uint64_t n = 1; n <= 40; n *= 2) {
        const std::uint64_t t = plan_sample_size(n, 0.3, 0.01);
        CHECK(t >= previous);
        previous = t;
    }

    CHECK_THROWS_AS(plan_sample_size(5, 0.0, 0.05), std::invalid_argument);
    CHECK_THROWS_AS(plan_sample_size(5, 0.5, 1.5), std::invalid_argument);
}

TEST_CASE("achieved gap dominates the closed-form lower bound") {
    // Theorem hypotheses: c=1, q=0.25 < 1/2, k=2 > 1, so p' = 1/3.
    const double q = 0.25;
    const double p_prime = solve_p_prime(1, q);
    const Topology topo = Topology::complete_kary(2, 3);
    const TransitionModel tm = build_transition_model(topo, {DeletionModel::TED, q});
    Rng rng(1600);
    for (int round = 0; round < 100; ++round) {
        const std::uint64_t a = rng.below(1 << 14), b = rng.below(1 << 14);
        if (a == b) continue;
        const CandidatePair pair = discriminator(labeled(topo, a), labeled(topo, b), tm);
        const double k_level = 2.0 * pair.level;
        const double bound = std::pow(1.0 - q, pair.level - 1) *
                             std::pow(1.0 - p_prime, k_level + 1.0) * std::pow(0.5, k_level) /
                             std::pow(2.0, pair.level);
        CHECK(pair.gap >= bound);
    }
}

TEST_CASE("modulus diagnostic: weighted L1 dominates the prefactored |B|") {
    const Topology topos[] = {binary_d2(), Topology::complete_kary(2, 3),
                              Topology::from_level_arities({3, 2})};
    Rng rng(41);
    for (const auto& topo : topos) {
        for (auto model : {DeletionModel::TED, DeletionModel::AON}) {
            const TransitionModel tm = build_transition_model(topo, {model, 0.3});
            for (int round = 0; round < 20; ++round) {
                const std::uint64_t limit = std::uint64_t{1} << topo.non_root_count();
                const std::uint64_t a = rng.below(limit), b = rng.below(limit);
                if (a == b) continue;
                const CandidatePair pair = discriminator(labeled(topo, a), labeled(topo, b), tm);
                const ModulusDiagnostic diag = modulus_bound_diagnostic(pair, tm, 64);
                // |B| >= 1 on the torus up to grid resolution.
                CHECK(diag.b_modulus >= 0.9);
                CHECK(diag.lhs >= diag.rhs - 1e-9);
                for (const auto& z : diag.z_star) {
                    CHECK(std::abs(z) == doctest::Approx(1.0).epsilon(1e-12));
                }
            }
        }
    }
}
