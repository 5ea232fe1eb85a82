#include "treetrace/verification.hpp"

#include <cmath>
#include <sstream>

#include "treetrace/oracle.hpp"
#include "treetrace/reconstruct.hpp"

namespace treetrace {

namespace {

struct Config {
    std::string name;
    Topology topology;
    ChannelConfig channel;
};

std::vector<Config> small_configs(bool full) {
    std::vector<Config> configs;
    const auto add = [&](std::string name, Topology topo, DeletionModel model, double q) {
        configs.push_back({std::move(name), std::move(topo), {model, q}});
    };
    const Topology bin2 = Topology::complete_kary(2, 2);
    const Topology mixed = Topology::from_level_arities({2, 3});
    const Topology lopsided = Topology::from_child_counts({2, 1, 0, 0});
    for (double q : {0.1, 0.3, 0.5}) add("ted bin d=2 q=" + std::to_string(q), bin2, DeletionModel::TED, q);
    add("ted arities 2,3 q=0.2", mixed, DeletionModel::TED, 0.2);
    add("aon bin d=2 q=0.3", bin2, DeletionModel::AON, 0.3);
    add("aon arities 2,3 q=0.2", mixed, DeletionModel::AON, 0.2);
    add("aon lopsided (2,1) q=0.4", lopsided, DeletionModel::AON, 0.4);
    if (full) {
        add("ted ternary d=2 q=0.25", Topology::complete_kary(3, 2), DeletionModel::TED, 0.25);
        add("aon ternary d=2 q=0.25", Topology::complete_kary(3, 2), DeletionModel::AON, 0.25);
        add("ted arities 2,4 q=0.3", Topology::from_level_arities({2, 4}), DeletionModel::TED, 0.3);
        add("ted arities 3,2 q=0.4", Topology::from_level_arities({3, 2}), DeletionModel::TED, 0.4);
        add("aon path d=2 q=0.3", Topology::from_level_arities({1, 1}), DeletionModel::AON, 0.3);
        add("aon comb (1,2) q=0.35", Topology::from_child_counts({1, 2, 0, 0}), DeletionModel::AON, 0.35);
    }
    return configs;
}

std::string format_double(double v) {
    std::ostringstream out;
    out.precision(3);
    out << v;
    return out.str();
}

CheckResult oracle_equivalence(const std::vector<Config>& configs, int labelings_per_config) {
    double worst = 0.0;
    std::string worst_at;
    Rng rng(20240601);
    for (const auto& config : configs) {
        const Topology reference = channel_reference(config.topology, config.channel.model);
        const TransitionModel model = build_transition_model(reference, config.channel);
        const RegularizedTopology reg = regularize_topology(config.topology);
        for (int trial = 0; trial < labelings_per_config; ++trial) {
            const LabeledTree tree(config.topology, random_labels(config.topology, rng));
            const LabeledTree embedded =
                config.channel.model == DeletionModel::AON ? embed_labels(tree, reg) : tree;
            const auto exact = exact_expected_subtrace(tree, config.channel);
            const auto analytic = expected_subtrace(embedded, model);
            if (std::abs(exact.total_mass - 1.0) > 1e-12) {
                return {"oracle equivalence", false,
                        "mask probability mass " + std::to_string(exact.total_mass) + " at " +
                            config.name};
            }
            for (std::size_t level = 0; level < analytic.size(); ++level) {
                for (std::size_t j = 0; j < analytic[level].size(); ++j) {
                    const double err = std::abs(analytic[level][j] - exact.levels[level][j]);
                    if (err > worst) {
                        worst = err;
                        worst_at = config.name;
                    }
                }
            }
        }
    }
    const bool pass = worst <= 1e-10;
    return {"oracle equivalence", pass,
            "max |analytic - enumeration| = " + format_double(worst) +
                (worst_at.empty() ? "" : " (" + worst_at + ")")};
}

CheckResult conservation(const std::vector<Config>& configs) {
    double worst = 0.0;
    for (const auto& config : configs) {
        const Topology reference = channel_reference(config.topology, config.channel.model);
        const TransitionModel model = build_transition_model(reference, config.channel);
        for (int level = 1; level <= model.depth(); ++level) {
            const LevelMatrix& m = model.level(level);
            const double expected = model.column_mass(level);
            for (std::size_t i = 0; i < m.size; ++i) {
                double sum = 0.0;
                for (std::size_t j = 0; j < m.size; ++j) sum += m.at(j, i);
                worst = std::max(worst, std::abs(sum - expected));
            }
        }
    }
    return {"conservation", worst <= 1e-12,
            "max |column sum - survival| = " + format_double(worst)};
}

CheckResult triangularity(const std::vector<Config>& configs) {
    for (const auto& config : configs) {
        const Topology reference = channel_reference(config.topology, config.channel.model);
        const TransitionModel model = build_transition_model(reference, config.channel);
        for (int level = 1; level <= model.depth(); ++level) {
            const LevelMatrix& m = model.level(level);
            for (std::size_t j = 0; j < m.size; ++j) {
                const NodeAddress ja = index_to_addr(j, level, reference);
                for (std::size_t i = 0; i < m.size; ++i) {
                    const NodeAddress ia = index_to_addr(i, level, reference);
                    if (!digitwise_leq(ja, ia) && m.at(j, i) != 0.0) {
                        return {"triangularity", false,
                                "nonzero entry off the dominance order at " + config.name};
                    }
                    if (i == j && !(m.at(j, j) > 0.0)) {
                        return {"triangularity", false, "non-positive diagonal at " + config.name};
                    }
                }
            }
        }
    }
    return {"triangularity", true, "all off-order entries exactly 0, diagonals positive"};
}

CheckResult recurrence_values() {
    const SurvivalTable table = survival_recurrence(0.5, 2, 3);
    const bool pass = table.p.size() == 3 && table.p[0] == 0.5 && table.p[1] == 0.625 &&
                      table.p[2] == 0.6953125;
    return {"survival recurrence", pass, "p(q=0.5,k=2,d=3) = (0.5, 0.625, 0.6953125)"};
}

CheckResult p_prime_values() {
    const double a = solve_p_prime(1, 0.25);
    const double b = solve_p_prime(1, 0.45);
    const double c = solve_p_prime(2, 0.5);
    const bool pass = std::abs(a - 1.0 / 3.0) < 1e-9 && std::abs(b - 9.0 / 11.0) < 1e-9 &&
                      std::abs(c - (std::sqrt(5.0) - 1.0) / 2.0) < 1e-9;
    return {"p_prime closed forms", pass, "c=1 q=0.25, c=1 q=0.45, c=2 q=0.5"};
}

CheckResult planner_value() {
    const std::uint64_t t = plan_sample_size(6, 0.25, 0.05);
    return {"chernoff planner", t == 229, "plan_sample_size(6, 0.25, 0.05) = " + std::to_string(t)};
}

CheckResult littlewood_spot() {
    const std::int8_t constant[] = {1};
    const std::size_t shape1[] = {1};
    const double one = littlewood_grid_max(constant, shape1, 8);

    const std::int8_t affine[] = {-1, 1}; // z - 1
    const std::size_t shape2[] = {2};
    const double two = littlewood_grid_max(affine, shape2, 8);

    const bool pass = one == 1.0 && std::abs(two - 2.0) < 1e-12;
    return {"littlewood grid", pass, "constant -> 1, z-1 -> 2"};
}

CheckResult channel_cross_check() {
    Rng rng(777);
    const Topology topos[] = {Topology::complete_kary(2, 3), Topology::from_level_arities({3, 2}),
                              Topology::from_child_counts({3, 2, 0, 1, 0, 0, 0})};
    for (const auto& topo : topos) {
        const LabeledTree tree(topo, random_labels(topo, rng));
        for (int trial = 0; trial < 200; ++trial) {
            const DeletionMask mask = sample_mask(topo, 0.4, rng);
            if (!(apply_ted(tree, mask) == apply_ted_recursive(tree, mask))) {
                return {"ted cross-check", false, "bottom-up and recursive traces disagree"};
            }
        }
    }
    return {"ted cross-check", true, "bottom-up matches independent recursive contraction"};
}

CheckResult survival_monte_carlo() {
    // Level-2 survival in the d=2 binary subtrace at q=0.5 is 0.25; the
    // empirical frequency over 10^5 samples must land within 3 standard
    // errors.
    const Topology topo = Topology::complete_kary(2, 2);
    const LabeledTree tree(topo, std::vector<std::uint8_t>{1, 1, 1, 1, 1, 1});
    const ChannelConfig cfg{DeletionModel::TED, 0.5};
    const int samples = 100000;
    int hits = 0;
    for (int t = 0; t < samples; ++t) {
        Rng rng = Rng::for_stream(424242, static_cast<std::uint64_t>(t));
        const DeletionMask mask = sample_mask(topo, cfg.q, rng);
        const Trace trace = apply_ted(tree, mask);
        const auto slots = augment_slots(extract_subtrace(trace, 2), topo);
        for (std::int64_t origin : slots.origin[1]) {
            if (origin == 2) {
                ++hits;
                break;
            }
        }
    }
    const double freq = static_cast<double>(hits) / samples;
    const double stderr3 = 3.0 * std::sqrt(0.25 * 0.75 / samples);
    return {"survival monte carlo", std::abs(freq - 0.25) <= stderr3,
            "empirical " + format_double(freq) + " vs 0.25 +/- " + format_double(stderr3)};
}

CheckResult level_solve_monte_carlo() {
    const Topology topo = Topology::complete_kary(2, 2);
    const ChannelConfig cfg{DeletionModel::TED, 0.25};
    const TransitionModel model = build_transition_model(topo, cfg);
    const int trials = 20, samples = 3000;
    int successes = 0;
    for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t trial_seed = derive_stream_seed(5150, static_cast<std::uint64_t>(trial));
        Rng label_rng = Rng::for_stream(trial_seed, 0);
        const LabeledTree tree(topo, random_labels(topo, label_rng));
        TraceBatchSummary summary = TraceBatchSummary::zero(topo);
        for (int t = 0; t < samples; ++t) {
            Rng rng = Rng::for_stream(trial_seed, static_cast<std::uint64_t>(t) + 1);
            summary.accumulate(sample_augmented_subtrace(tree, cfg, topo, rng));
        }
        successes += reconstruct_level_solve(summary, model).tree.labels == tree.labels;
    }
    return {"level-solve monte carlo", successes >= 18,
            std::to_string(successes) + "/" + std::to_string(trials) + " exact recoveries"};
}

} // namespace

std::vector<CheckResult> run_verification(bool full) {
    const auto configs = small_configs(full);
    std::vector<CheckResult> results;
    results.push_back(oracle_equivalence(configs, full ? 20 : 8));
    results.push_back(conservation(configs));
    results.push_back(triangularity(configs));
    results.push_back(recurrence_values());
    results.push_back(p_prime_values());
    results.push_back(planner_value());
    results.push_back(littlewood_spot());
    results.push_back(channel_cross_check());
    if (full) {
        results.push_back(survival_monte_carlo());
        results.push_back(level_solve_monte_carlo());
    }
    return results;
}

} // namespace treetrace
