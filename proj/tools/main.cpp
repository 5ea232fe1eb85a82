#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "treetrace/json_io.hpp"
#include "treetrace/oracle.hpp"
#include "treetrace/parallel.hpp"
#include "treetrace/reconstruct.hpp"
#include "treetrace/verification.hpp"

namespace {

using namespace treetrace;

constexpr int kExitOk = 0;
constexpr int kExitReconstructionFailed = 1;
constexpr int kExitInvalidInput = 2;
constexpr int kExitVerificationFailed = 3;

struct Spec {
    std::string model = "ted";
    double q = 0.0;
    int k = 0;
    int depth = 0;
    std::string arities;
    std::string tree_file;
    std::string labels = "random";
    std::vector<std::uint64_t> traces{1000};
    int trials = 10;
    std::uint64_t seed = 1;
    std::string estimator = "level-solve";
    std::string out;
    bool timing = false;
    int c = 0;
};

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> values;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) values.push_back(std::stoi(item));
    return values;
}

Topology resolve_topology(const Spec& spec) {
    if (!spec.tree_file.empty()) return load_tree(spec.tree_file).topology;
    if (!spec.arities.empty()) return Topology::from_level_arities(parse_int_list(spec.arities));
    if (spec.k >= 1 && spec.depth >= 1) return Topology::complete_kary(spec.k, spec.depth);
    throw std::invalid_argument("no topology given: use --tree, --arities, or --k with --depth");
}

std::string topology_spec_string(const Spec& spec) {
    if (!spec.tree_file.empty()) return "file";
    if (!spec.arities.empty()) {
        std::string joined = spec.arities;
        for (auto& ch : joined) {
            if (ch == ',') ch = '-';
        }
        return joined;
    }
    return std::to_string(spec.k);
}

std::vector<std::uint8_t> resolve_labels(const Spec& spec, const Topology& topo, Rng& rng) {
    if (!spec.tree_file.empty()) return load_tree(spec.tree_file).labels;
    if (spec.labels == "ones") return std::vector<std::uint8_t>(topo.non_root_count(), 1);
    if (spec.labels == "zeros") return std::vector<std::uint8_t>(topo.non_root_count(), 0);
    if (spec.labels == "random") return random_labels(topo, rng);
    return load_tree(spec.labels).labels;
}

ChannelConfig resolve_channel(const Spec& spec) {
    ChannelConfig cfg{deletion_model_from_string(spec.model), spec.q};
    validate(cfg);
    return cfg;
}

std::string format_number(double v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

void load_config_file(const std::string& path, Spec& spec) {
    const json j = load_json(path);
    if (j.contains("model")) spec.model = j.at("model").get<std::string>();
    if (j.contains("q")) spec.q = j.at("q").get<double>();
    if (j.contains("k")) spec.k = j.at("k").get<int>();
    if (j.contains("depth")) spec.depth = j.at("depth").get<int>();
    if (j.contains("arities")) spec.arities = j.at("arities").get<std::string>();
    if (j.contains("tree")) spec.tree_file = j.at("tree").get<std::string>();
    if (j.contains("labels")) spec.labels = j.at("labels").get<std::string>();
    if (j.contains("traces")) spec.traces = j.at("traces").get<std::vector<std::uint64_t>>();
    if (j.contains("trials")) spec.trials = j.at("trials").get<int>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("estimator")) spec.estimator = j.at("estimator").get<std::string>();
    if (j.contains("out")) spec.out = j.at("out").get<std::string>();
    if (j.contains("timing")) spec.timing = j.at("timing").get<bool>();
    if (j.contains("c")) spec.c = j.at("c").get<int>();
}

void add_common_flags(CLI::App* cmd, Spec& spec) {
    static std::string config_path;
    cmd->add_option("--config", config_path, "JSON file with defaults for the flags");
    cmd->add_option("--model", spec.model, "deletion model: ted | aon");
    cmd->add_option("--q", spec.q, "deletion probability in [0,1)");
    cmd->add_option("--k", spec.k, "complete k-ary arity");
    cmd->add_option("--depth", spec.depth, "complete k-ary depth");
    cmd->add_option("--arities", spec.arities, "per-level arities, e.g. 2,3");
    cmd->add_option("--tree", spec.tree_file, "tree file with child_counts and labels");
    cmd->add_option("--labels", spec.labels, "label source: ones | zeros | random | <tree file>");
    cmd->add_option("--seed", spec.seed, "base seed");
    cmd->add_option("--out", spec.out, "output path");
}

struct Pipeline {
    LabeledTree tree;
    ChannelConfig cfg;
    Topology reference;

    Pipeline(LabeledTree t, ChannelConfig c)
        : tree(std::move(t)), cfg(c), reference(channel_reference(tree.topology, cfg.model)) {}

    AugmentedSubtrace from_trace(const Trace& trace) const {
        if (cfg.model == DeletionModel::TED) {
            return augment(extract_subtrace(trace, tree.topology.depth()), reference);
        }
        return augment(trace, reference);
    }
};

int cmd_simulate(const Spec& spec) {
    Rng label_rng = Rng::for_stream(spec.seed, 0);
    const Topology topo = resolve_topology(spec);
    const Pipeline pipeline(LabeledTree(topo, resolve_labels(spec, topo, label_rng)),
                            resolve_channel(spec));

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!spec.out.empty()) {
        file.open(spec.out);
        if (!file) throw std::runtime_error("cannot open for writing: " + spec.out);
        out = &file;
    }

    const std::uint64_t count = spec.traces.empty() ? 0 : spec.traces.front();
    for (std::uint64_t t = 0; t < count; ++t) {
        Rng rng = Rng::for_stream(spec.seed, t + 1);
        const Trace trace = sample_trace(pipeline.tree, pipeline.cfg, rng);
        const json line{{"augmented", to_json(pipeline.from_trace(trace))},
                        {"trace", to_json(trace)}};
        *out << line.dump() << '\n';
    }
    return kExitOk;
}

int cmd_expect(const Spec& spec, bool labels_requested) {
    const Topology topo = resolve_topology(spec);
    const ChannelConfig cfg = resolve_channel(spec);
    const Topology reference = channel_reference(topo, cfg.model);
    TransitionModel model = build_transition_model(reference, cfg);

    json report = json::object();
    if (spec.c >= 1 && model.survival) {
        try {
            model.survival->p_prime = solve_p_prime(spec.c, cfg.q);
        } catch (const std::exception& e) {
            report["p_prime_error"] = e.what();
        }
    }
    report.update(model_report(model));
    if (labels_requested || !spec.tree_file.empty()) {
        Rng label_rng = Rng::for_stream(spec.seed, 0);
        LabeledTree tree(topo, resolve_labels(spec, topo, label_rng));
        if (cfg.model == DeletionModel::AON) {
            tree = embed_labels(tree, regularize_topology(topo));
        }
        report["expected"] = expected_subtrace(tree, model);
    }

    if (spec.out.empty()) {
        std::cout << report.dump() << '\n';
    } else {
        save_json(report, spec.out);
    }
    return kExitOk;
}

int cmd_reconstruct(const Spec& spec, const std::vector<std::string>& trace_files) {
    const Topology topo = resolve_topology(spec);
    const ChannelConfig cfg = resolve_channel(spec);
    const Pipeline pipeline(LabeledTree(topo, std::vector<std::uint8_t>(topo.non_root_count(), 0)),
                            cfg);
    const TransitionModel model = build_transition_model(pipeline.reference, cfg);

    TraceBatchSummary summary = TraceBatchSummary::zero(pipeline.reference);
    for (const auto& path : trace_files) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open: " + path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json j = json::parse(line);
            const Trace trace = trace_from_json(j.contains("trace") ? j.at("trace") : j);
            summary.accumulate(pipeline.from_trace(trace));
        }
    }
    if (summary.count == 0) throw std::invalid_argument("no traces supplied");

    json report{{"trials", summary.count}};
    std::optional<LabeledTree> result;
    if (spec.estimator == "level-solve") {
        result = reconstruct_level_solve(summary, model).tree;
        report["status"] = "ok";
    } else if (spec.estimator == "exhaustive") {
        ExhaustiveOptions options;
        options.max_nodes = 16;
        const ExhaustiveResult scan =
            reconstruct_exhaustive(summary, pipeline.reference, model, options);
        report["status"] = scan.status();
        if (scan.ok) result = scan.tree;
    } else {
        throw std::invalid_argument("unknown estimator: " + spec.estimator);
    }

    if (result) {
        LabeledTree tree = *result;
        if (!(pipeline.reference == topo)) {
            tree = LabeledTree(topo, restrict_labels(tree.labels, regularize_topology(topo)));
        }
        if (!spec.out.empty()) {
            save_json(to_json(tree), spec.out);
        } else {
            report["tree"] = to_json(tree);
        }
    }
    std::cout << report.dump() << '\n';
    return result ? kExitOk : kExitReconstructionFailed;
}

int cmd_experiment(const Spec& spec) {
    const Topology topo = resolve_topology(spec);
    const ChannelConfig cfg = resolve_channel(spec);
    const Topology reference = channel_reference(topo, cfg.model);
    const TransitionModel model = build_transition_model(reference, cfg);
    const RegularizedTopology reg = regularize_topology(topo);

    std::vector<std::uint64_t> budgets = spec.traces;
    std::sort(budgets.begin(), budgets.end());
    if (budgets.empty() || spec.trials < 1) {
        throw std::invalid_argument("experiment needs at least one trace budget and one trial");
    }

    ExhaustiveOptions exhaustive_options;
    exhaustive_options.max_nodes = 16;

    // One row of successes per budget; trial t is fully determined by
    // (seed, t), so any worker interleaving reproduces the same table.
    std::vector<std::vector<std::uint8_t>> success(
        budgets.size(), std::vector<std::uint8_t>(static_cast<std::size_t>(spec.trials), 0));
    std::vector<std::vector<std::int64_t>> elapsed_ms(
        budgets.size(), std::vector<std::int64_t>(static_cast<std::size_t>(spec.trials), 0));

    parallel_for_index(static_cast<std::size_t>(spec.trials), default_worker_count(), [&](std::size_t trial) {
        const std::uint64_t trial_seed = derive_stream_seed(spec.seed, trial);
        Rng label_rng = Rng::for_stream(trial_seed, 0);
        const LabeledTree truth(topo, resolve_labels(spec, topo, label_rng));
        const LabeledTree embedded =
            cfg.model == DeletionModel::AON ? embed_labels(truth, reg) : truth;

        TraceBatchSummary summary = TraceBatchSummary::zero(reference);
        std::uint64_t sampled = 0;
        for (std::size_t bi = 0; bi < budgets.size(); ++bi) {
            const auto start = std::chrono::steady_clock::now();
            for (; sampled < budgets[bi]; ++sampled) {
                Rng rng = Rng::for_stream(trial_seed, sampled + 1);
                summary.accumulate(sample_augmented_subtrace(truth, cfg, reference, rng));
            }
            bool ok = false;
            if (spec.estimator == "level-solve") {
                ok = reconstruct_level_solve(summary, model).tree.labels == embedded.labels;
            } else if (spec.estimator == "exhaustive") {
                const ExhaustiveResult scan =
                    reconstruct_exhaustive(summary, reference, model, exhaustive_options);
                ok = scan.ok && scan.tree->labels == embedded.labels;
            } else {
                throw std::invalid_argument("unknown estimator: " + spec.estimator);
            }
            success[bi][trial] = ok;
            elapsed_ms[bi][trial] = std::chrono::duration_cast<std::chrono::milliseconds>(
                                        std::chrono::steady_clock::now() - start)
                                        .count();
        }
    });

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!spec.out.empty()) {
        file.open(spec.out);
        if (!file) throw std::runtime_error("cannot open for writing: " + spec.out);
        out = &file;
    }
    *out << "model,k_spec,n,d,q,estimator,T,trials,successes,wallclock_ms\n";
    for (std::size_t bi = 0; bi < budgets.size(); ++bi) {
        std::uint64_t successes = 0;
        std::int64_t wallclock = 0;
        for (int trial = 0; trial < spec.trials; ++trial) {
            successes += success[bi][static_cast<std::size_t>(trial)];
            wallclock += elapsed_ms[bi][static_cast<std::size_t>(trial)];
        }
        // Timing breaks byte-stable output, so it is opt-in.
        if (!spec.timing) wallclock = 0;
        *out << to_string(cfg.model) << ',' << topology_spec_string(spec) << ','
             << topo.non_root_count() << ',' << topo.depth() << ',' << format_number(cfg.q) << ','
             << spec.estimator << ',' << budgets[bi] << ',' << spec.trials << ',' << successes
             << ',' << wallclock << '\n';
    }
    return kExitOk;
}

int cmd_verify(const std::string& level) {
    if (level != "quick" && level != "full") {
        throw std::invalid_argument("verify level must be quick or full");
    }
    const auto results = run_verification(level == "full");
    bool all_ok = true;
    for (const auto& result : results) {
        all_ok &= result.pass;
        std::cout << (result.pass ? "PASS" : "FAIL") << ' ' << result.name << " - "
                  << result.detail << '\n';
    }
    return all_ok ? kExitOk : kExitVerificationFailed;
}

} // namespace

int main(int argc, char** argv) {
    Spec spec;

    // --config seeds the defaults; explicit flags still win.
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            try {
                load_config_file(argv[i + 1], spec);
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << '\n';
                return kExitInvalidInput;
            }
        }
    }

    CLI::App app{"tree trace reconstruction toolkit"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON file with defaults for the flags");

    auto* simulate = app.add_subcommand("simulate", "sample traces and augmented subtraces");
    add_common_flags(simulate, spec);
    simulate->add_option("--traces", spec.traces, "number of traces")->delimiter(',');

    auto* expect = app.add_subcommand("expect", "print the analytic survival/transition report");
    add_common_flags(expect, spec);
    expect->add_option("--c", spec.c, "series order for the p' bound");

    auto* reconstruct = app.add_subcommand("reconstruct", "estimate labels from trace files");
    add_common_flags(reconstruct, spec);
    reconstruct->add_option("--estimator", spec.estimator, "level-solve | exhaustive");
    std::vector<std::string> trace_files;
    reconstruct->add_option("files", trace_files, "JSON-lines trace files")->required();

    auto* experiment = app.add_subcommand("experiment", "success-rate sweep, CSV output");
    add_common_flags(experiment, spec);
    experiment->add_option("--traces", spec.traces, "trace budgets to sweep")->delimiter(',');
    experiment->add_option("--trials", spec.trials, "trials per budget");
    experiment->add_option("--estimator", spec.estimator, "level-solve | exhaustive");
    experiment->add_flag("--timing", spec.timing, "record wallclock per row (not byte-stable)");

    auto* verify = app.add_subcommand("verify", "run the invariant suites");
    std::string verify_level = "quick";
    verify->add_option("--level", verify_level, "quick | full");
    std::string verify_config;
    verify->add_option("--config", verify_config, "accepted for symmetry; verify reads no spec");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalidInput;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(spec);
        if (expect->parsed()) return cmd_expect(spec, expect->count("--labels") > 0);
        if (reconstruct->parsed()) return cmd_reconstruct(spec, trace_files);
        if (experiment->parsed()) return cmd_experiment(spec);
        if (verify->parsed()) return cmd_verify(verify_level);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalidInput;
    }
    return kExitInvalidInput;
}
