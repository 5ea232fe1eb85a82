#include "treetrace/json_io.hpp"

#include <fstream>
#include <stdexcept>

namespace treetrace {

json to_json(const LabeledTree& tree) {
    return json{{"child_counts", tree.topology.child_counts()}, {"labels", tree.labels}};
}

LabeledTree tree_from_json(const json& j) {
    Topology topo = Topology::from_child_counts(j.at("child_counts").get<std::vector<int>>());
    auto labels = j.at("labels").get<std::vector<std::uint8_t>>();
    return LabeledTree(std::move(topo), std::move(labels));
}

json to_json(const Trace& trace, bool with_provenance) {
    json j{{"child_counts", trace.child_counts}, {"labels", trace.labels}};
    if (with_provenance) j["provenance"] = trace.provenance;
    return j;
}

Trace trace_from_json(const json& j) {
    Trace trace;
    trace.child_counts = j.at("child_counts").get<std::vector<int>>();
    trace.labels = j.at("labels").get<std::vector<std::uint8_t>>();
    if (j.contains("provenance")) {
        trace.provenance = j.at("provenance").get<std::vector<std::size_t>>();
    } else {
        // Positional identity; enough for pipelines that never look back at
        // the source tree.
        trace.provenance.resize(trace.labels.size());
        for (std::size_t i = 0; i < trace.provenance.size(); ++i) trace.provenance[i] = i;
    }
    if (trace.labels.size() + 1 != trace.child_counts.size() ||
        trace.provenance.size() != trace.labels.size()) {
        throw std::invalid_argument("trace json: array lengths are inconsistent");
    }
    return trace;
}

json to_json(const AugmentedSubtrace& sub) {
    return json{{"levels", sub.levels}};
}

AugmentedSubtrace subtrace_from_json(const json& j) {
    AugmentedSubtrace sub;
    sub.levels = j.at("levels").get<std::vector<std::vector<std::uint8_t>>>();
    return sub;
}

json model_report(const TransitionModel& model) {
    json report;
    report["model"] = to_string(model.config.model);
    report["q"] = model.config.q;
    if (model.survival) {
        report["survival_p"] = model.survival->p;
        if (model.survival->p_prime) report["p_prime"] = *model.survival->p_prime;
    }
    json levels = json::array();
    for (int level = 1; level <= model.depth(); ++level) {
        const LevelMatrix& m = model.level(level);
        levels.push_back(json{{"level", level},
                              {"size", m.size},
                              {"column_mass", model.column_mass(level)},
                              {"matrix", m.a}});
    }
    report["levels"] = levels;
    return report;
}

LabeledTree load_tree(const std::string& path) {
    return tree_from_json(load_json(path));
}

void save_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump() << '\n';
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    json j;
    in >> j;
    return j;
}

} // namespace treetrace
