#pragma once

#include <string>

#include <json.hpp>

#include "treetrace/analytic.hpp"
#include "treetrace/channels.hpp"
#include "treetrace/subtrace.hpp"

namespace treetrace {

using nlohmann::json;

// Tree files are {"child_counts": [...], "labels": [...]}, both arrays in
// BFS order; traces carry an extra "provenance" array. Keys are emitted in
// sorted order, so serialization is byte-stable.
json to_json(const LabeledTree& tree);
LabeledTree tree_from_json(const json& j);

json to_json(const Trace& trace, bool with_provenance = true);
Trace trace_from_json(const json& j);

json to_json(const AugmentedSubtrace& sub);
AugmentedSubtrace subtrace_from_json(const json& j);

// Survival table, per-level matrices (row-major) and, when labels are
// supplied, the expected subtrace; the payload of the `expect` command.
json model_report(const TransitionModel& model);

LabeledTree load_tree(const std::string& path);
void save_json(const json& j, const std::string& path);
json load_json(const std::string& path);

} // namespace treetrace
