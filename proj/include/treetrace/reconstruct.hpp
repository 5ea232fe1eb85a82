#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "treetrace/analytic.hpp"
#include "treetrace/subtrace.hpp"
#include "treetrace/topology.hpp"

namespace treetrace {

// Running per-slot sums of augmented subtrace labels over T samples. Merging
// two summaries adds sums and counts, so batches can be accumulated in
// parallel and combined in any grouping.
struct TraceBatchSummary {
    std::vector<std::vector<double>> sums;
    std::uint64_t count = 0;

    static TraceBatchSummary zero(const Topology& shape);
    // A degenerate one-sample summary whose means equal the given vectors;
    // handy for feeding exact expectations through the estimators.
    static TraceBatchSummary from_means(std::vector<std::vector<double>> means);

    void accumulate(const AugmentedSubtrace& sub);
    void merge(const TraceBatchSummary& other);
    std::vector<std::vector<double>> means() const;
};

// Where two candidate labelings can be told apart: the minimal level at
// which they differ, and the output slot where their expected subtraces are
// farthest apart.
struct CandidatePair {
    int level = 0;                 // minimal differing level
    std::size_t index = 0;         // discriminating slot on that level
    std::vector<std::int8_t> diff; // first labels minus second, on that level
    double gap = 0.0;              // |expected difference| at (level, index)
};

// Throws if the candidates are identical. Ties in the gap break toward the
// smallest slot index.
CandidatePair discriminator(const LabeledTree& first, const LabeledTree& second,
                            const TransitionModel& model);

// True iff the empirical mean at the discriminating slot is strictly closer
// to the expectation under `first` than under `second`.
bool beats(const LabeledTree& first, const LabeledTree& second, const TraceBatchSummary& summary,
           const TransitionModel& model);

struct ExhaustiveOptions {
    std::size_t max_nodes = 12; // pairwise scan is 2^(2n); raiseable to 16
};

struct ExhaustiveResult {
    bool ok = false;
    std::optional<LabeledTree> tree; // set iff ok

    const char* status() const { return ok ? "ok" : "no_unique_winner"; }
};

// Scans every labeling of the topology for one that beats all others; at
// most one such labeling can exist. Absence is reported explicitly rather
// than answered arbitrarily.
ExhaustiveResult reconstruct_exhaustive(const TraceBatchSummary& summary, const Topology& topo,
                                        const TransitionModel& model,
                                        const ExhaustiveOptions& options = {});

struct LevelSolveResult {
    LabeledTree tree;
    std::vector<std::vector<double>> raw; // pre-rounding per-level solutions
};

// Per level, solves M_l * b = mean by back-substitution (the matrices are
// triangular with positive diagonal under any order extending digitwise
// dominance), then rounds at 0.5 with ties to 0.
LevelSolveResult reconstruct_level_solve(const TraceBatchSummary& summary,
                                         const TransitionModel& model);

// Smallest T with 2^n * exp(-T * gap^2 / 2) <= delta, the union-plus-Chernoff
// sample budget for separating all candidate pairs at the given gap.
std::uint64_t plan_sample_size(std::uint64_t n, double gap, double delta);

// Numerical evaluation of both sides of the modulus inequality behind the
// gap bound: lhs is the |w*|-weighted L1 mass of the expectation differences,
// rhs the survival prefactor times |B(z*)| at the grid maximizer z* of the
// difference polynomial. lhs >= rhs holds identically; entries of z_star and
// w_star are in digit-slot order.
struct ModulusDiagnostic {
    std::vector<std::complex<double>> z_star;
    std::vector<std::complex<double>> w_star;
    double b_modulus = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
};

ModulusDiagnostic modulus_bound_diagnostic(const CandidatePair& pair, const TransitionModel& model,
                                           int grid);

} // namespace treetrace
