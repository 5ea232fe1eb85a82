#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "treetrace/channels.hpp"
#include "treetrace/topology.hpp"

namespace treetrace {

// p[h] is the probability that the subtree rooted at a height-h node keeps no
// root-to-leaf path after a TED pass: p[0] = q and
// p[h+1] = q + (1-q) * p[h]^k(h), where k(h) is the arity of the level whose
// nodes have height h+1.
struct SurvivalTable {
    double q = 0.0;
    std::vector<double> p;              // indexed by height, size = depth
    std::optional<double> p_prime;      // uniform upper bound, when computed

    int depth() const { return static_cast<int>(p.size()); }
};

SurvivalTable survival_recurrence(double q, const std::vector<int>& level_arities);
SurvivalTable survival_recurrence(double q, int k, int depth);

// Unique root in (0,1) of 1 + p + ... + p^c = 1/(1-q), found by bisection to
// 1e-12. Every p[h] stays below this value whenever q < c/(c+1) and all
// arities exceed c. Throws if the hypothesis is violated.
double solve_p_prime(int c, double q);

// Probability that a fixed level-l node appears in the augmented subtrace:
// (1-q)^(l-1) * (1 - p[d-l]).
double node_survival_prob(int level, const SurvivalTable& table);

// P(slot j of the augmented subtrace holds the original level-l node i).
// Zero unless j <= i digitwise; otherwise a product over digits of
// binom(i_s, j_s) * p^(i_s - j_s) * (1-p)^(j_s) at the digit's height, times
// the node survival prefactor.
double transition_prob_ted(const NodeAddress& i, const NodeAddress& j, const SurvivalTable& table);

// AON analogue on augmented traces: prefactor (1-q)^l and per-digit kernel
// binom(i_s, j_s) * q^(i_s - j_s) * (1-q)^(j_s).
double transition_prob_aon(const NodeAddress& i, const NodeAddress& j, double q);

// Dense per-level matrix, row = output slot, column = original position.
struct LevelMatrix {
    std::size_t size = 0;
    std::vector<double> a; // row-major, size*size

    double& at(std::size_t row, std::size_t col) { return a[row * size + col]; }
    double at(std::size_t row, std::size_t col) const { return a[row * size + col]; }
};

// The per-level linear maps from original labels to expected augmented
// subtrace labels: E[Z_l] = M_l * b_l.
struct TransitionModel {
    ChannelConfig config;
    Topology topology;                    // reference shape, level-regular
    std::optional<SurvivalTable> survival; // present for TED
    std::vector<LevelMatrix> levels;       // levels[l-1] is M_l

    const LevelMatrix& level(int l) const { return levels[static_cast<std::size_t>(l - 1)]; }
    int depth() const { return static_cast<int>(levels.size()); }

    // Column sum of M_l, equal for every column: the survival probability of
    // a level-l node in the augmented output.
    double column_mass(int level) const;
};

struct ModelOptions {
    std::size_t max_matrix_entries = 1'000'000; // per-level cap on size^2
};

// Requires a level-regular reference shape (for AON, the k_max-regularized
// one) with arities at most 64.
TransitionModel build_transition_model(const Topology& topo, const ChannelConfig& cfg,
                                       const ModelOptions& options = {});

// E[Z_l] = M_l * b_l for every level; tree shape must equal the model shape.
std::vector<std::vector<double>> expected_subtrace(const LabeledTree& tree,
                                                   const TransitionModel& model);

// Value of the level generating function A(w) = sum_i a_i * prod_m w_m^(t_m),
// where t_m are the mixed-radix digits of i (m = 0 is the node's own sibling
// position) and digit m of a level-l index has radix arities[l-1-m].
// `arities` lists the arities of levels 0..l-1 and values.size() must equal
// their product.
std::complex<double> eval_genfun(std::span<const double> level_values,
                                 std::span<const std::complex<double>> w,
                                 std::span<const int> arities);

// Closed form for E[A_l(w)] given the original labels: the prefactored sum
// sum_i b_i * prod_m (alpha_m w_m + beta_m)^(i_m) with beta the per-digit
// no-show probability (p at the digit height for TED, q for AON).
std::complex<double> genfun_expectation(const LabeledTree& tree, int level,
                                        std::span<const std::complex<double>> w,
                                        const TransitionModel& model);

// Maximum of |F| over the grid^L torus lattice for a dense coefficient tensor
// of the given shape (row-major, shape[s] = degree_s + 1). A lower bound on
// the true supremum over the torus; resolution is the caller's trade-off.
struct TorusGridMax {
    double value = 0.0;
    std::vector<std::complex<double>> point; // one root of unity per variable
};

TorusGridMax torus_grid_argmax(std::span<const double> coeffs,
                               std::span<const std::size_t> shape, int grid);

// Same search for a polynomial with coefficients in {-1,0,1}; such a
// polynomial has sup-modulus at least 1 on the torus, so the returned lower
// bound approaches or exceeds 1 as the grid refines. Throws if all
// coefficients are zero.
double littlewood_grid_max(std::span<const std::int8_t> coeffs,
                           std::span<const std::size_t> shape, int grid);

// Exact binomial coefficient for n <= 64.
std::uint64_t binomial(int n, int k);

} // namespace treetrace
