#include "treetrace/analytic.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace treetrace {

namespace {

double ipow(double base, int exponent) {
    double value = 1.0;
    for (int i = 0; i < exponent; ++i) value *= base;
    return value;
}

std::complex<double> cpow_int(std::complex<double> base, int exponent) {
    std::complex<double> value = 1.0;
    for (int i = 0; i < exponent; ++i) value *= base;
    return value;
}

void check_level(int level, int depth, const char* what) {
    if (level < 1 || level > depth) {
        throw std::out_of_range(std::string(what) + ": level out of range");
    }
}

// Per-digit kernel factor table for one digit slot: entry (i,j) is the
// probability that exactly i-j of the i left siblings drop out and the j
// survivors keep their order, binom(i,j) * beta^(i-j) * (1-beta)^j.
std::vector<double> digit_factor_table(int radix, double beta) {
    std::vector<double> table(static_cast<std::size_t>(radix) * static_cast<std::size_t>(radix), 0.0);
    for (int i = 0; i < radix; ++i) {
        for (int j = 0; j <= i; ++j) {
            table[static_cast<std::size_t>(i) * static_cast<std::size_t>(radix) +
                  static_cast<std::size_t>(j)] =
                static_cast<double>(binomial(i, j)) * ipow(beta, i - j) * ipow(1.0 - beta, j);
        }
    }
    return table;
}

// beta[s] = probability that a left sibling of the ancestor at level s+1
// contributes nothing to the output.
std::vector<double> digit_betas(int level, int depth, const ChannelConfig& cfg,
                                const std::optional<SurvivalTable>& survival) {
    std::vector<double> betas(static_cast<std::size_t>(level));
    for (int s = 0; s < level; ++s) {
        betas[static_cast<std::size_t>(s)] =
            cfg.model == DeletionModel::TED ? survival->p[static_cast<std::size_t>(depth - 1 - s)]
                                            : cfg.q;
    }
    return betas;
}

double survival_prefactor(int level, const ChannelConfig& cfg,
                          const std::optional<SurvivalTable>& survival) {
    if (cfg.model == DeletionModel::TED) {
        return node_survival_prob(level, *survival);
    }
    return ipow(1.0 - cfg.q, level);
}

} // namespace

std::uint64_t binomial(int n, int k) {
    constexpr int kMax = 64;
    if (n < 0 || n > kMax) throw std::out_of_range("binomial: n must lie in [0,64]");
    static const auto table = [] {
        std::array<std::array<std::uint64_t, kMax + 1>, kMax + 1> t{};
        for (int row = 0; row <= kMax; ++row) {
            t[row][0] = 1;
            for (int col = 1; col <= row; ++col) {
                t[row][col] = t[row - 1][col - 1] + (col <= row - 1 ? t[row - 1][col] : 0);
            }
        }
        return t;
    }();
    if (k < 0 || k > n) return 0;
    return table[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
}

SurvivalTable survival_recurrence(double q, const std::vector<int>& level_arities) {
    if (!(q >= 0.0 && q < 1.0)) throw std::invalid_argument("survival: q must lie in [0,1)");
    if (level_arities.empty()) throw std::invalid_argument("survival: depth must be >= 1");
    for (int k : level_arities) {
        if (k < 1) throw std::invalid_argument("survival: arities must be positive");
    }
    const int d = static_cast<int>(level_arities.size());

    SurvivalTable table;
    table.q = q;
    table.p.resize(static_cast<std::size_t>(d));
    table.p[0] = q;
    for (int h = 0; h + 1 < d; ++h) {
        const int k = level_arities[static_cast<std::size_t>(d - h - 1)];
        table.p[static_cast<std::size_t>(h + 1)] = q + (1.0 - q) * ipow(table.p[static_cast<std::size_t>(h)], k);
    }
    return table;
}

SurvivalTable survival_recurrence(double q, int k, int depth) {
    if (depth < 1) throw std::invalid_argument("survival: depth must be >= 1");
    return survival_recurrence(q, std::vector<int>(static_cast<std::size_t>(depth), k));
}

double solve_p_prime(int c, double q) {
    if (c < 1) throw std::invalid_argument("p_prime: c must be >= 1");
    const double limit = static_cast<double>(c) / (c + 1.0);
    if (!(q > 0.0 && q < limit)) {
        throw std::invalid_argument("p_prime: requires 0 < q < c/(c+1)");
    }
    const double target = 1.0 / (1.0 - q);
    const auto f = [&](double p) {
        double sum = 1.0, power = 1.0;
        for (int m = 1; m <= c; ++m) {
            power *= p;
            sum += power;
        }
        return sum - target;
    };
    // f is strictly increasing on (0,1) with f(0) < 0 < f(1).
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double node_survival_prob(int level, const SurvivalTable& table) {
    check_level(level, table.depth(), "survival");
    return ipow(1.0 - table.q, level - 1) *
           (1.0 - table.p[static_cast<std::size_t>(table.depth() - level)]);
}

double transition_prob_ted(const NodeAddress& i, const NodeAddress& j, const SurvivalTable& table) {
    if (i.level != j.level) throw std::invalid_argument("transition: level mismatch");
    check_level(i.level, table.depth(), "transition");
    if (!digitwise_leq(j, i)) return 0.0;

    const int d = table.depth();
    double value = node_survival_prob(i.level, table);
    for (int s = 0; s < i.level; ++s) {
        const double p = table.p[static_cast<std::size_t>(d - 1 - s)];
        const int is = i.digits[static_cast<std::size_t>(s)];
        const int js = j.digits[static_cast<std::size_t>(s)];
        value *= static_cast<double>(binomial(is, js)) * ipow(p, is - js) * ipow(1.0 - p, js);
    }
    return value;
}

double transition_prob_aon(const NodeAddress& i, const NodeAddress& j, double q) {
    if (i.level != j.level) throw std::invalid_argument("transition: level mismatch");
    if (!(q >= 0.0 && q < 1.0)) throw std::invalid_argument("transition: q must lie in [0,1)");
    if (!digitwise_leq(j, i)) return 0.0;

    double value = ipow(1.0 - q, i.level);
    for (int s = 0; s < i.level; ++s) {
        const int is = i.digits[static_cast<std::size_t>(s)];
        const int js = j.digits[static_cast<std::size_t>(s)];
        value *= static_cast<double>(binomial(is, js)) * ipow(q, is - js) * ipow(1.0 - q, js);
    }
    return value;
}

double TransitionModel::column_mass(int level) const {
    check_level(level, depth(), "model");
    return survival_prefactor(level, config, survival);
}

TransitionModel build_transition_model(const Topology& topo, const ChannelConfig& cfg,
                                       const ModelOptions& options) {
    validate(cfg);
    if (!topo.is_level_regular()) {
        throw std::invalid_argument("model: reference topology must be level-regular");
    }
    const auto& arities = topo.level_arities();
    for (int k : arities) {
        if (k > 64) throw std::invalid_argument("model: arities above 64 are not supported");
    }

    TransitionModel model{cfg, topo, std::nullopt, {}};
    if (cfg.model == DeletionModel::TED) {
        model.survival = survival_recurrence(cfg.q, arities);
    }

    const int d = topo.depth();
    model.levels.resize(static_cast<std::size_t>(d));
    for (int level = 1; level <= d; ++level) {
        const std::size_t size = topo.level_size(level);
        if (size * size > options.max_matrix_entries) {
            throw std::invalid_argument("model: level " + std::to_string(level) + " needs " +
                                        std::to_string(size * size) +
                                        " matrix entries, above the configured cap of " +
                                        std::to_string(options.max_matrix_entries));
        }
        LevelMatrix& m = model.levels[static_cast<std::size_t>(level - 1)];
        m.size = size;
        m.a.assign(size * size, 0.0);

        const double pref = survival_prefactor(level, cfg, model.survival);
        const auto betas = digit_betas(level, d, cfg, model.survival);
        std::vector<std::vector<double>> factors(static_cast<std::size_t>(level));
        for (int s = 0; s < level; ++s) {
            factors[static_cast<std::size_t>(s)] =
                digit_factor_table(arities[static_cast<std::size_t>(s)], betas[static_cast<std::size_t>(s)]);
        }

        // Column odometer over the digits of i; for each i enumerate all
        // digitwise-dominated j.
        std::vector<int> idig(static_cast<std::size_t>(level), 0);
        for (std::size_t i = 0; i < size; ++i) {
            std::vector<int> jdig(static_cast<std::size_t>(level), 0);
            while (true) {
                std::size_t j = 0;
                double value = pref;
                for (int s = 0; s < level; ++s) {
                    const auto radix = static_cast<std::size_t>(arities[static_cast<std::size_t>(s)]);
                    j = j * radix + static_cast<std::size_t>(jdig[static_cast<std::size_t>(s)]);
                    value *= factors[static_cast<std::size_t>(s)]
                                    [static_cast<std::size_t>(idig[static_cast<std::size_t>(s)]) * radix +
                                     static_cast<std::size_t>(jdig[static_cast<std::size_t>(s)])];
                }
                m.at(j, i) = value;

                int s = level - 1;
                while (s >= 0 && jdig[static_cast<std::size_t>(s)] == idig[static_cast<std::size_t>(s)]) {
                    jdig[static_cast<std::size_t>(s)] = 0;
                    --s;
                }
                if (s < 0) break;
                ++jdig[static_cast<std::size_t>(s)];
            }

            int s = level - 1;
            while (s >= 0 &&
                   idig[static_cast<std::size_t>(s)] + 1 == arities[static_cast<std::size_t>(s)]) {
                idig[static_cast<std::size_t>(s)] = 0;
                --s;
            }
            if (s >= 0) ++idig[static_cast<std::size_t>(s)];
        }
    }
    return model;
}

std::vector<std::vector<double>> expected_subtrace(const LabeledTree& tree,
                                                   const TransitionModel& model) {
    if (!(tree.topology == model.topology)) {
        throw std::invalid_argument("expectation: tree shape must match the model shape");
    }
    std::vector<std::vector<double>> out(static_cast<std::size_t>(model.depth()));
    for (int level = 1; level <= model.depth(); ++level) {
        const LevelMatrix& m = model.level(level);
        const std::size_t offset = tree.topology.level_offset(level) - 1;
        auto& row = out[static_cast<std::size_t>(level - 1)];
        row.assign(m.size, 0.0);
        for (std::size_t i = 0; i < m.size; ++i) {
            if (!tree.labels[offset + i]) continue;
            for (std::size_t j = 0; j <= i; ++j) {
                row[j] += m.at(j, i);
            }
        }
    }
    return out;
}

std::complex<double> eval_genfun(std::span<const double> level_values,
                                 std::span<const std::complex<double>> w,
                                 std::span<const int> arities) {
    const auto L = arities.size();
    if (w.size() != L) throw std::invalid_argument("genfun: one variable per digit required");
    std::size_t expected = 1;
    for (int k : arities) expected *= static_cast<std::size_t>(k);
    if (level_values.size() != expected) {
        throw std::invalid_argument("genfun: value count must match the level size");
    }

    // Power table per digit slot; slot s pairs with variable w[L-1-s].
    std::vector<std::vector<std::complex<double>>> powers(L);
    for (std::size_t s = 0; s < L; ++s) {
        const auto radix = static_cast<std::size_t>(arities[s]);
        powers[s].resize(radix);
        for (std::size_t t = 0; t < radix; ++t) {
            powers[s][t] = cpow_int(w[L - 1 - s], static_cast<int>(t));
        }
    }

    std::complex<double> sum = 0.0;
    std::vector<std::size_t> dig(L, 0);
    for (std::size_t i = 0; i < level_values.size(); ++i) {
        std::complex<double> term = level_values[i];
        for (std::size_t s = 0; s < L; ++s) term *= powers[s][dig[s]];
        sum += term;

        std::size_t s = L;
        while (s-- > 0) {
            if (++dig[s] < static_cast<std::size_t>(arities[s])) break;
            dig[s] = 0;
        }
    }
    return sum;
}

std::complex<double> genfun_expectation(const LabeledTree& tree, int level,
                                        std::span<const std::complex<double>> w,
                                        const TransitionModel& model) {
    if (!(tree.topology == model.topology)) {
        throw std::invalid_argument("genfun: tree shape must match the model shape");
    }
    check_level(level, model.depth(), "genfun");
    if (w.size() != static_cast<std::size_t>(level)) {
        throw std::invalid_argument("genfun: one variable per digit required");
    }
    const auto& arities = model.topology.level_arities();
    const auto betas = digit_betas(level, model.depth(), model.config, model.survival);

    // (alpha_s w + beta_s)^digit per slot; slot s pairs with w[level-1-s].
    std::vector<std::vector<std::complex<double>>> powers(static_cast<std::size_t>(level));
    for (int s = 0; s < level; ++s) {
        const double beta = betas[static_cast<std::size_t>(s)];
        const std::complex<double> base =
            (1.0 - beta) * w[static_cast<std::size_t>(level - 1 - s)] + beta;
        const auto radix = static_cast<std::size_t>(arities[static_cast<std::size_t>(s)]);
        auto& col = powers[static_cast<std::size_t>(s)];
        col.resize(radix);
        for (std::size_t t = 0; t < radix; ++t) col[t] = cpow_int(base, static_cast<int>(t));
    }

    const std::size_t size = model.topology.level_size(level);
    const std::size_t offset = model.topology.level_offset(level) - 1;
    std::complex<double> sum = 0.0;
    std::vector<std::size_t> dig(static_cast<std::size_t>(level), 0);
    for (std::size_t i = 0; i < size; ++i) {
        if (tree.labels[offset + i]) {
            std::complex<double> term = 1.0;
            for (int s = 0; s < level; ++s) {
                term *= powers[static_cast<std::size_t>(s)][dig[static_cast<std::size_t>(s)]];
            }
            sum += term;
        }
        std::size_t s = static_cast<std::size_t>(level);
        while (s-- > 0) {
            if (++dig[s] < static_cast<std::size_t>(arities[s])) break;
            dig[s] = 0;
        }
    }
    return survival_prefactor(level, model.config, model.survival) * sum;
}

TorusGridMax torus_grid_argmax(std::span<const double> coeffs,
                               std::span<const std::size_t> shape, int grid) {
    if (grid < 1) throw std::invalid_argument("torus: grid must be >= 1");
    if (shape.empty()) throw std::invalid_argument("torus: at least one variable required");
    std::size_t expected = 1;
    double points = 1.0;
    for (std::size_t n : shape) {
        if (n == 0) throw std::invalid_argument("torus: empty shape axis");
        expected *= n;
        points *= grid;
    }
    if (coeffs.size() != expected) throw std::invalid_argument("torus: coefficient count mismatch");
    if (points > 1e8) throw std::invalid_argument("torus: grid too fine for this many variables");

    const auto g = static_cast<std::size_t>(grid);
    std::vector<std::complex<double>> roots(g);
    for (std::size_t i = 0; i < g; ++i) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(grid);
        roots[i] = {std::cos(angle), std::sin(angle)};
    }

    // Contract one variable at a time, innermost axis first; grid axes
    // accumulate behind the remaining coefficient axes, so the final layout
    // is row-major over (g_0, ..., g_{L-1}).
    const std::size_t L = shape.size();
    std::vector<std::complex<double>> cur(coeffs.begin(), coeffs.end());
    std::vector<std::complex<double>> next;
    std::size_t block = 1;
    for (std::size_t s = L; s-- > 0;) {
        std::size_t prefix = 1;
        for (std::size_t t = 0; t < s; ++t) prefix *= shape[t];
        const std::size_t n = shape[s];
        next.assign(prefix * g * block, 0.0);
        for (std::size_t p = 0; p < prefix; ++p) {
            for (std::size_t gi = 0; gi < g; ++gi) {
                const std::complex<double> z = roots[gi];
                for (std::size_t tail = 0; tail < block; ++tail) {
                    std::complex<double> acc = 0.0;
                    for (std::size_t t = n; t-- > 0;) {
                        acc = acc * z + cur[(p * n + t) * block + tail];
                    }
                    next[(p * g + gi) * block + tail] = acc;
                }
            }
        }
        cur.swap(next);
        block *= g;
    }

    TorusGridMax best;
    std::size_t best_index = 0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
        const double mag = std::abs(cur[i]);
        if (mag > best.value) {
            best.value = mag;
            best_index = i;
        }
    }
    best.point.resize(L);
    for (std::size_t s = L; s-- > 0;) {
        best.point[s] = roots[best_index % g];
        best_index /= g;
    }
    return best;
}

double littlewood_grid_max(std::span<const std::int8_t> coeffs,
                           std::span<const std::size_t> shape, int grid) {
    bool nonzero = false;
    std::vector<double> values(coeffs.size());
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (coeffs[i] < -1 || coeffs[i] > 1) {
            throw std::invalid_argument("littlewood: coefficients must lie in {-1,0,1}");
        }
        nonzero |= coeffs[i] != 0;
        values[i] = static_cast<double>(coeffs[i]);
    }
    if (!nonzero) throw std::invalid_argument("littlewood: all coefficients are zero");
    return torus_grid_argmax(values, shape, grid).value;
}

} // namespace treetrace
