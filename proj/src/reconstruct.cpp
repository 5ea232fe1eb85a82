#include "treetrace/reconstruct.hpp"

#include <cmath>
#include <stdexcept>

namespace treetrace {

TraceBatchSummary TraceBatchSummary::zero(const Topology& shape) {
    TraceBatchSummary summary;
    summary.sums.resize(static_cast<std::size_t>(shape.depth()));
    for (int level = 1; level <= shape.depth(); ++level) {
        summary.sums[static_cast<std::size_t>(level - 1)].assign(shape.level_size(level), 0.0);
    }
    return summary;
}

TraceBatchSummary TraceBatchSummary::from_means(std::vector<std::vector<double>> means) {
    TraceBatchSummary summary;
    summary.sums = std::move(means);
    summary.count = 1;
    return summary;
}

void TraceBatchSummary::accumulate(const AugmentedSubtrace& sub) {
    if (sub.levels.size() != sums.size()) {
        throw std::invalid_argument("summary: level count mismatch");
    }
    for (std::size_t level = 0; level < sums.size(); ++level) {
        auto& dst = sums[level];
        const auto& src = sub.levels[level];
        if (src.size() != dst.size()) throw std::invalid_argument("summary: level size mismatch");
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }
    ++count;
}

void TraceBatchSummary::merge(const TraceBatchSummary& other) {
    if (other.sums.size() != sums.size()) {
        throw std::invalid_argument("summary: level count mismatch");
    }
    for (std::size_t level = 0; level < sums.size(); ++level) {
        auto& dst = sums[level];
        const auto& src = other.sums[level];
        if (src.size() != dst.size()) throw std::invalid_argument("summary: level size mismatch");
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }
    count += other.count;
}

std::vector<std::vector<double>> TraceBatchSummary::means() const {
    if (count == 0) throw std::logic_error("summary: no samples accumulated");
    auto out = sums;
    const double scale = 1.0 / static_cast<double>(count);
    for (auto& level : out) {
        for (double& v : level) v *= scale;
    }
    return out;
}

namespace {

void check_candidates(const LabeledTree& first, const LabeledTree& second,
                      const TransitionModel& model) {
    if (!(first.topology == model.topology) || !(second.topology == model.topology)) {
        throw std::invalid_argument("candidates must live on the model topology");
    }
    if (first.labels == second.labels) {
        throw std::invalid_argument("candidates are identical");
    }
}

int minimal_differing_level(const LabeledTree& first, const LabeledTree& second) {
    const Topology& topo = first.topology;
    for (int level = 1; level <= topo.depth(); ++level) {
        const std::size_t offset = topo.level_offset(level) - 1;
        for (std::size_t i = 0; i < topo.level_size(level); ++i) {
            if (first.labels[offset + i] != second.labels[offset + i]) return level;
        }
    }
    return 0;
}

} // namespace

CandidatePair discriminator(const LabeledTree& first, const LabeledTree& second,
                            const TransitionModel& model) {
    check_candidates(first, second, model);

    CandidatePair pair;
    pair.level = minimal_differing_level(first, second);

    const Topology& topo = model.topology;
    const std::size_t offset = topo.level_offset(pair.level) - 1;
    const std::size_t size = topo.level_size(pair.level);
    pair.diff.resize(size);
    for (std::size_t i = 0; i < size; ++i) {
        pair.diff[i] = static_cast<std::int8_t>(static_cast<int>(first.labels[offset + i]) -
                                                static_cast<int>(second.labels[offset + i]));
    }

    // Expected-difference vector M * diff; the matrix is triangular, so only
    // columns at or above each row contribute.
    const LevelMatrix& m = model.level(pair.level);
    for (std::size_t j = 0; j < size; ++j) {
        double value = 0.0;
        for (std::size_t i = j; i < size; ++i) {
            if (pair.diff[i] != 0) value += m.at(j, i) * static_cast<double>(pair.diff[i]);
        }
        if (std::abs(value) > pair.gap) {
            pair.gap = std::abs(value);
            pair.index = j;
        }
    }
    return pair;
}

bool beats(const LabeledTree& first, const LabeledTree& second, const TraceBatchSummary& summary,
           const TransitionModel& model) {
    if (summary.count == 0) throw std::logic_error("beats: empty summary");
    const CandidatePair pair = discriminator(first, second, model);

    const LevelMatrix& m = model.level(pair.level);
    const std::size_t offset = model.topology.level_offset(pair.level) - 1;
    double e_first = 0.0, e_second = 0.0;
    for (std::size_t i = pair.index; i < m.size; ++i) {
        e_first += m.at(pair.index, i) * static_cast<double>(first.labels[offset + i]);
        e_second += m.at(pair.index, i) * static_cast<double>(second.labels[offset + i]);
    }

    const double mean = summary.sums[static_cast<std::size_t>(pair.level - 1)][pair.index] /
                        static_cast<double>(summary.count);
    return std::abs(mean - e_first) < std::abs(mean - e_second);
}

ExhaustiveResult reconstruct_exhaustive(const TraceBatchSummary& summary, const Topology& topo,
                                        const TransitionModel& model,
                                        const ExhaustiveOptions& options) {
    if (!(topo == model.topology)) {
        throw std::invalid_argument("reconstruct: topology must match the model");
    }
    if (summary.count == 0) throw std::logic_error("reconstruct: empty summary");
    const std::size_t n = topo.non_root_count();
    if (n > 16) throw std::invalid_argument("reconstruct: exhaustive scan is capped at 16 nodes");
    if (n > options.max_nodes) {
        throw std::invalid_argument("reconstruct: candidate count exceeds the configured cap");
    }

    const int d = topo.depth();
    const auto means = summary.means();

    // Flattened per-candidate expectations, so each pairwise test is a table
    // lookup plus an argmax over one level.
    const std::uint64_t candidates = std::uint64_t{1} << n;
    std::vector<std::vector<double>> expectation(candidates);
    std::vector<std::uint8_t> labels(n);
    for (std::uint64_t c = 0; c < candidates; ++c) {
        for (std::size_t i = 0; i < n; ++i) labels[i] = (c >> i) & 1;
        auto& flat = expectation[c];
        flat.assign(n, 0.0);
        for (int level = 1; level <= d; ++level) {
            const LevelMatrix& m = model.level(level);
            const std::size_t offset = topo.level_offset(level) - 1;
            for (std::size_t i = 0; i < m.size; ++i) {
                if (!labels[offset + i]) continue;
                for (std::size_t j = 0; j <= i; ++j) flat[offset + j] += m.at(j, i);
            }
        }
    }

    const auto beats_cached = [&](std::uint64_t a, std::uint64_t b) {
        // Minimal differing level, then the slot with the widest expectation
        // gap on it.
        const std::uint64_t differing = a ^ b;
        int level = 1;
        while (((differing >> (topo.level_offset(level) - 1)) &
                ((std::uint64_t{1} << topo.level_size(level)) - 1)) == 0) {
            ++level;
        }
        const std::size_t offset = topo.level_offset(level) - 1;
        const std::size_t size = topo.level_size(level);
        std::size_t best = 0;
        double best_gap = -1.0;
        for (std::size_t j = 0; j < size; ++j) {
            const double gap = std::abs(expectation[a][offset + j] - expectation[b][offset + j]);
            if (gap > best_gap) {
                best_gap = gap;
                best = j;
            }
        }
        const double mean = means[static_cast<std::size_t>(level - 1)][best];
        return std::abs(mean - expectation[a][offset + best]) <
               std::abs(mean - expectation[b][offset + best]);
    };

    // At most one candidate can beat all others (two such candidates would
    // have to beat each other both ways), so the first hit is the answer.
    for (std::uint64_t c = 0; c < candidates; ++c) {
        bool wins = true;
        for (std::uint64_t other = 0; other < candidates && wins; ++other) {
            if (other != c) wins = beats_cached(c, other);
        }
        if (wins) {
            for (std::size_t i = 0; i < n; ++i) labels[i] = (c >> i) & 1;
            ExhaustiveResult result;
            result.ok = true;
            result.tree.emplace(topo, labels);
            return result;
        }
    }
    return {};
}

LevelSolveResult reconstruct_level_solve(const TraceBatchSummary& summary,
                                         const TransitionModel& model) {
    if (summary.count == 0) throw std::logic_error("reconstruct: empty summary");
    const Topology& topo = model.topology;
    const auto means = summary.means();
    if (means.size() != static_cast<std::size_t>(topo.depth())) {
        throw std::invalid_argument("reconstruct: summary shape mismatch");
    }

    std::vector<std::vector<double>> raw(means.size());
    std::vector<std::uint8_t> labels(topo.non_root_count());
    for (int level = 1; level <= topo.depth(); ++level) {
        const LevelMatrix& m = model.level(level);
        const auto& mean = means[static_cast<std::size_t>(level - 1)];
        if (mean.size() != m.size) throw std::invalid_argument("reconstruct: summary shape mismatch");

        // Back-substitution in decreasing slot order, a linear extension of
        // digitwise dominance.
        auto& x = raw[static_cast<std::size_t>(level - 1)];
        x.assign(m.size, 0.0);
        for (std::size_t i = m.size; i-- > 0;) {
            double value = mean[i];
            for (std::size_t k = i + 1; k < m.size; ++k) value -= m.at(i, k) * x[k];
            const double diagonal = m.at(i, i);
            if (!(diagonal > 0.0)) throw std::logic_error("reconstruct: singular diagonal");
            x[i] = value / diagonal;
        }

        const std::size_t offset = topo.level_offset(level) - 1;
        for (std::size_t i = 0; i < m.size; ++i) {
            labels[offset + i] = x[i] > 0.5 ? 1 : 0;
        }
    }
    return {LabeledTree(topo, std::move(labels)), std::move(raw)};
}

std::uint64_t plan_sample_size(std::uint64_t n, double gap, double delta) {
    if (!(gap > 0.0 && gap <= 1.0)) throw std::invalid_argument("planner: gap must lie in (0,1]");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("planner: delta must lie in (0,1)");
    const double needed =
        2.0 * (static_cast<double>(n) * std::log(2.0) + std::log(1.0 / delta)) / (gap * gap);
    return needed <= 0.0 ? 0 : static_cast<std::uint64_t>(std::ceil(needed));
}

ModulusDiagnostic modulus_bound_diagnostic(const CandidatePair& pair, const TransitionModel& model,
                                           int grid) {
    const Topology& topo = model.topology;
    const auto& arities = topo.level_arities();
    const int level = pair.level;
    const std::size_t size = topo.level_size(level);
    if (pair.diff.size() != size) throw std::invalid_argument("diagnostic: diff size mismatch");

    // Grid maximizer of the difference polynomial B over the torus.
    std::vector<double> coeffs(size);
    for (std::size_t i = 0; i < size; ++i) coeffs[i] = static_cast<double>(pair.diff[i]);
    std::vector<std::size_t> shape(arities.begin(), arities.begin() + level);
    const TorusGridMax b = torus_grid_argmax(coeffs, shape, grid);

    ModulusDiagnostic diag;
    diag.z_star = b.point;
    diag.b_modulus = b.value;

    // w* per digit slot: the z* pulled back through z = (1-beta) w + beta.
    const int d = model.depth();
    diag.w_star.resize(static_cast<std::size_t>(level));
    std::vector<std::vector<double>> weight(static_cast<std::size_t>(level));
    for (int s = 0; s < level; ++s) {
        const double beta = model.config.model == DeletionModel::TED
                                ? model.survival->p[static_cast<std::size_t>(d - 1 - s)]
                                : model.config.q;
        diag.w_star[static_cast<std::size_t>(s)] =
            (b.point[static_cast<std::size_t>(s)] - beta) / (1.0 - beta);
        auto& powers = weight[static_cast<std::size_t>(s)];
        powers.resize(static_cast<std::size_t>(arities[static_cast<std::size_t>(s)]));
        const double mag = std::abs(diag.w_star[static_cast<std::size_t>(s)]);
        double acc = 1.0;
        for (auto& p : powers) {
            p = acc;
            acc *= mag;
        }
    }

    // lhs: sum_j |(M diff)_j| * prod_s |w*_s|^(j_s).
    const LevelMatrix& m = model.level(level);
    std::vector<int> dig(static_cast<std::size_t>(level), 0);
    for (std::size_t j = 0; j < size; ++j) {
        double value = 0.0;
        for (std::size_t i = j; i < size; ++i) {
            if (pair.diff[i] != 0) value += m.at(j, i) * static_cast<double>(pair.diff[i]);
        }
        double factor = std::abs(value);
        for (int s = 0; s < level; ++s) {
            factor *= weight[static_cast<std::size_t>(s)]
                            [static_cast<std::size_t>(dig[static_cast<std::size_t>(s)])];
        }
        diag.lhs += factor;

        int s = level - 1;
        while (s >= 0 && dig[static_cast<std::size_t>(s)] + 1 == arities[static_cast<std::size_t>(s)]) {
            dig[static_cast<std::size_t>(s)] = 0;
            --s;
        }
        if (s >= 0) ++dig[static_cast<std::size_t>(s)];
    }

    diag.rhs = model.column_mass(level) * diag.b_modulus;
    return diag;
}

} // namespace treetrace
