#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lrfs/assignment.hpp"
#include "lrfs/errors.hpp"
#include "lrfs/gaussian.hpp"
#include "lrfs/rng.hpp"
#include "lrfs/standard_model.hpp"

namespace lrfs {

/// One outcome per score-matrix row: -1 (dead / not born), 0 (missed) or a
/// 1-based detection index.
using ExtendedAssociation = std::vector<int>;

struct AssociationHash {
    std::size_t operator()(const ExtendedAssociation& gamma) const noexcept
    {
        std::size_t h = 0xCBF29CE484222325ULL;
        for (const int v : gamma) {
            h = (h ^ static_cast<std::size_t>(v + 2)) * 0x100000001B3ULL;
        }
        return h;
    }
};

inline bool is_positive_one_to_one(std::span<const int> gamma)
{
    std::vector<int> positives;
    for (const int v : gamma) {
        if (v > 0) {
            positives.push_back(v);
        }
    }
    std::sort(positives.begin(), positives.end());
    return std::adjacent_find(positives.begin(), positives.end()) == positives.end();
}

namespace detail {

inline void require_association_shape(const Matrix& eta, std::span<const int> gamma)
{
    if (static_cast<Eigen::Index>(gamma.size()) != eta.rows()) {
        throw std::invalid_argument("association length must equal the number of score rows");
    }
    const int m = static_cast<int>(eta.cols()) - 2;
    for (const int v : gamma) {
        if (v < -1 || v > m) {
            throw std::invalid_argument("association value out of range");
        }
    }
}

}  // namespace detail

/// log ω(γ) = Σ_i log η_i(γ_i); -inf for zero-weight or invalid tuples.
inline double log_association_weight(const Matrix& eta, std::span<const int> gamma)
{
    detail::require_association_shape(eta, gamma);
    if (!is_positive_one_to_one(gamma)) {
        return -kInf;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        total += std::log(eta(static_cast<Eigen::Index>(i), gamma[i] + 1));
    }
    return total;
}

/// Row i of η with every positive outcome held by another row zeroed, normalized.
inline std::vector<double> gibbs_conditional(const Matrix& eta, std::size_t row, std::span<const int> current)
{
    detail::require_association_shape(eta, current);
    if (row >= current.size()) {
        throw std::invalid_argument("gibbs_conditional: row out of range");
    }
    const auto cols = static_cast<std::size_t>(eta.cols());
    std::vector<double> p(cols);
    for (std::size_t c = 0; c < cols; ++c) {
        p[c] = eta(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(c));
    }
    for (std::size_t k = 0; k < current.size(); ++k) {
        if (k != row && current[k] > 0) {
            p[static_cast<std::size_t>(current[k] + 1)] = 0.0;
        }
    }
    double total = 0.0;
    for (const double v : p) {
        total += v;
    }
    if (!(total > 0.0)) {
        throw NumericalError("gibbs_conditional: all outcomes have zero score");
    }
    for (double& v : p) {
        v /= total;
    }
    return p;
}

inline std::vector<double> gibbs_conditional(const ScoreMatrix& sm, std::size_t row, std::span<const int> current)
{
    return gibbs_conditional(sm.eta_matrix(), row, current);
}

/// Systematic-scan Gibbs sampler over positive 1-1 extended associations.
class GibbsChain {
public:
    GibbsChain(Matrix eta, std::uint64_t seed, ExtendedAssociation init)
        : eta_(std::move(eta)), rng_(seed), state_(std::move(init)), owner_(static_cast<std::size_t>(eta_.cols()), -1)
    {
        detail::require_association_shape(eta_, state_);
        if (!is_positive_one_to_one(state_)) {
            throw std::invalid_argument("gibbs: initial association is not positive 1-1");
        }
        for (std::size_t i = 0; i < state_.size(); ++i) {
            if (state_[i] > 0) {
                owner_[static_cast<std::size_t>(state_[i])] = static_cast<int>(i);
            }
        }
    }

    /// Resamples every row once, in order. A row whose admissible outcomes all
    /// score zero keeps its value.
    void sweep()
    {
        const auto cols = static_cast<std::size_t>(eta_.cols());
        std::vector<double> cumulative(cols);
        for (std::size_t i = 0; i < state_.size(); ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            double total = 0.0;
            for (std::size_t c = 0; c < cols; ++c) {
                const bool blocked = c >= 2 && owner_[c - 1] >= 0 && owner_[c - 1] != static_cast<int>(i);
                total += blocked ? 0.0 : eta_(r, static_cast<Eigen::Index>(c));
                cumulative[c] = total;
            }
            if (!(total > 0.0)) {
                continue;
            }
            const double u = rng_.uniform() * total;
            std::size_t pick = 0;
            while (pick + 1 < cols && !(u < cumulative[pick])) {
                ++pick;
            }
            const int value = static_cast<int>(pick) - 1;
            if (state_[i] > 0) {
                owner_[static_cast<std::size_t>(state_[i])] = -1;
            }
            state_[i] = value;
            if (value > 0) {
                owner_[static_cast<std::size_t>(value)] = static_cast<int>(i);
            }
        }
    }

    const ExtendedAssociation& state() const { return state_; }

private:
    Matrix eta_;
    CounterRng rng_;
    ExtendedAssociation state_;
    std::vector<int> owner_;  // owner_[j] = row holding detection j, or -1
};

struct WeightedAssociation {
    ExtendedAssociation gamma;
    double log_weight;
};

/// All distinct associations visited by `iterations` sweeps from `init`
/// (included), in first-visit order, with exact log weights. No burn-in.
inline std::vector<WeightedAssociation> gibbs_sample(const Matrix& eta, std::size_t iterations, std::uint64_t seed,
                                                     ExtendedAssociation init)
{
    GibbsChain chain(eta, seed, std::move(init));
    std::unordered_set<ExtendedAssociation, AssociationHash> seen;
    std::vector<WeightedAssociation> out;
    auto record = [&]() {
        if (seen.insert(chain.state()).second) {
            out.push_back({chain.state(), log_association_weight(eta, chain.state())});
        }
    };
    record();
    for (std::size_t t = 0; t < iterations; ++t) {
        chain.sweep();
        record();
    }
    return out;
}

inline std::vector<WeightedAssociation> gibbs_sample(const ScoreMatrix& sm, std::size_t iterations, std::uint64_t seed,
                                                     ExtendedAssociation init)
{
    return gibbs_sample(sm.eta_matrix(), iterations, seed, std::move(init));
}

inline std::vector<WeightedAssociation> gibbs_sample(const ScoreMatrix& sm, std::size_t iterations, std::uint64_t seed)
{
    return gibbs_sample(sm, iterations, seed, ExtendedAssociation(sm.rows(), -1));
}

/// P × (M + 2P) costs: column j-1 (j = 1..M) holds -log η_i(j), column M+i
/// holds -log η_i(0), column M+P+i holds -log η_i(-1); everything else is +inf.
inline Matrix cost_matrix(const Matrix& eta)
{
    const auto p = eta.rows();
    const auto m = eta.cols() - 2;
    Matrix cost = Matrix::Constant(p, m + 2 * p, kInf);
    auto neg_log = [](double v) { return v > 0.0 ? -std::log(v) : kInf; };
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            cost(i, j) = neg_log(eta(i, j + 2));
        }
        cost(i, m + i) = neg_log(eta(i, 1));
        cost(i, m + p + i) = neg_log(eta(i, 0));
    }
    return cost;
}

inline Matrix cost_matrix(const ScoreMatrix& sm) { return cost_matrix(sm.eta_matrix()); }

struct RankedAssociation {
    ExtendedAssociation gamma;
    double cost;
};

namespace detail {

inline ExtendedAssociation association_from_columns(std::span<const int> cols, Eigen::Index m)
{
    ExtendedAssociation gamma(cols.size());
    const auto p = static_cast<Eigen::Index>(cols.size());
    for (std::size_t i = 0; i < cols.size(); ++i) {
        const Eigen::Index c = cols[i];
        gamma[i] = c < m ? static_cast<int>(c + 1) : (c < m + p ? 0 : -1);
    }
    return gamma;
}

}  // namespace detail

/// The K lowest-cost assignments (Murty's partitioning), ordered by cost, ties
/// by lexicographic γ. Returns fewer when fewer are feasible.
inline std::vector<RankedAssociation> murty_kbest(const Matrix& cost, std::size_t k)
{
    const auto p = cost.rows();
    const auto cols = cost.cols();
    if (cols < 2 * p || (cols - 2 * p) < 0) {
        throw std::invalid_argument("murty_kbest: cost matrix must be P × (M + 2P)");
    }
    const auto m = cols - 2 * p;
    std::vector<RankedAssociation> out;
    if (k == 0) {
        return out;
    }
    if (p == 0) {
        out.push_back({{}, 0.0});
        return out;
    }

    struct Node {
        double cost;
        ExtendedAssociation gamma;
        std::vector<int> columns;
        Eigen::Index forced;  // rows [0, forced) fixed to `columns`
        std::vector<std::pair<Eigen::Index, Eigen::Index>> excluded;
    };
    auto worse = [](const Node& a, const Node& b) {
        if (a.cost != b.cost) {
            return a.cost > b.cost;
        }
        return a.gamma > b.gamma;
    };
    std::priority_queue<Node, std::vector<Node>, decltype(worse)> queue(worse);

    auto solve = [&](const std::vector<int>& fixed_columns, Eigen::Index forced,
                     const std::vector<std::pair<Eigen::Index, Eigen::Index>>& excluded) -> std::optional<Node> {
        Matrix constrained = cost;
        for (Eigen::Index r = 0; r < forced; ++r) {
            const Eigen::Index c = fixed_columns[static_cast<std::size_t>(r)];
            const double keep = cost(r, c);
            constrained.row(r).setConstant(kInf);
            constrained.col(c).setConstant(kInf);
            constrained(r, c) = keep;
        }
        for (const auto& [r, c] : excluded) {
            constrained(r, c) = kInf;
        }
        const auto solution = solve_assignment(constrained);
        if (!solution) {
            return std::nullopt;
        }
        Node node{0.0, {}, solution->column_of_row, forced, excluded};
        for (Eigen::Index r = 0; r < p; ++r) {
            node.cost += cost(r, node.columns[static_cast<std::size_t>(r)]);
        }
        node.gamma = detail::association_from_columns(node.columns, m);
        return node;
    };

    if (auto root = solve({}, 0, {})) {
        queue.push(std::move(*root));
    }
    while (!queue.empty() && out.size() < k) {
        Node best = queue.top();
        queue.pop();
        out.push_back({best.gamma, best.cost});
        for (Eigen::Index i = best.forced; i < p; ++i) {
            auto excluded = best.excluded;
            excluded.emplace_back(i, best.columns[static_cast<std::size_t>(i)]);
            if (auto child = solve(best.columns, i, excluded)) {
                queue.push(std::move(*child));
            }
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const RankedAssociation& a, const RankedAssociation& b) {
        return a.cost != b.cost ? a.cost < b.cost : a.gamma < b.gamma;
    });
    return out;
}

inline std::vector<RankedAssociation> murty_kbest(const ScoreMatrix& sm, std::size_t k)
{
    return murty_kbest(cost_matrix(sm), k);
}

/// Every positive 1-1 association of positive weight, by brute force.
inline std::vector<WeightedAssociation> enumerate_associations(const Matrix& eta)
{
    const auto p = static_cast<std::size_t>(eta.rows());
    const int m = static_cast<int>(eta.cols()) - 2;
    std::vector<WeightedAssociation> out;
    ExtendedAssociation gamma(p, -1);
    std::vector<bool> used(static_cast<std::size_t>(m) + 1, false);
    const std::function<void(std::size_t, double)> recurse = [&](std::size_t i, double log_w) {
        if (i == p) {
            out.push_back({gamma, log_w});
            return;
        }
        for (int j = -1; j <= m; ++j) {
            const double e = eta(static_cast<Eigen::Index>(i), j + 1);
            if (!(e > 0.0) || (j > 0 && used[static_cast<std::size_t>(j)])) {
                continue;
            }
            gamma[i] = j;
            if (j > 0) {
                used[static_cast<std::size_t>(j)] = true;
            }
            recurse(i + 1, log_w + std::log(e));
            if (j > 0) {
                used[static_cast<std::size_t>(j)] = false;
            }
        }
    };
    recurse(0, 0.0);
    return out;
}

}  // namespace lrfs
