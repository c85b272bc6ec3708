#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "lrfs/assignment.hpp"
#include "lrfs/gaussian.hpp"
#include "lrfs/label.hpp"

namespace lrfs {

namespace detail {

inline void require_ospa_parameters(double cutoff, double order)
{
    if (!(cutoff > 0.0) || !(order >= 1.0)) {
        throw std::invalid_argument("ospa: cutoff must be positive and order at least 1");
    }
}

/// OSPA from a matrix of already cut-off base distances, rows ≤ columns.
inline double ospa_from_distances(const Matrix& capped, double cutoff, double order)
{
    const auto small = capped.rows();
    const auto large = capped.cols();
    if (large == 0) {
        return 0.0;
    }
    if (small == 0) {
        return cutoff;
    }
    const Matrix powered = capped.array().pow(order).matrix();
    const auto best = solve_assignment(powered);
    // Summing the matched costs in sorted order makes the value independent of argument order.
    std::vector<double> costs;
    if (best) {
        for (Eigen::Index i = 0; i < small; ++i) {
            costs.push_back(powered(i, best->column_of_row[static_cast<std::size_t>(i)]));
        }
    }
    std::sort(costs.begin(), costs.end());
    double matched = 0.0;
    for (const double c : costs) {
        matched += c;
    }
    const double total = matched + std::pow(cutoff, order) * static_cast<double>(large - small);
    return std::min(cutoff, std::pow(total / static_cast<double>(large), 1.0 / order));
}

}  // namespace detail

/// Optimal sub-pattern assignment distance between finite point sets.
inline double ospa(std::span<const Vector> x, std::span<const Vector> y, double cutoff, double order)
{
    detail::require_ospa_parameters(cutoff, order);
    if (x.size() > y.size()) {
        std::swap(x, y);
    }
    Matrix capped(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = 0; j < y.size(); ++j) {
            if (x[i].size() != y[j].size()) {
                throw std::invalid_argument("ospa: points differ in dimension");
            }
            capped(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                std::min(cutoff, (x[i] - y[j]).norm());
        }
    }
    return detail::ospa_from_distances(capped, cutoff, order);
}

/// A trajectory alive on the contiguous scans start .. start + states.size() - 1.
struct LabeledTrajectory {
    Label label;
    int start = 0;
    std::vector<Vector> states;

    int end() const { return start + static_cast<int>(states.size()) - 1; }
    bool alive_at(int k) const { return k >= start && k <= end(); }
    const Vector& at(int k) const { return states[static_cast<std::size_t>(k - start)]; }
};

/// Time-averaged base distance between two trajectories over [first, last]:
/// min(d, c) where both exist, c where exactly one exists, 0 where neither does.
inline double trajectory_distance(const LabeledTrajectory& a, const LabeledTrajectory& b, int first, int last,
                                  double cutoff)
{
    double total = 0.0;
    for (int k = first; k <= last; ++k) {
        const bool in_a = a.alive_at(k);
        const bool in_b = b.alive_at(k);
        if (in_a && in_b) {
            total += std::min(cutoff, (a.at(k) - b.at(k)).norm());
        } else if (in_a != in_b) {
            total += cutoff;
        }
    }
    return total / static_cast<double>(last - first + 1);
}

/// OSPA over trajectories on the scans [first, last]; trajectories with no
/// state inside the window do not count.
inline double ospa2(std::span<const LabeledTrajectory> t1, std::span<const LabeledTrajectory> t2, double cutoff,
                    double order, int first, int last)
{
    detail::require_ospa_parameters(cutoff, order);
    if (last < first) {
        throw std::invalid_argument("ospa2: empty window");
    }
    auto in_window = [&](std::span<const LabeledTrajectory> all) {
        std::vector<const LabeledTrajectory*> out;
        for (const auto& t : all) {
            if (!t.states.empty() && t.start <= last && t.end() >= first) {
                out.push_back(&t);
            }
        }
        return out;
    };
    auto a = in_window(t1);
    auto b = in_window(t2);
    if (a.size() > b.size()) {
        std::swap(a, b);
    }
    Matrix capped(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            capped(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                trajectory_distance(*a[i], *b[j], first, last, cutoff);
        }
    }
    return detail::ospa_from_distances(capped, cutoff, order);
}

/// States of every trajectory alive at scan k.
inline std::vector<Vector> states_at(std::span<const LabeledTrajectory> trajectories, int k)
{
    std::vector<Vector> out;
    for (const auto& t : trajectories) {
        if (t.alive_at(k)) {
            out.push_back(t.at(k));
        }
    }
    return out;
}

}  // namespace lrfs
