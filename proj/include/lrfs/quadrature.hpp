#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "lrfs/gaussian.hpp"

namespace lrfs {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Physicists' Gauss-Hermite rule (weight e^{-x²}) via Golub-Welsch.
inline QuadratureRule gauss_hermite(int points)
{
    if (points < 1) {
        throw std::invalid_argument("gauss_hermite: need at least one point");
    }
    Matrix jacobi = Matrix::Zero(points, points);
    for (int i = 1; i < points; ++i) {
        jacobi(i, i - 1) = jacobi(i - 1, i) = std::sqrt(0.5 * i);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(jacobi);
    QuadratureRule rule;
    for (int i = 0; i < points; ++i) {
        rule.nodes.push_back(solver.eigenvalues()(i));
        const double v = solver.eigenvectors()(0, i);
        rule.weights.push_back(std::sqrt(std::numbers::pi) * v * v);
    }
    return rule;
}

/// Integrand over a pair of densities, given their log values at a point.
using PairIntegrand = std::function<double(double log_p1, double log_p2)>;

namespace detail {

inline void mixture_bounds(const GaussianMixture& gm, double sigmas, Vector& lo, Vector& hi)
{
    for (const auto& c : gm.components()) {
        const Vector spread = sigmas * c.gaussian.covariance().diagonal().cwiseSqrt();
        lo = lo.cwiseMin(c.gaussian.mean() - spread);
        hi = hi.cwiseMax(c.gaussian.mean() + spread);
    }
}

inline double midpoint_grid(const PairIntegrand& f, const GaussianMixture& p1, const GaussianMixture& p2,
                            const Vector& lo, const Vector& hi, int cells)
{
    const int d = static_cast<int>(lo.size());
    const Vector step = (hi - lo) / cells;
    const double volume = step.prod();
    double sum = 0.0;
    Vector x(d);
    if (d == 1) {
        for (int i = 0; i < cells; ++i) {
            x(0) = lo(0) + (i + 0.5) * step(0);
            sum += f(p1.log_pdf(x), p2.log_pdf(x));
        }
    } else {
        for (int i = 0; i < cells; ++i) {
            for (int j = 0; j < cells; ++j) {
                x(0) = lo(0) + (i + 0.5) * step(0);
                x(1) = lo(1) + (j + 0.5) * step(1);
                sum += f(p1.log_pdf(x), p2.log_pdf(x));
            }
        }
    }
    return sum * volume;
}

}  // namespace detail

/// Numerically integrates f(p1(x), p2(x)) over the attribute space.
/// Dimensions 1-2 use a midpoint grid over ±12σ of every component, doubled
/// until successive estimates agree to `rel_tol`; higher dimensions use a
/// tensor Gauss-Hermite rule importance-weighted by (p1+p2)/2.
inline double mixture_pair_integral(const PairIntegrand& f, const GaussianMixture& p1, const GaussianMixture& p2,
                                    double rel_tol = 1e-10)
{
    if (p1.dim() != p2.dim() || p1.empty()) {
        throw std::invalid_argument("mixture_pair_integral: mixtures must be non-empty with equal dimension");
    }
    const int d = p1.dim();
    if (d <= 2) {
        Vector lo = Vector::Constant(d, kInf);
        Vector hi = Vector::Constant(d, -kInf);
        detail::mixture_bounds(p1, 12.0, lo, hi);
        detail::mixture_bounds(p2, 12.0, lo, hi);
        int cells = d == 1 ? 256 : 64;
        const int max_cells = d == 1 ? 1 << 16 : 1024;
        double previous = detail::midpoint_grid(f, p1, p2, lo, hi, cells);
        while (cells < max_cells) {
            cells *= 2;
            const double current = detail::midpoint_grid(f, p1, p2, lo, hi, cells);
            if (std::abs(current - previous) <= rel_tol * std::abs(current) + 1e-300) {
                return current;
            }
            previous = current;
        }
        return previous;
    }

    const QuadratureRule rule = gauss_hermite(d <= 4 ? 20 : 8);
    const int n = static_cast<int>(rule.nodes.size());
    std::vector<WeightedGaussian> reference_components;
    for (const auto& c : p1.components()) {
        reference_components.push_back({0.5 * c.weight / p1.total_weight(), c.gaussian});
    }
    for (const auto& c : p2.components()) {
        reference_components.push_back({0.5 * c.weight / p2.total_weight(), c.gaussian});
    }
    const GaussianMixture reference(std::move(reference_components));

    double total = 0.0;
    std::vector<int> digits(d, 0);
    for (const auto& comp : reference.components()) {
        const Matrix lower = comp.gaussian.cholesky().matrixL();
        std::fill(digits.begin(), digits.end(), 0);
        double sum = 0.0;
        while (true) {
            Vector y(d);
            double w = 1.0;
            for (int k = 0; k < d; ++k) {
                y(k) = rule.nodes[digits[k]];
                w *= rule.weights[digits[k]];
            }
            const Vector x = comp.gaussian.mean() + std::sqrt(2.0) * lower * y;
            const double log_q = reference.log_pdf(x);
            sum += w * f(p1.log_pdf(x), p2.log_pdf(x)) / std::exp(log_q);
            int k = 0;
            while (k < d && ++digits[k] == n) {
                digits[k++] = 0;
            }
            if (k == d) {
                break;
            }
        }
        total += comp.weight * sum * std::pow(std::numbers::pi, -0.5 * d);
    }
    return total;
}

}  // namespace lrfs
