#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lrfs/errors.hpp"

namespace lrfs {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double log_sum_exp(std::span<const double> values)
{
    double peak = -kInf;
    for (const double v : values) {
        peak = std::max(peak, v);
    }
    if (!std::isfinite(peak)) {
        return peak;
    }
    double acc = 0.0;
    for (const double v : values) {
        acc += std::exp(v - peak);
    }
    return peak + std::log(acc);
}

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// Multivariate normal with a cached Cholesky factor.
class Gaussian {
public:
    Gaussian(Vector mean, Matrix covariance) : mean_(std::move(mean)), cov_(symmetrized(covariance))
    {
        if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size() || mean_.size() == 0) {
            throw std::invalid_argument("gaussian: covariance must be square and match the mean dimension");
        }
        if (!mean_.allFinite() || !cov_.allFinite()) {
            throw NumericalError("gaussian: non-finite mean or covariance");
        }
        factor();
    }

    int dim() const { return static_cast<int>(mean_.size()); }
    const Vector& mean() const { return mean_; }
    const Matrix& covariance() const { return cov_; }
    const Eigen::LLT<Matrix>& cholesky() const { return llt_; }
    double log_det() const { return log_det_; }

    /// Same covariance, new mean; the factorization is reused.
    Gaussian with_mean(Vector mean) const
    {
        if (mean.size() != mean_.size()) {
            throw std::invalid_argument("gaussian: mean dimension mismatch");
        }
        Gaussian copy = *this;
        copy.mean_ = std::move(mean);
        return copy;
    }

    double mahalanobis_squared(const Vector& x) const
    {
        check_dim(x);
        return llt_.matrixL().solve(x - mean_).squaredNorm();
    }

    double log_pdf(const Vector& x) const
    {
        return -0.5 * (dim() * std::log(2.0 * std::numbers::pi) + log_det_ + mahalanobis_squared(x));
    }

    double pdf(const Vector& x) const { return std::exp(log_pdf(x)); }

    Matrix precision() const { return llt_.solve(Matrix::Identity(dim(), dim())); }

private:
    void factor()
    {
        llt_.compute(cov_);
        if (llt_.info() != Eigen::Success) {
            throw NumericalError("gaussian: covariance is not positive-definite");
        }
        const Matrix lower = llt_.matrixL();
        log_det_ = 2.0 * lower.diagonal().array().log().sum();
        if (!std::isfinite(log_det_)) {
            throw NumericalError("gaussian: degenerate covariance");
        }
    }

    void check_dim(const Vector& x) const
    {
        if (x.size() != mean_.size()) {
            throw std::invalid_argument("gaussian: point dimension " + std::to_string(x.size())
                                        + " does not match " + std::to_string(mean_.size()));
        }
    }

    Vector mean_;
    Matrix cov_;
    Eigen::LLT<Matrix> llt_;
    double log_det_ = 0.0;
};

struct WeightedGaussian {
    double weight;
    Gaussian gaussian;
};

/// Non-negatively weighted sum of Gaussians. It is a probability density exactly
/// when the weights sum to one; an unnormalized mixture doubles as an intensity.
class GaussianMixture {
public:
    GaussianMixture() = default;

    explicit GaussianMixture(Gaussian single) { components_.push_back({1.0, std::move(single)}); }

    explicit GaussianMixture(std::vector<WeightedGaussian> components) : components_(std::move(components))
    {
        for (const auto& c : components_) {
            if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) {
                throw std::invalid_argument("gaussian mixture: weights must be finite and non-negative");
            }
            if (c.gaussian.dim() != components_.front().gaussian.dim()) {
                throw std::invalid_argument("gaussian mixture: components differ in dimension");
            }
        }
    }

    std::span<const WeightedGaussian> components() const { return components_; }
    std::size_t size() const { return components_.size(); }
    bool empty() const { return components_.empty(); }
    int dim() const { return empty() ? 0 : components_.front().gaussian.dim(); }

    double total_weight() const
    {
        double total = 0.0;
        for (const auto& c : components_) {
            total += c.weight;
        }
        return total;
    }

    bool is_normalized(double tolerance = 1e-9) const { return std::abs(total_weight() - 1.0) <= tolerance; }

    GaussianMixture normalized() const
    {
        const double total = total_weight();
        if (!(total > 0.0)) {
            throw NumericalError("gaussian mixture: cannot normalize a zero mixture");
        }
        return scaled(1.0 / total);
    }

    GaussianMixture scaled(double factor) const
    {
        auto components = components_;
        for (auto& c : components) {
            c.weight *= factor;
        }
        return GaussianMixture(std::move(components));
    }

    double log_pdf(const Vector& x) const
    {
        std::vector<double> terms;
        terms.reserve(components_.size());
        for (const auto& c : components_) {
            if (c.weight > 0.0) {
                terms.push_back(std::log(c.weight) + c.gaussian.log_pdf(x));
            }
        }
        return log_sum_exp(terms);
    }

    double pdf(const Vector& x) const { return std::exp(log_pdf(x)); }

    /// Mean of the normalized mixture.
    Vector mean() const
    {
        require_nonempty();
        Vector m = Vector::Zero(dim());
        for (const auto& c : components_) {
            m += c.weight * c.gaussian.mean();
        }
        return m / total_weight();
    }

    /// Covariance of the normalized mixture (moment match).
    Matrix covariance() const
    {
        const Vector m = mean();
        Matrix cov = Matrix::Zero(dim(), dim());
        for (const auto& c : components_) {
            const Vector d = c.gaussian.mean() - m;
            cov += c.weight * (c.gaussian.covariance() + d * d.transpose());
        }
        return symmetrized(cov / total_weight());
    }

    Gaussian collapse() const
    {
        if (components_.size() == 1) {
            return components_.front().gaussian;
        }
        return Gaussian(mean(), covariance());
    }

private:
    void require_nonempty() const
    {
        if (components_.empty() || !(total_weight() > 0.0)) {
            throw std::invalid_argument("gaussian mixture: empty mixture has no moments");
        }
    }

    std::vector<WeightedGaussian> components_;
};

/// ∫ N(x; a)·N(x; b) dx = N(μa; μb, Pa + Pb).
inline double gaussian_product_integral(const Gaussian& a, const Gaussian& b)
{
    return Gaussian(b.mean(), a.covariance() + b.covariance()).pdf(a.mean());
}

/// log ∫ N(x; a)^alpha · N(x; b)^beta dx for real exponents; +inf when the
/// combined precision alpha·Pa⁻¹ + beta·Pb⁻¹ is not positive-definite.
inline double log_gaussian_power_integral(const Gaussian& a, double alpha, const Gaussian& b, double beta)
{
    const int d = a.dim();
    const Matrix pa = a.precision();
    const Matrix pb = b.precision();
    const Matrix combined = symmetrized(alpha * pa + beta * pb);
    Eigen::LLT<Matrix> llt(combined);
    if (llt.info() != Eigen::Success) {
        return kInf;
    }
    const Matrix lower = llt.matrixL();
    const double log_det_combined = 2.0 * lower.diagonal().array().log().sum();
    const Vector delta = a.mean() - b.mean();
    // Residual of completing the square: alpha·beta·δᵀ Pa⁻¹ Λ⁻¹ Pb⁻¹ δ.
    const double residual = alpha * beta * (pa * delta).dot(llt.solve(pb * delta));
    const double log_two_pi = std::log(2.0 * std::numbers::pi);
    return -0.5 * d * (alpha + beta - 1.0) * log_two_pi - 0.5 * alpha * a.log_det() - 0.5 * beta * b.log_det()
           - 0.5 * log_det_combined - 0.5 * residual;
}

/// KL(a ‖ b) between Gaussians.
inline double gaussian_kl(const Gaussian& a, const Gaussian& b)
{
    const double trace_term = b.cholesky().solve(a.covariance()).trace();
    const double quad = b.mahalanobis_squared(a.mean());
    return 0.5 * (trace_term + quad - a.dim() + b.log_det() - a.log_det());
}

}  // namespace lrfs
