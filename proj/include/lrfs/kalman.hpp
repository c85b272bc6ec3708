#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lrfs/errors.hpp"
#include "lrfs/gaussian.hpp"

namespace lrfs {

/// x' = F x + w, w ~ N(0, Q).
class LinearGaussianMotion {
public:
    LinearGaussianMotion(Matrix transition, Matrix noise) : transition_(std::move(transition)), noise_(std::move(noise))
    {
        const auto d = transition_.rows();
        if (d == 0 || transition_.cols() != d || noise_.rows() != d || noise_.cols() != d) {
            throw std::invalid_argument("motion model: F and Q must be square with equal size");
        }
        if ((noise_ - noise_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
            throw std::invalid_argument("motion model: Q must be symmetric");
        }
    }

    const Matrix& transition() const { return transition_; }
    const Matrix& noise() const { return noise_; }
    int dim() const { return static_cast<int>(transition_.rows()); }

private:
    Matrix transition_;
    Matrix noise_;
};

/// z = H x + v, v ~ N(0, R).
class LinearGaussianSensor {
public:
    LinearGaussianSensor(Matrix observation, Matrix noise) : observation_(std::move(observation)), noise_(std::move(noise))
    {
        const auto m = observation_.rows();
        if (m == 0 || noise_.rows() != m || noise_.cols() != m) {
            throw std::invalid_argument("sensor model: R must be square and match the rows of H");
        }
        Eigen::LLT<Matrix> llt(noise_);
        if ((noise_ - noise_.transpose()).cwiseAbs().maxCoeff() > 1e-12 || llt.info() != Eigen::Success) {
            throw std::invalid_argument("sensor model: R must be symmetric positive-definite");
        }
    }

    const Matrix& observation() const { return observation_; }
    const Matrix& noise() const { return noise_; }
    int measurement_dim() const { return static_cast<int>(observation_.rows()); }
    int state_dim() const { return static_cast<int>(observation_.cols()); }

private:
    Matrix observation_;
    Matrix noise_;
};

inline Gaussian kalman_predict(const Gaussian& prior, const LinearGaussianMotion& motion)
{
    if (prior.dim() != motion.dim()) {
        throw std::invalid_argument("kalman_predict: state dimension mismatch");
    }
    const Matrix& f = motion.transition();
    return Gaussian(f * prior.mean(), f * prior.covariance() * f.transpose() + motion.noise());
}

inline GaussianMixture kalman_predict(const GaussianMixture& prior, const LinearGaussianMotion& motion)
{
    std::vector<WeightedGaussian> out;
    out.reserve(prior.size());
    for (const auto& c : prior.components()) {
        out.push_back({c.weight, kalman_predict(c.gaussian, motion)});
    }
    return GaussianMixture(std::move(out));
}

/// The measurement-independent half of a Kalman update for one Gaussian:
/// predicted measurement, innovation factorization, gain and posterior
/// covariance (Joseph form).
class InnovationTerms {
public:
    InnovationTerms(const Gaussian& prior, const LinearGaussianSensor& sensor)
        : predicted_measurement_(sensor.observation() * prior.mean()),
          innovation_(Vector::Zero(sensor.measurement_dim()),
                      sensor.observation() * prior.covariance() * sensor.observation().transpose() + sensor.noise()),
          posterior_template_(prior)
    {
        if (prior.dim() != sensor.state_dim()) {
            throw std::invalid_argument("kalman_update: state dimension mismatch");
        }
        const Matrix& h = sensor.observation();
        gain_ = innovation_.cholesky().solve(h * prior.covariance()).transpose();
        const Matrix i_kh = Matrix::Identity(prior.dim(), prior.dim()) - gain_ * h;
        const Matrix joseph = i_kh * prior.covariance() * i_kh.transpose() + gain_ * sensor.noise() * gain_.transpose();
        posterior_template_ = Gaussian(prior.mean(), symmetrized(joseph));
    }

    double mahalanobis_squared(const Vector& z) const
    {
        return innovation_.mahalanobis_squared(z - predicted_measurement_);
    }

    double log_likelihood(const Vector& z) const { return innovation_.log_pdf(z - predicted_measurement_); }

    Gaussian posterior(const Vector& z) const
    {
        return posterior_template_.with_mean(posterior_template_.mean() + gain_ * (z - predicted_measurement_));
    }

private:
    Vector predicted_measurement_;
    Gaussian innovation_;
    Matrix gain_;
    Gaussian posterior_template_;
};

struct UpdateResult {
    GaussianMixture posterior;
    double marginal_likelihood;
};

inline UpdateResult kalman_update(const GaussianMixture& prior, const LinearGaussianSensor& sensor, const Vector& z)
{
    if (prior.empty()) {
        throw std::invalid_argument("kalman_update: empty prior");
    }
    if (z.size() != sensor.measurement_dim()) {
        throw std::invalid_argument("kalman_update: measurement dimension mismatch");
    }
    std::vector<double> log_terms;
    std::vector<Gaussian> posteriors;
    for (const auto& c : prior.components()) {
        const InnovationTerms terms(c.gaussian, sensor);
        log_terms.push_back(c.weight > 0.0 ? std::log(c.weight) + terms.log_likelihood(z) : -kInf);
        posteriors.push_back(terms.posterior(z));
    }
    const double log_total = log_sum_exp(log_terms);
    if (!std::isfinite(log_total)) {
        throw NumericalError("kalman_update: zero marginal likelihood");
    }
    std::vector<WeightedGaussian> out;
    for (std::size_t i = 0; i < posteriors.size(); ++i) {
        out.push_back({std::exp(log_terms[i] - log_total), std::move(posteriors[i])});
    }
    return {GaussianMixture(std::move(out)), std::exp(log_total)};
}

/// Rauch-Tung-Striebel backward pass over consecutive filtered marginals.
inline std::vector<Gaussian> rts_smooth(std::span<const Gaussian> filtered, const LinearGaussianMotion& motion)
{
    std::vector<Gaussian> smoothed(filtered.begin(), filtered.end());
    if (smoothed.size() < 2) {
        return smoothed;
    }
    const Matrix& f = motion.transition();
    for (std::size_t t = smoothed.size() - 1; t-- > 0;) {
        const Gaussian& now = filtered[t];
        const Gaussian predicted = kalman_predict(now, motion);
        const Matrix gain = predicted.cholesky().solve(f * now.covariance()).transpose();
        const Vector mean = now.mean() + gain * (smoothed[t + 1].mean() - predicted.mean());
        const Matrix cov = now.covariance()
                           + gain * (smoothed[t + 1].covariance() - predicted.covariance()) * gain.transpose();
        smoothed[t] = Gaussian(mean, symmetrized(cov));
    }
    return smoothed;
}

struct MixtureHygiene {
    double prune_threshold = 1e-5;
    /// Squared Mahalanobis radius, measured in the leading component's metric.
    double merge_distance = 4.0;
    std::size_t max_components = 100;
};

/// Prune, merge and cap a mixture; the result is normalized. The heaviest
/// component always survives pruning.
inline GaussianMixture mixture_reduce(const GaussianMixture& gm, double prune_threshold, double merge_distance,
                                      std::size_t cap)
{
    if (prune_threshold < 0.0 || merge_distance < 0.0) {
        throw std::invalid_argument("mixture_reduce: thresholds must be non-negative");
    }
    if (gm.empty()) {
        return gm;
    }
    const auto comps = gm.components();
    if (comps.size() == 1) {
        return gm.normalized();
    }
    const double total = gm.total_weight();
    std::vector<std::size_t> order(comps.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return comps[a].weight > comps[b].weight; });

    std::vector<std::size_t> alive;
    for (const auto idx : order) {
        if (comps[idx].weight / total >= prune_threshold || alive.empty()) {
            alive.push_back(idx);
        }
    }

    std::vector<WeightedGaussian> merged;
    std::vector<bool> used(alive.size(), false);
    for (std::size_t a = 0; a < alive.size(); ++a) {
        if (used[a]) {
            continue;
        }
        const Gaussian& lead = comps[alive[a]].gaussian;
        std::vector<std::size_t> group;
        for (std::size_t b = a; b < alive.size(); ++b) {
            if (!used[b] && (b == a || lead.mahalanobis_squared(comps[alive[b]].gaussian.mean()) <= merge_distance)) {
                group.push_back(alive[b]);
                used[b] = true;
            }
        }
        if (group.size() == 1) {
            merged.push_back(comps[group.front()]);
            continue;
        }
        double weight = 0.0;
        Vector mean = Vector::Zero(lead.dim());
        for (const auto idx : group) {
            weight += comps[idx].weight;
            mean += comps[idx].weight * comps[idx].gaussian.mean();
        }
        mean /= weight;
        Matrix cov = Matrix::Zero(lead.dim(), lead.dim());
        for (const auto idx : group) {
            const Vector d = comps[idx].gaussian.mean() - mean;
            cov += comps[idx].weight * (comps[idx].gaussian.covariance() + d * d.transpose());
        }
        merged.push_back({weight, Gaussian(mean, cov / weight)});
    }

    std::stable_sort(merged.begin(), merged.end(),
                     [](const WeightedGaussian& a, const WeightedGaussian& b) { return a.weight > b.weight; });
    if (merged.size() > std::max<std::size_t>(cap, 1)) {
        merged.erase(merged.begin() + static_cast<std::ptrdiff_t>(std::max<std::size_t>(cap, 1)), merged.end());
    }
    return GaussianMixture(std::move(merged)).normalized();
}

inline GaussianMixture mixture_reduce(const GaussianMixture& gm, const MixtureHygiene& hygiene)
{
    return mixture_reduce(gm, hygiene.prune_threshold, hygiene.merge_distance, hygiene.max_components);
}

}  // namespace lrfs
