#pragma once

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "lrfs/densities.hpp"
#include "lrfs/gaussian.hpp"
#include "lrfs/quadrature.hpp"

namespace lrfs {

// ---- single-object integrals over normalized mixtures ----------------------

/// ∫ p1^alpha p2^beta; closed form for single Gaussians, quadrature otherwise.
/// +inf when the integral diverges.
inline double power_integral(const GaussianMixture& p1, double alpha, const GaussianMixture& p2, double beta)
{
    if (p1.size() == 1 && p2.size() == 1) {
        return std::exp(log_gaussian_power_integral(p1.components()[0].gaussian, alpha,
                                                    p2.components()[0].gaussian, beta));
    }
    return mixture_pair_integral([&](double l1, double l2) { return std::exp(alpha * l1 + beta * l2); }, p1, p2);
}

/// ∫ p1 p2, exact for mixtures.
inline double product_integral(const GaussianMixture& p1, const GaussianMixture& p2)
{
    double total = 0.0;
    for (const auto& a : p1.components()) {
        for (const auto& b : p2.components()) {
            total += a.weight * b.weight * gaussian_product_integral(a.gaussian, b.gaussian);
        }
    }
    return total;
}

/// KL(p1 ‖ p2) for normalized densities.
inline double density_kl(const GaussianMixture& p1, const GaussianMixture& p2)
{
    if (p1.size() == 1 && p2.size() == 1) {
        return gaussian_kl(p1.components()[0].gaussian, p2.components()[0].gaussian);
    }
    return mixture_pair_integral(
        [](double l1, double l2) { return l1 > -kInf ? std::exp(l1) * (l1 - l2) : 0.0; }, p1, p2);
}

namespace detail {

/// A label's Bernoulli pair; a label absent from one density has r = 0 there.
struct LabelPair {
    double r1 = 0.0;
    double r2 = 0.0;
    const GaussianMixture* p1 = nullptr;
    const GaussianMixture* p2 = nullptr;
};

inline std::vector<LabelPair> label_pairs(const LmbDensity& a, const LmbDensity& b)
{
    std::map<Label, LabelPair> pairs;
    for (const auto& [label, track] : a.tracks()) {
        auto& p = pairs[label];
        p.r1 = track.existence();
        p.p1 = &track.density();
    }
    for (const auto& [label, track] : b.tracks()) {
        auto& p = pairs[label];
        p.r2 = track.existence();
        p.p2 = &track.density();
    }
    std::vector<LabelPair> out;
    int dim = -1;
    for (const auto& [label, p] : pairs) {
        for (const GaussianMixture* gm : {p.p1, p.p2}) {
            if (gm != nullptr) {
                if (dim >= 0 && gm->dim() != dim) {
                    throw std::invalid_argument("divergence: densities differ in attribute dimension");
                }
                dim = gm->dim();
            }
        }
        out.push_back(p);
    }
    return out;
}

inline bool both_present(const LabelPair& p) { return p.r1 > 0.0 && p.r2 > 0.0; }

}  // namespace detail

// ---- LMB divergences ----------------------------------------------------------

/// Rényi divergence of order alpha ∈ (0, 1).
inline double renyi_lmb(const LmbDensity& a, const LmbDensity& b, double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("renyi_lmb: alpha must lie in (0, 1)");
    }
    double total = 0.0;
    for (const auto& p : detail::label_pairs(a, b)) {
        double cross = 0.0;
        if (detail::both_present(p)) {
            cross = std::pow(p.r1 / (1.0 - p.r1), alpha) * std::pow(p.r2 / (1.0 - p.r2), 1.0 - alpha)
                    * power_integral(*p.p1, alpha, *p.p2, 1.0 - alpha);
        }
        total += (std::log1p(cross) + alpha * std::log1p(-p.r1) + (1.0 - alpha) * std::log1p(-p.r2)) / (alpha - 1.0);
    }
    return total;
}

/// KL(a ‖ b) in Bernoulli-parameter form; +inf when a label exists in a but not in b.
inline double kl_lmb(const LmbDensity& a, const LmbDensity& b)
{
    double total = 0.0;
    for (const auto& p : detail::label_pairs(a, b)) {
        if (p.r1 == 0.0) {
            total -= std::log1p(-p.r2);
            continue;
        }
        if (p.r2 == 0.0) {
            return kInf;
        }
        total += (1.0 - p.r1) * (std::log1p(-p.r1) - std::log1p(-p.r2)) + p.r1 * std::log(p.r1 / p.r2)
                 + p.r1 * density_kl(*p.p1, *p.p2);
    }
    return total;
}

/// KL(a ‖ b) written over the existence-weighted densities f = r p / (1 - r).
inline double kl_lmb_weighted_form(const LmbDensity& a, const LmbDensity& b)
{
    double total = 0.0;
    for (const auto& p : detail::label_pairs(a, b)) {
        const double rt1 = 1.0 - p.r1;
        const double rt2 = 1.0 - p.r2;
        total += std::log(rt1 / rt2);
        if (p.r1 == 0.0) {
            continue;
        }
        if (p.r2 == 0.0) {
            return kInf;
        }
        // ⟨f1 ln(f1/f2)⟩ = (r1/r̃1)·[ln(r1 r̃2 / (r̃1 r2)) + KL(p1‖p2)]
        const double f_term = p.r1 / rt1 * (std::log(p.r1 * rt2 / (rt1 * p.r2)) + density_kl(*p.p1, *p.p2));
        total += rt1 * f_term;
    }
    return total;
}

/// Pearson χ² divergence of a from b; +inf unless b dominates a.
inline double chi2_lmb(const LmbDensity& a, const LmbDensity& b)
{
    double log_product = 0.0;
    for (const auto& p : detail::label_pairs(a, b)) {
        const double rt1 = 1.0 - p.r1;
        const double rt2 = 1.0 - p.r2;
        double factor = rt1 * rt1 / rt2;
        if (p.r1 > 0.0) {
            if (p.r2 == 0.0) {
                return kInf;
            }
            const double ratio = power_integral(*p.p1, 2.0, *p.p2, -1.0);
            if (!std::isfinite(ratio)) {
                return kInf;
            }
            factor += p.r1 * p.r1 / p.r2 * ratio;
        }
        log_product += std::log(factor);
    }
    return std::expm1(log_product);
}

/// Cauchy-Schwarz divergence; depends on the hyper-volume unit.
inline double csd_lmb(const LmbDensity& a, const LmbDensity& b, double unit = 1.0)
{
    if (!(unit > 0.0)) {
        throw std::invalid_argument("csd_lmb: unit must be positive");
    }
    double total = 0.0;
    for (const auto& p : detail::label_pairs(a, b)) {
        const double f1 = p.r1 / (1.0 - p.r1);
        const double f2 = p.r2 / (1.0 - p.r2);
        const double self1 = p.r1 > 0.0 ? f1 * f1 * product_integral(*p.p1, *p.p1) : 0.0;
        const double self2 = p.r2 > 0.0 ? f2 * f2 * product_integral(*p.p2, *p.p2) : 0.0;
        const double cross = detail::both_present(p) ? f1 * f2 * product_integral(*p.p1, *p.p2) : 0.0;
        total -= std::log1p(unit * cross) - 0.5 * std::log1p(unit * self1) - 0.5 * std::log1p(unit * self2);
    }
    return total;
}

/// ∫ √(π_a π_b) δX, the Bhattacharyya coefficient; unit-free.
inline double bhattacharyya_coefficient_lmb(const LmbDensity& a, const LmbDensity& b)
{
    double log_total = 0.0;
    for (const auto& p : detail::label_pairs(a, b)) {
        double cross = 0.0;
        if (detail::both_present(p)) {
            cross = std::sqrt(p.r1 / (1.0 - p.r1) * p.r2 / (1.0 - p.r2)) * power_integral(*p.p1, 0.5, *p.p2, 0.5);
        }
        log_total += 0.5 * (std::log1p(-p.r1) + std::log1p(-p.r2)) + std::log1p(cross);
    }
    return std::exp(log_total);
}

/// Bhattacharyya divergence scaled to coincide with the order-1/2 Rényi
/// divergence: -2 ln of the coefficient.
inline double bhattacharyya_lmb(const LmbDensity& a, const LmbDensity& b)
{
    double total = 0.0;
    for (const auto& p : detail::label_pairs(a, b)) {
        double cross = 0.0;
        if (detail::both_present(p)) {
            cross = std::sqrt(p.r1 / (1.0 - p.r1) * p.r2 / (1.0 - p.r2)) * power_integral(*p.p1, 0.5, *p.p2, 0.5);
        }
        total -= 2.0 * (0.5 * std::log1p(-p.r1) + 0.5 * std::log1p(-p.r2) + std::log1p(cross));
    }
    return total;
}

// ---- GLMB Cauchy-Schwarz ----------------------------------------------------------

namespace detail {

/// log ⟨a, b⟩_U: hypotheses pair up only on equal label sets.
inline double log_glmb_inner(const GlmbDensity& a, const GlmbDensity& b, double unit)
{
    std::map<LabelSet, std::vector<std::size_t>> by_set;
    for (std::size_t j = 0; j < b.size(); ++j) {
        by_set[b.hypotheses()[j].labels].push_back(j);
    }
    std::vector<double> terms;
    for (const auto& ha : a.hypotheses()) {
        const auto it = by_set.find(ha.labels);
        if (it == by_set.end()) {
            continue;
        }
        for (const auto j : it->second) {
            const auto& hb = b.hypotheses()[j];
            double log_term = ha.log_weight + hb.log_weight;
            for (std::size_t l = 0; l < ha.labels.size(); ++l) {
                log_term += std::log(unit * product_integral(*ha.tracks[l], *hb.tracks[l]));
            }
            terms.push_back(log_term);
        }
    }
    return terms.empty() ? -kInf : log_sum_exp(terms);
}

}  // namespace detail

/// Cauchy-Schwarz divergence between GLMBs; +inf when no label set is shared.
inline double csd_glmb(const GlmbDensity& a, const GlmbDensity& b, double unit = 1.0)
{
    if (!(unit > 0.0)) {
        throw std::invalid_argument("csd_glmb: unit must be positive");
    }
    const double ab = detail::log_glmb_inner(a, b, unit);
    if (!(ab > -kInf)) {
        return kInf;
    }
    const double aa = detail::log_glmb_inner(a, a, unit);
    const double bb = detail::log_glmb_inner(b, b, unit);
    return -ab + 0.5 * aa + 0.5 * bb;
}

// ---- Poisson divergences --------------------------------------------------------

enum class DivergenceKind { renyi, kl, chi2, cs };

/// Divergences between Poisson RFSs with intensities rate·density. alpha is
/// used by renyi only, unit by cs only.
inline double divergence_poisson(DivergenceKind kind, const PoissonRfs& v1, const PoissonRfs& v2, double unit = 1.0,
                                 double alpha = 0.5)
{
    const double k1 = v1.rate();
    const double k2 = v2.rate();
    if (v1.density().dim() != v2.density().dim()) {
        throw std::invalid_argument("divergence_poisson: intensities differ in attribute dimension");
    }
    switch (kind) {
    case DivergenceKind::renyi: {
        if (!(alpha > 0.0 && alpha < 1.0)) {
            throw std::invalid_argument("divergence_poisson: alpha must lie in (0, 1)");
        }
        double cross = 0.0;
        if (k1 > 0.0 && k2 > 0.0) {
            cross = std::pow(k1, alpha) * std::pow(k2, 1.0 - alpha)
                    * power_integral(v1.density(), alpha, v2.density(), 1.0 - alpha);
        }
        return (cross - alpha * k1 - (1.0 - alpha) * k2) / (alpha - 1.0);
    }
    case DivergenceKind::kl:
        if (k1 == 0.0) {
            return k2;
        }
        if (k2 == 0.0) {
            return kInf;
        }
        return k2 - k1 + k1 * (std::log(k1 / k2) + density_kl(v1.density(), v2.density()));
    case DivergenceKind::chi2: {
        if (k1 == 0.0) {
            return std::expm1(k2);
        }
        if (k2 == 0.0) {
            return kInf;
        }
        const double ratio = k1 * k1 / k2 * power_integral(v1.density(), 2.0, v2.density(), -1.0);
        return std::expm1(-2.0 * k1 + k2 + ratio);
    }
    case DivergenceKind::cs: {
        if (!(unit > 0.0)) {
            throw std::invalid_argument("divergence_poisson: unit must be positive");
        }
        const double s11 = k1 * k1 * product_integral(v1.density(), v1.density());
        const double s22 = k2 * k2 * product_integral(v2.density(), v2.density());
        const double s12 = k1 * k2 * product_integral(v1.density(), v2.density());
        return 0.5 * unit * (s11 - 2.0 * s12 + s22);
    }
    }
    throw std::invalid_argument("divergence_poisson: unknown kind");
}

}  // namespace lrfs
