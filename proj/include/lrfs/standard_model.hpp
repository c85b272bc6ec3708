#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lrfs/densities.hpp"
#include "lrfs/gaussian.hpp"
#include "lrfs/kalman.hpp"
#include "lrfs/label.hpp"

namespace lrfs {

using Measurements = std::vector<Vector>;

/// Axis-aligned box.
struct Box {
    Vector lo;
    Vector hi;

    Box(Vector lower, Vector upper) : lo(std::move(lower)), hi(std::move(upper))
    {
        if (lo.size() != hi.size() || lo.size() == 0 || !((hi - lo).minCoeff() > 0.0)) {
            throw std::invalid_argument("box: bounds must have equal dimension and positive extent");
        }
    }

    int dim() const { return static_cast<int>(lo.size()); }
    double volume() const { return (hi - lo).prod(); }
    bool contains(const Vector& x) const
    {
        return x.size() == lo.size() && (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
    }
};

/// A probability that is either constant or a function of a component mean.
class StateProbability {
public:
    StateProbability(double constant) : constant_(constant)  // NOLINT(google-explicit-constructor)
    {
        if (!(constant >= 0.0 && constant <= 1.0)) {
            throw std::invalid_argument("probability must lie in [0, 1]");
        }
    }

    explicit StateProbability(std::function<double(const Vector&)> of_mean) : of_mean_(std::move(of_mean)) {}

    double at(const Vector& mean) const
    {
        if (!of_mean_) {
            return constant_;
        }
        const double p = of_mean_(mean);
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("state-dependent probability outside [0, 1]");
        }
        return p;
    }

    bool is_constant() const { return !of_mean_; }

private:
    double constant_ = 0.0;
    std::function<double(const Vector&)> of_mean_;
};

struct BirthEntry {
    Label label;
    double probability;
    GaussianMixture density;
};

/// Labeled multi-Bernoulli birth for one scan; every label is born at `scan`.
class BirthModel {
public:
    explicit BirthModel(int scan, std::vector<BirthEntry> entries = {}) : scan_(scan), entries_(std::move(entries))
    {
        std::sort(entries_.begin(), entries_.end(),
                  [](const BirthEntry& a, const BirthEntry& b) { return a.label < b.label; });
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            const auto& e = entries_[i];
            require_valid_label(e.label);
            if (e.label.birth_time != scan_) {
                throw std::invalid_argument("birth model: label " + to_string(e.label) + " is not born at scan "
                                            + std::to_string(scan_));
            }
            if (!(e.probability >= 0.0 && e.probability < 1.0)) {
                throw std::invalid_argument("birth model: birth probability must lie in [0, 1)");
            }
            detail::require_normalized(e.density, "birth model");
            if (i > 0 && entries_[i - 1].label == e.label) {
                throw std::invalid_argument("birth model: duplicate label " + to_string(e.label));
            }
        }
    }

    int scan() const { return scan_; }
    std::span<const BirthEntry> entries() const { return entries_; }
    const BirthEntry* find(const Label& label) const
    {
        for (const auto& e : entries_) {
            if (e.label == label) {
                return &e;
            }
        }
        return nullptr;
    }

private:
    int scan_;
    std::vector<BirthEntry> entries_;
};

struct SurvivalModel {
    StateProbability survival;
    LinearGaussianMotion motion;
};

/// Poisson clutter, uniform over a region of measurement space.
struct ClutterModel {
    double rate;
    Box region;

    double intensity(const Vector& z) const { return region.contains(z) ? rate / region.volume() : 0.0; }
};

struct ObservationModel {
    StateProbability detection;
    LinearGaussianSensor sensor;
    ClutterModel clutter;
    /// Innovation Mahalanobis distance beyond which a detection scores zero.
    double gate = 5.0;
};

namespace detail {

inline double clutter_or_throw(const ObservationModel& obs, const Vector& z)
{
    const double kappa = obs.clutter.intensity(z);
    if (!(kappa > 0.0)) {
        throw std::domain_error("measurement outside the clutter support");
    }
    return kappa;
}

inline void require_index(int j, const Measurements& z)
{
    if (j < 0 || j > static_cast<int>(z.size())) {
        throw std::invalid_argument("detection index " + std::to_string(j) + " out of range");
    }
}

}  // namespace detail

/// Detection-to-clutter ratio at a state: 1 - P_D for j = 0, otherwise
/// P_D · g(z_j | x) / κ(z_j).
inline double psi(const ObservationModel& obs, const Vector& x, int j, const Measurements& z)
{
    detail::require_index(j, z);
    const double pd = obs.detection.at(x);
    if (j == 0) {
        return 1.0 - pd;
    }
    const Vector& zj = z[static_cast<std::size_t>(j - 1)];
    const double kappa = detail::clutter_or_throw(obs, zj);
    const Gaussian noise(obs.sensor.observation() * x, obs.sensor.noise());
    return pd * noise.pdf(zj) / kappa;
}

/// One row of the association score matrix: eta[j + 1] is the score of
/// outcome j ∈ {-1, 0, 1..M} and posterior[j + 1] the resulting density
/// (null for j = -1 or a zero score).
struct ScoreRow {
    Label label;
    std::vector<double> eta;
    std::vector<TrackPtr> posterior;

    double at(int j) const { return eta[static_cast<std::size_t>(j + 1)]; }
    const TrackPtr& posterior_at(int j) const { return posterior[static_cast<std::size_t>(j + 1)]; }
    int measurement_count() const { return static_cast<int>(eta.size()) - 2; }
};

using ScoreRowPtr = std::shared_ptr<const ScoreRow>;

/// Row for a label that exists with probability `existence` and, if it does,
/// has density `predicted` before the measurement update.
inline ScoreRow detection_row(const Label& label, double existence, const GaussianMixture& predicted,
                              const ObservationModel& obs, const Measurements& z,
                              const MixtureHygiene& hygiene = {})
{
    const std::size_t m = z.size();
    ScoreRow row{label, std::vector<double>(m + 2, 0.0), std::vector<TrackPtr>(m + 2)};
    row.eta[0] = 1.0 - existence;
    if (!(existence > 0.0)) {
        return row;
    }

    const auto comps = predicted.components();
    std::vector<double> pd(comps.size());
    std::vector<WeightedGaussian> missed;
    double missed_mass = 0.0;
    for (std::size_t c = 0; c < comps.size(); ++c) {
        pd[c] = obs.detection.at(comps[c].gaussian.mean());
        const double w = comps[c].weight * (1.0 - pd[c]);
        missed_mass += w;
        if (w > 0.0) {
            missed.push_back({w, comps[c].gaussian});
        }
    }
    auto finish = [&hygiene](std::vector<WeightedGaussian> parts, double mass) {
        GaussianMixture gm = GaussianMixture(std::move(parts)).scaled(1.0 / mass);
        if (gm.size() > 1) {
            gm = mixture_reduce(gm, hygiene);
        }
        return make_track(gm.normalized());
    };
    row.eta[1] = existence * missed_mass;
    if (missed_mass > 0.0) {
        row.posterior[1] = finish(std::move(missed), missed_mass);
    }
    if (m == 0) {
        return row;
    }

    std::vector<double> kappa(m);
    for (std::size_t j = 0; j < m; ++j) {
        kappa[j] = detail::clutter_or_throw(obs, z[j]);
    }
    std::vector<std::vector<WeightedGaussian>> detected(m);
    std::vector<double> detected_mass(m, 0.0);
    const double gate_sq = obs.gate * obs.gate;
    for (std::size_t c = 0; c < comps.size(); ++c) {
        if (!(comps[c].weight * pd[c] > 0.0)) {
            continue;
        }
        const InnovationTerms terms(comps[c].gaussian, obs.sensor);
        for (std::size_t j = 0; j < m; ++j) {
            if (terms.mahalanobis_squared(z[j]) > gate_sq) {
                continue;
            }
            const double w = comps[c].weight * pd[c] * std::exp(terms.log_likelihood(z[j])) / kappa[j];
            if (w > 0.0) {
                detected_mass[j] += w;
                detected[j].push_back({w, terms.posterior(z[j])});
            }
        }
    }
    for (std::size_t j = 0; j < m; ++j) {
        row.eta[j + 2] = existence * detected_mass[j];
        if (detected_mass[j] > 0.0) {
            row.posterior[j + 2] = finish(std::move(detected[j]), detected_mass[j]);
        }
    }
    return row;
}

/// Outcome probabilities after the survival thinning: survival mass and the
/// predicted density of the survivor.
struct SurvivalSplit {
    double survival_mass;
    GaussianMixture predicted;
};

inline SurvivalSplit survival_split(const GaussianMixture& prior, const SurvivalModel& survival)
{
    std::vector<WeightedGaussian> kept;
    double mass = 0.0;
    for (const auto& c : prior.components()) {
        const double w = c.weight * survival.survival.at(c.gaussian.mean());
        mass += w;
        if (w > 0.0) {
            kept.push_back({w, kalman_predict(c.gaussian, survival.motion)});
        }
    }
    if (!(mass > 0.0)) {
        return {0.0, GaussianMixture{}};
    }
    return {mass, GaussianMixture(std::move(kept)).scaled(1.0 / mass)};
}

inline ScoreRow survival_row(const Label& label, const GaussianMixture& prior, const SurvivalModel& survival,
                             const ObservationModel& obs, const Measurements& z, const MixtureHygiene& hygiene = {})
{
    const SurvivalSplit split = survival_split(prior, survival);
    if (!(split.survival_mass > 0.0)) {
        ScoreRow row{label, std::vector<double>(z.size() + 2, 0.0), std::vector<TrackPtr>(z.size() + 2)};
        row.eta[0] = 1.0;
        return row;
    }
    ScoreRow row = detection_row(label, split.survival_mass, split.predicted, obs, z, hygiene);
    row.eta[0] = std::max(0.0, 1.0 - split.survival_mass);
    return row;
}

inline ScoreRow birth_row(const BirthEntry& entry, const ObservationModel& obs, const Measurements& z,
                          const MixtureHygiene& hygiene = {})
{
    return detection_row(entry.label, entry.probability, entry.density, obs, z, hygiene);
}

/// P labeled rows × (M + 2) outcome columns (-1, 0, 1..M).
class ScoreMatrix {
public:
    ScoreMatrix(std::vector<ScoreRowPtr> rows, std::size_t measurement_count)
        : rows_(std::move(rows)), measurement_count_(measurement_count)
    {
        for (const auto& r : rows_) {
            if (!r || r->eta.size() != measurement_count_ + 2) {
                throw std::invalid_argument("score matrix: row width must be M + 2");
            }
        }
    }

    std::size_t rows() const { return rows_.size(); }
    std::size_t measurement_count() const { return measurement_count_; }
    const ScoreRow& row(std::size_t i) const { return *rows_[i]; }
    std::span<const ScoreRowPtr> row_ptrs() const { return rows_; }
    double eta(std::size_t i, int j) const { return rows_[i]->at(j); }

    LabelSet labels() const
    {
        LabelSet out;
        for (const auto& r : rows_) {
            out.push_back(r->label);
        }
        return out;
    }

    /// Dense P × (M + 2) copy; column j + 1 holds outcome j.
    Matrix eta_matrix() const
    {
        Matrix out(static_cast<Eigen::Index>(rows_.size()), static_cast<Eigen::Index>(measurement_count_ + 2));
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            for (std::size_t c = 0; c < measurement_count_ + 2; ++c) {
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows_[i]->eta[c];
            }
        }
        return out;
    }

private:
    std::vector<ScoreRowPtr> rows_;
    std::size_t measurement_count_;
};

/// Surviving labels (sorted) followed by the birth labels.
inline ScoreMatrix build_score_matrix(std::span<const std::pair<Label, TrackPtr>> prior_tracks, const BirthModel& birth,
                                      const SurvivalModel& survival, const ObservationModel& obs,
                                      const Measurements& z, const MixtureHygiene& hygiene = {})
{
    std::vector<ScoreRowPtr> rows;
    for (const auto& [label, track] : prior_tracks) {
        if (label.birth_time >= birth.scan()) {
            throw std::invalid_argument("score matrix: surviving label " + to_string(label) + " born too late");
        }
        rows.push_back(std::make_shared<const ScoreRow>(survival_row(label, *track, survival, obs, z, hygiene)));
    }
    std::sort(rows.begin(), rows.end(), [](const ScoreRowPtr& a, const ScoreRowPtr& b) { return a->label < b->label; });
    for (const auto& entry : birth.entries()) {
        rows.push_back(std::make_shared<const ScoreRow>(birth_row(entry, obs, z, hygiene)));
    }
    return ScoreMatrix(std::move(rows), z.size());
}

/// Multi-object transition density f(X_next | X_prev) under labeled
/// multi-Bernoulli birth and independent survival with linear-Gaussian motion.
inline double transition_density(const LabeledSet& x_prev, const LabeledSet& x_next, const BirthModel& birth,
                                 const SurvivalModel& survival)
{
    const auto prev_labels = detail::distinct_labels(x_prev);
    const auto next_labels = detail::distinct_labels(x_next);
    if (!prev_labels || !next_labels) {
        return 0.0;
    }
    auto find = [](const LabeledSet& set, const Label& label) -> const LabeledState* {
        for (const auto& s : set) {
            if (s.label == label) {
                return &s;
            }
        }
        return nullptr;
    };
    double value = 1.0;
    for (const auto& s : x_prev) {
        if (s.label.birth_time >= birth.scan()) {
            return 0.0;
        }
        const double ps = survival.survival.at(s.x);
        const LabeledState* next = find(x_next, s.label);
        if (next == nullptr) {
            value *= 1.0 - ps;
        } else {
            value *= ps * Gaussian(survival.motion.transition() * s.x, survival.motion.noise()).pdf(next->x);
        }
    }
    for (const auto& s : x_next) {
        if (find(x_prev, s.label) != nullptr) {
            continue;
        }
        const BirthEntry* entry = birth.find(s.label);
        if (entry == nullptr) {
            return 0.0;
        }
    }
    for (const auto& entry : birth.entries()) {
        const LabeledState* next = find(x_next, entry.label);
        value *= next == nullptr ? 1.0 - entry.probability : entry.probability * entry.density.pdf(next->x);
    }
    return value;
}

/// Σ over positive 1-1 maps θ: labels → {0..M} of Π ψ(x_ℓ, θ(ℓ)), without the
/// clutter-only normalizing constant. Exhaustive; for small inputs only.
inline double observation_likelihood(LabeledSet x, const Measurements& z, const ObservationModel& obs)
{
    if (!detail::distinct_labels(x)) {
        return 0.0;
    }
    // Label order fixes the summation order, so the result is exactly order-free.
    std::sort(x.begin(), x.end(), [](const LabeledState& a, const LabeledState& b) { return a.label < b.label; });
    std::vector<bool> used(z.size() + 1, false);
    const std::function<double(std::size_t)> recurse = [&](std::size_t i) -> double {
        if (i == x.size()) {
            return 1.0;
        }
        double sum = psi(obs, x[i].x, 0, z) * recurse(i + 1);
        for (std::size_t j = 1; j <= z.size(); ++j) {
            if (!used[j]) {
                used[j] = true;
                sum += psi(obs, x[i].x, static_cast<int>(j), z) * recurse(i + 1);
                used[j] = false;
            }
        }
        return sum;
    };
    return recurse(0);
}

}  // namespace lrfs
