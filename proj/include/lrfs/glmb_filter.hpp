#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lrfs/assoc.hpp"
#include "lrfs/densities.hpp"
#include "lrfs/kalman.hpp"
#include "lrfs/parallel.hpp"
#include "lrfs/rng.hpp"
#include "lrfs/standard_model.hpp"

namespace lrfs {

struct FilterConfig {
    std::size_t max_hypotheses = 1000;
    /// Total Gibbs sweeps per scan, split across parents by weight
    /// (at least one each). Zero means 10 sweeps per score-matrix row.
    std::size_t gibbs_iterations = 0;
    bool use_ranked_assignment = false;
    /// Total ranked assignments per scan, split across parents by weight.
    std::size_t requested_k_best = 1000;
    double existence_threshold = 1e-3;
    MixtureHygiene hygiene;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    void validate() const
    {
        if (max_hypotheses < 1) {
            throw std::invalid_argument("max_hypotheses must be at least 1");
        }
        if (requested_k_best < 1) {
            throw std::invalid_argument("requested_k_best must be at least 1");
        }
        if (!(existence_threshold > 0.0 && existence_threshold < 1.0)) {
            throw std::invalid_argument("existence_threshold must lie in (0, 1)");
        }
    }
};

// ---- two-stage exact recursion -----------------------------------------------

/// Exact prediction: every subset of survivors times every subset of births.
/// The predicted history gains a record for the birth scan with -1 for absent
/// labels and 0 as the placeholder for present ones (filled by glmb_update).
inline GlmbDensity glmb_predict(const GlmbDensity& prior, const BirthModel& birth, const SurvivalModel& survival)
{
    const auto births = birth.entries();
    std::unordered_map<const GaussianMixture*, std::pair<double, TrackPtr>> predicted_cache;
    std::vector<TrackPtr> birth_tracks;
    for (const auto& e : births) {
        birth_tracks.push_back(make_track(e.density));
    }
    std::vector<GlmbHypothesis> out;
    for (const auto& h : prior.hypotheses()) {
        const std::size_t n = h.labels.size();
        std::vector<double> survive(n);
        std::vector<TrackPtr> moved(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (h.labels[i].birth_time >= birth.scan()) {
                throw std::invalid_argument("glmb_predict: prior label born at or after the prediction scan");
            }
            auto it = predicted_cache.find(h.tracks[i].get());
            if (it == predicted_cache.end()) {
                const SurvivalSplit split = survival_split(*h.tracks[i], survival);
                TrackPtr track = split.survival_mass > 0.0 ? make_track(split.predicted.normalized()) : nullptr;
                it = predicted_cache.emplace(h.tracks[i].get(), std::make_pair(split.survival_mass, track)).first;
            }
            survive[i] = it->second.first;
            moved[i] = it->second.second;
        }
        const std::size_t total_bits = n + births.size();
        if (total_bits > 20) {
            throw std::invalid_argument("glmb_predict: too many labels for exact enumeration");
        }
        for (std::size_t mask = 0; mask < (std::size_t{1} << total_bits); ++mask) {
            GlmbHypothesis child;
            child.log_weight = h.log_weight;
            ScanAssociation record{birth.scan(), {}};
            for (std::size_t i = 0; i < total_bits; ++i) {
                const bool present = (mask >> i) & 1U;
                const bool is_birth = i >= n;
                const double p = is_birth ? births[i - n].probability : survive[i];
                const Label label = is_birth ? births[i - n].label : h.labels[i];
                child.log_weight += present ? std::log(p) : std::log1p(-p);
                record.entries.emplace_back(label, present ? 0 : -1);
                if (present) {
                    child.labels.push_back(label);
                    child.tracks.push_back(is_birth ? birth_tracks[i - n] : moved[i]);
                }
            }
            if (!(child.log_weight > -kInf)) {
                continue;
            }
            child.history = h.history.extended(std::move(record));
            out.push_back(std::move(child));
        }
    }
    return GlmbDensity(std::move(out));
}

/// Exact Bayes update: every positive 1-1 map from each hypothesis' labels
/// to {0, 1..M}.
inline GlmbDensity glmb_update(const GlmbDensity& predicted, const Measurements& z, const ObservationModel& obs,
                               const MixtureHygiene& hygiene = {})
{
    std::unordered_map<const GaussianMixture*, ScoreRowPtr> rows;
    std::vector<GlmbHypothesis> out;
    for (const auto& h : predicted.hypotheses()) {
        const ScanAssociation* last = h.history.last();
        if (last == nullptr) {
            throw std::invalid_argument("glmb_update: hypothesis has no predicted record");
        }
        std::vector<ScoreRowPtr> hyp_rows;
        for (std::size_t i = 0; i < h.labels.size(); ++i) {
            auto it = rows.find(h.tracks[i].get());
            if (it == rows.end()) {
                it = rows.emplace(h.tracks[i].get(), std::make_shared<const ScoreRow>(detection_row(
                                                         h.labels[i], 1.0, *h.tracks[i], obs, z, hygiene)))
                         .first;
            }
            hyp_rows.push_back(it->second);
        }
        std::vector<int> theta(h.labels.size(), 0);
        std::vector<bool> used(z.size() + 1, false);
        const std::function<void(std::size_t, double)> recurse = [&](std::size_t i, double log_w) {
            if (i == theta.size()) {
                GlmbHypothesis child;
                child.log_weight = log_w;
                child.labels = h.labels;
                ScanAssociation record = *last;
                for (std::size_t k = 0; k < theta.size(); ++k) {
                    child.tracks.push_back(hyp_rows[k]->posterior_at(theta[k]));
                    for (auto& entry : record.entries) {
                        if (entry.first == h.labels[k]) {
                            entry.second = theta[k];
                        }
                    }
                }
                child.history = h.history.with_last(std::move(record));
                out.push_back(std::move(child));
                return;
            }
            for (int j = 0; j <= static_cast<int>(z.size()); ++j) {
                const double e = hyp_rows[i]->at(j);
                if (!(e > 0.0) || (j > 0 && used[static_cast<std::size_t>(j)])) {
                    continue;
                }
                theta[i] = j;
                if (j > 0) {
                    used[static_cast<std::size_t>(j)] = true;
                }
                recurse(i + 1, log_w + std::log(e));
                if (j > 0) {
                    used[static_cast<std::size_t>(j)] = false;
                }
            }
        };
        recurse(0, h.log_weight);
    }
    return GlmbDensity(std::move(out));
}

// ---- truncation --------------------------------------------------------------

struct TruncationResult {
    GlmbDensity density;
    double l1_error;
    double l1_bound_normalized;
};

namespace detail {

/// Indices of `log_weights` by decreasing weight, ties by index.
inline std::vector<std::size_t> order_by_weight(std::span<const double> log_weights)
{
    std::vector<std::size_t> order(log_weights.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return log_weights[a] > log_weights[b]; });
    return order;
}

}  // namespace detail

/// Keeps the `budget` heaviest hypotheses. l1_error is the discarded weight;
/// the bound is 2(‖full‖ - ‖kept‖)/‖full‖ on the distance between the
/// normalized densities.
inline TruncationResult truncate(const GlmbDensity& g, std::size_t budget)
{
    if (budget < 1) {
        throw std::invalid_argument("truncate: budget must be at least 1");
    }
    std::vector<double> logs;
    for (const auto& h : g.hypotheses()) {
        logs.push_back(h.log_weight);
    }
    const auto order = detail::order_by_weight(logs);
    double full = 0.0;
    double dropped = 0.0;
    std::vector<GlmbHypothesis> kept;
    for (std::size_t r = 0; r < order.size(); ++r) {
        const double w = std::exp(logs[order[r]]);
        full += w;
        if (r < budget) {
            kept.push_back(g.hypotheses()[order[r]]);
        } else {
            dropped += w;
        }
    }
    return {GlmbDensity(std::move(kept)), dropped, 2.0 * dropped / full};
}

// ---- joint prediction-update -------------------------------------------------

struct StepReport {
    std::size_t parents = 0;
    std::size_t candidates = 0;
    std::size_t kept = 0;
    /// Weight fraction of generated children removed by the hypothesis cap.
    double discarded_l1 = 0.0;
    /// Unnormalized total weight of all generated children.
    double captured_mass = 0.0;
};

struct StepResult {
    GlmbDensity posterior;
    StepReport report;
};

namespace detail {

/// Starting point for a chain: each row's better non-detection outcome.
inline ExtendedAssociation gibbs_start(const Matrix& eta)
{
    ExtendedAssociation init(static_cast<std::size_t>(eta.rows()));
    for (Eigen::Index i = 0; i < eta.rows(); ++i) {
        init[static_cast<std::size_t>(i)] = eta(i, 1) > eta(i, 0) ? 0 : -1;
    }
    return init;
}

inline std::size_t share_of(std::size_t total, double weight)
{
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(total) * weight)));
}

/// Candidate associations for one score matrix, either ranked or sampled.
inline std::vector<WeightedAssociation> candidate_associations(const Matrix& eta, double parent_weight,
                                                               const FilterConfig& cfg, std::uint64_t seed)
{
    for (Eigen::Index i = 0; i < eta.rows(); ++i) {
        if (!(eta.row(i).maxCoeff() > 0.0)) {
            return {};
        }
    }
    std::vector<WeightedAssociation> out;
    if (cfg.use_ranked_assignment) {
        for (auto& ranked : murty_kbest(cost_matrix(eta), share_of(cfg.requested_k_best, parent_weight))) {
            out.push_back({std::move(ranked.gamma), -ranked.cost});
        }
        return out;
    }
    const std::size_t sweeps = cfg.gibbs_iterations > 0 ? share_of(cfg.gibbs_iterations, parent_weight)
                                                        : 10 * static_cast<std::size_t>(eta.rows());
    out = gibbs_sample(eta, sweeps, seed, gibbs_start(eta));
    std::erase_if(out, [](const WeightedAssociation& a) { return !(a.log_weight > -kInf); });
    return out;
}

inline Matrix stack_rows(std::span<const ScoreRowPtr> rows, std::size_t measurement_count)
{
    Matrix eta(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(measurement_count + 2));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < measurement_count + 2; ++c) {
            eta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i]->eta[c];
        }
    }
    return eta;
}

struct TrackKey {
    const GaussianMixture* track;
    Label label;
    friend bool operator==(const TrackKey&, const TrackKey&) = default;
};

struct TrackKeyHash {
    std::size_t operator()(const TrackKey& k) const noexcept
    {
        return std::hash<const void*>{}(k.track) ^ (LabelHash{}(k.label) * 0x9E3779B97F4A7C15ULL);
    }
};

/// Survival rows for every distinct (label, density) among `tracks`,
/// computed in parallel; lookup by key.
class SurvivalRowCache {
public:
    SurvivalRowCache(const std::vector<std::pair<Label, TrackPtr>>& tracks, const SurvivalModel& survival,
                     const ObservationModel& obs, const Measurements& z, const MixtureHygiene& hygiene,
                     unsigned threads)
    {
        std::vector<std::pair<Label, TrackPtr>> distinct;
        for (const auto& [label, track] : tracks) {
            if (index_.emplace(TrackKey{track.get(), label}, distinct.size()).second) {
                distinct.emplace_back(label, track);
            }
        }
        rows_.resize(distinct.size());
        parallel_for(distinct.size(), threads, [&](std::size_t i) {
            rows_[i] = std::make_shared<const ScoreRow>(
                survival_row(distinct[i].first, *distinct[i].second, survival, obs, z, hygiene));
        });
    }

    const ScoreRowPtr& at(const Label& label, const TrackPtr& track) const
    {
        return rows_[index_.at(TrackKey{track.get(), label})];
    }

private:
    std::unordered_map<TrackKey, std::size_t, TrackKeyHash> index_;
    std::vector<ScoreRowPtr> rows_;
};

}  // namespace detail

/// One filtering step without forming the predicted density: per parent,
/// score rows for its labels and the births, candidate associations from
/// Gibbs sampling or ranked assignment, children weighted by Π η, then the
/// hypothesis cap.
inline StepResult joint_step(const GlmbDensity& prior, const Measurements& z, const BirthModel& birth,
                             const SurvivalModel& survival, const ObservationModel& obs, const FilterConfig& cfg)
{
    cfg.validate();
    const int scan = birth.scan();
    const auto parents = prior.hypotheses();

    std::vector<std::pair<Label, TrackPtr>> all_tracks;
    for (const auto& h : parents) {
        for (std::size_t i = 0; i < h.labels.size(); ++i) {
            if (h.labels[i].birth_time >= scan) {
                throw std::invalid_argument("joint_step: prior label born at or after the current scan");
            }
            all_tracks.emplace_back(h.labels[i], h.tracks[i]);
        }
    }
    const detail::SurvivalRowCache survivors(all_tracks, survival, obs, z, cfg.hygiene, cfg.threads);
    std::vector<ScoreRowPtr> birth_rows;
    for (const auto& e : birth.entries()) {
        birth_rows.push_back(std::make_shared<const ScoreRow>(birth_row(e, obs, z, cfg.hygiene)));
    }

    std::vector<std::vector<GlmbHypothesis>> children(parents.size());
    parallel_for(parents.size(), cfg.threads, [&](std::size_t p) {
        const auto& parent = parents[p];
        std::vector<ScoreRowPtr> rows;
        for (std::size_t i = 0; i < parent.labels.size(); ++i) {
            rows.push_back(survivors.at(parent.labels[i], parent.tracks[i]));
        }
        rows.insert(rows.end(), birth_rows.begin(), birth_rows.end());
        const Matrix eta = detail::stack_rows(rows, z.size());
        const auto seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(scan), static_cast<std::uint64_t>(p)});
        const auto candidates = detail::candidate_associations(eta, std::exp(parent.log_weight), cfg, seed);
        auto& out = children[p];
        out.reserve(candidates.size());
        for (const auto& cand : candidates) {
            GlmbHypothesis child;
            child.log_weight = parent.log_weight + cand.log_weight;
            ScanAssociation record{scan, {}};
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const int v = cand.gamma[i];
                record.entries.emplace_back(rows[i]->label, v);
                if (v >= 0) {
                    child.labels.push_back(rows[i]->label);
                    child.tracks.push_back(rows[i]->posterior_at(v));
                }
            }
            child.history = parent.history.extended(std::move(record));
            out.push_back(std::move(child));
        }
    });

    std::vector<GlmbHypothesis> pool;
    for (auto& group : children) {
        for (auto& c : group) {
            pool.push_back(std::move(c));
        }
    }
    StepReport report;
    report.parents = parents.size();
    report.candidates = pool.size();
    if (pool.empty()) {
        throw NumericalError("joint_step: no child hypothesis has positive weight");
    }
    std::vector<double> logs;
    logs.reserve(pool.size());
    for (const auto& h : pool) {
        logs.push_back(h.log_weight);
    }
    const double log_total = log_sum_exp(logs);
    report.captured_mass = std::exp(log_total);
    const auto order = detail::order_by_weight(logs);
    std::vector<GlmbHypothesis> kept;
    double dropped = 0.0;
    for (std::size_t r = 0; r < order.size(); ++r) {
        if (r < cfg.max_hypotheses) {
            kept.push_back(std::move(pool[order[r]]));
        } else {
            dropped += std::exp(logs[order[r]] - log_total);
        }
    }
    report.kept = kept.size();
    report.discarded_l1 = dropped;
    return {GlmbDensity(std::move(kept)), report};
}

// ---- labeled multi-Bernoulli filter ------------------------------------------

inline LmbDensity lmb_predict(const LmbDensity& prior, const BirthModel& birth, const SurvivalModel& survival)
{
    std::map<Label, BernoulliRfs> out;
    for (const auto& [label, track] : prior.tracks()) {
        if (birth.find(label) != nullptr) {
            throw std::invalid_argument("lmb_predict: label " + to_string(label) + " is both surviving and born");
        }
        const SurvivalSplit split = survival_split(track.density(), survival);
        if (split.survival_mass > 0.0 && track.existence() > 0.0) {
            out.emplace(label, BernoulliRfs(track.existence() * split.survival_mass, split.predicted.normalized()));
        }
    }
    for (const auto& e : birth.entries()) {
        out.emplace(e.label, BernoulliRfs(e.probability, e.density));
    }
    return LmbDensity(std::move(out));
}

struct LmbStepResult {
    LmbDensity posterior;
    /// The GLMB whose first moment the posterior matches.
    GlmbDensity intermediate;
};

/// Collapses a labeled density to an LMB with the same per-label existence
/// and density; existence is capped just below one.
inline LmbDensity collapse_to_lmb(const GlmbDensity& g, double existence_threshold, const MixtureHygiene& hygiene)
{
    std::map<Label, BernoulliRfs> tracks;
    for (auto& [label, marginal] : phd(g)) {
        if (marginal.existence < existence_threshold) {
            continue;
        }
        const double r = std::min(marginal.existence, std::nextafter(1.0, 0.0));
        tracks.emplace(label, BernoulliRfs(r, mixture_reduce(marginal.density, hygiene)));
    }
    return LmbDensity(std::move(tracks));
}

inline LmbStepResult lmb_filter_step_detailed(const LmbDensity& prior, const Measurements& z, const BirthModel& birth,
                                              const SurvivalModel& survival, const ObservationModel& obs,
                                              const FilterConfig& cfg)
{
    cfg.validate();
    const LmbDensity predicted = lmb_predict(prior, birth, survival);
    std::vector<ScoreRowPtr> rows;
    for (const auto& [label, track] : predicted.tracks()) {
        rows.push_back(std::make_shared<const ScoreRow>(
            detection_row(label, track.existence(), track.density(), obs, z, cfg.hygiene)));
    }
    const Matrix eta = detail::stack_rows(rows, z.size());
    const auto seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(birth.scan()), 0xB0ULL});
    const auto candidates = detail::candidate_associations(eta, 1.0, cfg, seed);
    std::vector<GlmbHypothesis> hyps;
    for (const auto& cand : candidates) {
        GlmbHypothesis h;
        h.log_weight = cand.log_weight;
        ScanAssociation record{birth.scan(), {}};
        for (std::size_t i = 0; i < rows.size(); ++i) {
            record.entries.emplace_back(rows[i]->label, cand.gamma[i]);
            if (cand.gamma[i] >= 0) {
                h.labels.push_back(rows[i]->label);
                h.tracks.push_back(rows[i]->posterior_at(cand.gamma[i]));
            }
        }
        h.history = AssociationHistory{}.extended(std::move(record));
        hyps.push_back(std::move(h));
    }
    GlmbDensity intermediate(std::move(hyps));
    LmbDensity posterior = collapse_to_lmb(intermediate, cfg.existence_threshold, cfg.hygiene);
    return {std::move(posterior), std::move(intermediate)};
}

inline LmbDensity lmb_filter_step(const LmbDensity& prior, const Measurements& z, const BirthModel& birth,
                                  const SurvivalModel& survival, const ObservationModel& obs, const FilterConfig& cfg)
{
    return lmb_filter_step_detailed(prior, z, birth, survival, obs, cfg).posterior;
}

// ---- approximations and estimators -------------------------------------------

/// One hypothesis per label set: summed weight and weight-mixed densities.
/// A merged hypothesis keeps the history of its heaviest member.
inline GlmbDensity marginalize_to_mglmb(const GlmbDensity& g)
{
    std::map<LabelSet, std::vector<std::size_t>> groups;
    std::vector<LabelSet> first_seen;
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto& group = groups[g.hypotheses()[i].labels];
        if (group.empty()) {
            first_seen.push_back(g.hypotheses()[i].labels);
        }
        group.push_back(i);
    }
    std::vector<GlmbHypothesis> out;
    for (const auto& labels : first_seen) {
        const auto& members = groups.at(labels);
        if (members.size() == 1) {
            out.push_back(g.hypotheses()[members.front()]);
            continue;
        }
        std::vector<double> logs;
        std::size_t heaviest = members.front();
        for (const auto idx : members) {
            logs.push_back(g.hypotheses()[idx].log_weight);
            if (g.hypotheses()[idx].log_weight > g.hypotheses()[heaviest].log_weight) {
                heaviest = idx;
            }
        }
        GlmbHypothesis merged;
        merged.log_weight = log_sum_exp(logs);
        merged.labels = labels;
        merged.history = g.hypotheses()[heaviest].history;
        for (std::size_t k = 0; k < labels.size(); ++k) {
            std::vector<WeightedGaussian> comps;
            for (const auto idx : members) {
                const auto& h = g.hypotheses()[idx];
                const double w = std::exp(h.log_weight - merged.log_weight);
                for (const auto& c : h.tracks[k]->components()) {
                    comps.push_back({w * c.weight, c.gaussian});
                }
            }
            merged.tracks.push_back(make_track(GaussianMixture(std::move(comps)).normalized()));
        }
        out.push_back(std::move(merged));
    }
    return GlmbDensity(std::move(out));
}

enum class EstimatorKind { glmb, label_mam, phd_mam, phd_jom };

struct Estimator {
    EstimatorKind kind = EstimatorKind::glmb;
    /// Existence threshold of the phd_jom estimator.
    double threshold = 0.5;
};

struct TrackEstimate {
    Label label;
    Vector mean;
    Matrix covariance;
    double existence;
    double weight;
};

namespace detail {

inline std::size_t argmax_first(std::span<const double> values)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) {
            best = i;
        }
    }
    return best;
}

inline std::vector<TrackEstimate> estimates_from_phd(const PhdMap& marginals, const LabelSet& labels, double weight)
{
    std::vector<TrackEstimate> out;
    for (const auto& label : labels) {
        const auto& m = marginals.at(label);
        out.push_back({label, m.density.mean(), m.density.covariance(), m.existence, weight});
    }
    return out;
}

}  // namespace detail

/// Labeled state estimate, sorted by label.
inline std::vector<TrackEstimate> estimate(const GlmbDensity& g, const Estimator& estimator = {})
{
    const PhdMap marginals = phd(g);
    switch (estimator.kind) {
    case EstimatorKind::glmb: {
        const auto card = cardinality_distribution(g);
        const std::size_t n_star = detail::argmax_first(card);
        std::size_t best = g.size();
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (g.hypotheses()[i].labels.size() == n_star
                && (best == g.size() || g.hypotheses()[i].log_weight > g.hypotheses()[best].log_weight)) {
                best = i;
            }
        }
        const auto& h = g.hypotheses()[best];
        std::vector<TrackEstimate> out;
        for (std::size_t k = 0; k < h.labels.size(); ++k) {
            out.push_back({h.labels[k], h.tracks[k]->mean(), h.tracks[k]->covariance(),
                           marginals.at(h.labels[k]).existence, g.weight(best)});
        }
        return out;
    }
    case EstimatorKind::label_mam: {
        std::map<LabelSet, double> by_set;
        for (std::size_t i = 0; i < g.size(); ++i) {
            by_set[g.hypotheses()[i].labels] += g.weight(i);
        }
        auto best = by_set.begin();
        for (auto it = by_set.begin(); it != by_set.end(); ++it) {
            if (it->second > best->second) {
                best = it;
            }
        }
        return detail::estimates_from_phd(marginals, best->first, best->second);
    }
    case EstimatorKind::phd_jom: {
        LabelSet labels;
        for (const auto& [label, m] : marginals) {
            if (m.existence > estimator.threshold) {
                labels.push_back(label);
            }
        }
        auto out = detail::estimates_from_phd(marginals, labels, 0.0);
        for (auto& e : out) {
            e.weight = e.existence;
        }
        return out;
    }
    case EstimatorKind::phd_mam: {
        const auto card = cardinality_distribution(g);
        const std::size_t n_star = detail::argmax_first(card);
        std::vector<std::pair<Label, double>> ranked;
        for (const auto& [label, m] : marginals) {
            ranked.emplace_back(label, m.existence);
        }
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        LabelSet labels;
        for (std::size_t i = 0; i < std::min(n_star, ranked.size()); ++i) {
            labels.push_back(ranked[i].first);
        }
        std::sort(labels.begin(), labels.end());
        auto out = detail::estimates_from_phd(marginals, labels, 0.0);
        for (auto& e : out) {
            e.weight = e.existence;
        }
        return out;
    }
    }
    throw std::invalid_argument("estimate: unknown estimator");
}

}  // namespace lrfs
