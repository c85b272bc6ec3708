#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lrfs/gaussian.hpp"
#include "lrfs/label.hpp"

namespace lrfs {

/// Track densities are immutable and shared between hypotheses.
using TrackPtr = std::shared_ptr<const GaussianMixture>;

inline TrackPtr make_track(GaussianMixture density)
{
    if (!density.is_normalized()) {
        throw std::invalid_argument("track density must integrate to one");
    }
    return std::make_shared<const GaussianMixture>(std::move(density));
}

struct LabeledState {
    Label label;
    Vector x;
};

using LabeledSet = std::vector<LabeledState>;
using PointSet = std::vector<Vector>;

namespace detail {

inline void require_normalized(const GaussianMixture& density, const char* what)
{
    if (density.empty() || !density.is_normalized()) {
        throw std::invalid_argument(std::string(what) + ": density must be a normalized, non-empty mixture");
    }
}

inline void require_probability_vector(std::span<const double> p, const char* what)
{
    double total = 0.0;
    for (const double v : p) {
        if (!(v >= 0.0)) {
            throw std::invalid_argument(std::string(what) + ": negative probability");
        }
        total += v;
    }
    if (p.empty() || std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument(std::string(what) + ": probabilities must sum to one");
    }
}

inline void require_dim(const Vector& x, int dim)
{
    if (x.size() != dim) {
        throw std::invalid_argument("point dimension " + std::to_string(x.size()) + " does not match model dimension "
                                    + std::to_string(dim));
    }
}

/// Sorted labels of X, or nullopt when a label repeats.
inline std::optional<LabelSet> distinct_labels(const LabeledSet& x)
{
    LabelSet labels;
    labels.reserve(x.size());
    for (const auto& s : x) {
        labels.push_back(s.label);
    }
    std::sort(labels.begin(), labels.end());
    if (std::adjacent_find(labels.begin(), labels.end()) != labels.end()) {
        return std::nullopt;
    }
    return labels;
}

}  // namespace detail

/// Empty with probability 1 - r, otherwise a single point drawn from density.
class BernoulliRfs {
public:
    BernoulliRfs(double existence, GaussianMixture density) : existence_(existence), density_(std::move(density))
    {
        if (!(existence_ >= 0.0 && existence_ < 1.0)) {
            throw std::invalid_argument("bernoulli: existence probability must lie in [0, 1)");
        }
        detail::require_normalized(density_, "bernoulli");
    }

    double existence() const { return existence_; }
    const GaussianMixture& density() const { return density_; }

private:
    double existence_;
    GaussianMixture density_;
};

/// Union of independent Bernoulli components (unlabeled).
class MultiBernoulli {
public:
    MultiBernoulli() = default;
    explicit MultiBernoulli(std::vector<BernoulliRfs> components) : components_(std::move(components)) {}

    std::span<const BernoulliRfs> components() const { return components_; }

private:
    std::vector<BernoulliRfs> components_;
};

/// Poisson RFS with intensity rate · density.
class PoissonRfs {
public:
    PoissonRfs(double rate, GaussianMixture density) : rate_(rate), density_(std::move(density))
    {
        if (!(rate_ >= 0.0) || !std::isfinite(rate_)) {
            throw std::invalid_argument("poisson: rate must be finite and non-negative");
        }
        detail::require_normalized(density_, "poisson");
    }

    double rate() const { return rate_; }
    const GaussianMixture& density() const { return density_; }
    GaussianMixture intensity() const { return density_.scaled(rate_); }

private:
    double rate_;
    GaussianMixture density_;
};

/// Unlabeled i.i.d. cluster: cardinality law with i.i.d. points.
class IidCluster {
public:
    IidCluster(std::vector<double> cardinality, GaussianMixture density)
        : cardinality_(std::move(cardinality)), density_(std::move(density))
    {
        detail::require_probability_vector(cardinality_, "iid cluster");
        detail::require_normalized(density_, "iid cluster");
    }

    std::span<const double> cardinality() const { return cardinality_; }
    const GaussianMixture& density() const { return density_; }

private:
    std::vector<double> cardinality_;
    GaussianMixture density_;
};

/// Labeled i.i.d. cluster: n points carry the first n labels
/// (birth_time, 1), ..., (birth_time, n).
class LabeledIidCluster {
public:
    LabeledIidCluster(std::vector<double> cardinality, GaussianMixture density, std::size_t n_max, int birth_time = 0)
        : cardinality_(std::move(cardinality)), density_(std::move(density)), birth_time_(birth_time)
    {
        if (cardinality_.size() != n_max + 1) {
            throw std::invalid_argument("labeled iid cluster: cardinality vector must have n_max + 1 entries");
        }
        detail::require_probability_vector(cardinality_, "labeled iid cluster");
        detail::require_normalized(density_, "labeled iid cluster");
    }

    std::span<const double> cardinality() const { return cardinality_; }
    const GaussianMixture& density() const { return density_; }
    std::size_t n_max() const { return cardinality_.size() - 1; }
    Label label(std::size_t i) const { return Label{birth_time_, static_cast<int>(i + 1)}; }

private:
    std::vector<double> cardinality_;
    GaussianMixture density_;
    int birth_time_;
};

/// Labeled multi-Bernoulli: one independent Bernoulli per label.
class LmbDensity {
public:
    LmbDensity() = default;
    explicit LmbDensity(std::map<Label, BernoulliRfs> tracks) : tracks_(std::move(tracks))
    {
        for (const auto& [label, track] : tracks_) {
            require_valid_label(label);
            if (track.density().dim() != tracks_.begin()->second.density().dim()) {
                throw std::invalid_argument("lmb: tracks differ in attribute dimension");
            }
        }
    }

    const std::map<Label, BernoulliRfs>& tracks() const { return tracks_; }
    std::size_t size() const { return tracks_.size(); }
    LabelSet labels() const
    {
        LabelSet out;
        for (const auto& entry : tracks_) {
            out.push_back(entry.first);
        }
        return out;
    }
    const BernoulliRfs* find(const Label& label) const
    {
        const auto it = tracks_.find(label);
        return it == tracks_.end() ? nullptr : &it->second;
    }

private:
    std::map<Label, BernoulliRfs> tracks_;
};

/// One scan of an association history: each label in the scan's domain maps
/// to -1 (dead or not born), 0 (missed) or the 1-based detection index.
struct ScanAssociation {
    int scan = 0;
    std::vector<std::pair<Label, int>> entries;  // sorted by label

    friend bool operator==(const ScanAssociation&, const ScanAssociation&) = default;

    std::optional<int> value(const Label& label) const
    {
        const auto it = std::lower_bound(entries.begin(), entries.end(), label,
                                         [](const auto& e, const Label& l) { return e.first < l; });
        if (it == entries.end() || it->first != label) {
            return std::nullopt;
        }
        return it->second;
    }
};

inline void require_valid_scan_association(const ScanAssociation& record)
{
    for (std::size_t i = 1; i < record.entries.size(); ++i) {
        if (!(record.entries[i - 1].first < record.entries[i].first)) {
            throw std::invalid_argument("association record: labels must be strictly increasing");
        }
    }
    std::vector<int> positives;
    for (const auto& [label, value] : record.entries) {
        if (value < -1) {
            throw std::invalid_argument("association record: values must be >= -1");
        }
        if (value > 0) {
            positives.push_back(value);
        }
    }
    std::sort(positives.begin(), positives.end());
    if (std::adjacent_find(positives.begin(), positives.end()) != positives.end()) {
        throw std::invalid_argument("association record: detection assigned to two labels");
    }
}

/// Persistent (structurally shared) list of per-scan association records.
class AssociationHistory {
public:
    AssociationHistory() = default;

    AssociationHistory extended(ScanAssociation record) const
    {
        require_valid_scan_association(record);
        if (tail_ && record.scan <= tail_->record.scan) {
            throw std::invalid_argument("association history: scans must increase");
        }
        return AssociationHistory(std::make_shared<const Node>(std::move(record), tail_));
    }

    /// Replaces the most recent record (same scan).
    AssociationHistory with_last(ScanAssociation record) const
    {
        if (!tail_ || tail_->record.scan != record.scan) {
            throw std::invalid_argument("association history: no record at that scan to replace");
        }
        require_valid_scan_association(record);
        return AssociationHistory(std::make_shared<const Node>(std::move(record), tail_->prev));
    }

    bool empty() const { return !tail_; }
    std::size_t size() const { return tail_ ? tail_->depth : 0; }
    std::size_t hash() const { return tail_ ? tail_->hash : 0; }
    const ScanAssociation* last() const { return tail_ ? &tail_->record : nullptr; }

    /// Records in chronological order.
    std::vector<ScanAssociation> records() const
    {
        std::vector<ScanAssociation> out;
        for (const Node* n = tail_.get(); n != nullptr; n = n->prev.get()) {
            out.push_back(n->record);
        }
        std::reverse(out.begin(), out.end());
        return out;
    }

    friend bool operator==(const AssociationHistory& a, const AssociationHistory& b)
    {
        const Node* x = a.tail_.get();
        const Node* y = b.tail_.get();
        if (a.size() != b.size() || a.hash() != b.hash()) {
            return false;
        }
        while (x != y) {
            if (x == nullptr || y == nullptr || !(x->record == y->record)) {
                return false;
            }
            x = x->prev.get();
            y = y->prev.get();
        }
        return true;
    }

private:
    struct Node {
        Node(ScanAssociation r, std::shared_ptr<const Node> p) : record(std::move(r)), prev(std::move(p))
        {
            std::size_t h = prev ? prev->hash : 0x51ED270B27B5A3ULL;
            auto mix = [&h](std::size_t v) { h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6U) + (h >> 2U); };
            mix(static_cast<std::size_t>(record.scan));
            for (const auto& [label, value] : record.entries) {
                mix(LabelHash{}(label));
                mix(static_cast<std::size_t>(value + 2));
            }
            hash = h;
            depth = prev ? prev->depth + 1 : 1;
        }
        ScanAssociation record;
        std::shared_ptr<const Node> prev;
        std::size_t hash = 0;
        std::size_t depth = 0;
    };

    explicit AssociationHistory(std::shared_ptr<const Node> tail) : tail_(std::move(tail)) {}

    std::shared_ptr<const Node> tail_;
};

/// A weighted hypothesis (history, label set) with one density per label;
/// tracks[i] belongs to labels[i].
struct GlmbHypothesis {
    double log_weight = 0.0;
    LabelSet labels;
    std::vector<TrackPtr> tracks;
    AssociationHistory history;

    const GaussianMixture* track(const Label& label) const
    {
        const auto it = std::lower_bound(labels.begin(), labels.end(), label);
        if (it == labels.end() || *it != label) {
            return nullptr;
        }
        return tracks[static_cast<std::size_t>(it - labels.begin())].get();
    }
};

/// Generalized labeled multi-Bernoulli density in δ-GLMB form. Weights are held
/// as normalized logarithms; zero-weight hypotheses are dropped on construction.
class GlmbDensity {
public:
    /// The density of the empty set.
    GlmbDensity() { hypotheses_.push_back(GlmbHypothesis{}); }

    explicit GlmbDensity(std::vector<GlmbHypothesis> hypotheses)
    {
        std::erase_if(hypotheses, [](const GlmbHypothesis& h) { return !(h.log_weight > -kInf); });
        if (hypotheses.empty()) {
            throw std::invalid_argument("glmb: no hypothesis with positive weight");
        }
        std::vector<double> logs;
        logs.reserve(hypotheses.size());
        for (const auto& h : hypotheses) {
            if (std::isnan(h.log_weight) || h.log_weight == kInf) {
                throw std::invalid_argument("glmb: non-finite hypothesis weight");
            }
            if (!is_strictly_increasing(h.labels)) {
                throw std::invalid_argument("glmb: hypothesis labels must be sorted and distinct");
            }
            if (h.tracks.size() != h.labels.size()) {
                throw std::invalid_argument("glmb: one track density per label required");
            }
            for (const auto& t : h.tracks) {
                if (!t) {
                    throw std::invalid_argument("glmb: missing track density");
                }
            }
            logs.push_back(h.log_weight);
        }
        const double log_total = log_sum_exp(logs);
        for (auto& h : hypotheses) {
            h.log_weight -= log_total;
        }
        hypotheses_ = std::move(hypotheses);
    }

    static GlmbDensity from_lmb(const LmbDensity& lmb);

    std::span<const GlmbHypothesis> hypotheses() const { return hypotheses_; }
    std::size_t size() const { return hypotheses_.size(); }
    double weight(std::size_t i) const { return std::exp(hypotheses_[i].log_weight); }

    LabelSet label_universe() const
    {
        LabelSet all;
        for (const auto& h : hypotheses_) {
            all.insert(all.end(), h.labels.begin(), h.labels.end());
        }
        std::sort(all.begin(), all.end());
        all.erase(std::unique(all.begin(), all.end()), all.end());
        return all;
    }

    /// True when no two hypotheses share (history, label set).
    bool has_unique_keys() const
    {
        std::unordered_multimap<std::size_t, std::size_t> seen;
        for (std::size_t i = 0; i < hypotheses_.size(); ++i) {
            const auto& h = hypotheses_[i];
            const auto range = seen.equal_range(h.history.hash());
            for (auto it = range.first; it != range.second; ++it) {
                const auto& other = hypotheses_[it->second];
                if (other.labels == h.labels && other.history == h.history) {
                    return false;
                }
            }
            seen.emplace(h.history.hash(), i);
        }
        return true;
    }

private:
    std::vector<GlmbHypothesis> hypotheses_;
};

/// Enumerates every label subset of the LMB as one hypothesis.
inline GlmbDensity GlmbDensity::from_lmb(const LmbDensity& lmb)
{
    const LabelSet labels = lmb.labels();
    if (labels.size() > 20) {
        throw std::invalid_argument("glmb from lmb: too many labels to enumerate");
    }
    std::vector<TrackPtr> tracks;
    for (const auto& label : labels) {
        tracks.push_back(make_track(lmb.find(label)->density()));
    }
    std::vector<GlmbHypothesis> hyps;
    for (std::size_t mask = 0; mask < (std::size_t{1} << labels.size()); ++mask) {
        GlmbHypothesis h;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const double r = lmb.find(labels[i])->existence();
            if ((mask >> i) & 1U) {
                h.log_weight += std::log(r);
                h.labels.push_back(labels[i]);
                h.tracks.push_back(tracks[i]);
            } else {
                h.log_weight += std::log1p(-r);
            }
        }
        hyps.push_back(std::move(h));
    }
    return GlmbDensity(std::move(hyps));
}

// ---- density evaluation ------------------------------------------------------

inline double eval_density(const BernoulliRfs& model, const PointSet& x)
{
    if (x.empty()) {
        return 1.0 - model.existence();
    }
    if (x.size() > 1) {
        return 0.0;
    }
    detail::require_dim(x.front(), model.density().dim());
    return model.existence() * model.density().pdf(x.front());
}

inline double eval_density(const MultiBernoulli& model, const PointSet& x)
{
    const auto comps = model.components();
    double empty_weight = 1.0;
    for (const auto& c : comps) {
        empty_weight *= 1.0 - c.existence();
    }
    if (x.size() > comps.size()) {
        return 0.0;
    }
    for (const auto& p : x) {
        detail::require_dim(p, comps.front().density().dim());
    }
    std::vector<bool> used(comps.size(), false);
    const std::function<double(std::size_t)> assign = [&](std::size_t point) -> double {
        if (point == x.size()) {
            return 1.0;
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < comps.size(); ++j) {
            if (used[j]) {
                continue;
            }
            const double r = comps[j].existence();
            used[j] = true;
            sum += r / (1.0 - r) * comps[j].density().pdf(x[point]) * assign(point + 1);
            used[j] = false;
        }
        return sum;
    };
    return empty_weight * assign(0);
}

inline double eval_density(const PoissonRfs& model, const PointSet& x)
{
    double value = std::exp(-model.rate());
    for (const auto& p : x) {
        detail::require_dim(p, model.density().dim());
        value *= model.rate() * model.density().pdf(p);
    }
    return value;
}

inline double eval_density(const IidCluster& model, const PointSet& x)
{
    if (x.size() >= model.cardinality().size()) {
        return 0.0;
    }
    double value = model.cardinality()[x.size()] * std::tgamma(static_cast<double>(x.size()) + 1.0);
    for (const auto& p : x) {
        detail::require_dim(p, model.density().dim());
        value *= model.density().pdf(p);
    }
    return value;
}

inline double eval_density(const LabeledIidCluster& model, const LabeledSet& x)
{
    const auto labels = detail::distinct_labels(x);
    if (!labels || x.size() > model.n_max()) {
        return 0.0;
    }
    for (std::size_t i = 0; i < labels->size(); ++i) {
        if ((*labels)[i] != model.label(i)) {
            return 0.0;
        }
    }
    double value = model.cardinality()[x.size()];
    for (const auto& s : x) {
        detail::require_dim(s.x, model.density().dim());
        value *= model.density().pdf(s.x);
    }
    return value;
}

inline double eval_density(const LmbDensity& model, const LabeledSet& x)
{
    const auto labels = detail::distinct_labels(x);
    if (!labels) {
        return 0.0;
    }
    for (const auto& s : x) {
        const BernoulliRfs* track = model.find(s.label);
        if (track == nullptr) {
            return 0.0;
        }
        detail::require_dim(s.x, track->density().dim());
    }
    double value = 1.0;
    for (const auto& [label, track] : model.tracks()) {
        if (!std::binary_search(labels->begin(), labels->end(), label)) {
            value *= 1.0 - track.existence();
        }
    }
    for (const auto& s : x) {
        const BernoulliRfs* track = model.find(s.label);
        value *= track->existence() * track->density().pdf(s.x);
    }
    return value;
}

inline double eval_density(const GlmbDensity& model, const LabeledSet& x)
{
    const auto labels = detail::distinct_labels(x);
    if (!labels) {
        return 0.0;
    }
    double value = 0.0;
    for (const auto& h : model.hypotheses()) {
        if (h.labels != *labels) {
            continue;
        }
        double term = std::exp(h.log_weight);
        for (const auto& s : x) {
            const GaussianMixture* p = h.track(s.label);
            detail::require_dim(s.x, p->dim());
            term *= p->pdf(s.x);
        }
        value += term;
    }
    return value;
}

// ---- cardinality -------------------------------------------------------------

inline std::vector<double> cardinality_distribution(std::span<const double> existence)
{
    std::vector<double> dist{1.0};
    for (const double r : existence) {
        std::vector<double> next(dist.size() + 1, 0.0);
        for (std::size_t n = 0; n < dist.size(); ++n) {
            next[n] += dist[n] * (1.0 - r);
            next[n + 1] += dist[n] * r;
        }
        dist = std::move(next);
    }
    return dist;
}

inline std::vector<double> cardinality_distribution(const MultiBernoulli& model)
{
    std::vector<double> r;
    for (const auto& c : model.components()) {
        r.push_back(c.existence());
    }
    return cardinality_distribution(r);
}

inline std::vector<double> cardinality_distribution(const LmbDensity& model)
{
    std::vector<double> r;
    for (const auto& entry : model.tracks()) {
        r.push_back(entry.second.existence());
    }
    return cardinality_distribution(r);
}

/// Length is (number of distinct labels) + 1.
inline std::vector<double> cardinality_distribution(const GlmbDensity& model)
{
    std::vector<double> dist(model.label_universe().size() + 1, 0.0);
    for (std::size_t i = 0; i < model.size(); ++i) {
        dist[model.hypotheses()[i].labels.size()] += model.weight(i);
    }
    return dist;
}

inline std::vector<double> cardinality_distribution(const LabeledIidCluster& model)
{
    return {model.cardinality().begin(), model.cardinality().end()};
}

inline std::vector<double> cardinality_distribution(const IidCluster& model)
{
    return {model.cardinality().begin(), model.cardinality().end()};
}

// ---- first moments and joint existence ---------------------------------------

struct LabelMarginal {
    double existence;
    GaussianMixture density;
};

using PhdMap = std::map<Label, LabelMarginal>;

inline PhdMap phd(const LmbDensity& model)
{
    PhdMap out;
    for (const auto& [label, track] : model.tracks()) {
        out.emplace(label, LabelMarginal{track.existence(), track.density()});
    }
    return out;
}

/// Existence and weight-mixed density per label. Hypotheses that share a
/// track density contribute a single mixture term.
inline PhdMap phd(const GlmbDensity& model)
{
    struct Accumulator {
        double existence = 0.0;
        std::vector<std::pair<const GaussianMixture*, double>> terms;
        std::unordered_map<const GaussianMixture*, std::size_t> index;
    };
    std::map<Label, Accumulator> acc;
    for (std::size_t i = 0; i < model.size(); ++i) {
        const auto& h = model.hypotheses()[i];
        const double w = model.weight(i);
        for (std::size_t j = 0; j < h.labels.size(); ++j) {
            auto& a = acc[h.labels[j]];
            a.existence += w;
            const GaussianMixture* p = h.tracks[j].get();
            const auto [it, inserted] = a.index.emplace(p, a.terms.size());
            if (inserted) {
                a.terms.emplace_back(p, w);
            } else {
                a.terms[it->second].second += w;
            }
        }
    }
    PhdMap out;
    for (auto& [label, a] : acc) {
        std::vector<WeightedGaussian> comps;
        for (const auto& [p, w] : a.terms) {
            for (const auto& c : p->components()) {
                comps.push_back({w * c.weight, c.gaussian});
            }
        }
        auto mixture = GaussianMixture(std::move(comps));
        out.emplace(label, LabelMarginal{std::min(a.existence, 1.0), mixture.normalized()});
    }
    return out;
}

/// Probability that the label set is exactly `labels`.
inline double joint_existence(const GlmbDensity& model, LabelSet labels)
{
    std::sort(labels.begin(), labels.end());
    double total = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        if (model.hypotheses()[i].labels == labels) {
            total += model.weight(i);
        }
    }
    return total;
}

/// Probability that every label in `labels` exists, regardless of others.
inline double joint_existence_superset(const GlmbDensity& model, LabelSet labels)
{
    std::sort(labels.begin(), labels.end());
    double total = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        const auto& have = model.hypotheses()[i].labels;
        if (std::includes(have.begin(), have.end(), labels.begin(), labels.end())) {
            total += model.weight(i);
        }
    }
    return total;
}

// ---- brute-force set integration ---------------------------------------------

/// Cell centres and the common cell volume of a rectangular grid.
struct AttributeGrid {
    std::vector<Vector> points;
    double cell_volume = 0.0;

    static AttributeGrid box(const Vector& lo, const Vector& hi, int cells_per_dim)
    {
        if (lo.size() != hi.size() || lo.size() == 0 || cells_per_dim < 1 || !((hi - lo).minCoeff() > 0.0)) {
            throw std::invalid_argument("attribute grid: need a non-empty box and at least one cell");
        }
        const int d = static_cast<int>(lo.size());
        const Vector step = (hi - lo) / cells_per_dim;
        AttributeGrid grid;
        grid.cell_volume = step.prod();
        std::vector<int> digits(d, 0);
        while (true) {
            Vector x(d);
            for (int k = 0; k < d; ++k) {
                x(k) = lo(k) + (digits[k] + 0.5) * step(k);
            }
            grid.points.push_back(std::move(x));
            int k = 0;
            while (k < d && ++digits[k] == cells_per_dim) {
                digits[k++] = 0;
            }
            if (k == d) {
                break;
            }
        }
        return grid;
    }

    static AttributeGrid line(double lo, double hi, int cells)
    {
        return box(Vector::Constant(1, lo), Vector::Constant(1, hi), cells);
    }
};

/// Labeled set integral by exhaustive summation: every label subset of size
/// at most n_max, every tuple of grid points.
inline double set_integral_oracle(const std::function<double(const LabeledSet&)>& f, const AttributeGrid& grid,
                                  std::span<const Label> label_pool, std::size_t n_max)
{
    const std::size_t pool = label_pool.size();
    if (pool > 16) {
        throw std::invalid_argument("set integral oracle: label pool too large");
    }
    double total = 0.0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << pool); ++mask) {
        LabeledSet x;
        for (std::size_t i = 0; i < pool; ++i) {
            if ((mask >> i) & 1U) {
                x.push_back({label_pool[i], grid.points.front()});
            }
        }
        if (x.size() > n_max) {
            continue;
        }
        std::vector<std::size_t> digits(x.size(), 0);
        double subtotal = 0.0;
        while (true) {
            for (std::size_t k = 0; k < x.size(); ++k) {
                x[k].x = grid.points[digits[k]];
            }
            subtotal += f(x);
            std::size_t k = 0;
            while (k < x.size() && ++digits[k] == grid.points.size()) {
                digits[k++] = 0;
            }
            if (k == x.size()) {
                break;
            }
        }
        total += subtotal * std::pow(grid.cell_volume, static_cast<double>(x.size()));
    }
    return total;
}

/// Unlabeled set integral Σ_n (1/n!) Σ_{grid n-tuples} f by exhaustive summation.
inline double unlabeled_set_integral_oracle(const std::function<double(const PointSet&)>& f, const AttributeGrid& grid,
                                            std::size_t n_max)
{
    double total = 0.0;
    for (std::size_t n = 0; n <= n_max; ++n) {
        PointSet x(n, grid.points.front());
        std::vector<std::size_t> digits(n, 0);
        double subtotal = 0.0;
        while (true) {
            for (std::size_t k = 0; k < n; ++k) {
                x[k] = grid.points[digits[k]];
            }
            subtotal += f(x);
            std::size_t k = 0;
            while (k < n && ++digits[k] == grid.points.size()) {
                digits[k++] = 0;
            }
            if (k == n) {
                break;
            }
        }
        total += subtotal * std::pow(grid.cell_volume, static_cast<double>(n)) / std::tgamma(static_cast<double>(n) + 1.0);
    }
    return total;
}

}  // namespace lrfs
