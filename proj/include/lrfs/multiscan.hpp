#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lrfs/assoc.hpp"
#include "lrfs/densities.hpp"
#include "lrfs/glmb_filter.hpp"
#include "lrfs/kalman.hpp"
#include "lrfs/rng.hpp"
#include "lrfs/standard_model.hpp"

namespace lrfs {

/// Measurements and birth model of one scan; birth.scan() == k.
struct ScanData {
    int k;
    Measurements z;
    BirthModel birth;
};

struct MultiObjectModel {
    SurvivalModel survival;
    ObservationModel observation;
    MixtureHygiene hygiene;
};

// ---- trajectory records --------------------------------------------------------

struct TrajectoryNode {
    int scan;
    int association;
    TrackPtr filtered;
    std::shared_ptr<const TrajectoryNode> prev;
};

using TrajectoryNodePtr = std::shared_ptr<const TrajectoryNode>;

/// A label alive on the contiguous scans [start, end], with the filtered
/// density and association at every one of them.
struct TrajectoryRecord {
    Label label;
    int start;
    int end;
    TrajectoryNodePtr tail;

    int length() const { return end - start + 1; }

    std::vector<const TrajectoryNode*> nodes() const
    {
        std::vector<const TrajectoryNode*> out;
        for (const TrajectoryNode* n = tail.get(); n != nullptr; n = n->prev.get()) {
            out.push_back(n);
        }
        std::reverse(out.begin(), out.end());
        return out;
    }
};

struct MultiScanHypothesis {
    double log_weight = 0.0;
    AssociationHistory history;
    std::vector<TrajectoryRecord> trajectories;  // sorted by label

    LabelSet labels_at(int scan) const
    {
        LabelSet out;
        for (const auto& t : trajectories) {
            if (t.start <= scan && scan <= t.end) {
                out.push_back(t.label);
            }
        }
        return out;
    }

    LabelSet label_union() const
    {
        LabelSet out;
        for (const auto& t : trajectories) {
            out.push_back(t.label);
        }
        return out;
    }

    const TrajectoryRecord* find(const Label& label) const
    {
        for (const auto& t : trajectories) {
            if (t.label == label) {
                return &t;
            }
        }
        return nullptr;
    }
};

/// Posterior over label-set sequences on the scans [first_scan, last_scan].
class MultiScanGlmb {
public:
    /// The empty posterior before `first_scan`.
    static MultiScanGlmb empty(int first_scan)
    {
        MultiScanGlmb out;
        out.first_scan_ = first_scan;
        out.last_scan_ = first_scan - 1;
        out.hypotheses_.push_back(MultiScanHypothesis{});
        return out;
    }

    MultiScanGlmb(int first_scan, int last_scan, std::vector<MultiScanHypothesis> hypotheses)
        : first_scan_(first_scan), last_scan_(last_scan)
    {
        std::erase_if(hypotheses, [](const MultiScanHypothesis& h) { return !(h.log_weight > -kInf); });
        if (hypotheses.empty()) {
            throw std::invalid_argument("multi-scan glmb: no hypothesis with positive weight");
        }
        std::vector<double> logs;
        for (const auto& h : hypotheses) {
            logs.push_back(h.log_weight);
            for (std::size_t i = 0; i < h.trajectories.size(); ++i) {
                const auto& t = h.trajectories[i];
                if (t.start > t.end || !t.tail || t.tail->scan != t.end
                    || (i > 0 && !(h.trajectories[i - 1].label < t.label))) {
                    throw std::invalid_argument("multi-scan glmb: malformed trajectory record");
                }
            }
        }
        const double log_total = log_sum_exp(logs);
        for (auto& h : hypotheses) {
            h.log_weight -= log_total;
        }
        hypotheses_ = std::move(hypotheses);
    }

    int first_scan() const { return first_scan_; }
    int last_scan() const { return last_scan_; }
    std::span<const MultiScanHypothesis> hypotheses() const { return hypotheses_; }
    std::size_t size() const { return hypotheses_.size(); }
    double weight(std::size_t i) const { return std::exp(hypotheses_[i].log_weight); }

private:
    MultiScanGlmb() = default;

    int first_scan_ = 0;
    int last_scan_ = -1;
    std::vector<MultiScanHypothesis> hypotheses_;
};

/// Multi-scan weights and histories marginalized onto the last scan: the
/// labels alive there with their filtered densities.
inline GlmbDensity final_scan_marginal(const MultiScanGlmb& post)
{
    std::vector<GlmbHypothesis> out;
    for (const auto& h : post.hypotheses()) {
        GlmbHypothesis g;
        g.log_weight = h.log_weight;
        g.history = h.history;
        for (const auto& t : h.trajectories) {
            if (t.end == post.last_scan()) {
                g.labels.push_back(t.label);
                g.tracks.push_back(t.tail->filtered);
            }
        }
        out.push_back(std::move(g));
    }
    return GlmbDensity(std::move(out));
}

// ---- forward recursion ----------------------------------------------------------

/// Extends every hypothesis by one scan with the joint prediction-update
/// factors (death, misdetection, detection, birth). candidates_per_hypothesis
/// > 0 fixes the Gibbs sweeps (or ranked count) per parent; 0 splits the
/// configured budget by parent weight. The result is capped and normalized.
inline MultiScanGlmb msglmb_extend(const MultiScanGlmb& post, const Measurements& z, const BirthModel& birth,
                                   const SurvivalModel& survival, const ObservationModel& obs,
                                   std::size_t candidates_per_hypothesis, const FilterConfig& cfg,
                                   StepReport* report = nullptr)
{
    cfg.validate();
    const int scan = birth.scan();
    if (scan != post.last_scan() + 1) {
        throw std::invalid_argument("msglmb_extend: scans must be consecutive");
    }
    const auto parents = post.hypotheses();
    std::vector<std::pair<Label, TrackPtr>> all_tracks;
    for (const auto& h : parents) {
        for (const auto& t : h.trajectories) {
            if (t.end == post.last_scan()) {
                all_tracks.emplace_back(t.label, t.tail->filtered);
            }
        }
    }
    const detail::SurvivalRowCache survivors(all_tracks, survival, obs, z, cfg.hygiene, cfg.threads);
    std::vector<ScoreRowPtr> birth_rows;
    for (const auto& e : birth.entries()) {
        birth_rows.push_back(std::make_shared<const ScoreRow>(birth_row(e, obs, z, cfg.hygiene)));
    }
    FilterConfig local = cfg;
    if (candidates_per_hypothesis > 0) {
        local.gibbs_iterations = candidates_per_hypothesis;
        local.requested_k_best = candidates_per_hypothesis;
    }

    std::vector<std::vector<MultiScanHypothesis>> children(parents.size());
    parallel_for(parents.size(), cfg.threads, [&](std::size_t p) {
        const auto& parent = parents[p];
        std::vector<ScoreRowPtr> rows;
        std::vector<std::size_t> traj_index;
        for (std::size_t i = 0; i < parent.trajectories.size(); ++i) {
            const auto& t = parent.trajectories[i];
            if (t.end == post.last_scan()) {
                rows.push_back(survivors.at(t.label, t.tail->filtered));
                traj_index.push_back(i);
            }
        }
        const std::size_t live = rows.size();
        rows.insert(rows.end(), birth_rows.begin(), birth_rows.end());
        const Matrix eta = detail::stack_rows(rows, z.size());
        const double share = candidates_per_hypothesis > 0 ? 1.0 : std::exp(parent.log_weight);
        const auto seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(scan), static_cast<std::uint64_t>(p)});
        for (const auto& cand : detail::candidate_associations(eta, share, local, seed)) {
            MultiScanHypothesis child;
            child.log_weight = parent.log_weight + cand.log_weight;
            child.trajectories = parent.trajectories;
            ScanAssociation record{scan, {}};
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const int v = cand.gamma[i];
                record.entries.emplace_back(rows[i]->label, v);
                if (v < 0) {
                    continue;
                }
                if (i < live) {
                    auto& t = child.trajectories[traj_index[i]];
                    t.tail = std::make_shared<const TrajectoryNode>(TrajectoryNode{scan, v, rows[i]->posterior_at(v), t.tail});
                    t.end = scan;
                } else {
                    auto node = std::make_shared<const TrajectoryNode>(
                        TrajectoryNode{scan, v, rows[i]->posterior_at(v), nullptr});
                    child.trajectories.push_back({rows[i]->label, scan, scan, std::move(node)});
                }
            }
            child.history = parent.history.extended(std::move(record));
            children[p].push_back(std::move(child));
        }
    });

    std::vector<MultiScanHypothesis> pool;
    for (auto& group : children) {
        for (auto& c : group) {
            pool.push_back(std::move(c));
        }
    }
    if (pool.empty()) {
        throw NumericalError("msglmb_extend: no child hypothesis has positive weight");
    }
    std::vector<double> logs;
    for (const auto& h : pool) {
        logs.push_back(h.log_weight);
    }
    const double log_total = log_sum_exp(logs);
    const auto order = detail::order_by_weight(logs);
    std::vector<MultiScanHypothesis> kept;
    double dropped = 0.0;
    for (std::size_t r = 0; r < order.size(); ++r) {
        if (r < cfg.max_hypotheses) {
            kept.push_back(std::move(pool[order[r]]));
        } else {
            dropped += std::exp(logs[order[r]] - log_total);
        }
    }
    if (report != nullptr) {
        *report = StepReport{parents.size(), order.size(), kept.size(), dropped, std::exp(log_total)};
    }
    return MultiScanGlmb(post.first_scan(), scan, std::move(kept));
}

// ---- association histories over many scans --------------------------------------

/// γ over consecutive scans; records[k] covers the domain of scan
/// first_scan + k (labels alive at the previous scan plus that scan's births).
struct JointAssociation {
    std::vector<ScanAssociation> records;

    friend bool operator==(const JointAssociation&, const JointAssociation&) = default;
};

struct JointAssociationHash {
    std::size_t operator()(const JointAssociation& g) const noexcept
    {
        std::size_t h = 0x84222325CBF29CE4ULL;
        for (const auto& r : g.records) {
            for (const auto& [label, v] : r.entries) {
                h = (h ^ LabelHash{}(label)) * 0x100000001B3ULL;
                h = (h ^ static_cast<std::size_t>(v + 2)) * 0x100000001B3ULL;
            }
            h = (h ^ 0xFFULL) * 0x100000001B3ULL;
        }
        return h;
    }
};

struct WeightedJointAssociation {
    JointAssociation gamma;
    double log_weight;
};

inline JointAssociation to_joint_association(const AssociationHistory& history)
{
    return JointAssociation{history.records()};
}

inline AssociationHistory to_history(const JointAssociation& gamma)
{
    AssociationHistory h;
    for (const auto& r : gamma.records) {
        h = h.extended(r);
    }
    return h;
}

/// Memoized per-label filtering along association sequences. A node is a
/// prefix of a label's detection outcomes (all ≥ 0); its row scores the
/// label's outcome at the next scan given that prefix.
class TrajectoryEvaluator {
public:
    using NodeId = std::size_t;

    TrajectoryEvaluator(std::span<const ScanData> scans, MultiObjectModel model)
        : scans_(scans.begin(), scans.end()), model_(std::move(model))
    {
        if (scans_.empty()) {
            throw std::invalid_argument("trajectory evaluator: no scans");
        }
        for (std::size_t i = 0; i < scans_.size(); ++i) {
            if (scans_[i].k != scans_.front().k + static_cast<int>(i) || scans_[i].birth.scan() != scans_[i].k) {
                throw std::invalid_argument("trajectory evaluator: scans must be consecutive with matching births");
            }
        }
    }

    int first_scan() const { return scans_.front().k; }
    int last_scan() const { return scans_.back().k; }
    const ScanData& scan(int k) const { return scans_.at(static_cast<std::size_t>(k - first_scan())); }
    const MultiObjectModel& model() const { return model_; }

    NodeId root(const Label& label)
    {
        const auto it = roots_.find(label);
        if (it != roots_.end()) {
            return it->second;
        }
        const ScanData& data = scan(label.birth_time);
        const BirthEntry* entry = data.birth.find(label);
        if (entry == nullptr) {
            throw std::invalid_argument("trajectory evaluator: unknown birth label " + to_string(label));
        }
        Node node{label, label.birth_time, nullptr, nullptr, {}};
        node.row = std::make_shared<const ScoreRow>(birth_row(*entry, model_.observation, data.z, model_.hygiene));
        nodes_.push_back(std::move(node));
        roots_.emplace(label, nodes_.size() - 1);
        return nodes_.size() - 1;
    }

    /// Scan scored by the node's row.
    int row_scan(NodeId id) const { return nodes_[id].row_scan; }
    const TrackPtr& density(NodeId id) const { return nodes_[id].density; }

    const ScoreRow& row(NodeId id)
    {
        Node& node = nodes_[id];
        if (!node.row) {
            const ScanData& data = scan(node.row_scan);
            node.row = std::make_shared<const ScoreRow>(survival_row(node.label, *node.density, model_.survival,
                                                                     model_.observation, data.z, model_.hygiene));
        }
        return *nodes_[id].row;
    }

    /// Prefix extended by outcome v ≥ 0 at row_scan(id); requires a positive score.
    NodeId child(NodeId id, int v)
    {
        if (v < 0) {
            throw std::invalid_argument("trajectory evaluator: only detection outcomes extend a trajectory");
        }
        const auto found = nodes_[id].children.find(v);
        if (found != nodes_[id].children.end()) {
            return found->second;
        }
        const ScoreRow& r = row(id);
        const TrackPtr posterior = r.posterior_at(v);
        if (!posterior) {
            throw std::invalid_argument("trajectory evaluator: outcome has zero score");
        }
        nodes_.push_back(Node{nodes_[id].label, nodes_[id].row_scan + 1, posterior, nullptr, {}});
        const NodeId created = nodes_.size() - 1;
        nodes_[id].children.emplace(v, created);
        return created;
    }

    /// Σ log η over one label's outcomes, starting at its birth scan.
    /// Returns -inf for an impossible sequence.
    double label_log_weight(const Label& label, std::span<const int> outcomes)
    {
        NodeId node = root(label);
        double total = 0.0;
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            const double e = row(node).at(outcomes[i]);
            if (!(e > 0.0)) {
                return -kInf;
            }
            total += std::log(e);
            if (outcomes[i] < 0) {
                return i + 1 == outcomes.size() ? total : -kInf;
            }
            if (i + 1 < outcomes.size()) {
                node = child(node, outcomes[i]);
            }
        }
        return total;
    }

    /// Per-label outcome sequences of a joint association.
    static std::map<Label, std::vector<int>> sequences(const JointAssociation& gamma)
    {
        std::map<Label, std::vector<int>> out;
        for (const auto& r : gamma.records) {
            for (const auto& [label, v] : r.entries) {
                out[label].push_back(v);
            }
        }
        return out;
    }

    /// log ω(γ) = Σ_ℓ Σ_m log η_m(γ_m(ℓ)).
    double log_weight(const JointAssociation& gamma)
    {
        double total = 0.0;
        for (const auto& [label, values] : sequences(gamma)) {
            total += label_log_weight(label, values);
        }
        return total;
    }

private:
    struct Node {
        Label label;
        int row_scan;
        TrackPtr density;  // null at a root
        ScoreRowPtr row;
        std::map<int, NodeId> children;
    };

    std::vector<ScanData> scans_;
    MultiObjectModel model_;
    std::deque<Node> nodes_;
    std::map<Label, NodeId> roots_;
};

/// Checks domains, positive 1-1 per scan and trajectory contiguity.
inline bool is_valid_joint_association(const JointAssociation& gamma, std::span<const ScanData> scans)
{
    if (gamma.records.size() > scans.size()) {
        return false;
    }
    LabelSet live;
    for (std::size_t k = 0; k < gamma.records.size(); ++k) {
        const auto& r = gamma.records[k];
        if (r.scan != scans[k].k) {
            return false;
        }
        try {
            require_valid_scan_association(r);
        } catch (const std::invalid_argument&) {
            return false;
        }
        LabelSet domain = live;
        for (const auto& e : scans[k].birth.entries()) {
            domain.push_back(e.label);
        }
        std::sort(domain.begin(), domain.end());
        LabelSet have;
        for (const auto& [label, v] : r.entries) {
            have.push_back(label);
            if (v > static_cast<int>(scans[k].z.size())) {
                return false;
            }
        }
        if (have != domain) {
            return false;
        }
        live.clear();
        for (const auto& [label, v] : r.entries) {
            if (v >= 0) {
                live.push_back(label);
            }
        }
    }
    return true;
}

/// Samples γ scan by scan: each scan's association is the end state of a
/// `per_scan_sweeps` Gibbs run (started from all -1) on the score matrix
/// conditioned on the sampled past. Distinct histories with exact weights.
inline std::vector<WeightedJointAssociation> sequential_factor_sample(TrajectoryEvaluator& eval, std::size_t chains,
                                                                      std::size_t per_scan_sweeps, std::uint64_t seed)
{
    std::vector<WeightedJointAssociation> out;
    std::unordered_map<JointAssociation, std::size_t, JointAssociationHash> seen;
    for (std::size_t c = 0; c < chains; ++c) {
        JointAssociation gamma;
        std::vector<std::pair<Label, TrajectoryEvaluator::NodeId>> live;
        double log_w = 0.0;
        for (int k = eval.first_scan(); k <= eval.last_scan(); ++k) {
            std::vector<std::pair<Label, TrajectoryEvaluator::NodeId>> domain = live;
            for (const auto& e : eval.scan(k).birth.entries()) {
                domain.emplace_back(e.label, eval.root(e.label));
            }
            std::sort(domain.begin(), domain.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
            const std::size_t m = eval.scan(k).z.size();
            Matrix eta(static_cast<Eigen::Index>(domain.size()), static_cast<Eigen::Index>(m + 2));
            for (std::size_t i = 0; i < domain.size(); ++i) {
                const ScoreRow& row = eval.row(domain[i].second);
                for (std::size_t col = 0; col < m + 2; ++col) {
                    eta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) = row.eta[col];
                }
            }
            GibbsChain chain(eta, derive_seed(seed, {c, static_cast<std::uint64_t>(k)}),
                             ExtendedAssociation(domain.size(), -1));
            for (std::size_t t = 0; t < per_scan_sweeps; ++t) {
                chain.sweep();
            }
            const auto& state = chain.state();
            log_w += log_association_weight(eta, state);
            ScanAssociation record{k, {}};
            live.clear();
            for (std::size_t i = 0; i < domain.size(); ++i) {
                record.entries.emplace_back(domain[i].first, state[i]);
                if (state[i] >= 0) {
                    live.emplace_back(domain[i].first, eval.child(domain[i].second, state[i]));
                }
            }
            gamma.records.push_back(std::move(record));
            if (!(log_w > -kInf)) {
                break;
            }
        }
        if (!(log_w > -kInf) || static_cast<int>(gamma.records.size()) != eval.last_scan() - eval.first_scan() + 1) {
            continue;
        }
        if (seen.emplace(gamma, out.size()).second) {
            out.push_back({std::move(gamma), log_w});
        }
    }
    return out;
}

/// Systematic-scan Gibbs over the associations of every (scan, label) pair
/// from `first_free_scan` on; earlier scans stay fixed. The conditional of a
/// label's outcome at scan k is its multi-scan score: the product of its
/// factors from k to one past its last live scan.
class MultiScanGibbsChain {
public:
    MultiScanGibbsChain(TrajectoryEvaluator& eval, JointAssociation init, std::uint64_t seed, int first_free_scan)
        : eval_(eval), state_(std::move(init)), rng_(seed), first_free_(first_free_scan)
    {
        if (static_cast<int>(state_.records.size()) != eval.last_scan() - eval.first_scan() + 1) {
            throw std::invalid_argument("multi-scan gibbs: history must cover every scan");
        }
    }

    void sweep()
    {
        const int n = eval_.last_scan();
        for (int k = std::max(first_free_, eval_.first_scan()); k <= n; ++k) {
            ScanAssociation& now = record(k);
            for (std::size_t i = 0; i < now.entries.size(); ++i) {
                resample(k, i);
            }
        }
    }

    const JointAssociation& state() const { return state_; }

private:
    ScanAssociation& record(int k) { return state_.records[static_cast<std::size_t>(k - eval_.first_scan())]; }

    std::optional<int> value_at(int k, const Label& label)
    {
        if (k > eval_.last_scan()) {
            return std::nullopt;
        }
        return record(k).value(label);
    }

    /// Log score of the label's outcomes from scan k on, when its outcome at
    /// k is j ≥ 0 and its later outcomes are as in the state (or it dies at
    /// k + 1 when it is currently not live there).
    double future_log_score(TrajectoryEvaluator::NodeId prefix, int k, int j, const Label& label, bool live_next)
    {
        double total = std::log(eval_.row(prefix).at(j));
        if (k == eval_.last_scan()) {
            return total;
        }
        TrajectoryEvaluator::NodeId node = eval_.child(prefix, j);
        if (!live_next) {
            return total + std::log(eval_.row(node).at(-1));
        }
        for (int m = k + 1; m <= eval_.last_scan(); ++m) {
            const auto v = value_at(m, label);
            if (!v) {
                break;
            }
            const double e = eval_.row(node).at(*v);
            if (!(e > 0.0)) {
                return -kInf;
            }
            total += std::log(e);
            if (*v < 0) {
                break;
            }
            if (m < eval_.last_scan()) {
                node = eval_.child(node, *v);
            }
        }
        return total;
    }

    void resample(int k, std::size_t i)
    {
        ScanAssociation& now = record(k);
        const Label label = now.entries[i].first;
        const int current = now.entries[i].second;

        TrajectoryEvaluator::NodeId prefix = eval_.root(label);
        for (int m = label.birth_time; m < k; ++m) {
            prefix = eval_.child(prefix, *value_at(m, label));
        }
        const auto next = value_at(k + 1, label);
        const bool live_next = next.has_value() && *next >= 0;

        const int m_count = static_cast<int>(eval_.scan(k).z.size());
        std::vector<bool> taken(static_cast<std::size_t>(m_count) + 1, false);
        for (std::size_t o = 0; o < now.entries.size(); ++o) {
            if (o != i && now.entries[o].second > 0) {
                taken[static_cast<std::size_t>(now.entries[o].second)] = true;
            }
        }
        const ScoreRow& row = eval_.row(prefix);
        std::vector<double> logits(static_cast<std::size_t>(m_count) + 2, -kInf);
        for (int j = -1; j <= m_count; ++j) {
            if ((j > 0 && taken[static_cast<std::size_t>(j)]) || !(row.at(j) > 0.0)) {
                continue;
            }
            if (j < 0) {
                if (!live_next) {
                    logits[0] = std::log(row.at(-1));
                }
                continue;
            }
            logits[static_cast<std::size_t>(j + 1)] = future_log_score(prefix, k, j, label, live_next);
        }
        const double peak = *std::max_element(logits.begin(), logits.end());
        if (!(peak > -kInf)) {
            return;
        }
        std::vector<double> cumulative(logits.size());
        double total = 0.0;
        for (std::size_t c = 0; c < logits.size(); ++c) {
            total += logits[c] > -kInf ? std::exp(logits[c] - peak) : 0.0;
            cumulative[c] = total;
        }
        const double u = rng_.uniform() * total;
        std::size_t pick = 0;
        while (pick + 1 < cumulative.size() && !(u < cumulative[pick])) {
            ++pick;
        }
        const int chosen = static_cast<int>(pick) - 1;
        now.entries[i].second = chosen;
        if (k == eval_.last_scan() || (current >= 0) == (chosen >= 0)) {
            return;
        }
        auto& later = record(k + 1).entries;
        if (chosen >= 0) {
            const auto pos = std::lower_bound(later.begin(), later.end(), label,
                                              [](const auto& e, const Label& l) { return e.first < l; });
            later.insert(pos, {label, -1});
        } else {
            std::erase_if(later, [&](const auto& e) { return e.first == label; });
        }
    }

    TrajectoryEvaluator& eval_;
    JointAssociation state_;
    CounterRng rng_;
    int first_free_;
};

/// Runs one chain of `sweeps` sweeps from each initial history; returns every
/// distinct visited history (initial ones included) with its exact weight.
inline std::vector<WeightedJointAssociation> multiscan_gibbs(TrajectoryEvaluator& eval,
                                                             std::span<const JointAssociation> initial,
                                                             std::size_t sweeps, std::uint64_t seed,
                                                             int first_free_scan = 0)
{
    std::vector<WeightedJointAssociation> out;
    std::unordered_map<JointAssociation, std::size_t, JointAssociationHash> seen;
    auto record = [&](const JointAssociation& gamma) {
        if (seen.find(gamma) == seen.end()) {
            const double log_w = eval.log_weight(gamma);
            seen.emplace(gamma, out.size());
            out.push_back({gamma, log_w});
        }
    };
    for (std::size_t c = 0; c < initial.size(); ++c) {
        MultiScanGibbsChain chain(eval, initial[c], derive_seed(seed, {c, 0x6D5ULL}), first_free_scan);
        record(chain.state());
        for (std::size_t t = 0; t < sweeps; ++t) {
            chain.sweep();
            record(chain.state());
        }
    }
    std::erase_if(out, [](const WeightedJointAssociation& w) { return !(w.log_weight > -kInf); });
    return out;
}

/// Builds the multi-scan posterior from weighted histories over every scan
/// known to the evaluator.
inline MultiScanGlmb build_multiscan_posterior(TrajectoryEvaluator& eval,
                                               std::span<const WeightedJointAssociation> histories)
{
    std::vector<MultiScanHypothesis> hyps;
    for (const auto& wh : histories) {
        MultiScanHypothesis h;
        h.log_weight = wh.log_weight;
        h.history = to_history(wh.gamma);
        for (const auto& [label, values] : TrajectoryEvaluator::sequences(wh.gamma)) {
            if (values.empty() || values.front() < 0) {
                continue;
            }
            TrajectoryEvaluator::NodeId node = eval.root(label);
            TrajectoryNodePtr tail;
            int scan = label.birth_time;
            int end = scan;
            for (const int v : values) {
                if (v < 0) {
                    break;
                }
                node = eval.child(node, v);
                tail = std::make_shared<const TrajectoryNode>(TrajectoryNode{scan, v, eval.density(node), tail});
                end = scan;
                ++scan;
            }
            h.trajectories.push_back({label, label.birth_time, end, std::move(tail)});
        }
        hyps.push_back(std::move(h));
    }
    return MultiScanGlmb(eval.first_scan(), eval.last_scan(), std::move(hyps));
}

// ---- statistics and estimators ----------------------------------------------------

struct TrajectoryStats {
    /// cardinality[n]: probability of n trajectories over the window.
    std::vector<double> cardinality;
    /// length_distribution[m]: probability that a trajectory drawn uniformly
    /// from a non-empty hypothesis lasts m scans.
    std::vector<double> length_distribution;
    /// Length law of each label, conditioned on the label existing.
    std::map<Label, std::vector<double>> length_by_label;
    /// Union label set and weight, one entry per hypothesis.
    std::vector<std::pair<LabelSet, double>> label_sets;

    double joint_existence_exact(LabelSet labels) const
    {
        std::sort(labels.begin(), labels.end());
        double total = 0.0;
        for (const auto& [set, w] : label_sets) {
            if (set == labels) {
                total += w;
            }
        }
        return total;
    }

    double joint_existence_super(LabelSet labels) const
    {
        std::sort(labels.begin(), labels.end());
        double total = 0.0;
        for (const auto& [set, w] : label_sets) {
            if (std::includes(set.begin(), set.end(), labels.begin(), labels.end())) {
                total += w;
            }
        }
        return total;
    }

    /// Length distribution; throws when every hypothesis is empty.
    const std::vector<double>& length_dist() const
    {
        if (length_distribution.empty()) {
            throw std::domain_error("trajectory length distribution undefined: no trajectories");
        }
        return length_distribution;
    }
};

inline TrajectoryStats trajectory_stats(const MultiScanGlmb& post)
{
    TrajectoryStats stats;
    const auto span = static_cast<std::size_t>(post.last_scan() - post.first_scan() + 1);
    stats.length_distribution.assign(span + 1, 0.0);
    std::map<Label, double> existence;
    double nonempty = 0.0;
    std::size_t max_card = 0;
    for (const auto& h : post.hypotheses()) {
        max_card = std::max(max_card, h.trajectories.size());
    }
    stats.cardinality.assign(max_card + 1, 0.0);
    for (std::size_t i = 0; i < post.size(); ++i) {
        const auto& h = post.hypotheses()[i];
        const double w = post.weight(i);
        stats.cardinality[h.trajectories.size()] += w;
        stats.label_sets.emplace_back(h.label_union(), w);
        if (h.trajectories.empty()) {
            continue;
        }
        nonempty += w;
        for (const auto& t : h.trajectories) {
            const auto len = static_cast<std::size_t>(t.length());
            stats.length_distribution[len] += w / static_cast<double>(h.trajectories.size());
            auto& dist = stats.length_by_label[t.label];
            dist.resize(span + 1, 0.0);
            dist[len] += w;
            existence[t.label] += w;
        }
    }
    if (nonempty > 0.0) {
        for (double& v : stats.length_distribution) {
            v /= nonempty;
        }
    } else {
        stats.length_distribution.clear();
    }
    for (auto& [label, dist] : stats.length_by_label) {
        for (double& v : dist) {
            v /= existence.at(label);
        }
    }
    return stats;
}

enum class TrajectoryEstimatorKind { top_hypothesis, top_given_cardinality, label_mam_sequence, label_mam_length };

struct TrajectoryEstimate {
    Label label;
    int start;
    std::vector<Vector> means;
    std::vector<Matrix> covariances;
    /// Posterior probability that the label exists at some scan of the window.
    double existence;
    /// Weight of the hypothesis (or hypothesis group) the estimate came from.
    double weight;
};

namespace detail {

class SmoothedCache {
public:
    explicit SmoothedCache(const LinearGaussianMotion& motion) : motion_(motion) {}

    const std::vector<Gaussian>& get(const TrajectoryRecord& t)
    {
        const auto it = cache_.find(t.tail.get());
        if (it != cache_.end()) {
            return it->second;
        }
        std::vector<Gaussian> filtered;
        for (const auto* node : t.nodes()) {
            filtered.push_back(node->filtered->collapse());
        }
        return cache_.emplace(t.tail.get(), rts_smooth(filtered, motion_)).first->second;
    }

private:
    LinearGaussianMotion motion_;
    std::unordered_map<const TrajectoryNode*, std::vector<Gaussian>> cache_;
};

/// Weight-averaged smoothed trajectory over members that share (label, start, end).
inline TrajectoryEstimate blend_trajectories(SmoothedCache& cache, const MultiScanGlmb& post,
                                             const std::vector<std::size_t>& members, const Label& label,
                                             double existence, double weight)
{
    double total = 0.0;
    for (const auto idx : members) {
        total += post.weight(idx);
    }
    const TrajectoryRecord* first = post.hypotheses()[members.front()].find(label);
    TrajectoryEstimate est{label, first->start, {}, {}, existence, weight};
    const auto len = static_cast<std::size_t>(first->length());
    for (std::size_t s = 0; s < len; ++s) {
        Vector mean = Vector::Zero(first->tail->filtered->dim());
        for (const auto idx : members) {
            mean += post.weight(idx) / total * cache.get(*post.hypotheses()[idx].find(label))[s].mean();
        }
        Matrix cov = Matrix::Zero(mean.size(), mean.size());
        for (const auto idx : members) {
            const Gaussian& g = cache.get(*post.hypotheses()[idx].find(label))[s];
            const Vector d = g.mean() - mean;
            cov += post.weight(idx) / total * (g.covariance() + d * d.transpose());
        }
        est.means.push_back(std::move(mean));
        est.covariances.push_back(symmetrized(cov));
    }
    return est;
}

}  // namespace detail

/// Smoothed trajectory estimates, sorted by label. Ties: lexicographically
/// smallest label set, then shortest length, then lowest hypothesis index.
inline std::vector<TrajectoryEstimate> estimate_trajectories(const MultiScanGlmb& post, TrajectoryEstimatorKind kind,
                                                             const LinearGaussianMotion& motion)
{
    const TrajectoryStats stats = trajectory_stats(post);
    std::map<Label, double> existence;
    for (const auto& [set, w] : stats.label_sets) {
        for (const auto& l : set) {
            existence[l] += w;
        }
    }
    detail::SmoothedCache cache(motion);
    std::vector<TrajectoryEstimate> out;
    auto from_hypothesis = [&](std::size_t idx) {
        for (const auto& t : post.hypotheses()[idx].trajectories) {
            out.push_back(detail::blend_trajectories(cache, post, {idx}, t.label, existence.at(t.label), post.weight(idx)));
        }
    };

    switch (kind) {
    case TrajectoryEstimatorKind::top_hypothesis: {
        std::size_t best = 0;
        for (std::size_t i = 1; i < post.size(); ++i) {
            if (post.hypotheses()[i].log_weight > post.hypotheses()[best].log_weight) {
                best = i;
            }
        }
        from_hypothesis(best);
        break;
    }
    case TrajectoryEstimatorKind::top_given_cardinality: {
        const std::size_t n_star = detail::argmax_first(stats.cardinality);
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < post.size(); ++i) {
            if (post.hypotheses()[i].trajectories.size() == n_star
                && (!best || post.hypotheses()[i].log_weight > post.hypotheses()[*best].log_weight)) {
                best = i;
            }
        }
        from_hypothesis(*best);
        break;
    }
    case TrajectoryEstimatorKind::label_mam_sequence: {
        using Key = std::vector<std::tuple<Label, int, int>>;
        std::map<Key, std::pair<double, std::vector<std::size_t>>> groups;
        for (std::size_t i = 0; i < post.size(); ++i) {
            Key key;
            for (const auto& t : post.hypotheses()[i].trajectories) {
                key.emplace_back(t.label, t.start, t.end);
            }
            auto& g = groups[key];
            g.first += post.weight(i);
            g.second.push_back(i);
        }
        auto best = groups.begin();
        for (auto it = groups.begin(); it != groups.end(); ++it) {
            if (it->second.first > best->second.first) {
                best = it;
            }
        }
        for (const auto& [label, start, end] : best->first) {
            out.push_back(detail::blend_trajectories(cache, post, best->second.second, label, existence.at(label),
                                                     best->second.first));
        }
        break;
    }
    case TrajectoryEstimatorKind::label_mam_length: {
        std::map<LabelSet, double> by_set;
        for (const auto& [set, w] : stats.label_sets) {
            by_set[set] += w;
        }
        auto best = by_set.begin();
        for (auto it = by_set.begin(); it != by_set.end(); ++it) {
            if (it->second > best->second) {
                best = it;
            }
        }
        for (const auto& label : best->first) {
            const auto& dist = stats.length_by_label.at(label);
            const auto length = static_cast<int>(detail::argmax_first(dist));
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < post.size(); ++i) {
                const TrajectoryRecord* t = post.hypotheses()[i].find(label);
                if (t != nullptr && t->length() == length) {
                    members.push_back(i);
                }
            }
            out.push_back(detail::blend_trajectories(cache, post, members, label, existence.at(label), best->second));
        }
        break;
    }
    }
    return out;
}

// ---- batch smoother ---------------------------------------------------------------

struct SmootherConfig {
    FilterConfig filter;
    /// Trailing scans the multi-scan Gibbs refinement may revise; 0 disables it.
    int window = 0;
    std::size_t sweeps = 100;
    /// Number of forward hypotheses used as chain starting points.
    std::size_t chains = 4;
};

/// Forward multi-scan recursion with truncation, then multi-scan Gibbs over
/// the last `window` scans started from the heaviest forward hypotheses.
inline MultiScanGlmb run_smoother(std::span<const ScanData> scans, const MultiObjectModel& model,
                                  const SmootherConfig& cfg, std::vector<StepReport>* reports = nullptr)
{
    if (scans.empty()) {
        throw std::invalid_argument("run_smoother: no scans");
    }
    FilterConfig filter = cfg.filter;
    filter.hygiene = model.hygiene;
    MultiScanGlmb post = MultiScanGlmb::empty(scans.front().k);
    for (const auto& s : scans) {
        StepReport report;
        post = msglmb_extend(post, s.z, s.birth, model.survival, model.observation, 0, filter, &report);
        if (reports != nullptr) {
            reports->push_back(report);
        }
    }
    if (cfg.window <= 0 || cfg.sweeps == 0) {
        return post;
    }
    TrajectoryEvaluator eval(scans, model);
    std::vector<WeightedJointAssociation> pool;
    std::vector<JointAssociation> starts;
    for (std::size_t i = 0; i < post.size(); ++i) {
        JointAssociation gamma = to_joint_association(post.hypotheses()[i].history);
        if (i < cfg.chains) {
            starts.push_back(gamma);
        }
        pool.push_back({std::move(gamma), 0.0});
    }
    const int first_free = scans.back().k - cfg.window + 1;
    auto visited = multiscan_gibbs(eval, starts, cfg.sweeps, derive_seed(filter.seed, {0x5E0ULL}), first_free);
    std::unordered_map<JointAssociation, std::size_t, JointAssociationHash> index;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        index.emplace(pool[i].gamma, i);
    }
    for (auto& v : visited) {
        if (index.emplace(v.gamma, pool.size()).second) {
            pool.push_back(std::move(v));
        }
    }
    for (auto& p : pool) {
        p.log_weight = eval.log_weight(p.gamma);
    }
    std::vector<double> logs;
    for (const auto& p : pool) {
        logs.push_back(p.log_weight);
    }
    const auto order = detail::order_by_weight(logs);
    std::vector<WeightedJointAssociation> kept;
    for (std::size_t r = 0; r < std::min(order.size(), filter.max_hypotheses); ++r) {
        kept.push_back(std::move(pool[order[r]]));
    }
    return build_multiscan_posterior(eval, kept);
}

}  // namespace lrfs
