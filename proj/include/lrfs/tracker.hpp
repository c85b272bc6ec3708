#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <vector>

#include "lrfs/glmb_filter.hpp"
#include "lrfs/metrics.hpp"
#include "lrfs/multiscan.hpp"
#include "lrfs/sim.hpp"
#include "lrfs/standard_model.hpp"

namespace lrfs {

/// Labeled birth used by the tracker: a broad Gaussian centred on the region
/// with `initial_count` labels at the first scan and `per_scan` afterwards.
struct BirthConfig {
    int initial_count = 12;
    double initial_probability = 0.2;
    int per_scan = 3;
    double probability = 0.04;
    double position_sd = 400.0;
    double velocity_sd = 2.0;
};

struct TrackerConfig {
    FilterConfig filter;
    BirthConfig birth;
    double survival_probability = 0.99;
    /// Negative: use the scenario's detection probability.
    double detection_probability = -1.0;
    /// Negative: use the scenario's clutter rate.
    double clutter_rate = -1.0;
    double gate = 5.0;
    Estimator estimator;
    std::size_t multiscan_sweeps = 50;
    std::size_t multiscan_chains = 4;
};

inline BirthModel make_birth(const BirthConfig& cfg, const Box& region, int k, int first_scan)
{
    const int count = k == first_scan ? cfg.initial_count : cfg.per_scan;
    const double probability = k == first_scan ? cfg.initial_probability : cfg.probability;
    Vector mean = Vector::Zero(4);
    mean.head(2) = 0.5 * (region.lo + region.hi);
    Vector sd(4);
    sd << cfg.position_sd, cfg.position_sd, cfg.velocity_sd, cfg.velocity_sd;
    const Gaussian density(mean, Matrix(sd.array().square().matrix().asDiagonal()));
    std::vector<BirthEntry> entries;
    for (int i = 0; i < count; ++i) {
        entries.push_back({Label{k, i + 1}, probability, GaussianMixture(density)});
    }
    return BirthModel(k, std::move(entries));
}

inline MultiObjectModel make_tracker_model(const Scenario& scenario, const TrackerConfig& cfg)
{
    const SimParams& p = scenario.params;
    const double pd = cfg.detection_probability >= 0.0 ? cfg.detection_probability : p.detection_probability;
    const double clutter = cfg.clutter_rate >= 0.0 ? cfg.clutter_rate : p.clutter_rate;
    return MultiObjectModel{
        SurvivalModel{cfg.survival_probability, constant_velocity_motion(p.dt, p.process_noise)},
        ObservationModel{pd, position_sensor(p.measurement_noise), ClutterModel{clutter, scenario.region()}, cfg.gate},
        cfg.filter.hygiene};
}

/// Per-scan inputs for the tracker. Measurements outside the clutter region
/// have no clutter intensity and are dropped; `dropped` counts them.
inline std::vector<ScanData> tracker_inputs(const Scenario& scenario, const TrackerConfig& cfg,
                                            std::size_t* dropped = nullptr)
{
    const Box region = scenario.region();
    std::vector<ScanData> out;
    std::size_t removed = 0;
    const int first = scenario.scans.empty() ? 0 : scenario.scans.front().k;
    for (const auto& s : scenario.scans) {
        Measurements kept;
        for (const auto& z : s.z) {
            if (region.contains(z)) {
                kept.push_back(z);
            } else {
                ++removed;
            }
        }
        out.push_back({s.k, std::move(kept), make_birth(cfg.birth, region, s.k, first)});
    }
    if (dropped != nullptr) {
        *dropped = removed;
    }
    return out;
}

struct ScanOutput {
    int k;
    std::vector<TrackEstimate> estimates;
    StepReport report;
    double seconds;
};

/// Runs the joint-step GLMB filter over every scan.
inline std::vector<ScanOutput> run_glmb_tracker(std::span<const ScanData> inputs, const MultiObjectModel& model,
                                                const TrackerConfig& cfg)
{
    FilterConfig filter = cfg.filter;
    filter.hygiene = model.hygiene;
    GlmbDensity posterior;
    std::vector<ScanOutput> out;
    for (const auto& scan : inputs) {
        const auto started = std::chrono::steady_clock::now();
        StepResult step = joint_step(posterior, scan.z, scan.birth, model.survival, model.observation, filter);
        posterior = std::move(step.posterior);
        auto estimates = estimate(posterior, cfg.estimator);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
        out.push_back({scan.k, std::move(estimates), step.report, elapsed.count()});
    }
    return out;
}

/// Groups per-scan estimates into one trajectory per contiguous run of a label.
inline std::vector<LabeledTrajectory> trajectories_from_estimates(std::span<const ScanOutput> scans)
{
    std::map<Label, std::vector<LabeledTrajectory>> runs;
    for (const auto& scan : scans) {
        for (const auto& e : scan.estimates) {
            auto& list = runs[e.label];
            if (list.empty() || list.back().end() != scan.k - 1) {
                list.push_back({e.label, scan.k, {}});
            }
            list.back().states.push_back(e.mean);
        }
    }
    std::vector<LabeledTrajectory> out;
    for (auto& [label, list] : runs) {
        for (auto& t : list) {
            out.push_back(std::move(t));
        }
    }
    return out;
}

/// Projects trajectory states onto sensor coordinates (positions).
inline std::vector<LabeledTrajectory> project(std::span<const LabeledTrajectory> trajectories,
                                              const LinearGaussianSensor& sensor)
{
    std::vector<LabeledTrajectory> out;
    for (const auto& t : trajectories) {
        LabeledTrajectory p{t.label, t.start, {}};
        for (const auto& x : t.states) {
            p.states.push_back(x.size() == sensor.state_dim() ? Vector(sensor.observation() * x) : x);
        }
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace lrfs
