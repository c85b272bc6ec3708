#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "lrfs/gaussian.hpp"
#include "lrfs/kalman.hpp"
#include "lrfs/label.hpp"
#include "lrfs/metrics.hpp"
#include "lrfs/rng.hpp"
#include "lrfs/standard_model.hpp"

namespace lrfs {

/// Planar constant-velocity scenario parameters; state [px, py, vx, vy].
struct SimParams {
    int scans = 100;
    double dt = 1.0;
    Vector region_lo = Vector::Zero(2);
    Vector region_hi = Vector::Constant(2, 1000.0);
    int initial_objects = 0;
    /// Each scan after the first offers birth_slots births, each taken with birth_probability.
    int birth_slots = 1;
    double birth_probability = 0.0;
    double survival_probability = 0.99;
    /// Initial velocity components are uniform on [-max_speed, max_speed].
    double max_speed = 3.0;
    double detection_probability = 0.9;
    double measurement_noise = 5.0;
    double process_noise = 0.2;
    double clutter_rate = 10.0;
    bool kill_outside_region = true;

    void validate() const
    {
        auto probability = [](double p) { return p >= 0.0 && p <= 1.0; };
        if (scans < 1 || !(dt > 0.0) || region_lo.size() != 2 || region_hi.size() != 2
            || !(region_lo.array() < region_hi.array()).all() || initial_objects < 0 || birth_slots < 0
            || !probability(birth_probability) || !probability(survival_probability) || !(max_speed >= 0.0)
            || !probability(detection_probability) || !(measurement_noise > 0.0) || !(process_noise >= 0.0)
            || !(clutter_rate >= 0.0)) {
            throw std::invalid_argument("sim params: invalid value");
        }
    }
};

/// Discretized white-acceleration motion on each axis.
inline LinearGaussianMotion constant_velocity_motion(double dt, double accel_sd)
{
    Matrix f = Matrix::Identity(4, 4);
    f(0, 2) = dt;
    f(1, 3) = dt;
    const double q = accel_sd * accel_sd;
    Matrix noise = Matrix::Zero(4, 4);
    for (int axis = 0; axis < 2; ++axis) {
        noise(axis, axis) = q * dt * dt * dt * dt / 4.0;
        noise(axis, axis + 2) = q * dt * dt * dt / 2.0;
        noise(axis + 2, axis) = q * dt * dt * dt / 2.0;
        noise(axis + 2, axis + 2) = q * dt * dt;
    }
    return LinearGaussianMotion(f, noise);
}

inline LinearGaussianSensor position_sensor(double noise_sd)
{
    Matrix h = Matrix::Zero(2, 4);
    h(0, 0) = 1.0;
    h(1, 1) = 1.0;
    return LinearGaussianSensor(h, noise_sd * noise_sd * Matrix::Identity(2, 2));
}

struct ScanMeasurements {
    int k;
    Measurements z;
};

struct Scenario {
    SimParams params;
    std::vector<ScanMeasurements> scans;
    std::vector<LabeledTrajectory> truth;  // sorted by label

    Box region() const { return Box(params.region_lo, params.region_hi); }
};

/// Samples a scenario; scans are numbered 0 .. scans - 1. Initial objects
/// carry labels (0, i); births at scan k carry (k, slot).
inline Scenario generate(const SimParams& params, std::uint64_t seed)
{
    params.validate();
    const LinearGaussianMotion motion = constant_velocity_motion(params.dt, params.process_noise);
    const LinearGaussianSensor sensor = position_sensor(params.measurement_noise);
    // The process noise is rank two: w = gain · a with a ~ N(0, σ_a² I).
    Matrix accel_gain = Matrix::Zero(4, 2);
    for (int axis = 0; axis < 2; ++axis) {
        accel_gain(axis, axis) = params.dt * params.dt / 2.0;
        accel_gain(axis + 2, axis) = params.dt;
    }
    const Box region(params.region_lo, params.region_hi);

    CounterRng rng(derive_seed(seed, {0x51ULL}));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::poisson_distribution<int> clutter_count(params.clutter_rate);

    auto random_object = [&]() {
        Vector x(4);
        for (int axis = 0; axis < 2; ++axis) {
            x(axis) = params.region_lo(axis) + unit(rng) * (params.region_hi(axis) - params.region_lo(axis));
            x(axis + 2) = (2.0 * unit(rng) - 1.0) * params.max_speed;
        }
        return x;
    };
    auto standard_normal = [&](int dim) {
        Vector v(dim);
        for (int i = 0; i < dim; ++i) {
            v(i) = normal(rng);
        }
        return v;
    };

    Scenario out;
    out.params = params;
    std::vector<std::size_t> alive;
    for (int i = 0; i < params.initial_objects; ++i) {
        out.truth.push_back({Label{0, i + 1}, 0, {random_object()}});
        alive.push_back(out.truth.size() - 1);
    }
    for (int k = 0; k < params.scans; ++k) {
        if (k > 0) {
            std::vector<std::size_t> next;
            for (const auto idx : alive) {
                auto& t = out.truth[idx];
                if (!(unit(rng) < params.survival_probability)) {
                    continue;
                }
                Vector x = motion.transition() * t.states.back()
                             + params.process_noise * accel_gain * standard_normal(2);
                if (params.kill_outside_region && !region.contains(sensor.observation() * x)) {
                    continue;
                }
                t.states.push_back(std::move(x));
                next.push_back(idx);
            }
            alive = std::move(next);
            for (int slot = 0; slot < params.birth_slots; ++slot) {
                if (unit(rng) < params.birth_probability) {
                    out.truth.push_back({Label{k, slot + 1}, k, {random_object()}});
                    alive.push_back(out.truth.size() - 1);
                }
            }
        }
        ScanMeasurements scan{k, {}};
        for (const auto idx : alive) {
            if (unit(rng) < params.detection_probability) {
                scan.z.push_back(sensor.observation() * out.truth[idx].states.back()
                                 + params.measurement_noise * standard_normal(2));
            }
        }
        const int clutter = clutter_count(rng);
        for (int c = 0; c < clutter; ++c) {
            Vector z(2);
            for (int axis = 0; axis < 2; ++axis) {
                z(axis) = params.region_lo(axis) + unit(rng) * (params.region_hi(axis) - params.region_lo(axis));
            }
            scan.z.push_back(std::move(z));
        }
        std::shuffle(scan.z.begin(), scan.z.end(), rng);
        out.scans.push_back(std::move(scan));
    }
    std::sort(out.truth.begin(), out.truth.end(),
              [](const LabeledTrajectory& a, const LabeledTrajectory& b) { return a.label < b.label; });
    return out;
}

/// The fixed desk-scale tracking scenario: 1 km square, 100 scans, about ten
/// objects, detection probability 0.88, 5 m measurement noise, 0.2 m/s²
/// process noise and ten clutter points per scan.
inline SimParams desk_scale_params()
{
    SimParams p;
    p.scans = 100;
    p.dt = 1.0;
    p.region_lo = Vector::Zero(2);
    p.region_hi = Vector::Constant(2, 1000.0);
    p.initial_objects = 7;
    p.birth_slots = 2;
    p.birth_probability = 0.02;
    p.survival_probability = 0.998;
    p.max_speed = 2.0;
    p.detection_probability = 0.88;
    p.measurement_noise = 5.0;
    p.process_noise = 0.2;
    p.clutter_rate = 10.0;
    p.kill_outside_region = true;
    return p;
}

inline Scenario desk_scale_scenario(std::uint64_t seed) { return generate(desk_scale_params(), seed); }

}  // namespace lrfs
