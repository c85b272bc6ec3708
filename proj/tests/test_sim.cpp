#include <gtest/gtest.h>

#include <cmath>

#include "lrfs/io.hpp"
#include "lrfs/sim.hpp"

using namespace lrfs;

TEST(Generate, NoBirthsGivesClutterOnly)
{
    SimParams p;
    p.scans = 20;
    p.initial_objects = 0;
    p.birth_probability = 0.0;
    p.clutter_rate = 0.0;
    const auto s = generate(p, 1);
    EXPECT_TRUE(s.truth.empty());
    for (const auto& scan : s.scans) {
        EXPECT_TRUE(scan.z.empty());
    }
}

TEST(Generate, PerfectSensorCountsAliveObjects)
{
    SimParams p;
    p.scans = 30;
    p.initial_objects = 4;
    p.birth_probability = 0.1;
    p.birth_slots = 2;
    p.detection_probability = 1.0;
    p.clutter_rate = 0.0;
    const auto s = generate(p, 7);
    for (const auto& scan : s.scans) {
        EXPECT_EQ(scan.z.size(), states_at(s.truth, scan.k).size());
    }
}

TEST(Generate, ClutterCountHasPoissonMean)
{
    SimParams p;
    p.scans = 10000;
    p.clutter_rate = 10.0;
    const auto s = generate(p, 3);
    double total = 0.0;
    for (const auto& scan : s.scans) {
        total += static_cast<double>(scan.z.size());
        for (const auto& z : scan.z) {
            EXPECT_TRUE(s.region().contains(z));
        }
    }
    EXPECT_NEAR(total / p.scans, 10.0, 3.0 * std::sqrt(10.0) / 100.0);
}

TEST(Generate, TruthIsContiguousWithDistinctLabels)
{
    const auto s = desk_scale_scenario(11);
    for (std::size_t i = 1; i < s.truth.size(); ++i) {
        EXPECT_LT(s.truth[i - 1].label, s.truth[i].label);
    }
    for (const auto& t : s.truth) {
        EXPECT_FALSE(t.states.empty());
        EXPECT_GE(t.start, 0);
        EXPECT_LT(t.end(), s.params.scans);
    }
}

TEST(Generate, DetectionsNearTruthWithTinyNoise)
{
    SimParams p;
    p.scans = 40;
    p.initial_objects = 5;
    p.detection_probability = 1.0;
    p.clutter_rate = 0.0;
    p.measurement_noise = 1e-6;
    const auto s = generate(p, 5);
    for (const auto& scan : s.scans) {
        for (const auto& x : states_at(s.truth, scan.k)) {
            double best = kInf;
            for (const auto& z : scan.z) {
                best = std::min(best, (z - x.head(2)).norm());
            }
            // 6σ on each axis; a miss has probability below 1e-8 per object-scan.
            EXPECT_LT(best, 6.0 * std::sqrt(2.0) * p.measurement_noise);
        }
    }
}

TEST(DeskScale, SensorAndMotionParameters)
{
    const auto p = desk_scale_params();
    EXPECT_DOUBLE_EQ(p.detection_probability, 0.88);
    EXPECT_DOUBLE_EQ(p.measurement_noise, 5.0);
    EXPECT_DOUBLE_EQ(p.process_noise, 0.2);
    EXPECT_DOUBLE_EQ(p.clutter_rate, 10.0);
    EXPECT_EQ(p.scans, 100);
}

TEST(DeskScale, DeterministicSerialization)
{
    EXPECT_EQ(io::scenario_to_json(desk_scale_scenario(42)).dump(), io::scenario_to_json(desk_scale_scenario(42)).dump());
    EXPECT_NE(io::scenario_to_json(desk_scale_scenario(42)).dump(), io::scenario_to_json(desk_scale_scenario(43)).dump());
}

TEST(DeskScale, RoundTripsThroughJson)
{
    const auto s = desk_scale_scenario(8);
    const auto back = io::scenario_from_json(io::scenario_to_json(s));
    EXPECT_EQ(io::scenario_to_json(back).dump(), io::scenario_to_json(s).dump());
}

TEST(DeskScale, AverageClutterNearTen)
{
    const auto s = desk_scale_scenario(2);
    double measurements = 0.0;
    double detections = 0.0;
    for (const auto& scan : s.scans) {
        measurements += static_cast<double>(scan.z.size());
        detections += 0.88 * static_cast<double>(states_at(s.truth, scan.k).size());
    }
    EXPECT_NEAR((measurements - detections) / s.params.scans, 10.0, 1.5);
}

TEST(SimParams, Validation)
{
    SimParams p;
    p.detection_probability = 1.5;
    EXPECT_THROW(generate(p, 0), std::invalid_argument);
}
