#include <gtest/gtest.h>

#include <random>

#include "lrfs/metrics.hpp"

using namespace lrfs;

namespace {

Vector planar(double x, double y) { return Vector{{x, y}}; }

std::vector<Vector> random_set(std::mt19937_64& gen)
{
    std::uniform_int_distribution<int> count(0, 5);
    std::uniform_real_distribution<double> coord(0.0, 200.0);
    std::vector<Vector> out(static_cast<std::size_t>(count(gen)));
    for (auto& v : out) {
        v = planar(coord(gen), coord(gen));
    }
    return out;
}

}  // namespace

TEST(Ospa, EmptyCases)
{
    const std::vector<Vector> none;
    const std::vector<Vector> one{planar(0, 0)};
    EXPECT_EQ(ospa(none, none, 100.0, 1.0), 0.0);
    EXPECT_EQ(ospa(none, one, 100.0, 1.0), 100.0);
    EXPECT_EQ(ospa(one, none, 100.0, 2.0), 100.0);
}

TEST(Ospa, LocalizationAndCardinality)
{
    const std::vector<Vector> x{planar(0, 0), planar(10, 0)};
    const std::vector<Vector> y{planar(3, 4)};
    // Best match (0,0)-(3,4) at 5 plus one unmatched point at the cutoff.
    EXPECT_NEAR(ospa(x, y, 20.0, 1.0), (5.0 + 20.0) / 2.0, 1e-12);
    EXPECT_NEAR(ospa(x, y, 20.0, 2.0), std::sqrt((25.0 + 400.0) / 2.0), 1e-12);
    EXPECT_NEAR(ospa(x, y, 4.0, 1.0), 4.0, 1e-12);
}

TEST(Ospa, RejectsBadParameters)
{
    const std::vector<Vector> x{planar(0, 0)};
    EXPECT_THROW(ospa(x, x, 0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(ospa(x, x, 1.0, 0.5), std::invalid_argument);
}

TEST(Ospa, MetricAxioms)
{
    std::mt19937_64 gen(1);
    for (int trial = 0; trial < 300; ++trial) {
        const auto a = random_set(gen);
        const auto b = random_set(gen);
        const auto c = random_set(gen);
        for (const double p : {1.0, 2.0}) {
            const double ab = ospa(a, b, 50.0, p);
            EXPECT_EQ(ab, ospa(b, a, 50.0, p));
            EXPECT_EQ(ospa(a, a, 50.0, p), 0.0);
            EXPECT_LE(ospa(a, c, 50.0, p), ab + ospa(b, c, 50.0, p) + 1e-9);
        }
    }
}

TEST(Ospa2, TrajectoryDistanceOverWindow)
{
    const LabeledTrajectory a{Label{0, 1}, 0, {planar(0, 0), planar(1, 0), planar(2, 0)}};
    const LabeledTrajectory b{Label{0, 2}, 1, {planar(1, 3), planar(2, 4)}};
    // Scan 0: one-sided (cutoff 10); scans 1, 2: distances 3 and 4.
    EXPECT_NEAR(trajectory_distance(a, b, 0, 2, 10.0), (10.0 + 3.0 + 4.0) / 3.0, 1e-12);
    EXPECT_NEAR(trajectory_distance(a, b, 1, 2, 10.0), 3.5, 1e-12);
}

TEST(Ospa2, IdentityAndCardinalityPenalty)
{
    const std::vector<LabeledTrajectory> truth{{Label{0, 1}, 0, {planar(0, 0), planar(1, 1)}},
                                               {Label{0, 2}, 0, {planar(50, 50), planar(51, 51)}}};
    EXPECT_EQ(ospa2(truth, truth, 100.0, 1.0, 0, 1), 0.0);
    const std::vector<LabeledTrajectory> one{truth[0]};
    EXPECT_NEAR(ospa2(truth, one, 100.0, 1.0, 0, 1), 50.0, 1e-12);
    EXPECT_EQ(ospa2(truth, {}, 100.0, 1.0, 0, 1), 100.0);
    EXPECT_THROW(ospa2(truth, truth, 100.0, 1.0, 2, 1), std::invalid_argument);
}

TEST(Ospa2, OutsideWindowIgnored)
{
    const std::vector<LabeledTrajectory> a{{Label{0, 1}, 0, {planar(0, 0)}}};
    const std::vector<LabeledTrajectory> b{{Label{5, 1}, 5, {planar(0, 0)}}};
    EXPECT_EQ(ospa2(a, b, 100.0, 1.0, 3, 4), 0.0);
}

TEST(StatesAt, CollectsAliveStates)
{
    const std::vector<LabeledTrajectory> t{{Label{0, 1}, 0, {planar(0, 0), planar(1, 0)}},
                                           {Label{1, 1}, 1, {planar(5, 5)}}};
    EXPECT_EQ(states_at(t, 0).size(), 1U);
    EXPECT_EQ(states_at(t, 1).size(), 2U);
    EXPECT_TRUE(states_at(t, 2).empty());
}
