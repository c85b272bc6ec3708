#include <gtest/gtest.h>

#include <cmath>

#include "lrfs/standard_model.hpp"
#include "oracles.hpp"

using namespace lrfs;

namespace {

constexpr double kRegionHalfWidth = 50.0;

Vector point(double x) { return Vector::Constant(1, x); }

ObservationModel scalar_observation(double pd, double r, double clutter_rate = 2.0, double gate = 1e3)
{
    return ObservationModel{pd, LinearGaussianSensor(Matrix::Identity(1, 1), Matrix::Constant(1, 1, r)),
                            ClutterModel{clutter_rate, Box(point(-kRegionHalfWidth), point(kRegionHalfWidth))}, gate};
}

SurvivalModel scalar_survival(double ps, double f, double q)
{
    return SurvivalModel{ps, LinearGaussianMotion(Matrix::Constant(1, 1, f), Matrix::Constant(1, 1, q))};
}

double kappa(const ObservationModel& obs) { return obs.clutter.rate / (2.0 * kRegionHalfWidth); }

}  // namespace

TEST(Psi, MissedDetection)
{
    const Measurements z{point(1.0)};
    EXPECT_NEAR(psi(scalar_observation(0.88, 1.0), point(0), 0, z), 0.12, 1e-15);
    EXPECT_EQ(psi(scalar_observation(1.0, 1.0), point(0), 0, z), 0.0);
}

TEST(Psi, DetectionRatio)
{
    // Unit clutter intensity: rate 100 over a width-100 region.
    const auto obs = scalar_observation(1.0, 1.0, 100.0);
    const Measurements z{point(0.7)};
    const double g = oracle::normal_pdf(0.7, 0.0, 1.0);
    EXPECT_NEAR(psi(obs, point(0.0), 1, z), g, 1e-15);
}

TEST(Psi, MeasurementOutsideClutterSupportFails)
{
    const Measurements z{point(1e3)};
    EXPECT_THROW(psi(scalar_observation(0.9, 1.0), point(0), 1, z), std::domain_error);
    EXPECT_THROW(psi(scalar_observation(0.9, 1.0), point(0), 2, z), std::invalid_argument);
}

TEST(Birth, ValidatesLabelsAndProbabilities)
{
    EXPECT_THROW(BirthModel(3, {{Label{2, 1}, 0.1, oracle::gaussian_1d(0, 1)}}), std::invalid_argument);
    EXPECT_THROW(BirthModel(3, {{Label{3, 1}, 1.0, oracle::gaussian_1d(0, 1)}}), std::invalid_argument);
    EXPECT_THROW(StateProbability(1.5), std::invalid_argument);
}

TEST(ScoreMatrix, ClosedFormEntries)
{
    const auto survival = scalar_survival(0.9, 1.0, 1.0);
    const auto obs = scalar_observation(0.88, 1.0);
    const BirthModel birth(1, {{Label{1, 1}, 0.03, oracle::gaussian_1d(0, 4)}});
    const std::vector<std::pair<Label, TrackPtr>> prior{{Label{0, 1}, make_track(oracle::gaussian_1d(0, 1))}};
    const Measurements z{point(0.5), point(-3.0)};
    const ScoreMatrix sm = build_score_matrix(prior, birth, survival, obs, z);
    ASSERT_EQ(sm.rows(), 2U);
    EXPECT_EQ(sm.eta_matrix().cols(), 4);
    EXPECT_NEAR(sm.eta(0, -1), 0.1, 1e-15);
    EXPECT_NEAR(sm.eta(0, 0), 0.9 * 0.12, 1e-15);
    EXPECT_NEAR(sm.eta(1, -1), 0.97, 1e-15);
    EXPECT_EQ(sm.row(1).label, (Label{1, 1}));
}

TEST(ScoreMatrix, CertainSurvivalMissedDetection)
{
    const auto row = survival_row(Label{0, 1}, oracle::gaussian_1d(2, 3), scalar_survival(1.0, 1.0, 0.5),
                                  scalar_observation(0.88, 1.0), Measurements{});
    EXPECT_NEAR(row.at(0), 0.12, 1e-15);
    EXPECT_EQ(row.at(-1), 0.0);
}

TEST(ScoreMatrix, EntriesMatchDoubleQuadrature)
{
    const double ps = 0.95;
    const double pd = 0.8;
    const double f = 0.9;
    const double q = 0.7;
    const double r = 0.5;
    const double prior_mean = 1.0;
    const double prior_var = 1.5;
    const auto survival = scalar_survival(ps, f, q);
    const auto obs = scalar_observation(pd, r);
    const Measurements z{point(1.4), point(-0.6)};
    const auto row = survival_row(Label{0, 1}, oracle::gaussian_1d(prior_mean, prior_var), survival, obs, z);

    // ∫∫ p(x') f(x | x') P_D g(z | x) / κ dx dx' on a 2-D midpoint grid.
    for (int j = 1; j <= 2; ++j) {
        const double zj = z[static_cast<std::size_t>(j - 1)](0);
        const double value = oracle::integrate_1d(
            [&](double prev) {
                return oracle::normal_pdf(prev, prior_mean, prior_var)
                       * oracle::integrate_1d(
                           [&](double next) { return oracle::normal_pdf(next, f * prev, q) * oracle::normal_pdf(zj, next, r); },
                           f * prev - 12.0, f * prev + 12.0, 600);
            },
            prior_mean - 14.0, prior_mean + 14.0, 600);
        const double expected = ps * pd * value / kappa(obs);
        EXPECT_NEAR(row.at(j) / expected, 1.0, 1e-6) << "j=" << j;
    }

    const BirthEntry entry{Label{1, 1}, 0.2, oracle::gaussian_1d(-0.5, 2.0)};
    const auto brow = birth_row(entry, obs, z);
    for (int j = 1; j <= 2; ++j) {
        const double zj = z[static_cast<std::size_t>(j - 1)](0);
        const double value = oracle::integrate_1d(
            [&](double x) { return oracle::normal_pdf(x, -0.5, 2.0) * oracle::normal_pdf(zj, x, r); }, -20, 20, 2000);
        EXPECT_NEAR(brow.at(j) / (0.2 * pd * value / kappa(obs)), 1.0, 1e-6);
    }
    EXPECT_NEAR(brow.at(0), 0.2 * (1 - pd), 1e-15);
}

TEST(ScoreMatrix, GatedEntriesAreZero)
{
    const auto obs = scalar_observation(0.9, 1.0, 2.0, 5.0);
    const Measurements z{point(0.5), point(30.0)};
    const auto row = birth_row({Label{0, 1}, 0.5, oracle::gaussian_1d(0, 1)}, obs, z);
    EXPECT_GT(row.at(1), 0.0);
    EXPECT_EQ(row.at(2), 0.0);
    EXPECT_EQ(row.posterior_at(2), nullptr);
    EXPECT_NE(row.posterior_at(1), nullptr);
}

TEST(ScoreMatrix, CachedPosteriorIsKalmanUpdate)
{
    const auto obs = scalar_observation(0.9, 1.0);
    const Measurements z{point(0.0)};
    const auto row = birth_row({Label{0, 1}, 0.5, oracle::gaussian_1d(0, 1)}, obs, z);
    const auto& post = *row.posterior_at(1);
    EXPECT_NEAR(post.mean()(0), 0.0, 1e-15);
    EXPECT_NEAR(post.covariance()(0, 0), 0.5, 1e-15);
}

TEST(TransitionDensity, EmptyToEmpty)
{
    const BirthModel birth(1, {{Label{1, 1}, 0.03, oracle::gaussian_1d(0, 1)}});
    EXPECT_NEAR(transition_density({}, {}, birth, scalar_survival(0.9, 1, 1)), 0.97, 1e-15);
}

TEST(TransitionDensity, UnknownLabelIsZero)
{
    const BirthModel birth(1, {{Label{1, 1}, 0.03, oracle::gaussian_1d(0, 1)}});
    EXPECT_EQ(transition_density({}, {{Label{1, 2}, point(0)}}, birth, scalar_survival(0.9, 1, 1)), 0.0);
    EXPECT_EQ(transition_density({}, {{Label{0, 7}, point(0)}}, birth, scalar_survival(0.9, 1, 1)), 0.0);
}

TEST(TransitionDensity, SingleSurvivor)
{
    const BirthModel birth(1);
    const auto survival = scalar_survival(0.9, 0.8, 0.6);
    const double value = transition_density({{Label{0, 1}, point(1.0)}}, {{Label{0, 1}, point(1.3)}}, birth, survival);
    EXPECT_NEAR(value, 0.9 * oracle::normal_pdf(1.3, 0.8, 0.6), 1e-15);
}

TEST(TransitionDensity, IntegratesToOne)
{
    const BirthModel birth(1, {{Label{1, 1}, 0.3, oracle::gaussian_1d(0, 1)}});
    const auto survival = scalar_survival(0.9, 1.0, 1.0);
    const LabeledSet prev{{Label{0, 1}, point(0.5)}};
    const auto grid = AttributeGrid::line(-12, 12, 200);
    const LabelSet pool{Label{0, 1}, Label{1, 1}};
    const double total = set_integral_oracle(
        [&](const LabeledSet& next) { return transition_density(prev, next, birth, survival); }, grid, pool, 2);
    EXPECT_NEAR(total, 1.0, 1e-3);
}

TEST(ObservationLikelihood, SmallCases)
{
    const double pd = 0.7;
    const auto obs = scalar_observation(pd, 1.0);
    const Measurements z{point(0.4)};
    const double k = kappa(obs);
    EXPECT_EQ(observation_likelihood({}, z, obs), 1.0);

    const double g1 = oracle::normal_pdf(0.4, 0.0, 1.0);
    EXPECT_NEAR(observation_likelihood({{Label{0, 1}, point(0.0)}}, z, obs), (1 - pd) + pd * g1 / k, 1e-14);

    const double g2 = oracle::normal_pdf(0.4, 1.0, 1.0);
    const LabeledSet two{{Label{0, 1}, point(0.0)}, {Label{0, 2}, point(1.0)}};
    EXPECT_NEAR(observation_likelihood(two, z, obs), (1 - pd) * (1 - pd) + (1 - pd) * pd * (g1 + g2) / k, 1e-13);
}

TEST(ObservationLikelihood, ListingOrderInvariant)
{
    const auto obs = scalar_observation(0.8, 0.5);
    const Measurements z{point(0.4), point(-1.0), point(2.0)};
    const LabeledSet forward{{Label{0, 1}, point(0.0)}, {Label{0, 2}, point(1.0)}, {Label{1, 1}, point(-0.8)}};
    const LabeledSet shuffled{forward[2], forward[0], forward[1]};
    EXPECT_EQ(observation_likelihood(forward, z, obs), observation_likelihood(shuffled, z, obs));
}
