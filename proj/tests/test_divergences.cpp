#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lrfs/divergences.hpp"
#include "oracles.hpp"

using namespace lrfs;

namespace {

using oracle::Track1d;

std::vector<Track1d> random_tracks(std::size_t n, std::mt19937_64& gen)
{
    std::uniform_real_distribution<double> existence(0.05, 0.95);
    std::uniform_real_distribution<double> mean(-1.5, 1.5);
    std::uniform_real_distribution<double> variance(0.8, 1.25);
    std::vector<Track1d> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back({existence(gen), mean(gen), variance(gen)});
    }
    return out;
}

void expect_relative(double actual, double expected, double rel = 1e-4, double floor = 1e-6)
{
    EXPECT_LE(std::abs(actual - expected), std::max(floor, rel * std::abs(expected)))
        << "actual=" << actual << " expected=" << expected;
}

}  // namespace

TEST(Divergences, IdenticalDensitiesGiveZero)
{
    const auto a = oracle::make_lmb({{0.4, 0.0, 1.0}, {0.7, 2.0, 0.5}});
    EXPECT_NEAR(renyi_lmb(a, a, 0.3), 0.0, 1e-12);
    EXPECT_NEAR(kl_lmb(a, a), 0.0, 1e-12);
    EXPECT_NEAR(chi2_lmb(a, a), 0.0, 1e-12);
    EXPECT_NEAR(csd_lmb(a, a), 0.0, 1e-12);
    EXPECT_NEAR(bhattacharyya_lmb(a, a), 0.0, 1e-12);
    EXPECT_NEAR(bhattacharyya_coefficient_lmb(a, a), 1.0, 1e-12);
}

TEST(Divergences, SingleLabelMatchesGridOracle)
{
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 5; ++trial) {
        const oracle::GridDivergences grid{random_tracks(1, gen), random_tracks(1, gen)};
        const auto a = oracle::make_lmb(grid.a);
        const auto b = oracle::make_lmb(grid.b);
        for (const double alpha : {0.3, 0.5, 0.7}) {
            expect_relative(renyi_lmb(a, b, alpha), grid.renyi(alpha));
        }
        expect_relative(kl_lmb(a, b), grid.kl());
        expect_relative(chi2_lmb(a, b), grid.chi2());
        expect_relative(csd_lmb(a, b), grid.cs());
        expect_relative(bhattacharyya_lmb(a, b), grid.bhattacharyya());
    }
}

TEST(Divergences, TwoLabelMatchesGridOracle)
{
    std::mt19937_64 gen(29);
    oracle::GridDivergences grid{random_tracks(2, gen), random_tracks(2, gen)};
    grid.cells = 400;
    grid.lo = -12.0;
    grid.hi = 12.0;
    const auto a = oracle::make_lmb(grid.a);
    const auto b = oracle::make_lmb(grid.b);
    expect_relative(renyi_lmb(a, b, 0.5), grid.renyi(0.5));
    expect_relative(kl_lmb(a, b), grid.kl());
    expect_relative(chi2_lmb(a, b), grid.chi2());
    expect_relative(csd_lmb(a, b), grid.cs());
}

TEST(Divergences, BhattacharyyaIsHalfOrderRenyi)
{
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = oracle::make_lmb(random_tracks(2, gen));
        const auto b = oracle::make_lmb(random_tracks(2, gen));
        EXPECT_NEAR(bhattacharyya_lmb(a, b), renyi_lmb(a, b, 0.5), 1e-12);
        EXPECT_NEAR(bhattacharyya_lmb(a, b), -2.0 * std::log(bhattacharyya_coefficient_lmb(a, b)), 1e-12);
    }
}

TEST(Divergences, NonNegativeAndCsSymmetric)
{
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 30; ++trial) {
        const auto a = oracle::make_lmb(random_tracks(2, gen));
        const auto b = oracle::make_lmb(random_tracks(2, gen));
        EXPECT_GE(renyi_lmb(a, b, 0.7), -1e-12);
        EXPECT_GE(kl_lmb(a, b), -1e-12);
        EXPECT_GE(chi2_lmb(a, b), -1e-12);
        EXPECT_NEAR(csd_lmb(a, b), csd_lmb(b, a), 1e-12);
    }
}

TEST(Divergences, KlFormsAgree)
{
    std::mt19937_64 gen(9);
    for (int trial = 0; trial < 10; ++trial) {
        const auto a = oracle::make_lmb(random_tracks(2, gen));
        const auto b = oracle::make_lmb(random_tracks(2, gen));
        EXPECT_NEAR(kl_lmb(a, b), kl_lmb_weighted_form(a, b), 1e-12);
    }
}

TEST(Divergences, RenyiApproachesKl)
{
    std::mt19937_64 gen(13);
    for (int trial = 0; trial < 10; ++trial) {
        const auto a = oracle::make_lmb(random_tracks(1, gen));
        const auto b = oracle::make_lmb(random_tracks(1, gen));
        EXPECT_LT(std::abs(renyi_lmb(a, b, 0.999) - kl_lmb(a, b)), 1e-2);
    }
}

TEST(Divergences, MissingLabelCases)
{
    const auto a = oracle::make_lmb({{0.4, 0.0, 1.0}});
    const LmbDensity empty;
    EXPECT_EQ(kl_lmb(a, empty), kInf);
    EXPECT_NEAR(kl_lmb(empty, a), -std::log(0.6), 1e-15);
    EXPECT_EQ(chi2_lmb(a, empty), kInf);
}

TEST(Divergences, CauchySchwarzDependsOnUnit)
{
    const auto a = oracle::make_lmb({{0.4, 0.0, 1.0}});
    const auto b = oracle::make_lmb({{0.6, 1.0, 1.0}});
    EXPECT_GT(std::abs(csd_lmb(a, b, 1.0) - csd_lmb(a, b, 10.0)), 1e-3);
    EXPECT_THROW(csd_lmb(a, b, 0.0), std::invalid_argument);
    EXPECT_THROW(renyi_lmb(a, b, 1.0), std::invalid_argument);
}

TEST(Divergences, GlmbCauchySchwarzMatchesLmbForm)
{
    const auto a = oracle::make_lmb({{0.4, 0.0, 1.0}, {0.3, 1.0, 2.0}});
    const auto b = oracle::make_lmb({{0.6, 0.5, 1.0}, {0.2, -1.0, 0.7}});
    for (const double unit : {1.0, 3.0}) {
        EXPECT_NEAR(csd_glmb(GlmbDensity::from_lmb(a), GlmbDensity::from_lmb(b), unit), csd_lmb(a, b, unit), 1e-12);
    }
}

TEST(PoissonDivergences, IdenticalGiveZero)
{
    const PoissonRfs v(3.0, oracle::gaussian_1d(0.0, 1.0));
    for (const auto kind : {DivergenceKind::renyi, DivergenceKind::kl, DivergenceKind::chi2, DivergenceKind::cs}) {
        EXPECT_NEAR(divergence_poisson(kind, v, v), 0.0, 1e-12);
    }
}

TEST(PoissonDivergences, CauchySchwarzMatchesQuadrature)
{
    const double shift = 1.3;
    const double unit = 2.0;
    const PoissonRfs v1(1.0, oracle::gaussian_1d(0.0, 1.0));
    const PoissonRfs v2(1.0, oracle::gaussian_1d(shift, 1.0));
    const double norm = oracle::integrate_1d(
        [&](double x) {
            const double d = oracle::normal_pdf(x, 0.0, 1.0) - oracle::normal_pdf(x, shift, 1.0);
            return d * d;
        },
        -15.0, 15.0, 20000);
    EXPECT_NEAR(divergence_poisson(DivergenceKind::cs, v1, v2, unit), 0.5 * unit * norm, 1e-8);
}

TEST(PoissonDivergences, KlOfProportionalIntensities)
{
    const double rate = 2.5;
    const double c = 1.7;
    const PoissonRfs v1(rate, oracle::gaussian_1d(0.2, 1.5));
    const PoissonRfs v2(c * rate, oracle::gaussian_1d(0.2, 1.5));
    // ∫ v1 ln(v1/v2) + ∫ v2 - ∫ v1 = λ ln(1/c) + (c - 1) λ.
    EXPECT_NEAR(divergence_poisson(DivergenceKind::kl, v1, v2), rate * std::log(1.0 / c) + (c - 1.0) * rate, 1e-12);
}

TEST(PoissonDivergences, RenyiAndChiSquareMatchQuadrature)
{
    const PoissonRfs v1(1.5, oracle::gaussian_1d(0.0, 1.0));
    const PoissonRfs v2(2.0, oracle::gaussian_1d(0.5, 1.4));
    auto intensity1 = [&](double x) { return 1.5 * oracle::normal_pdf(x, 0.0, 1.0); };
    auto intensity2 = [&](double x) { return 2.0 * oracle::normal_pdf(x, 0.5, 1.4); };
    const double alpha = 0.3;
    const double cross = oracle::integrate_1d(
        [&](double x) { return std::pow(intensity1(x), alpha) * std::pow(intensity2(x), 1.0 - alpha); }, -20, 20, 20000);
    EXPECT_NEAR(divergence_poisson(DivergenceKind::renyi, v1, v2, 1.0, alpha),
                (cross - alpha * 1.5 - (1 - alpha) * 2.0) / (alpha - 1.0), 1e-8);
    const double ratio =
        oracle::integrate_1d([&](double x) { return intensity1(x) * intensity1(x) / intensity2(x); }, -20, 20, 20000);
    EXPECT_NEAR(divergence_poisson(DivergenceKind::chi2, v1, v2), std::expm1(ratio - 2.0 * 1.5 + 2.0), 1e-7);
}
