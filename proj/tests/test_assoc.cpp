#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "lrfs/assignment.hpp"
#include "lrfs/assoc.hpp"
#include "oracles.hpp"

using namespace lrfs;

namespace {

Matrix random_eta(int rows, int measurements, std::mt19937_64& gen)
{
    std::uniform_real_distribution<double> u(0.05, 3.0);
    Matrix eta(rows, measurements + 2);
    for (int i = 0; i < rows; ++i) {
        for (int c = 0; c < measurements + 2; ++c) {
            eta(i, c) = u(gen);
        }
    }
    return eta;
}

}  // namespace

TEST(Assignment, SolvesSmallProblemOptimally)
{
    Matrix cost(3, 3);
    cost << 4, 1, 3, 2, 0, 5, 3, 2, 2;
    const auto result = solve_assignment(cost);
    ASSERT_TRUE(result.has_value());
    EXPECT_DOUBLE_EQ(result->cost, 5.0);
}

TEST(Assignment, InfeasibleReturnsNothing)
{
    Matrix cost = Matrix::Constant(2, 2, kInf);
    cost(0, 0) = 1.0;
    cost(1, 0) = 1.0;
    EXPECT_FALSE(solve_assignment(cost).has_value());
}

TEST(GibbsConditional, ZeroesTakenDetections)
{
    const Matrix eta = Matrix::Ones(2, 3);
    const std::vector<int> current{-1, 1};
    const auto p = gibbs_conditional(eta, 0, current);
    ASSERT_EQ(p.size(), 3U);
    EXPECT_DOUBLE_EQ(p[0], 0.5);
    EXPECT_DOUBLE_EQ(p[1], 0.5);
    EXPECT_DOUBLE_EQ(p[2], 0.0);
}

TEST(GibbsConditional, SingleRowIsNormalizedRow)
{
    Matrix eta(1, 4);
    eta << 1, 2, 3, 4;
    const auto p = gibbs_conditional(eta, 0, std::vector<int>{2});
    EXPECT_DOUBLE_EQ(p[0], 0.1);
    EXPECT_DOUBLE_EQ(p[3], 0.4);
}

TEST(GibbsConditional, NoPositivesMeansRawRow)
{
    Matrix eta(2, 3);
    eta << 1, 1, 2, 3, 0.5, 0.5;
    const auto p = gibbs_conditional(eta, 1, std::vector<int>{0, -1});
    EXPECT_DOUBLE_EQ(p[0], 0.75);
    EXPECT_DOUBLE_EQ(p[2], 0.125);
}

TEST(GibbsSample, ZeroIterationsReturnsInit)
{
    const Matrix eta = Matrix::Ones(2, 4);
    const auto out = gibbs_sample(eta, 0, 7, {0, 2});
    ASSERT_EQ(out.size(), 1U);
    EXPECT_EQ(out[0].gamma, (ExtendedAssociation{0, 2}));
    EXPECT_DOUBLE_EQ(out[0].log_weight, 0.0);
}

TEST(GibbsSample, RejectsInvalidInit)
{
    EXPECT_THROW(gibbs_sample(Matrix::Ones(2, 3), 5, 1, {1, 1}), std::invalid_argument);
}

TEST(GibbsSample, OutputsArePositiveOneToOneWithExactWeights)
{
    std::mt19937_64 gen(11);
    const Matrix eta = random_eta(4, 3, gen);
    const auto out = gibbs_sample(eta, 500, 3, ExtendedAssociation(4, -1));
    std::set<ExtendedAssociation> distinct;
    for (const auto& w : out) {
        EXPECT_TRUE(is_positive_one_to_one(w.gamma));
        EXPECT_NEAR(w.log_weight, std::log(oracle::association_weight(eta, w.gamma)), 1e-12);
        distinct.insert(w.gamma);
    }
    EXPECT_EQ(distinct.size(), out.size());
}

TEST(GibbsSample, OutputGrowsMonotonicallyWithIterations)
{
    std::mt19937_64 gen(5);
    const Matrix eta = random_eta(3, 3, gen);
    std::vector<ExtendedAssociation> previous;
    for (const std::size_t t : {0U, 1U, 5U, 20U, 100U, 400U}) {
        const auto out = gibbs_sample(eta, t, 99, ExtendedAssociation(3, -1));
        ASSERT_GE(out.size(), previous.size());
        for (std::size_t i = 0; i < previous.size(); ++i) {
            EXPECT_EQ(out[i].gamma, previous[i]);
        }
        previous.clear();
        for (const auto& w : out) {
            previous.push_back(w.gamma);
        }
    }
}

TEST(GibbsSample, ReproducibleForFixedSeed)
{
    std::mt19937_64 gen(8);
    const Matrix eta = random_eta(3, 2, gen);
    const auto a = gibbs_sample(eta, 50, 1234, ExtendedAssociation(3, -1));
    const auto b = gibbs_sample(eta, 50, 1234, ExtendedAssociation(3, -1));
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].gamma, b[i].gamma);
    }
}

TEST(GibbsChain, UniformScoresGiveUniformStationaryLaw)
{
    const Matrix eta = Matrix::Ones(2, 3);
    const auto valid = oracle::all_valid_associations(2, 1);
    ASSERT_EQ(valid.size(), 8U);
    GibbsChain chain(eta, 2024, {-1, -1});
    std::map<ExtendedAssociation, double> counts;
    const int sweeps = 100000;
    for (int t = 0; t < sweeps; ++t) {
        chain.sweep();
        counts[chain.state()] += 1.0;
    }
    std::map<ExtendedAssociation, double> empirical;
    std::map<ExtendedAssociation, double> uniform;
    double statistic = 0.0;
    const double expected = static_cast<double>(sweeps) / 8.0;
    for (const auto& gamma : valid) {
        empirical[gamma] = counts[gamma] / sweeps;
        uniform[gamma] = 1.0 / 8.0;
        statistic += (counts[gamma] - expected) * (counts[gamma] - expected) / expected;
    }
    EXPECT_EQ(counts.size(), 8U);
    EXPECT_LT(oracle::total_variation(empirical, uniform), 0.02);
    EXPECT_GT(oracle::chi_square_survival(statistic, 7), 0.01);
}

TEST(CostMatrix, NegativeLogLayout)
{
    Matrix eta(1, 3);
    eta << std::exp(-2.0), std::exp(-3.0), std::exp(-5.0);
    const Matrix cost = cost_matrix(eta);
    ASSERT_EQ(cost.cols(), 3);
    EXPECT_NEAR(cost(0, 0), 5.0, 1e-14);
    EXPECT_NEAR(cost(0, 1), 3.0, 1e-14);
    EXPECT_NEAR(cost(0, 2), 2.0, 1e-14);
}

TEST(CostMatrix, ZeroScoreIsInfiniteAndPatternHolds)
{
    std::mt19937_64 gen(3);
    Matrix eta = random_eta(2, 2, gen);
    eta(1, 3) = 0.0;
    const Matrix cost = cost_matrix(eta);
    ASSERT_EQ(cost.rows(), 2);
    ASSERT_EQ(cost.cols(), 6);
    EXPECT_EQ(cost(1, 1), kInf);
    for (int i = 0; i < 2; ++i) {
        for (int c = 0; c < 6; ++c) {
            const bool allowed = c < 2 || c == 2 + i || c == 4 + i;
            if (!allowed) {
                EXPECT_EQ(cost(i, c), kInf);
            }
        }
    }
}

TEST(CostMatrix, TraceIdentityMatchesWeight)
{
    std::mt19937_64 gen(21);
    const Matrix eta = random_eta(3, 2, gen);
    const Matrix cost = cost_matrix(eta);
    for (const auto& r : murty_kbest(cost, 1000)) {
        EXPECT_NEAR(std::exp(-r.cost), oracle::association_weight(eta, r.gamma), 1e-12);
    }
}

TEST(Murty, SingleRowRanking)
{
    Matrix eta(1, 3);
    eta << std::exp(-2.0), std::exp(-3.0), std::exp(-5.0);
    const auto ranked = murty_kbest(cost_matrix(eta), 10);
    ASSERT_EQ(ranked.size(), 3U);
    EXPECT_EQ(ranked[0].gamma, (ExtendedAssociation{-1}));
    EXPECT_NEAR(ranked[0].cost, 2.0, 1e-12);
    EXPECT_EQ(ranked[1].gamma, (ExtendedAssociation{0}));
    EXPECT_NEAR(ranked[1].cost, 3.0, 1e-12);
    EXPECT_EQ(ranked[2].gamma, (ExtendedAssociation{1}));
    EXPECT_NEAR(ranked[2].cost, 5.0, 1e-12);
}

TEST(Murty, ExhaustiveEnumerationMatchesBruteForce)
{
    std::mt19937_64 gen(77);
    for (int p = 1; p <= 3; ++p) {
        for (int m = 0; m <= 3; ++m) {
            const Matrix eta = random_eta(p, m, gen);
            const auto ranked = murty_kbest(cost_matrix(eta), 1U << 20);
            auto brute = oracle::all_valid_associations(p, m);
            ASSERT_EQ(ranked.size(), brute.size()) << "P=" << p << " M=" << m;
            std::set<ExtendedAssociation> seen;
            for (std::size_t i = 0; i < ranked.size(); ++i) {
                EXPECT_TRUE(is_positive_one_to_one(ranked[i].gamma));
                seen.insert(ranked[i].gamma);
                if (i > 0) {
                    EXPECT_LE(ranked[i - 1].cost, ranked[i].cost + 1e-12);
                }
            }
            EXPECT_EQ(seen, std::set<ExtendedAssociation>(brute.begin(), brute.end()));
            std::stable_sort(brute.begin(), brute.end(), [&](const auto& a, const auto& b) {
                return oracle::association_weight(eta, a) > oracle::association_weight(eta, b);
            });
            for (std::size_t i = 0; i < ranked.size(); ++i) {
                EXPECT_NEAR(std::exp(-ranked[i].cost), oracle::association_weight(eta, brute[i]), 1e-12);
            }
        }
    }
}

TEST(Murty, TruncatesToK)
{
    std::mt19937_64 gen(4);
    const Matrix eta = random_eta(3, 3, gen);
    const auto all = murty_kbest(cost_matrix(eta), 1000);
    const auto top = murty_kbest(cost_matrix(eta), 5);
    ASSERT_EQ(top.size(), 5U);
    for (std::size_t i = 0; i < top.size(); ++i) {
        EXPECT_EQ(top[i].gamma, all[i].gamma);
    }
}

TEST(Murty, TiesBreakLexicographically)
{
    const Matrix eta = Matrix::Ones(2, 3);
    const auto ranked = murty_kbest(cost_matrix(eta), 100);
    ASSERT_EQ(ranked.size(), 8U);
    for (std::size_t i = 1; i < ranked.size(); ++i) {
        EXPECT_LT(ranked[i - 1].gamma, ranked[i].gamma);
    }
}

TEST(EnumerateAssociations, SkipsZeroScores)
{
    Matrix eta = Matrix::Ones(2, 3);
    eta(0, 0) = 0.0;
    const auto out = enumerate_associations(eta);
    EXPECT_EQ(out.size(), 5U);
    for (const auto& w : out) {
        EXPECT_NE(w.gamma[0], -1);
    }
}
