#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lrfs/densities.hpp"
#include "oracles.hpp"

using namespace lrfs;

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
const Label kFirst{0, 1};
const Label kSecond{0, 2};

GlmbHypothesis hypothesis(double weight, LabelSet labels, std::vector<double> means = {})
{
    GlmbHypothesis h;
    h.log_weight = std::log(weight);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        h.tracks.push_back(make_track(oracle::gaussian_1d(i < means.size() ? means[i] : 0.0, 1.0)));
    }
    h.labels = std::move(labels);
    return h;
}

Vector point(double x) { return Vector::Constant(1, x); }

}  // namespace

TEST(Label, LexicographicOrder)
{
    EXPECT_LT((Label{0, 5}), (Label{1, 0}));
    EXPECT_LT((Label{2, 1}), (Label{2, 3}));
    EXPECT_EQ((Label{3, 4}), (Label{3, 4}));
    EXPECT_THROW(require_valid_label(Label{-1, 0}), std::invalid_argument);
    EXPECT_NO_THROW(require_valid_label(Label{0, 0}));
}

TEST(Bernoulli, RejectsCertainExistence)
{
    EXPECT_THROW(BernoulliRfs(1.0, oracle::gaussian_1d(0, 1)), std::invalid_argument);
    EXPECT_THROW(BernoulliRfs(0.5, oracle::gaussian_1d(0, 1).scaled(2.0)), std::invalid_argument);
}

TEST(EvalDensity, BernoulliEmptyAndSingleton)
{
    const BernoulliRfs b(0.5, oracle::gaussian_1d(0, 1));
    EXPECT_DOUBLE_EQ(eval_density(b, PointSet{}), 0.5);
    EXPECT_NEAR(eval_density(b, PointSet{point(0)}), 0.5 * kInvSqrt2Pi, 1e-15);
    EXPECT_NEAR(eval_density(b, PointSet{point(0)}), 0.19947, 1e-5);
    EXPECT_THROW(eval_density(b, PointSet{Vector::Zero(2)}), std::invalid_argument);
}

TEST(EvalDensity, LmbLabelOutsideDomainIsZero)
{
    const LmbDensity lmb({{kFirst, BernoulliRfs(0.5, oracle::gaussian_1d(0, 1))}});
    EXPECT_EQ(eval_density(lmb, LabeledSet{{kSecond, point(0.3)}}), 0.0);
}

TEST(EvalDensity, RepeatedLabelsAreZero)
{
    const auto lmb = oracle::make_lmb({{0.5, 0, 1}, {0.4, 1, 1}});
    EXPECT_EQ(eval_density(lmb, LabeledSet{{kFirst, point(0)}, {kFirst, point(1)}}), 0.0);
}

TEST(EvalDensity, SingleHypothesisGlmb)
{
    const GlmbDensity glmb({hypothesis(1.0, {kFirst})});
    EXPECT_NEAR(eval_density(glmb, LabeledSet{{kFirst, point(0)}}), kInvSqrt2Pi, 1e-15);
}

TEST(EvalDensity, LmbAgreesWithEnumeratedGlmb)
{
    const auto lmb = oracle::make_lmb({{0.3, -1.0, 0.5}, {0.8, 2.0, 1.5}, {0.55, 0.0, 2.0}});
    const GlmbDensity glmb = GlmbDensity::from_lmb(lmb);
    const LabelSet labels = lmb.labels();
    const std::vector<LabeledSet> sets{
        {},
        {{labels[1], point(1.7)}},
        {{labels[2], point(-0.4)}, {labels[0], point(0.2)}},
        {{labels[0], point(-1.1)}, {labels[1], point(2.5)}, {labels[2], point(0.9)}},
    };
    for (const auto& x : sets) {
        const double a = eval_density(lmb, x);
        const double b = eval_density(glmb, x);
        EXPECT_NEAR(a, b, 1e-12 * a);
    }
}

TEST(EvalDensity, ListingOrderDoesNotMatter)
{
    const auto lmb = oracle::make_lmb({{0.3, -1.0, 0.5}, {0.8, 2.0, 1.5}});
    const LabelSet labels = lmb.labels();
    const LabeledSet forward{{labels[0], point(0.1)}, {labels[1], point(1.9)}};
    const LabeledSet backward{{labels[1], point(1.9)}, {labels[0], point(0.1)}};
    EXPECT_DOUBLE_EQ(eval_density(lmb, forward), eval_density(lmb, backward));
}

TEST(EvalDensity, PoissonAndIidClusterAgreeForPoissonCardinality)
{
    const double rate = 1.3;
    const PoissonRfs poisson(rate, oracle::gaussian_1d(0.5, 2.0));
    std::vector<double> card;
    for (int n = 0; n <= 30; ++n) {
        card.push_back(std::exp(-rate + n * std::log(rate) - std::lgamma(n + 1.0)));
    }
    double total = 0.0;
    for (const double c : card) {
        total += c;
    }
    for (double& c : card) {
        c /= total;
    }
    const IidCluster cluster(card, oracle::gaussian_1d(0.5, 2.0));
    const PointSet x{point(0.0), point(1.0)};
    EXPECT_NEAR(eval_density(poisson, x), eval_density(cluster, x), 1e-12);
}

TEST(SetIntegral, BernoulliIntegratesToOne)
{
    const BernoulliRfs b(0.5, oracle::gaussian_1d(0, 1));
    const auto grid = AttributeGrid::line(-10, 10, 400);
    const double total = unlabeled_set_integral_oracle([&](const PointSet& x) { return eval_density(b, x); }, grid, 2);
    EXPECT_NEAR(total, 1.0, 1e-3);
}

TEST(SetIntegral, LabeledDensitiesIntegrateToOne)
{
    const auto lmb = oracle::make_lmb({{0.6, 0.0, 1.0}, {0.35, 1.5, 0.7}});
    const auto grid = AttributeGrid::line(-10, 10, 100);
    const LabelSet pool{kFirst, kSecond, Label{0, 3}};
    EXPECT_NEAR(set_integral_oracle([&](const LabeledSet& x) { return eval_density(lmb, x); }, grid, pool, 3), 1.0,
                1e-3);

    const GlmbDensity glmb({hypothesis(0.2, {}), hypothesis(0.3, {kFirst}, {1.0}),
                            hypothesis(0.5, {kFirst, kSecond}, {-1.0, 2.0})});
    EXPECT_NEAR(set_integral_oracle([&](const LabeledSet& x) { return eval_density(glmb, x); }, grid, pool, 3), 1.0,
                1e-3);

    const LabeledIidCluster cluster({0.2, 0.5, 0.3}, oracle::gaussian_1d(0, 1), 2);
    EXPECT_NEAR(set_integral_oracle([&](const LabeledSet& x) { return eval_density(cluster, x); }, grid, pool, 3), 1.0,
                1e-3);
}

TEST(SetIntegral, UnlabeledDensitiesIntegrateToOne)
{
    const auto grid = AttributeGrid::line(-10, 10, 100);
    const MultiBernoulli mb({BernoulliRfs(0.4, oracle::gaussian_1d(-1, 1)), BernoulliRfs(0.7, oracle::gaussian_1d(2, 0.5))});
    EXPECT_NEAR(unlabeled_set_integral_oracle([&](const PointSet& x) { return eval_density(mb, x); }, grid, 2), 1.0, 1e-3);
    const PoissonRfs poisson(0.4, oracle::gaussian_1d(0, 1));
    EXPECT_NEAR(unlabeled_set_integral_oracle([&](const PointSet& x) { return eval_density(poisson, x); }, grid, 3), 1.0,
                1e-3);
}

TEST(SetIntegral, RestrictionToCardinalityMatchesClosedForm)
{
    const auto lmb = oracle::make_lmb({{0.6, 0.0, 1.0}, {0.35, 1.5, 0.7}});
    const auto grid = AttributeGrid::line(-10, 10, 200);
    const LabelSet pool = lmb.labels();
    const auto card = cardinality_distribution(lmb);
    for (std::size_t n = 0; n <= 2; ++n) {
        const double mass = set_integral_oracle(
            [&](const LabeledSet& x) { return x.size() == n ? eval_density(lmb, x) : 0.0; }, grid, pool, 2);
        EXPECT_NEAR(mass, card[n], 1e-3);
    }
}

TEST(Cardinality, MultiBernoulliConvolution)
{
    const MultiBernoulli mb({BernoulliRfs(0.5, oracle::gaussian_1d(0, 1)), BernoulliRfs(0.5, oracle::gaussian_1d(0, 1))});
    const auto card = cardinality_distribution(mb);
    ASSERT_EQ(card.size(), 3U);
    EXPECT_DOUBLE_EQ(card[0], 0.25);
    EXPECT_DOUBLE_EQ(card[1], 0.5);
    EXPECT_DOUBLE_EQ(card[2], 0.25);
    EXPECT_EQ(cardinality_distribution(MultiBernoulli{}), std::vector<double>{1.0});
}

TEST(Cardinality, GlmbAccumulatesBySize)
{
    const GlmbDensity glmb({hypothesis(0.4, {kFirst}), hypothesis(0.6, {kFirst, kSecond})});
    const auto card = cardinality_distribution(glmb);
    ASSERT_EQ(card.size(), 3U);
    EXPECT_DOUBLE_EQ(card[0], 0.0);
    EXPECT_NEAR(card[1], 0.4, 1e-15);
    EXPECT_NEAR(card[2], 0.6, 1e-15);
}

TEST(Cardinality, EnumeratedGlmbMatchesMultiBernoulli)
{
    const auto lmb = oracle::make_lmb({{0.1, 0, 1}, {0.45, 0, 1}, {0.9, 0, 1}, {0.62, 0, 1}});
    const auto expected = cardinality_distribution(lmb);
    const auto actual = cardinality_distribution(GlmbDensity::from_lmb(lmb));
    ASSERT_EQ(actual.size(), expected.size());
    for (std::size_t n = 0; n < expected.size(); ++n) {
        EXPECT_NEAR(actual[n], expected[n], 1e-12);
    }
}

TEST(Phd, IdentityOnLmb)
{
    const auto lmb = oracle::make_lmb({{0.3, 1.0, 2.0}});
    const auto out = phd(lmb);
    ASSERT_EQ(out.size(), 1U);
    EXPECT_DOUBLE_EQ(out.at(kFirst).existence, 0.3);
    EXPECT_DOUBLE_EQ(out.at(kFirst).density.mean()(0), 1.0);
}

TEST(Phd, GlmbExistenceSums)
{
    const GlmbDensity glmb({hypothesis(0.4, {kFirst}), hypothesis(0.6, {kFirst, kSecond})});
    const auto out = phd(glmb);
    EXPECT_NEAR(out.at(kFirst).existence, 1.0, 1e-15);
    EXPECT_NEAR(out.at(kSecond).existence, 0.6, 1e-15);
}

TEST(Phd, GlmbDensityIsWeightMixture)
{
    const GlmbDensity glmb({hypothesis(0.5, {kFirst}, {0.0}), hypothesis(0.5, {kFirst}, {2.0})});
    const auto marginals = phd(glmb);
    const auto& density = marginals.at(kFirst).density;
    for (const double x : {-1.0, 0.5, 3.0}) {
        const double expected = 0.5 * oracle::normal_pdf(x, 0, 1) + 0.5 * oracle::normal_pdf(x, 2, 1);
        EXPECT_NEAR(density.pdf(point(x)), expected, 1e-14);
    }
}

TEST(Phd, EnumeratedGlmbRecoversLmb)
{
    const auto lmb = oracle::make_lmb({{0.25, -3.0, 0.4}, {0.7, 1.0, 2.5}, {0.5, 4.0, 1.0}});
    const auto out = phd(GlmbDensity::from_lmb(lmb));
    for (const auto& [label, track] : lmb.tracks()) {
        EXPECT_NEAR(out.at(label).existence, track.existence(), 1e-12);
        EXPECT_NEAR(out.at(label).density.mean()(0), track.density().mean()(0), 1e-9);
        EXPECT_NEAR(out.at(label).density.covariance()(0, 0), track.density().covariance()(0, 0), 1e-9);
    }
}

TEST(JointExistence, ExactAndSuperset)
{
    const GlmbDensity glmb({hypothesis(0.4, {kFirst}), hypothesis(0.6, {kFirst, kSecond})});
    EXPECT_EQ(joint_existence(glmb, {}), 0.0);
    EXPECT_NEAR(joint_existence(glmb, {kFirst}), 0.4, 1e-15);
    EXPECT_NEAR(joint_existence_superset(glmb, {kFirst}), 1.0, 1e-15);
    EXPECT_NEAR(joint_existence(glmb, {kSecond, kFirst}), 0.6, 1e-15);
}

TEST(JointExistence, SumsToOneOverHypothesizedSets)
{
    const auto glmb = GlmbDensity::from_lmb(oracle::make_lmb({{0.2, 0, 1}, {0.5, 0, 1}, {0.9, 0, 1}}));
    double total = 0.0;
    for (const auto& h : glmb.hypotheses()) {
        total += joint_existence(glmb, h.labels);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Glmb, NormalizesAndValidates)
{
    const GlmbDensity glmb({hypothesis(2.0, {kFirst}), hypothesis(6.0, {kSecond})});
    EXPECT_NEAR(glmb.weight(0), 0.25, 1e-15);
    EXPECT_TRUE(glmb.has_unique_keys());
    auto unsorted = hypothesis(1.0, {kSecond, kFirst});
    EXPECT_THROW(GlmbDensity({unsorted}), std::invalid_argument);
    const GlmbDensity duplicated({hypothesis(1.0, {kFirst}), hypothesis(1.0, {kFirst})});
    EXPECT_FALSE(duplicated.has_unique_keys());
}

TEST(AssociationHistory, RejectsSharedDetections)
{
    const ScanAssociation bad{0, {{kFirst, 1}, {kSecond, 1}}};
    EXPECT_THROW(AssociationHistory{}.extended(bad), std::invalid_argument);
    const ScanAssociation good{0, {{kFirst, 1}, {kSecond, 0}}};
    const auto h = AssociationHistory{}.extended(good);
    EXPECT_EQ(h.size(), 1U);
    EXPECT_EQ(h.last()->value(kSecond), 0);
    EXPECT_FALSE(h.last()->value(Label{4, 4}).has_value());
    EXPECT_THROW(h.extended(good), std::invalid_argument);
}

TEST(AssociationHistory, EqualityIsStructural)
{
    const ScanAssociation first{0, {{kFirst, 1}}};
    const ScanAssociation second{1, {{kFirst, 0}}};
    const auto a = AssociationHistory{}.extended(first).extended(second);
    const auto b = AssociationHistory{}.extended(first).extended(second);
    EXPECT_TRUE(a == b);
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_FALSE(a == AssociationHistory{}.extended(first));
    EXPECT_EQ(a.records().front().scan, 0);
}
