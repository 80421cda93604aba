#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "dcq/catalog.hpp"
#include "dcq/conditional.hpp"
#include "dcq/split_rule.hpp"

using namespace dcq;

TEST(ConditionalMean, Exponential)
{
    Exponential d(1.0);
    EXPECT_NEAR(conditional_mean(d, {0.0, kInf}), 1.0, 1e-15);
    EXPECT_NEAR(conditional_mean(d, {1.0, kInf}), 2.0, 1e-14);
    EXPECT_NEAR(conditional_mean(d, {0.0, 1.0}), 0.41802329313067357561, 1e-15);
}

TEST(ConditionalMedian, Examples)
{
    EXPECT_NEAR(conditional_median(Exponential(1.0), {0.0, kInf}), std::numbers::ln2, 1e-15);
    EXPECT_NEAR(conditional_median(Uniform(0.0, 1.0), {0.0, 1.0}), 0.5, 1e-15);
    EXPECT_NEAR(conditional_median(Pareto(2.0, 1.0), {1.0, kInf}), std::numbers::sqrt2, 1e-14);
}

TEST(ConditionalMoments, ZeroMassCellThrows)
{
    Uniform d(0.0, 1.0);
    EXPECT_THROW(conditional_mean(d, {2.0, 3.0}), ZeroMassCell);
    EXPECT_THROW(conditional_median(d, {2.0, 3.0}), ZeroMassCell);
}

TEST(Split, Examples)
{
    EXPECT_NEAR(split(SplitRule::Mean, Exponential(1.0), {0.0, kInf}), 1.0, 1e-15);
    EXPECT_NEAR(split(SplitRule::Median, Uniform(0.0, 1.0), {0.0, 0.5}), 0.25, 1e-15);
    Uniform u(1.0, std::numbers::e);
    EXPECT_NEAR(split(SplitRule::GeometricMean, u, u.support()), 1.7895723968418334511, 1e-10);
}

TEST(Split, GeometricMeanNeedsPositiveSupport)
{
    EXPECT_THROW(split(SplitRule::GeometricMean, Gaussian(0.0, 1.0), {-kInf, kInf}), NegativeSupport);
    EXPECT_NO_THROW(split(SplitRule::GeometricMean, Exponential(1.0), {0.0, kInf}));
}

TEST(Split, SymmetricCellsAgree)
{
    Gaussian g(0.0, 1.0);
    EXPECT_NEAR(split(SplitRule::Mean, g, {-kInf, kInf}), 0.0, 1e-10);
    EXPECT_NEAR(split(SplitRule::Median, g, {-kInf, kInf}), 0.0, 1e-10);
    EXPECT_NEAR(split(SplitRule::Mean, g, {-1.5, 1.5}), split(SplitRule::Median, g, {-1.5, 1.5}), 1e-10);
    Uniform u(0.0, 1.0);
    EXPECT_NEAR(split(SplitRule::Mean, u, {0.2, 0.6}), split(SplitRule::Median, u, {0.2, 0.6}), 1e-10);
}

TEST(Split, ResultLiesStrictlyInsideCell)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> p(0.01, 0.99);
    for (const auto& spec : full_catalog()) {
        auto d = parse_distribution(spec);
        for (int i = 0; i < 200; ++i) {
            double a = d->quantile(p(rng));
            double b = d->quantile(p(rng));
            if (a > b) std::swap(a, b);
            if (!(d->mass(a, b) > 1e-9)) continue;
            for (auto rule : {SplitRule::Mean, SplitRule::Median}) {
                double x = split(rule, *d, {a, b});
                EXPECT_GT(x, a) << spec;
                EXPECT_LT(x, b) << spec;
            }
        }
    }
}

TEST(SplitRule, NamesAndFactors)
{
    EXPECT_EQ(parse_split_rule("mean"), SplitRule::Mean);
    EXPECT_EQ(parse_split_rule("median"), SplitRule::Median);
    EXPECT_EQ(parse_split_rule("geomean"), SplitRule::GeometricMean);
    EXPECT_THROW(parse_split_rule("mode"), InvalidArgument);
    EXPECT_EQ(c_factor(SplitRule::Mean), 0.5);
    EXPECT_EQ(c_factor(SplitRule::Median), 1.0);
    EXPECT_FALSE(c_factor(SplitRule::GeometricMean).has_value());
    for (auto r : {SplitRule::Mean, SplitRule::Median, SplitRule::GeometricMean}) {
        EXPECT_EQ(parse_split_rule(to_string(r)), r);
    }
}
