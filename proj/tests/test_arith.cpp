#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dcq/arith.hpp"
#include "dcq/catalog.hpp"
#include "dcq/metrics.hpp"
#include "dcq/quantizer.hpp"

using namespace dcq;

namespace {

DiscreteMeasure random_measure(std::mt19937_64& rng, int atoms, double lo, double hi)
{
    std::uniform_real_distribution<double> pos(lo, hi);
    std::uniform_real_distribution<double> w(0.05, 1.0);
    std::vector<Atom> raw;
    double total = 0.0;
    for (int i = 0; i < atoms; ++i) {
        raw.push_back({pos(rng), w(rng)});
        total += raw.back().weight;
    }
    for (auto& a : raw) a.weight /= total;
    return DiscreteMeasure::from_unsorted(raw);
}

} // namespace

TEST(Convolve, PointMasses)
{
    auto r = convolve(DiscreteMeasure::delta(1.5), DiscreteMeasure::delta(2.0), ArithOp::Add);
    EXPECT_EQ(r, DiscreteMeasure::delta(3.5));
    EXPECT_EQ(convolve(DiscreteMeasure::delta(1.5), DiscreteMeasure::delta(2.0), ArithOp::Sub),
              DiscreteMeasure::delta(-0.5));
}

TEST(Convolve, CoinSumAndProduct)
{
    DiscreteMeasure coin({{0.0, 0.5}, {1.0, 0.5}});
    DiscreteMeasure sum({{0.0, 0.25}, {1.0, 0.5}, {2.0, 0.25}});
    EXPECT_EQ(convolve(coin, coin, ArithOp::Add), sum);

    DiscreteMeasure one_two({{1.0, 0.5}, {2.0, 0.5}});
    DiscreteMeasure prod({{1.0, 0.25}, {2.0, 0.5}, {4.0, 0.25}});
    EXPECT_EQ(convolve(one_two, one_two, ArithOp::Mul), prod);
}

TEST(Convolve, MomentsAndWeights)
{
    std::mt19937_64 rng(17);
    for (int i = 0; i < 100; ++i) {
        auto a = random_measure(rng, 1 + i % 20, -2.0, 3.0);
        auto b = random_measure(rng, 1 + i % 13, -1.0, 4.0);
        auto s = convolve(a, b, ArithOp::Add);
        auto p = convolve(a, b, ArithOp::Mul);
        auto d = convolve(a, b, ArithOp::Sub);
        EXPECT_NEAR(s.mean(), a.mean() + b.mean(), 1e-12);
        EXPECT_NEAR(d.mean(), a.mean() - b.mean(), 1e-12);
        EXPECT_NEAR(p.mean(), a.mean() * b.mean(), 1e-12);
        for (const auto& m : {s, p, d}) EXPECT_NEAR(m.total_weight(), 1.0, 1e-12);
        EXPECT_NEAR(compress(s, SplitRule::Mean, 3).mean(), s.mean(), 1e-12);
    }
}

TEST(Convolve, CompressionBoundOnPairs)
{
    std::mt19937_64 rng(23);
    for (int i = 0; i < 50; ++i) {
        auto a = random_measure(rng, 16, -1.0, 2.0);
        auto b = random_measure(rng, 16, 0.0, 5.0);
        auto s = convolve(a, b, ArithOp::Add);
        for (int n = 0; n <= 6; ++n) {
            double w = w1_discrete(s, compress(s, SplitRule::Mean, n));
            EXPECT_LE(w, (a.span() + b.span()) / std::ldexp(1.0, n + 1) + 1e-12);
        }
    }
}

TEST(Convolve, MemoryGuard)
{
    std::vector<Atom> raw;
    for (int i = 0; i < 10000; ++i) raw.push_back({static_cast<double>(i), 1e-4});
    DiscreteMeasure big(raw);
    EXPECT_THROW(convolve(big, big, ArithOp::Add), MemoryGuard);
}

TEST(Compress, DiscreteExamples)
{
    DiscreteMeasure sum({{0.0, 0.25}, {1.0, 0.5}, {2.0, 0.25}});
    EXPECT_EQ(compress(sum, SplitRule::Mean, 2), sum);
    auto two = compress(sum, SplitRule::Mean, 1);
    ASSERT_EQ(two.size(), 2u);
    EXPECT_NEAR(two[0].position, 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(two[1].position, 2.0, 1e-15);
}

TEST(CompressAsymptotic, SizeAndRange)
{
    std::mt19937_64 rng(2);
    auto m = random_measure(rng, 4096, 0.0, 10.0);
    auto c = compress_asymptotic(m, 64);
    EXPECT_LE(c.size(), 64u);
    EXPECT_GE(c.min(), m.min());
    EXPECT_LE(c.max(), m.max());
    EXPECT_NEAR(c.total_weight(), 1.0, 1e-12);
    EXPECT_LT(w1_discrete(m, c), w1_discrete(m, DiscreteMeasure::delta(m.mean())));
    auto small = random_measure(rng, 5, 0.0, 1.0);
    EXPECT_EQ(compress_asymptotic(small, 8), small);
    EXPECT_THROW(compress_asymptotic(small, 0), InvalidArgument);
}

TEST(Fold, PointMassesAddUp)
{
    std::vector<DiscreteMeasure> ms{DiscreteMeasure::delta(1.0), DiscreteMeasure::delta(2.0),
                                    DiscreteMeasure::delta(3.0)};
    for (int n : {0, 3, 8}) EXPECT_EQ(fold(ms, ArithOp::Add, SplitRule::Mean, n), DiscreteMeasure::delta(6.0));
}

TEST(Fold, MeansSurviveCompression)
{
    auto g = quantize(Gaussian(0.0, 1.0), SplitRule::Mean, 6);
    std::vector<DiscreteMeasure> two{g, g};
    auto r = fold(two, ArithOp::Add, SplitRule::Mean, 6);
    EXPECT_NEAR(r.mean(), 0.0, 1e-9);
    EXPECT_LE(r.size(), 64u);

    auto e = quantize(Exponential(1.0), SplitRule::Mean, 6);
    std::vector<DiscreteMeasure> four(4, e);
    EXPECT_NEAR(fold(four, ArithOp::Add, SplitRule::Mean, 6).mean(), 4.0, 1e-8);
    EXPECT_THROW(fold(std::span<const DiscreteMeasure>(four.data(), 1), ArithOp::Add, SplitRule::Mean, 6),
                 InvalidArgument);
}

TEST(Fold, BiasedMeanErrorGrowsLinearly)
{
    DiscreteMeasure coin({{0.0, 0.5}, {1.0, 0.5}});
    DiscreteMeasure biased = DiscreteMeasure::delta(0.4);
    for (int k = 2; k <= 8; ++k) {
        std::vector<DiscreteMeasure> truth(static_cast<std::size_t>(k), coin);
        std::vector<DiscreteMeasure> approx(static_cast<std::size_t>(k), biased);
        auto t = fold(truth, ArithOp::Add, SplitRule::Mean, 10);
        auto a = fold(approx, ArithOp::Add, SplitRule::Mean, 10);
        EXPECT_GE(w1_discrete(t, a), 0.1 * k - 1e-12);
    }
}

TEST(Reference, ClosedForms)
{
    std::vector<DistributionPtr> gs{parse_distribution("gaussian:0,1"), parse_distribution("gaussian:1,2")};
    auto g = reference_pushforward(gs, ArithOp::Add, 8);
    EXPECT_EQ(g.kind, "gaussian_closed_form");
    ASSERT_TRUE(g.exact);
    EXPECT_NEAR(g.exact->mean(), 1.0, 1e-15);
    EXPECT_NEAR(g.exact->quantile(0.8413447460685429), 1.0 + std::sqrt(5.0), 1e-9);

    std::vector<DistributionPtr> es{parse_distribution("exp:1"), parse_distribution("exp:1")};
    auto e = reference_pushforward(es, ArithOp::Add, 8);
    EXPECT_EQ(e.kind, "erlang_closed_form");
    EXPECT_NEAR(e.exact->cdf(1.5), 1.0 - std::exp(-1.5) * 2.5, 1e-15);
    EXPECT_NEAR(e.w1_to(DiscreteMeasure({{0.0, 0.5}, {2.0, 0.5}})), 1.0309706581745667975, 1e-13);

    std::vector<DistributionPtr> mixed{parse_distribution("exp:1"), parse_distribution("exp:2")};
    EXPECT_EQ(reference_pushforward(mixed, ArithOp::Add, 6).kind, "discrete_fold");
    EXPECT_EQ(reference_pushforward(gs, ArithOp::Mul, 6).kind, "discrete_fold");
}

TEST(Reference, IncrementalFold)
{
    ReferenceFold fold_ref(ArithOp::Mul, 6);
    auto p = parse_distribution("pareto:3,1");
    fold_ref.push(p);
    EXPECT_EQ(fold_ref.current().kind, "operand");
    fold_ref.push(p);
    auto two = fold_ref.current();
    EXPECT_EQ(two.kind, "discrete_fold");
    EXPECT_NEAR(two.mean(), 2.25, 1e-10);
    fold_ref.push(p);
    EXPECT_NEAR(fold_ref.current().mean(), 3.375, 1e-10);
    EXPECT_EQ(fold_ref.count(), 3);
}

TEST(Reference, WorkingCapCompresses)
{
    ReferenceFold small(ArithOp::Add, 8, 1u << 12);
    auto b = parse_distribution("bimodal");
    for (int i = 0; i < 4; ++i) small.push(b);
    auto r = small.current();
    EXPECT_EQ(r.kind, "discrete_fold_compressed");
    EXPECT_NEAR(r.mean(), 4.0 * 2.0 / 3.0, 1e-9);
    EXPECT_THROW(ReferenceFold(ArithOp::Add, 4).current(), InvalidArgument);
}

TEST(ArithOp, Names)
{
    for (auto op : {ArithOp::Add, ArithOp::Sub, ArithOp::Mul}) EXPECT_EQ(parse_arith_op(to_string(op)), op);
    EXPECT_THROW(parse_arith_op("div"), InvalidArgument);
}
