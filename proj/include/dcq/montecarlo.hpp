#pragma once

// Monte Carlo baseline. The empirical measure of n i.i.d. draws has
// sqrt(n) E W1 -> sqrt(2/pi) int sqrt(F (1 - F)), which converts a target
// W1 error into an equivalent sample count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "dcq/arith.hpp"
#include "dcq/discrete_measure.hpp"
#include "dcq/distribution.hpp"
#include "dcq/error.hpp"
#include "dcq/metrics.hpp"
#include "dcq/numeric.hpp"
#include "dcq/sampling.hpp"

namespace dcq {

inline DiscreteMeasure empirical_measure(std::vector<double> samples)
{
    if (samples.empty()) throw InvalidArgument("empirical measure needs at least one sample");
    std::sort(samples.begin(), samples.end());
    const double w = 1.0 / static_cast<double>(samples.size());
    std::vector<Atom> atoms;
    atoms.reserve(samples.size());
    for (double x : samples) {
        if (!atoms.empty() && atoms.back().position == x) {
            atoms.back().weight += w;
        } else {
            atoms.push_back({x, w});
        }
    }
    return DiscreteMeasure(std::move(atoms));
}

/// W1 between d and the empirical measure of n_samples draws of stream seed.
inline double empirical_w1(const Distribution& d, std::size_t n_samples, std::uint64_t seed)
{
    return w1_continuous_discrete(d, empirical_measure(mc_sample_stream(d, n_samples, seed)));
}

/// Draws of op(X_1, ..., X_k) for independent X_j ~ ds[j], folded left.
inline std::vector<double> pushforward_samples(std::span<const DistributionPtr> ds, ArithOp op, std::size_t count,
                                               std::uint64_t seed)
{
    if (ds.empty()) throw InvalidArgument("pushforward_samples needs at least one operand");
    std::vector<double> out = mc_sample_stream(*ds[0], count, replicate_seed(seed, 0));
    for (std::size_t j = 1; j < ds.size(); ++j) {
        std::uint64_t s = replicate_seed(seed, j);
        for (std::size_t i = 0; i < count; ++i) out[i] = apply(op, out[i], ds[j]->sample(counter_uniform(s, i)));
    }
    return out;
}

/// W1 between a reference law and the empirical measure of the pushforward.
inline double empirical_w1(const Reference& ref, std::span<const DistributionPtr> ds, ArithOp op,
                           std::size_t n_samples, std::uint64_t seed)
{
    return ref.w1_to(empirical_measure(pushforward_samples(ds, op, n_samples, seed)));
}

/// sqrt(2/pi) int sqrt(F (1 - F)) dx. Throws DivergentIntegral when the
/// integral does not settle, e.g. for tails no lighter than x^{-2}.
inline double asymptotic_constant(const Distribution& d)
{
    auto s = d.support();
    double mid = d.quantile(0.5);
    std::vector<double> breaks{s.lo};
    if (mid > s.lo && mid < s.hi) breaks.push_back(mid);
    breaks.push_back(s.hi);
    QuadratureOptions opt;
    opt.abs_tol = 1e-14;
    opt.rel_tol = 1e-11;
    auto integrand = [&](double x) {
        auto p = tail_probabilities(d, x);
        return std::sqrt(std::max(0.0, p.F * p.S));
    };
    auto r = integrate(integrand, std::span<const double>(breaks), opt);
    if (!r.converged || !std::isfinite(r.value)) {
        throw DivergentIntegral("integral of sqrt(F(1-F)) diverges for " + d.name());
    }
    return std::sqrt(2.0 / std::numbers::pi) * r.value;
}

/// Same constant for a discrete law, exact on its step CDF.
inline double asymptotic_constant(const DiscreteMeasure& m)
{
    auto atoms = m.atoms();
    CompensatedSum below;
    CompensatedSum total;
    std::vector<double> above(atoms.size());
    CompensatedSum t;
    for (std::size_t i = atoms.size(); i-- > 0;) {
        above[i] = t.value();
        t += atoms[i].weight;
    }
    for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
        below += atoms[i].weight;
        total += std::sqrt(below.value() * above[i]) * (atoms[i + 1].position - atoms[i].position);
    }
    return std::sqrt(2.0 / std::numbers::pi) * total.value();
}

inline double asymptotic_constant(const Reference& ref)
{
    return ref.exact ? asymptotic_constant(*ref.exact) : asymptotic_constant(*ref.discrete);
}

/// Smallest n with constant / sqrt(n) <= target_w1.
inline std::uint64_t equivalent_mc_count_for_constant(double constant, double target_w1)
{
    if (!(target_w1 > 0.0)) throw InvalidArgument("target W1 must be positive");
    if (!std::isfinite(constant)) throw DivergentIntegral("asymptotic constant is not finite");
    double r = constant / target_w1;
    double n = std::ceil(r * r);
    return static_cast<std::uint64_t>(std::max(1.0, n));
}

inline std::uint64_t equivalent_mc_count(const Distribution& d, double target_w1)
{
    return equivalent_mc_count_for_constant(asymptotic_constant(d), target_w1);
}

struct McReport {
    std::size_t n_samples = 0;
    std::size_t replicates = 0;
    double mean_w1 = 0.0;
    double std_w1 = 0.0;
    /// Nearest-rank 95th percentile of the replicate errors.
    double p95_w1 = 0.0;
    std::optional<double> asymptotic_constant;

    [[nodiscard]] std::uint64_t equivalent_count_for(double target_w1) const
    {
        if (!asymptotic_constant) throw DivergentIntegral("no finite asymptotic constant");
        return equivalent_mc_count_for_constant(*asymptotic_constant, target_w1);
    }
};

/// Runs `replicates` independent evaluations w1_of(seed_r), seed_r derived
/// from `seed`, on a thread pool. Statistics are accumulated in replicate
/// order, so the report does not depend on the number of threads.
inline McReport run_replicates(std::size_t n_samples, std::size_t replicates, std::uint64_t seed,
                               const std::function<double(std::uint64_t)>& w1_of, unsigned threads = 0)
{
    if (replicates == 0) throw InvalidArgument("need at least one replicate");
    std::vector<double> values(replicates);
    parallel_for(replicates, [&](std::size_t r) { values[r] = w1_of(replicate_seed(seed, r)); }, threads);

    McReport rep;
    rep.n_samples = n_samples;
    rep.replicates = replicates;
    CompensatedSum sum;
    for (double v : values) sum += v;
    rep.mean_w1 = sum.value() / static_cast<double>(replicates);
    CompensatedSum sq;
    for (double v : values) sq += (v - rep.mean_w1) * (v - rep.mean_w1);
    rep.std_w1 = replicates > 1 ? std::sqrt(sq.value() / static_cast<double>(replicates - 1)) : 0.0;
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(replicates)));
    rep.p95_w1 = sorted[std::max<std::size_t>(rank, 1) - 1];
    return rep;
}

inline McReport mc_report(const Distribution& d, std::size_t n_samples, std::size_t replicates, std::uint64_t seed,
                          unsigned threads = 0)
{
    McReport rep = run_replicates(
        n_samples, replicates, seed, [&](std::uint64_t s) { return empirical_w1(d, n_samples, s); }, threads);
    try {
        rep.asymptotic_constant = asymptotic_constant(d);
    } catch (const DivergentIntegral&) {
        rep.asymptotic_constant.reset();
    }
    return rep;
}

} // namespace dcq
