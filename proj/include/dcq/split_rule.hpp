#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "dcq/conditional.hpp"
#include "dcq/distribution.hpp"
#include "dcq/error.hpp"
#include "dcq/numeric.hpp"

namespace dcq {

/// Split functions: map the law restricted to a cell to a point of that cell.
enum class SplitRule { Mean, Median, GeometricMean };

inline std::string_view to_string(SplitRule rule)
{
    switch (rule) {
    case SplitRule::Mean: return "mean";
    case SplitRule::Median: return "median";
    case SplitRule::GeometricMean: return "geomean";
    }
    return "?";
}

inline SplitRule parse_split_rule(std::string_view text)
{
    if (text == "mean") return SplitRule::Mean;
    if (text == "median") return SplitRule::Median;
    if (text == "geomean") return SplitRule::GeometricMean;
    throw InvalidArgument("unknown split rule '" + std::string(text) + "'");
}

/// Constant c(f) in W1(nu, T(nu, n)) <= c(f) (b - a) / 2^n for laws on
/// [a, b]. Known for the mean (1/2) and the median (1) only.
inline std::optional<double> c_factor(SplitRule rule)
{
    switch (rule) {
    case SplitRule::Mean: return 0.5;
    case SplitRule::Median: return 1.0;
    case SplitRule::GeometricMean: return std::nullopt;
    }
    return std::nullopt;
}

/// exp(E[log X | cell]). The log-moment comes from adaptive quadrature of
/// log(t) pdf(t) over the cell (absolute tolerance 1e-10).
inline double conditional_geometric_mean(const Distribution& d, Interval cell, double cell_mass)
{
    auto s = d.support();
    double a = std::max(cell.lo, s.lo);
    double b = std::min(cell.hi, s.hi);
    if (a < 0.0) throw NegativeSupport("geometric mean split needs a cell inside [0, inf), got lo = " + std::to_string(a));
    if (!(cell_mass > kMassTolerance)) detail::throw_zero_mass(a, b, cell_mass);
    QuadratureOptions opt;
    opt.abs_tol = 1e-10;
    opt.rel_tol = 1e-12;
    auto integrand = [&](double t) {
        if (!(t > 0.0)) return 0.0;
        double f = d.pdf(t);
        return f == 0.0 ? 0.0 : std::log(t) * f;
    };
    auto r = integrate(integrand, a, b, opt);
    if (!r.converged || !std::isfinite(r.value)) throw NonFiniteMean("log-moment does not converge on " + d.name());
    return std::clamp(std::exp(r.value / cell_mass), a, b);
}

/// Evaluates the split function of `rule` on the law d restricted to cell,
/// reusing cached tail probabilities at the cell endpoints.
inline double split(SplitRule rule, const Distribution& d, Interval cell, const TailProbabilities& lo,
                    const TailProbabilities& hi)
{
    double m = mass_between(lo, hi);
    switch (rule) {
    case SplitRule::Mean: return conditional_mean(d, cell, m);
    case SplitRule::Median: return conditional_median(d, cell, lo, hi);
    case SplitRule::GeometricMean: return conditional_geometric_mean(d, cell, m);
    }
    throw UnsupportedRule("unknown split rule");
}

inline double split(SplitRule rule, const Distribution& d, Interval cell)
{
    return split(rule, d, cell, tail_probabilities(d, cell.lo), tail_probabilities(d, cell.hi));
}

} // namespace dcq
