#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dcq/distribution.hpp"
#include "dcq/error.hpp"

namespace dcq {

/// Cells whose mass is at or below this value count as empty.
inline constexpr double kMassTolerance = 1e-15;

/// CDF and survival value at one point, cached together so that cell masses
/// in either tail keep full relative precision.
struct TailProbabilities {
    double F = 0.0;
    double S = 1.0;
};

inline TailProbabilities tail_probabilities(const Distribution& d, double x)
{
    auto s = d.support();
    if (x <= s.lo) return {0.0, 1.0};
    if (x >= s.hi) return {1.0, 0.0};
    return {d.cdf(x), d.sf(x)};
}

inline double mass_between(const TailProbabilities& lo, const TailProbabilities& hi) noexcept
{
    double m = hi.F <= 0.5 ? hi.F - lo.F : lo.S - hi.S;
    return std::max(0.0, m);
}

namespace detail {

[[noreturn]] inline void throw_zero_mass(double a, double b, double m)
{
    std::ostringstream msg;
    msg.precision(17);
    msg << "cell [" << a << ", " << b << "] has mass " << m;
    throw ZeroMassCell(msg.str());
}

} // namespace detail

/// E[X | a < X <= b] given the precomputed cell mass.
inline double conditional_mean(const Distribution& d, Interval cell, double cell_mass)
{
    if (!(cell_mass > kMassTolerance)) detail::throw_zero_mass(cell.lo, cell.hi, cell_mass);
    double pe = d.partial_expectation(cell.lo, cell.hi);
    if (!std::isfinite(pe)) throw NonFiniteMean("partial expectation diverges on " + d.name());
    auto s = d.support();
    return std::clamp(pe / cell_mass, std::max(cell.lo, s.lo), std::min(cell.hi, s.hi));
}

inline double conditional_mean(const Distribution& d, Interval cell)
{
    return conditional_mean(d, cell, d.mass(cell.lo, cell.hi));
}

/// Median of the law conditioned on the cell, i.e. the quantile at the
/// midpoint of the cell's CDF range. Evaluated through the survival side
/// when the cell lies in the upper half of the law.
inline double conditional_median(const Distribution& d, Interval cell, const TailProbabilities& lo,
                                 const TailProbabilities& hi)
{
    double m = mass_between(lo, hi);
    if (!(m > kMassTolerance)) detail::throw_zero_mass(cell.lo, cell.hi, m);
    double s_mid = 0.5 * (lo.S + hi.S);
    double x = s_mid < 0.5 ? d.quantile_upper(s_mid) : d.quantile(0.5 * (lo.F + hi.F));
    auto s = d.support();
    return std::clamp(x, std::max(cell.lo, s.lo), std::min(cell.hi, s.hi));
}

inline double conditional_median(const Distribution& d, Interval cell)
{
    return conditional_median(d, cell, tail_probabilities(d, cell.lo), tail_probabilities(d, cell.hi));
}

} // namespace dcq
