#pragma once

// Wasserstein-1 distances in one dimension, W1 = int |F - G| dx.
//
// Discrete vs discrete is an exact sum over the merged atom grid. Continuous
// vs discrete is evaluated segment by segment: between consecutive atoms
// the discrete CDF is a constant c, the continuous CDF crosses c at most
// once (located with one quantile call) and each monotone piece integrates
// in closed form through partial expectations:
//
//   int_a^b (F(x) - F(a)) dx = E[(b - X); a < X <= b]
//   int_a^b (F(b) - F(x)) dx = E[(X - a); a < X <= b]
//
// Infinite tails are handled the same way, so no truncation is involved.

#include <algorithm>
#include <cmath>
#include <string_view>
#include <vector>

#include "dcq/conditional.hpp"
#include "dcq/discrete_measure.hpp"
#include "dcq/distribution.hpp"
#include "dcq/error.hpp"
#include "dcq/numeric.hpp"
#include "dcq/quantizer.hpp"
#include "dcq/split_rule.hpp"

namespace dcq {

enum class W1Method { CdfIntegral, CellDecomposition, DiscreteMerge };

inline std::string_view to_string(W1Method m)
{
    switch (m) {
    case W1Method::CdfIntegral: return "cdf_integral";
    case W1Method::CellDecomposition: return "cell_decomposition";
    case W1Method::DiscreteMerge: return "discrete_merge";
    }
    return "?";
}

struct W1Result {
    double value = 0.0;
    W1Method method = W1Method::CdfIntegral;
};

/// Exact W1 between two discrete measures.
inline double w1_discrete(const DiscreteMeasure& m1, const DiscreteMeasure& m2)
{
    auto a = m1.atoms();
    auto b = m2.atoms();
    std::size_t i = 0;
    std::size_t j = 0;
    CompensatedSum f1;
    CompensatedSum f2;
    CompensatedSum total;
    double x = std::min(a[0].position, b[0].position);
    while (i < a.size() || j < b.size()) {
        double next_a = i < a.size() ? a[i].position : kInf;
        double next_b = j < b.size() ? b[j].position : kInf;
        double next = std::min(next_a, next_b);
        total += std::abs(f1.value() - f2.value()) * (next - x);
        x = next;
        if (next_a == next) f1 += a[i++].weight;
        if (next_b == next) f2 += b[j++].weight;
    }
    return total.value();
}

namespace detail {

// E[(b - X); a < X <= b], b finite.
inline double excess_below(const Distribution& d, double a, double b, const TailProbabilities& pa,
                           const TailProbabilities& pb)
{
    if (!(b > a)) return 0.0;
    double m = mass_between(pa, pb);
    if (m == 0.0) return 0.0;
    return std::max(0.0, b * m - d.partial_expectation(a, b));
}

// E[(X - a); a < X <= b], a finite.
inline double excess_above(const Distribution& d, double a, double b, const TailProbabilities& pa,
                           const TailProbabilities& pb)
{
    if (!(b > a)) return 0.0;
    double m = mass_between(pa, pb);
    if (m == 0.0) return 0.0;
    return std::max(0.0, d.partial_expectation(a, b) - a * m);
}

} // namespace detail

/// Exact W1 between a continuous law and a discrete measure.
inline double w1_continuous_discrete(const Distribution& d, const DiscreteMeasure& m)
{
    if (!std::isfinite(d.mean())) throw NonFiniteMean(d.name() + " has no finite mean");
    auto atoms = m.atoms();
    const std::size_t k = atoms.size();

    std::vector<TailProbabilities> probs(k);
    for (std::size_t i = 0; i < k; ++i) probs[i] = tail_probabilities(d, atoms[i].position);

    // Discrete CDF after atom i from both ends, for precision in either tail.
    std::vector<double> below(k);
    std::vector<double> above(k);
    {
        CompensatedSum s;
        for (std::size_t i = 0; i < k; ++i) {
            s += atoms[i].weight;
            below[i] = s.value();
        }
        CompensatedSum t;
        for (std::size_t i = k; i-- > 0;) {
            above[i] = t.value();
            t += atoms[i].weight;
        }
    }

    const TailProbabilities at_minus_inf{0.0, 1.0};
    const TailProbabilities at_plus_inf{1.0, 0.0};
    CompensatedSum total;
    total += detail::excess_below(d, -kInf, atoms[0].position, at_minus_inf, probs[0]);

    for (std::size_t i = 0; i + 1 < k; ++i) {
        double l = atoms[i].position;
        double u = atoms[i + 1].position;
        const auto& pl = probs[i];
        const auto& pu = probs[i + 1];
        bool upper = above[i] < 0.5;
        // gap(p) = F - c at a point with tail probabilities p.
        auto gap = [&](const TailProbabilities& p) { return upper ? above[i] - p.S : p.F - below[i]; };

        double x_star;
        TailProbabilities px;
        if (gap(pl) >= 0.0) {
            x_star = l;
            px = pl;
        } else if (gap(pu) <= 0.0) {
            x_star = u;
            px = pu;
        } else {
            x_star = std::clamp(upper ? d.quantile_upper(above[i]) : d.quantile(below[i]), l, u);
            px = tail_probabilities(d, x_star);
        }
        double g = gap(px);
        // int_l^x* (c - F) + int_x*^u (F - c)
        total += -g * (x_star - l) + detail::excess_above(d, l, x_star, pl, px);
        total += g * (u - x_star) + detail::excess_below(d, x_star, u, px, pu);
    }

    total += detail::excess_above(d, atoms[k - 1].position, kInf, probs[k - 1], at_plus_inf);
    return total.value();
}

/// W1(d, T^f(d, n)) as the sum of per-cell one-point errors
/// mu(cell) * W1(mu_cell, delta_{f(mu_cell)}), using the closed forms
///   mean:   2 E[(f - X); X in cell, X <= f]
///   median: E[X; X in cell, X > f] - E[X; X in cell, X <= f]
inline double w1_via_cells(const Distribution& d, SplitRule rule, int n)
{
    if (rule == SplitRule::GeometricMean) {
        throw UnsupportedRule("no closed per-cell error for the geometric mean split");
    }
    auto q = quantize_with_cells(d, rule, n);
    CompensatedSum total;
    for (std::size_t i = 0; i < q.cells.size(); ++i) {
        const Cell& c = q.cells[i];
        double x = q.measure[i].position;
        TailProbabilities px = tail_probabilities(d, x);
        if (rule == SplitRule::Mean) {
            total += 2.0 * detail::excess_below(d, c.lo, x, c.at_lo, px);
        } else {
            total += d.partial_expectation(x, c.hi) - d.partial_expectation(c.lo, x);
        }
    }
    return total.value();
}

/// Quantization error of T^f(d, n) through the cell decomposition when the
/// rule admits it, otherwise through the CDF integral.
inline W1Result quantization_error(const Distribution& d, SplitRule rule, int n)
{
    if (rule == SplitRule::GeometricMean) {
        return {w1_continuous_discrete(d, quantize(d, rule, n)), W1Method::CdfIntegral};
    }
    return {w1_via_cells(d, rule, n), W1Method::CellDecomposition};
}

} // namespace dcq
