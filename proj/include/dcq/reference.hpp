#pragma once

// Baselines and theoretical envelopes for the quantizer: the W1-optimal
// N-point quantizer, the asymptotically optimal quantizer built from the
// half-density sqrt(f), the Zador constant, the unbounded-support error
// bound driven by the upper split sequence omega_j, and a tail-rate
// estimator.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "dcq/conditional.hpp"
#include "dcq/discrete_measure.hpp"
#include "dcq/distribution.hpp"
#include "dcq/error.hpp"
#include "dcq/metrics.hpp"
#include "dcq/numeric.hpp"
#include "dcq/quantizer.hpp"
#include "dcq/split_rule.hpp"

namespace dcq {

namespace detail {

inline double sqrt_pdf(const Distribution& d, double x)
{
    double f = d.pdf(x);
    return f > 0.0 ? std::sqrt(f) : 0.0;
}

inline std::vector<double> support_breaks(const Distribution& d)
{
    auto s = d.support();
    double mid = d.quantile(0.5);
    std::vector<double> b{s.lo};
    if (mid > s.lo && mid < s.hi) b.push_back(mid);
    b.push_back(s.hi);
    return b;
}

inline void check_count(int count)
{
    if (count < 1) throw InvalidArgument("atom count must be at least 1");
}

// Weights of the cells cut at the midpoints between consecutive positions.
inline std::vector<Atom> midpoint_weighted(const Distribution& d, const std::vector<double>& x)
{
    const std::size_t n = x.size();
    std::vector<TailProbabilities> at_mid(n + 1);
    at_mid[0] = {0.0, 1.0};
    at_mid[n] = {1.0, 0.0};
    for (std::size_t i = 1; i < n; ++i) at_mid[i] = tail_probabilities(d, 0.5 * (x[i - 1] + x[i]));
    std::vector<Atom> atoms(n);
    for (std::size_t i = 0; i < n; ++i) atoms[i] = {x[i], mass_between(at_mid[i], at_mid[i + 1])};
    return atoms;
}

} // namespace detail

/// int sqrt(f) over the support. Throws DivergentHalfDensity when the
/// quadrature does not settle.
inline double half_density_total(const Distribution& d)
{
    auto breaks = detail::support_breaks(d);
    QuadratureOptions opt;
    opt.abs_tol = 1e-13;
    opt.rel_tol = 1e-12;
    auto r = integrate([&](double t) { return detail::sqrt_pdf(d, t); }, std::span<const double>(breaks), opt);
    if (!r.converged || !std::isfinite(r.value) || !(r.value > 0.0)) {
        throw DivergentHalfDensity("integral of sqrt(pdf) diverges for " + d.name());
    }
    return r.value;
}

/// (1/4) (int sqrt f)^2: the optimal N-point quantizer has W1 ~ zador / N.
inline double zador_constant(const Distribution& d)
{
    double z = half_density_total(d);
    return 0.25 * z * z;
}

/// Atoms at the quantiles (2i - 1) / (2N) of the normalized half-density
/// law, weighted by the midpoint cells.
inline DiscreteMeasure asymptotically_optimal_quantizer(const Distribution& d, int count)
{
    detail::check_count(count);
    const double total = half_density_total(d);
    const std::size_t n = static_cast<std::size_t>(count);
    auto s = d.support();
    auto density = [&](double t) { return detail::sqrt_pdf(d, t); };
    QuadratureOptions opt;
    opt.abs_tol = 1e-15;
    opt.rel_tol = 1e-13;

    // Anchor at the median; half-density mass below it fixes the split of
    // the targets into a leftward and a rightward sweep.
    const double anchor = d.quantile(0.5);
    const double below_anchor = [&] {
        auto r = integrate(density, s.lo, anchor, opt);
        if (!r.converged) throw DivergentHalfDensity("integral of sqrt(pdf) diverges for " + d.name());
        return r.value;
    }();
    double width = (d.quantile(0.75) - d.quantile(0.25)) / static_cast<double>(n);
    if (!(width > 0.0) || !std::isfinite(width)) width = 1.0;

    // Point x on side `dir` of `from` with |int_from^x sqrt f| = delta.
    auto advance = [&](double from, double delta, int dir) {
        double bound = dir > 0 ? s.hi : s.lo;
        double near = from;
        double acc = 0.0;
        double w = width;
        double far = from;
        for (;;) {
            far = near + dir * w;
            bool clipped = dir > 0 ? far >= bound : far <= bound;
            if (clipped) far = bound;
            double piece = dir > 0 ? integrate(density, near, far, opt).value : integrate(density, far, near, opt).value;
            if (acc + piece >= delta) break;
            if (clipped) return bound;
            acc += piece;
            near = far;
            w *= 2.0;
        }
        if (std::isinf(far)) throw NumericError("half-density inversion left the finite range for " + d.name());
        const double base = acc;
        const double pivot = near;
        auto g = [&](double x) {
            if (dir > 0) return base + integrate(density, pivot, x, opt).value - delta;
            return delta - base - integrate(density, x, pivot, opt).value;
        };
        double lo = dir > 0 ? near : far;
        double hi = dir > 0 ? far : near;
        return solve_monotone(g, density, lo, hi, 1e-14, 1e-13);
    };

    std::vector<double> x(n);
    auto target = [&](std::size_t i) { return total * (2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(n)); };
    std::size_t first_right = 0;
    while (first_right < n && target(first_right) <= below_anchor) ++first_right;
    {
        double pos = anchor;
        double level = below_anchor;
        for (std::size_t i = first_right; i < n; ++i) {
            pos = advance(pos, target(i) - level, +1);
            level = target(i);
            x[i] = pos;
        }
    }
    {
        double pos = anchor;
        double level = below_anchor;
        for (std::size_t i = first_right; i-- > 0;) {
            pos = advance(pos, level - target(i), -1);
            level = target(i);
            x[i] = pos;
        }
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(x[i] > x[i - 1])) throw NumericError("asymptotically optimal positions collapsed for " + d.name());
    }
    return DiscreteMeasure(detail::midpoint_weighted(d, x));
}

struct OptimalReport {
    DiscreteMeasure measure;
    /// max_i |2F(x_i) - F(m_i) - F(m_{i-1})|
    double residual = 0.0;
    int sweeps = 0;
    int newton_steps = 0;
};

namespace detail {

struct Stationarity {
    std::vector<double> g;
    std::vector<TailProbabilities> at_mid;
    std::vector<TailProbabilities> at_x;
    double max_abs = 0.0;
};

// W1 of the atoms x with nearest-atom cells, from partial expectations.
inline double voronoi_cost(const Distribution& d, const std::vector<double>& x, const Stationarity& st)
{
    CompensatedSum total;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double lo = i == 0 ? -kInf : 0.5 * (x[i - 1] + x[i]);
        double hi = i + 1 == x.size() ? kInf : 0.5 * (x[i] + x[i + 1]);
        total += excess_below(d, lo, x[i], st.at_mid[i], st.at_x[i]);
        total += excess_above(d, x[i], hi, st.at_x[i], st.at_mid[i + 1]);
    }
    return total.value();
}

inline Stationarity stationarity(const Distribution& d, const std::vector<double>& x)
{
    const std::size_t n = x.size();
    Stationarity st;
    st.g.resize(n);
    st.at_x.resize(n);
    st.at_mid.resize(n + 1);
    st.at_mid[0] = {0.0, 1.0};
    st.at_mid[n] = {1.0, 0.0};
    for (std::size_t i = 1; i < n; ++i) st.at_mid[i] = tail_probabilities(d, 0.5 * (x[i - 1] + x[i]));
    for (std::size_t i = 0; i < n; ++i) {
        st.at_x[i] = tail_probabilities(d, x[i]);
        const auto& px = st.at_x[i];
        const auto& lo = st.at_mid[i];
        const auto& hi = st.at_mid[i + 1];
        st.g[i] = px.F <= 0.5 ? (px.F - lo.F) - (hi.F - px.F) : (lo.S - px.S) - (px.S - hi.S);
        st.max_abs = std::max(st.max_abs, std::abs(st.g[i]));
    }
    return st;
}

// Solves the tridiagonal system a_i u_{i-1} + b_i u_i + c_i u_{i+1} = r_i.
inline std::optional<std::vector<double>> solve_tridiagonal(std::vector<double> a, std::vector<double> b,
                                                            std::vector<double> c, std::vector<double> r)
{
    const std::size_t n = b.size();
    for (std::size_t i = 1; i < n; ++i) {
        if (b[i - 1] == 0.0) return std::nullopt;
        double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        r[i] -= w * r[i - 1];
    }
    if (b[n - 1] == 0.0) return std::nullopt;
    std::vector<double> u(n);
    u[n - 1] = r[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) u[i] = (r[i] - c[i] * u[i + 1]) / b[i];
    for (double v : u) {
        if (!std::isfinite(v)) return std::nullopt;
    }
    return u;
}

inline bool admissible(const Distribution& d, const std::vector<double>& x)
{
    auto s = d.support();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || x[i] <= s.lo || x[i] >= s.hi) return false;
        if (i > 0 && !(x[i] > x[i - 1])) return false;
    }
    return true;
}

} // namespace detail

/// Solves the stationarity system 2F(x_i) = F(m_i) + F(m_{i-1}) with m_i
/// the midpoints (m_0, m_N the support ends). Damped fixed-point sweeps
/// x_i <- (x_i + F^{-1}((F(m_i) + F(m_{i-1})) / 2)) / 2 bring the iterate
/// close, then Newton steps on the tridiagonal Jacobian finish it.
inline OptimalReport optimal_quantizer_report(const Distribution& d, int count, double damping = 0.5,
                                              double tolerance = 1e-10, int max_sweeps = 100000)
{
    detail::check_count(count);
    const std::size_t n = static_cast<std::size_t>(count);
    std::vector<double> x;
    try {
        auto init = asymptotically_optimal_quantizer(d, count);
        x = init.positions();
    } catch (const NumericError&) {
        x.resize(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = d.quantile((2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(n)));
    }

    OptimalReport rep{DiscreteMeasure::delta(0.0), 0.0, 0, 0};
    auto st = detail::stationarity(d, x);

    auto sweep = [&] {
        std::vector<double> next(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& lo = st.at_mid[i];
            const auto& hi = st.at_mid[i + 1];
            double q = 0.5 * (lo.S + hi.S);
            double target = q < 0.5 ? d.quantile_upper(q) : d.quantile(0.5 * (lo.F + hi.F));
            next[i] = (1.0 - damping) * x[i] + damping * target;
        }
        x = std::move(next);
        st = detail::stationarity(d, x);
        ++rep.sweeps;
    };

    auto newton = [&] {
        std::vector<double> a(n, 0.0);
        std::vector<double> b(n, 0.0);
        std::vector<double> c(n, 0.0);
        std::vector<double> r(n);
        std::vector<double> f_mid(n + 1, 0.0);
        for (std::size_t i = 1; i < n; ++i) f_mid[i] = d.pdf(0.5 * (x[i - 1] + x[i]));
        for (std::size_t i = 0; i < n; ++i) {
            b[i] = 2.0 * d.pdf(x[i]) - 0.5 * f_mid[i] - 0.5 * f_mid[i + 1];
            if (i > 0) a[i] = -0.5 * f_mid[i];
            if (i + 1 < n) c[i] = -0.5 * f_mid[i + 1];
            r[i] = -st.g[i];
        }
        auto step = detail::solve_tridiagonal(a, b, c, r);
        if (!step) return false;
        // Newton only sees the residual and may head for a stationary point
        // with a larger error; such steps are refused.
        const double cost = detail::voronoi_cost(d, x, st);
        for (double lambda = 1.0; lambda > 1e-6; lambda *= 0.5) {
            std::vector<double> trial(n);
            for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + lambda * (*step)[i];
            if (!detail::admissible(d, trial)) continue;
            auto trial_st = detail::stationarity(d, trial);
            if (trial_st.max_abs < st.max_abs && detail::voronoi_cost(d, trial, trial_st) <= cost * (1.0 + 1e-13)) {
                x = std::move(trial);
                st = std::move(trial_st);
                ++rep.newton_steps;
                return true;
            }
        }
        return false;
    };

    const double handoff = 1e-4;
    while (st.max_abs > handoff && rep.sweeps < std::min(max_sweeps, 500)) sweep();
    for (int k = 0; k < 60 && st.max_abs > 0.01 * tolerance; ++k) {
        if (!newton()) break;
    }
    while (st.max_abs > tolerance && rep.sweeps < max_sweeps) {
        sweep();
        if (rep.sweeps % 50 == 0) {
            for (int k = 0; k < 20 && st.max_abs > 0.01 * tolerance; ++k) {
                if (!newton()) break;
            }
        }
    }
    rep.residual = st.max_abs;
    if (!(rep.residual <= tolerance)) {
        throw NoConvergence("optimal quantizer for " + d.name() + " stalled at residual " + std::to_string(rep.residual));
    }
    rep.measure = DiscreteMeasure(detail::midpoint_weighted(d, x));
    return rep;
}

inline DiscreteMeasure optimal_quantizer(const Distribution& d, int count)
{
    return optimal_quantizer_report(d, count).measure;
}

struct BoundReport {
    /// zador_constant / 2^n, absent when sqrt(f) is not integrable.
    std::optional<double> zador_lower;
    double thm48_upper = 0.0;
    double tail_lower = 0.0;
    /// omega_{-1}, omega_0, ..., omega_n
    std::vector<double> omega;
};

/// Upper and lower envelopes for W1(d, T^f(d, n)) on a support bounded
/// below. omega_{-1} is the lower support end and omega_j is the split of d
/// restricted to [omega_{j-1}, sup supp). With Omega_j = [omega_{j-1}, omega_j]
///
///   upper = c(f) sum_{j<n} (omega_j - omega_{j-1}) mu(Omega_j) / 2^{n-j-1}
///           + E[|X - omega_n|; X >= omega_{n-1}]
///   lower = E[|X - omega_n|; X >= omega_{n-1}]
inline BoundReport theorem48_bound(const Distribution& d, SplitRule rule, int n)
{
    detail::check_depth(n);
    auto c = c_factor(rule);
    if (!c) throw UnsupportedRule("no error constant is known for the " + std::string(to_string(rule)) + " split");
    auto s = d.support();
    if (!std::isfinite(s.lo)) throw UnboundedBelow(d.name() + " has support unbounded below");

    BoundReport rep;
    rep.omega.reserve(static_cast<std::size_t>(n) + 2);
    rep.omega.push_back(s.lo);
    std::vector<TailProbabilities> probs{{0.0, 1.0}};
    const TailProbabilities at_hi{1.0, 0.0};
    for (int j = 0; j <= n; ++j) {
        double prev = rep.omega.back();
        rep.omega.push_back(split(rule, d, {prev, s.hi}, probs.back(), at_hi));
        probs.push_back(tail_probabilities(d, rep.omega.back()));
    }

    // omega[j + 1] holds omega_j.
    CompensatedSum sum;
    for (int j = 0; j < n; ++j) {
        auto k = static_cast<std::size_t>(j);
        double width = rep.omega[k + 1] - rep.omega[k];
        double mass = mass_between(probs[k], probs[k + 1]);
        sum += width * mass / std::ldexp(1.0, n - j - 1);
    }
    auto last = static_cast<std::size_t>(n);
    double prev = rep.omega[last];
    double w_n = rep.omega[last + 1];
    rep.tail_lower = detail::excess_below(d, prev, w_n, probs[last], probs[last + 1]) +
                     detail::excess_above(d, w_n, s.hi, probs[last + 1], at_hi);
    rep.thm48_upper = *c * sum.value() + rep.tail_lower;
    try {
        rep.zador_lower = zador_constant(d) / std::ldexp(1.0, n);
    } catch (const DivergentIntegral&) {
        rep.zador_lower.reset();
    }
    return rep;
}

/// Closed-form upper bound for the unit exponential with the mean split:
/// (1/2^n) (e-1)/(e-2) (1 - (2/e)^n) + 2 e^{-n}.
inline double exponential_mean_split_bound(int n)
{
    constexpr double e = std::numbers::e;
    double nn = static_cast<double>(n);
    return std::ldexp(1.0, -n) * (e - 1.0) / (e - 2.0) * (1.0 - std::pow(2.0 / e, nn)) + 2.0 * std::exp(-nn);
}

/// Least-squares slope of log W1(d, T^f(d, n)) against n on [n_max-5, n_max].
inline double tail_rate_estimate(const Distribution& d, SplitRule rule, int n_max)
{
    if (n_max < 6) throw InvalidArgument("tail_rate_estimate needs n_max >= 6");
    detail::check_depth(n_max);
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double sxy = 0.0;
    constexpr int points = 6;
    for (int n = n_max - 5; n <= n_max; ++n) {
        double y = std::log(quantization_error(d, rule, n).value);
        double xn = static_cast<double>(n);
        sx += xn;
        sy += y;
        sxx += xn * xn;
        sxy += xn * y;
    }
    return (points * sxy - sx * sy) / (points * sxx - sx * sx);
}

} // namespace dcq
