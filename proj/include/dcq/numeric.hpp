#pragma once

// Numerical building blocks shared by the distribution catalog, the metrics
// and the reference quantizers: compensated summation, adaptive quadrature on
// (semi-)infinite ranges with divergence detection, bracketed root finding
// and a deterministic parallel loop.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <span>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "dcq/error.hpp"

namespace dcq {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Neumaier's variant of Kahan summation. Order-dependent but deterministic.
class CompensatedSum {
public:
    void add(double x) noexcept
    {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) noexcept
    {
        add(x);
        return *this;
    }
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Relative coincidence test used when merging atoms.
inline bool positions_coincide(double a, double b, double rel_tol = 1e-12) noexcept
{
    return std::abs(a - b) <= rel_tol * std::max(std::abs(a), std::abs(b));
}

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
};

struct QuadratureOptions {
    double abs_tol = 1e-13;
    double rel_tol = 1e-11;
    unsigned max_depth = 18;
    /// Upper limit on the number of geometrically growing blocks used to
    /// cover an infinite tail before the integral is declared divergent.
    int max_tail_blocks = 1000;
    /// Tails are followed up to |x| = tail_limit; an integral that has not
    /// settled by then is declared divergent.
    double tail_limit = 1e150;
};

namespace detail {

template <class F>
QuadratureResult integrate_finite(const F& f, double a, double b, const QuadratureOptions& opt)
{
    QuadratureResult out;
    if (!(b > a)) return out;
    double err = 0.0;
    double l1 = 0.0;
    // Integrate over [-1, 1]: the boost error test is only scale-consistent
    // on that interval.
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    auto mapped = [&](double u) { return f(mid + half * u) * half; };
    out.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        mapped, -1.0, 1.0, opt.max_depth, opt.rel_tol, &err, &l1);
    out.error = err;
    out.converged = std::isfinite(out.value) && err <= std::max(opt.abs_tol, 1e3 * opt.rel_tol * l1);
    if (out.converged) return out;
    // Endpoint singularities (sqrt or log type) defeat Gauss-Kronrod
    // bisection; the double-exponential rule handles them.
    try {
        static thread_local boost::math::quadrature::tanh_sinh<double> ts(15);
        double ts_err = 0.0;
        double ts_l1 = 0.0;
        double v = ts.integrate(f, a, b, opt.rel_tol, &ts_err, &ts_l1);
        if (std::isfinite(v) && ts_err < err) {
            out.value = v;
            out.error = ts_err;
            out.converged = ts_err <= std::max(opt.abs_tol, 1e3 * opt.rel_tol * ts_l1);
        }
    } catch (const std::exception&) {
    }
    return out;
}

// Integrates f over [a, a + dir * inf) with blocks whose width doubles.
template <class F>
QuadratureResult integrate_tail(const F& f, double a, double width, int dir, const QuadratureOptions& opt)
{
    CompensatedSum total;
    double err = 0.0;
    double edge = a;
    double w = width > 0.0 ? width : 1.0;
    int quiet_blocks = 0;
    for (int k = 0; k < opt.max_tail_blocks; ++k) {
        double next = edge + dir * w;
        if (!(std::abs(next) <= opt.tail_limit)) break;
        auto block = dir > 0 ? integrate_finite(f, edge, next, opt) : integrate_finite(f, next, edge, opt);
        total += block.value;
        err += block.error;
        double scale = std::max(opt.abs_tol, opt.rel_tol * std::abs(total.value()));
        // A block that is exactly zero right after a loud one means the
        // integrand underflowed before the tail settled.
        if (block.value == 0.0 && quiet_blocks == 0 && k > 0) return {total.value(), err, false};
        if (std::abs(block.value) <= 1e-3 * scale) {
            if (++quiet_blocks >= 3 && k >= 4) return {total.value(), err, true};
        } else {
            quiet_blocks = 0;
        }
        edge = next;
        w *= 2.0;
    }
    return {total.value(), err, false};
}

} // namespace detail

/// Integrates f over the partition given by `breaks` (sorted, size >= 2).
/// The outermost entries may be infinite; finite pieces use adaptive
/// Gauss-Kronrod, infinite tails are covered by doubling blocks starting
/// from the adjacent finite break.
template <class F>
QuadratureResult integrate(const F& f, std::span<const double> breaks, const QuadratureOptions& opt = {})
{
    QuadratureResult out;
    if (breaks.size() < 2) return out;
    CompensatedSum total;
    std::size_t first = 0;
    std::size_t last = breaks.size() - 1;
    double ref_width = 1.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (std::isfinite(breaks[i]) && std::isfinite(breaks[i + 1]) && breaks[i + 1] > breaks[i]) {
            ref_width = breaks[i + 1] - breaks[i];
            break;
        }
    }
    if (std::isinf(breaks[first])) {
        double edge = breaks[first + 1];
        if (std::isinf(edge)) {
            // (-inf, inf) with no finite break: split at zero.
            auto lo = detail::integrate_tail(f, 0.0, 1.0, -1, opt);
            auto hi = detail::integrate_tail(f, 0.0, 1.0, +1, opt);
            return {lo.value + hi.value, lo.error + hi.error, lo.converged && hi.converged};
        }
        auto tail = detail::integrate_tail(f, edge, ref_width, -1, opt);
        total += tail.value;
        out.error += tail.error;
        out.converged = out.converged && tail.converged;
        ++first;
    }
    bool upper_tail = std::isinf(breaks[last]);
    if (upper_tail) --last;
    for (std::size_t i = first; i < last; ++i) {
        auto piece = detail::integrate_finite(f, breaks[i], breaks[i + 1], opt);
        total += piece.value;
        out.error += piece.error;
        out.converged = out.converged && piece.converged;
    }
    if (upper_tail) {
        auto tail = detail::integrate_tail(f, breaks[last], ref_width, +1, opt);
        total += tail.value;
        out.error += tail.error;
        out.converged = out.converged && tail.converged;
    }
    out.value = total.value();
    return out;
}

template <class F>
QuadratureResult integrate(const F& f, double a, double b, const QuadratureOptions& opt = {})
{
    const double breaks[2] = {a, b};
    return integrate(f, std::span<const double>(breaks, 2), opt);
}

/// Solves g(x) = 0 for a nondecreasing g on the bracket [lo, hi] with
/// g(lo) <= 0 <= g(hi). Newton steps using dg are taken when they land
/// inside the bracket and shrink faster than bisection would, otherwise the
/// step is a bisection. Stops once the last step is below
/// max(abs_tol, rel_tol * |x|).
template <class G, class DG>
double solve_monotone(const G& g, const DG& dg, double lo, double hi, double abs_tol, double rel_tol,
                      int max_iter = 500)
{
    if (!(lo <= hi)) throw InvalidArgument("solve_monotone: empty bracket");
    double x = lo / 2 + hi / 2;
    double dx_old = hi - lo;
    double dx = dx_old;
    for (int it = 0; it < max_iter; ++it) {
        double gx = g(x);
        if (gx == 0.0) return x;
        if (gx < 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        double slope = dg(x);
        bool bisect = !(slope > 0.0) || !std::isfinite(slope) || ((x - hi) * slope - gx) * ((x - lo) * slope - gx) > 0.0 ||
                      std::abs(2.0 * gx) > std::abs(dx_old * slope);
        dx_old = dx;
        if (bisect) {
            dx = 0.5 * (hi - lo);
            x = lo + dx;
        } else {
            dx = gx / slope;
            x -= dx;
        }
        double tol = std::max(abs_tol, rel_tol * std::abs(x));
        if (std::abs(dx) <= tol || hi - lo <= tol) return x;
    }
    return x;
}

/// Runs fn(i) for i in [0, count) on a small pool of threads. Every index
/// is processed exactly once; callers write to index-addressed slots so the
/// outcome does not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn, unsigned max_threads = 0)
{
    unsigned hw = max_threads != 0 ? max_threads : std::max(1u, std::thread::hardware_concurrency());
    unsigned workers = static_cast<unsigned>(std::min<std::size_t>(hw, count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> failures(count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) {
                try {
                    fn(i);
                } catch (...) {
                    failures[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
}

} // namespace dcq
