#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/lambert_w.hpp>

#include "dcq/error.hpp"
#include "dcq/numeric.hpp"

namespace dcq {

/// Closed interval with possibly infinite endpoints.
struct Interval {
    double lo = -kInf;
    double hi = kInf;

    [[nodiscard]] bool bounded_below() const noexcept { return std::isfinite(lo); }
    [[nodiscard]] bool bounded_above() const noexcept { return std::isfinite(hi); }
    [[nodiscard]] bool bounded() const noexcept { return bounded_below() && bounded_above(); }
    [[nodiscard]] bool contains(double x) const noexcept { return x >= lo && x <= hi; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// A continuous law on the real line with finite mean.
///
/// Implementations provide the CDF, density and partial expectations in
/// closed form where possible; inversion falls back to a bracketed
/// safeguarded Newton iteration on the CDF. Instances are immutable, so a
/// single object may be shared between threads.
class Distribution {
public:
    virtual ~Distribution() = default;

    /// Canonical `name:params` spelling, parseable by parse_distribution().
    [[nodiscard]] virtual std::string name() const = 0;
    [[nodiscard]] virtual Interval support() const = 0;
    [[nodiscard]] virtual double cdf(double x) const = 0;
    /// 1 - cdf(x), evaluated without cancellation where the law allows it.
    [[nodiscard]] virtual double sf(double x) const { return 1.0 - cdf(x); }
    [[nodiscard]] virtual double pdf(double x) const = 0;
    /// Integral of t dmu(t) over (a, b]; a and b may be infinite.
    [[nodiscard]] virtual double partial_expectation(double a, double b) const = 0;
    [[nodiscard]] virtual double mean() const = 0;

    /// Generalized inverse of cdf.
    [[nodiscard]] virtual double quantile(double p) const { return invert_cdf(p); }
    /// Inverse of sf; accurate for small upper-tail probabilities.
    [[nodiscard]] virtual double quantile_upper(double q) const { return invert_sf(q); }

    /// Inverse-CDF transform of a uniform variate.
    [[nodiscard]] double sample(double u) const { return quantile(u); }

    /// mu((a, b]) computed from whichever tail keeps full relative precision.
    [[nodiscard]] double mass(double a, double b) const
    {
        auto s = support();
        a = std::max(a, s.lo);
        b = std::min(b, s.hi);
        if (!(b > a)) return 0.0;
        double fa = cdf(a);
        if (fa <= 0.5) return std::max(0.0, cdf(b) - fa);
        return std::max(0.0, sf(a) - sf(b));
    }

protected:
    // Absolute x-tolerance on bounded supports, relative otherwise.
    [[nodiscard]] double x_tolerance_abs() const { return support().bounded() ? 1e-12 : 1e-300; }
    [[nodiscard]] double x_tolerance_rel() const { return support().bounded() ? 0.0 : 1e-12; }

    [[nodiscard]] double invert_cdf(double p) const
    {
        auto s = support();
        if (!(p > 0.0)) return s.lo;
        if (!(p < 1.0)) return s.hi;
        auto [lo, hi] = bracket([&](double x) { return cdf(x) - p; });
        return solve_monotone([&](double x) { return cdf(x) - p; }, [&](double x) { return pdf(x); }, lo, hi,
                              x_tolerance_abs(), x_tolerance_rel());
    }

    [[nodiscard]] double invert_sf(double q) const
    {
        auto s = support();
        if (!(q < 1.0)) return s.lo;
        if (!(q > 0.0)) return s.hi;
        auto [lo, hi] = bracket([&](double x) { return q - sf(x); });
        return solve_monotone([&](double x) { return q - sf(x); }, [&](double x) { return pdf(x); }, lo, hi,
                              x_tolerance_abs(), x_tolerance_rel());
    }

private:
    // Finds [lo, hi] with g(lo) <= 0 <= g(hi) for nondecreasing g.
    template <class G>
    std::pair<double, double> bracket(const G& g) const
    {
        auto s = support();
        double lo = s.lo;
        double hi = s.hi;
        double center = std::clamp(mean(), std::isfinite(lo) ? lo : -kInf, std::isfinite(hi) ? hi : kInf);
        double step = 1.0;
        if (!std::isfinite(lo)) {
            lo = std::min(center, std::isfinite(hi) ? hi : center) - step;
            for (int i = 0; g(lo) > 0.0 && i < 2000; ++i) {
                lo -= step;
                step *= 2.0;
            }
        }
        step = 1.0;
        if (!std::isfinite(hi)) {
            hi = std::max(center, lo) + step;
            for (int i = 0; g(hi) < 0.0 && i < 2000; ++i) {
                hi += step;
                step *= 2.0;
            }
        }
        return {lo, hi};
    }
};

using DistributionPtr = std::shared_ptr<const Distribution>;

namespace detail {

inline std::string format_params(const std::string& tag, std::initializer_list<double> params)
{
    std::ostringstream out;
    out.precision(17);
    out << tag;
    char sep = ':';
    for (double p : params) {
        out << sep << p;
        sep = ',';
    }
    return out.str();
}

inline double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
inline double std_normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }
inline double std_normal_pdf(double z)
{
    if (!std::isfinite(z)) return 0.0;
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

} // namespace detail

class Gaussian final : public Distribution {
public:
    Gaussian(double mu, double sigma) : mu_(mu), sigma_(sigma)
    {
        if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(mu)) {
            throw InvalidArgument("gaussian requires finite mu and sigma > 0");
        }
    }

    [[nodiscard]] std::string name() const override { return detail::format_params("gaussian", {mu_, sigma_}); }
    [[nodiscard]] Interval support() const override { return {}; }
    [[nodiscard]] double cdf(double x) const override { return detail::std_normal_cdf((x - mu_) / sigma_); }
    [[nodiscard]] double sf(double x) const override { return detail::std_normal_sf((x - mu_) / sigma_); }
    [[nodiscard]] double pdf(double x) const override { return detail::std_normal_pdf((x - mu_) / sigma_) / sigma_; }
    [[nodiscard]] double mean() const override { return mu_; }

    [[nodiscard]] double partial_expectation(double a, double b) const override
    {
        if (!(b > a)) return 0.0;
        double za = (a - mu_) / sigma_;
        double zb = (b - mu_) / sigma_;
        return mu_ * mass(a, b) + sigma_ * (detail::std_normal_pdf(za) - detail::std_normal_pdf(zb));
    }

    [[nodiscard]] double quantile(double p) const override
    {
        if (!(p > 0.0)) return -kInf;
        if (!(p < 1.0)) return kInf;
        return mu_ - sigma_ * std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
    }

    [[nodiscard]] double quantile_upper(double q) const override
    {
        if (!(q > 0.0)) return kInf;
        if (!(q < 1.0)) return -kInf;
        return mu_ + sigma_ * std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * q);
    }

    [[nodiscard]] double mu() const noexcept { return mu_; }
    [[nodiscard]] double sigma() const noexcept { return sigma_; }

private:
    double mu_;
    double sigma_;
};

class Exponential final : public Distribution {
public:
    explicit Exponential(double rate) : rate_(rate)
    {
        if (!(rate > 0.0) || !std::isfinite(rate)) throw InvalidArgument("exponential requires rate > 0");
    }

    [[nodiscard]] std::string name() const override { return detail::format_params("exp", {rate_}); }
    [[nodiscard]] Interval support() const override { return {0.0, kInf}; }
    [[nodiscard]] double cdf(double x) const override { return x <= 0.0 ? 0.0 : -std::expm1(-rate_ * x); }
    [[nodiscard]] double sf(double x) const override { return x <= 0.0 ? 1.0 : std::exp(-rate_ * x); }
    [[nodiscard]] double pdf(double x) const override { return x < 0.0 ? 0.0 : rate_ * std::exp(-rate_ * x); }
    [[nodiscard]] double mean() const override { return 1.0 / rate_; }

    [[nodiscard]] double partial_expectation(double a, double b) const override
    {
        a = std::max(a, 0.0);
        if (!(b > a)) return 0.0;
        // E[X; X > x] = (x + 1/rate) e^{-rate x}
        auto upper = [&](double x) { return std::isinf(x) ? 0.0 : (x + 1.0 / rate_) * std::exp(-rate_ * x); };
        return upper(a) - upper(b);
    }

    [[nodiscard]] double quantile(double p) const override
    {
        if (!(p > 0.0)) return 0.0;
        if (!(p < 1.0)) return kInf;
        return -std::log1p(-p) / rate_;
    }

    [[nodiscard]] double quantile_upper(double q) const override
    {
        if (!(q < 1.0)) return 0.0;
        if (!(q > 0.0)) return kInf;
        return -std::log(q) / rate_;
    }

    [[nodiscard]] double rate() const noexcept { return rate_; }

private:
    double rate_;
};

/// Pareto law with survival (x_m / x)^alpha on [x_m, inf).
class Pareto final : public Distribution {
public:
    Pareto(double alpha, double x_m) : alpha_(alpha), x_m_(x_m)
    {
        if (!(alpha > 1.0) || !std::isfinite(alpha)) throw InvalidArgument("pareto requires alpha > 1 (finite mean)");
        if (!(x_m > 0.0) || !std::isfinite(x_m)) throw InvalidArgument("pareto requires x_m > 0");
    }

    [[nodiscard]] std::string name() const override { return detail::format_params("pareto", {alpha_, x_m_}); }
    [[nodiscard]] Interval support() const override { return {x_m_, kInf}; }
    [[nodiscard]] double cdf(double x) const override { return x <= x_m_ ? 0.0 : -std::expm1(alpha_ * std::log(x_m_ / x)); }
    [[nodiscard]] double sf(double x) const override { return x <= x_m_ ? 1.0 : std::pow(x_m_ / x, alpha_); }
    [[nodiscard]] double pdf(double x) const override
    {
        return x < x_m_ ? 0.0 : alpha_ * std::pow(x_m_ / x, alpha_) / x;
    }
    [[nodiscard]] double mean() const override { return alpha_ * x_m_ / (alpha_ - 1.0); }

    [[nodiscard]] double partial_expectation(double a, double b) const override
    {
        a = std::max(a, x_m_);
        if (!(b > a)) return 0.0;
        // E[X; X > x] = alpha/(alpha-1) * x * sf(x)
        auto upper = [&](double x) { return std::isinf(x) ? 0.0 : alpha_ / (alpha_ - 1.0) * x * sf(x); };
        return upper(a) - upper(b);
    }

    [[nodiscard]] double quantile(double p) const override
    {
        if (!(p > 0.0)) return x_m_;
        if (!(p < 1.0)) return kInf;
        return x_m_ * std::exp(-std::log1p(-p) / alpha_);
    }

    [[nodiscard]] double quantile_upper(double q) const override
    {
        if (!(q < 1.0)) return x_m_;
        if (!(q > 0.0)) return kInf;
        return x_m_ * std::pow(q, -1.0 / alpha_);
    }

    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double x_m() const noexcept { return x_m_; }

private:
    double alpha_;
    double x_m_;
};

/// Law with survival e / (x log^2 x) on [e, inf). Finite mean (2e), but
/// every moment of order above one diverges.
class HeavyTailed final : public Distribution {
public:
    [[nodiscard]] std::string name() const override { return "heavytailed"; }
    [[nodiscard]] Interval support() const override { return {std::numbers::e, kInf}; }
    [[nodiscard]] double sf(double x) const override
    {
        if (x <= std::numbers::e) return 1.0;
        if (std::isinf(x)) return 0.0;
        double l = std::log(x);
        return std::numbers::e / (x * l * l);
    }
    [[nodiscard]] double cdf(double x) const override
    {
        if (x <= std::numbers::e) return 0.0;
        return 1.0 - sf(x);
    }
    [[nodiscard]] double pdf(double x) const override
    {
        if (x < std::numbers::e || std::isinf(x)) return 0.0;
        double l = std::log(x);
        return std::numbers::e * (l + 2.0) / (x * x * l * l * l);
    }
    [[nodiscard]] double mean() const override { return 2.0 * std::numbers::e; }

    [[nodiscard]] double partial_expectation(double a, double b) const override
    {
        a = std::max(a, std::numbers::e);
        if (!(b > a)) return 0.0;
        // Antiderivative of t f(t) is -e (1/log t + 1/log^2 t); it vanishes at
        // infinity.
        auto anti = [](double x) {
            if (std::isinf(x)) return 0.0;
            double l = std::log(x);
            return -std::numbers::e * (1.0 / l + 1.0 / (l * l));
        };
        return anti(b) - anti(a);
    }

    [[nodiscard]] double quantile(double p) const override
    {
        if (!(p > 0.0)) return std::numbers::e;
        if (!(p < 1.0)) return kInf;
        return quantile_upper(1.0 - p);
    }

    /// x log^2 x = e / q solved through the principal Lambert W branch:
    /// log x = 2 W(sqrt(e / q) / 2).
    [[nodiscard]] double quantile_upper(double q) const override
    {
        if (!(q < 1.0)) return std::numbers::e;
        if (!(q > 0.0)) return kInf;
        double c = std::numbers::e / q;
        double y = 2.0 * boost::math::lambert_w0(0.5 * std::sqrt(c));
        return std::max(std::numbers::e, std::exp(y));
    }
};

/// Two-component Gaussian mixture 2/3 N(2, 1/2) + 1/3 N(-2, 1/2), i.e. the
/// density (2 e^{-(x-2)^2} + e^{-(x+2)^2}) / (3 sqrt(pi)).
class Bimodal final : public Distribution {
public:
    [[nodiscard]] std::string name() const override { return "bimodal"; }
    [[nodiscard]] Interval support() const override { return {}; }
    [[nodiscard]] double cdf(double x) const override
    {
        return kWeight * right_.cdf(x) + (1.0 - kWeight) * left_.cdf(x);
    }
    [[nodiscard]] double sf(double x) const override { return kWeight * right_.sf(x) + (1.0 - kWeight) * left_.sf(x); }
    [[nodiscard]] double pdf(double x) const override
    {
        return kWeight * right_.pdf(x) + (1.0 - kWeight) * left_.pdf(x);
    }
    [[nodiscard]] double mean() const override { return kWeight * 2.0 - (1.0 - kWeight) * 2.0; }
    [[nodiscard]] double partial_expectation(double a, double b) const override
    {
        return kWeight * right_.partial_expectation(a, b) + (1.0 - kWeight) * left_.partial_expectation(a, b);
    }

private:
    static constexpr double kWeight = 2.0 / 3.0;
    Gaussian right_{2.0, std::numbers::sqrt2 / 2.0};
    Gaussian left_{-2.0, std::numbers::sqrt2 / 2.0};
};

class Uniform final : public Distribution {
public:
    Uniform(double a, double b) : a_(a), b_(b)
    {
        if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) throw InvalidArgument("uniform requires finite a < b");
    }

    [[nodiscard]] std::string name() const override { return detail::format_params("uniform", {a_, b_}); }
    [[nodiscard]] Interval support() const override { return {a_, b_}; }
    [[nodiscard]] double cdf(double x) const override { return std::clamp((x - a_) / (b_ - a_), 0.0, 1.0); }
    [[nodiscard]] double sf(double x) const override { return std::clamp((b_ - x) / (b_ - a_), 0.0, 1.0); }
    [[nodiscard]] double pdf(double x) const override { return (x < a_ || x > b_) ? 0.0 : 1.0 / (b_ - a_); }
    [[nodiscard]] double mean() const override { return 0.5 * (a_ + b_); }
    [[nodiscard]] double partial_expectation(double a, double b) const override
    {
        a = std::max(a, a_);
        b = std::min(b, b_);
        if (!(b > a)) return 0.0;
        return (b - a) * (0.5 * (a + b)) / (b_ - a_);
    }
    [[nodiscard]] double quantile(double p) const override
    {
        p = std::clamp(p, 0.0, 1.0);
        return p < 0.5 ? a_ + p * (b_ - a_) : b_ - (1.0 - p) * (b_ - a_);
    }
    [[nodiscard]] double quantile_upper(double q) const override
    {
        q = std::clamp(q, 0.0, 1.0);
        return b_ - q * (b_ - a_);
    }

private:
    double a_;
    double b_;
};

/// Gamma law with integer shape k and rate lambda: the sum of k independent
/// Exponential(lambda) variables. Used as the closed-form reference for
/// repeated additions of exponentials.
class Erlang final : public Distribution {
public:
    Erlang(int shape, double rate) : shape_(shape), rate_(rate)
    {
        if (shape < 1) throw InvalidArgument("erlang requires shape >= 1");
        if (!(rate > 0.0) || !std::isfinite(rate)) throw InvalidArgument("erlang requires rate > 0");
    }

    [[nodiscard]] std::string name() const override
    {
        return detail::format_params("erlang", {static_cast<double>(shape_), rate_});
    }
    [[nodiscard]] Interval support() const override { return {0.0, kInf}; }
    [[nodiscard]] double cdf(double x) const override
    {
        if (x <= 0.0) return 0.0;
        if (std::isinf(x)) return 1.0;
        return boost::math::gamma_p(static_cast<double>(shape_), rate_ * x);
    }
    [[nodiscard]] double sf(double x) const override
    {
        if (x <= 0.0) return 1.0;
        if (std::isinf(x)) return 0.0;
        return boost::math::gamma_q(static_cast<double>(shape_), rate_ * x);
    }
    [[nodiscard]] double pdf(double x) const override
    {
        if (x < 0.0 || std::isinf(x)) return 0.0;
        return rate_ * boost::math::gamma_p_derivative(static_cast<double>(shape_), rate_ * x);
    }
    [[nodiscard]] double mean() const override { return shape_ / rate_; }
    [[nodiscard]] double partial_expectation(double a, double b) const override
    {
        a = std::max(a, 0.0);
        if (!(b > a)) return 0.0;
        // t f_k(t) = (k / rate) f_{k+1}(t)
        double k1 = shape_ + 1.0;
        double scale = shape_ / rate_;
        if (std::isfinite(b) && boost::math::gamma_p(k1, rate_ * b) <= 0.5) {
            return scale * (boost::math::gamma_p(k1, rate_ * b) - boost::math::gamma_p(k1, rate_ * a));
        }
        auto upper = [&](double x) { return std::isinf(x) ? 0.0 : boost::math::gamma_q(k1, rate_ * x); };
        return scale * (upper(a) - upper(b));
    }
    [[nodiscard]] double quantile(double p) const override
    {
        if (!(p > 0.0)) return 0.0;
        if (!(p < 1.0)) return kInf;
        return boost::math::gamma_p_inv(static_cast<double>(shape_), p) / rate_;
    }
    [[nodiscard]] double quantile_upper(double q) const override
    {
        if (!(q < 1.0)) return 0.0;
        if (!(q > 0.0)) return kInf;
        return boost::math::gamma_q_inv(static_cast<double>(shape_), q) / rate_;
    }

    [[nodiscard]] int shape() const noexcept { return shape_; }
    [[nodiscard]] double rate() const noexcept { return rate_; }

private:
    int shape_;
    double rate_;
};

} // namespace dcq
