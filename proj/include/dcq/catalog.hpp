#pragma once

#include <charconv>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "dcq/distribution.hpp"
#include "dcq/error.hpp"

namespace dcq {

namespace detail {

inline std::vector<double> parse_params(std::string_view text, std::string_view spec)
{
    std::vector<double> out;
    while (!text.empty()) {
        auto comma = text.find(',');
        auto token = text.substr(0, comma);
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc() || ptr != token.data() + token.size()) {
            throw InvalidArgument("bad numeric parameter '" + std::string(token) + "' in '" + std::string(spec) + "'");
        }
        out.push_back(value);
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return out;
}

} // namespace detail

/// Builds a distribution from its `name:params` spelling:
///
///   gaussian:mu,sigma   (also normal:..., defaults 0,1)
///   exp:rate            (default 1)
///   pareto:alpha,x_m    (defaults 2,1)
///   heavytailed
///   bimodal
///   uniform:a,b         (defaults 0,1)
///   erlang:k,rate
inline DistributionPtr parse_distribution(std::string_view spec)
{
    auto colon = spec.find(':');
    std::string tag(spec.substr(0, colon));
    std::vector<double> p;
    if (colon != std::string_view::npos) p = detail::parse_params(spec.substr(colon + 1), spec);
    auto arity = [&](std::size_t lo, std::size_t hi) {
        if (p.size() < lo || p.size() > hi) {
            throw InvalidArgument("wrong number of parameters in '" + std::string(spec) + "'");
        }
    };
    if (tag == "gaussian" || tag == "normal") {
        arity(0, 2);
        if (p.empty()) return std::make_shared<Gaussian>(0.0, 1.0);
        return std::make_shared<Gaussian>(p[0], p.size() > 1 ? p[1] : 1.0);
    }
    if (tag == "exp" || tag == "exponential") {
        arity(0, 1);
        return std::make_shared<Exponential>(p.empty() ? 1.0 : p[0]);
    }
    if (tag == "pareto") {
        arity(0, 2);
        double alpha = p.empty() ? 2.0 : p[0];
        double x_m = p.size() > 1 ? p[1] : 1.0;
        return std::make_shared<Pareto>(alpha, x_m);
    }
    if (tag == "heavytailed") {
        arity(0, 0);
        return std::make_shared<HeavyTailed>();
    }
    if (tag == "bimodal") {
        arity(0, 0);
        return std::make_shared<Bimodal>();
    }
    if (tag == "uniform") {
        arity(0, 2);
        if (p.empty()) return std::make_shared<Uniform>(0.0, 1.0);
        arity(2, 2);
        return std::make_shared<Uniform>(p[0], p[1]);
    }
    if (tag == "erlang") {
        arity(1, 2);
        if (p[0] != static_cast<double>(static_cast<int>(p[0]))) throw InvalidArgument("erlang shape must be an integer");
        return std::make_shared<Erlang>(static_cast<int>(p[0]), p.size() > 1 ? p[1] : 1.0);
    }
    throw InvalidArgument("unknown distribution '" + std::string(spec) + "'");
}

/// The five laws used by the experiment sweeps.
inline std::vector<std::string> experiment_catalog()
{
    return {"gaussian:0,1", "exp:1", "pareto:2,1", "heavytailed", "bimodal"};
}

/// Experiment catalog plus Uniform(0,1), which has exact closed-form errors.
inline std::vector<std::string> full_catalog()
{
    auto out = experiment_catalog();
    out.emplace_back("uniform:0,1");
    return out;
}

/// Whether the asymptotically-optimal quantizer is run by default for a law.
/// The tail conditions it relies on are not verified numerically; this flag
/// records which catalog members are known to violate them.
inline bool asymptotic_conditions_hold(const Distribution& d) { return d.name() != "heavytailed"; }

} // namespace dcq
