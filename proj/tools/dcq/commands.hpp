#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dcq/dcq.hpp"

namespace dcq::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericFailure = 3 };

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Method { Mean, Median, GeoMean, Optimal, Asympt };

inline Method parse_method(std::string_view s)
{
    if (s == "mean") return Method::Mean;
    if (s == "median") return Method::Median;
    if (s == "geomean") return Method::GeoMean;
    if (s == "optimal") return Method::Optimal;
    if (s == "asympt") return Method::Asympt;
    throw ConfigError("unknown method '" + std::string(s) + "' (expected mean, median, geomean, optimal or asympt)");
}

inline std::string_view to_string(Method m)
{
    switch (m) {
    case Method::Mean: return "mean";
    case Method::Median: return "median";
    case Method::GeoMean: return "geomean";
    case Method::Optimal: return "optimal";
    case Method::Asympt: return "asympt";
    }
    return "?";
}

inline std::optional<SplitRule> split_rule_of(Method m)
{
    switch (m) {
    case Method::Mean: return SplitRule::Mean;
    case Method::Median: return SplitRule::Median;
    case Method::GeoMean: return SplitRule::GeometricMean;
    default: return std::nullopt;
    }
}

enum class Statistic { Mean, P95 };

struct Config {
    std::vector<std::string> dists;
    std::vector<Method> methods;
    std::vector<int> depths;
    ArithOp op = ArithOp::Add;
    int k = 1;
    std::uint64_t seed = 1;
    std::string out;
    std::size_t replicates = 20;
    std::uint64_t mc_max_samples = 2'000'000;
    unsigned threads = 0;
    bool timing = false;
    Statistic statistic = Statistic::Mean;
    bool dists_given = false;
    bool methods_given = false;
};

inline std::vector<std::string> split_list(std::string_view text, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(sep, start);
        if (end == std::string_view::npos) end = text.size();
        std::string item(text.substr(start, end - start));
        if (!item.empty()) out.push_back(item);
        start = end + 1;
    }
    return out;
}

inline int parse_int(std::string_view s, std::string_view what)
{
    try {
        std::size_t used = 0;
        int v = std::stoi(std::string(s), &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("invalid " + std::string(what) + " '" + std::string(s) + "'");
    }
}

/// Depth specs: "5", "2,4,6" or an inclusive range "0:12".
inline std::vector<int> parse_depths(std::string_view spec)
{
    std::vector<int> out;
    for (const auto& item : split_list(spec, ',')) {
        auto colon = item.find(':');
        if (colon == std::string::npos) {
            out.push_back(parse_int(item, "depth"));
            continue;
        }
        int lo = parse_int(std::string_view(item).substr(0, colon), "depth");
        int hi = parse_int(std::string_view(item).substr(colon + 1), "depth");
        if (hi < lo) throw ConfigError("empty depth range '" + item + "'");
        for (int n = lo; n <= hi; ++n) out.push_back(n);
    }
    for (int n : out) {
        if (n < 0 || n > kMaxDepth) throw ConfigError("depth " + std::to_string(n) + " outside [0, 30]");
    }
    return out;
}

inline int depth_from_rep_size(long long rep_size)
{
    if (rep_size < 1 || (rep_size & (rep_size - 1)) != 0) {
        throw ConfigError("rep size " + std::to_string(rep_size) + " is not a power of two");
    }
    int n = 0;
    while ((1LL << n) < rep_size) ++n;
    if (n > kMaxDepth) throw ConfigError("rep size too large");
    return n;
}

inline std::string fmt(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

inline std::string csv_field(std::string_view s)
{
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

class Csv {
public:
    explicit Csv(std::vector<std::string> header) : width_(header.size()) { add(header); }

    void add(const std::vector<std::string>& row)
    {
        if (row.size() != width_) throw std::logic_error("csv row width mismatch");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) text_ += ',';
            text_ += csv_field(row[i]);
        }
        text_ += '\n';
    }

    [[nodiscard]] const std::string& str() const noexcept { return text_; }

private:
    std::size_t width_;
    std::string text_;
};

inline std::string error_text(const std::exception& e)
{
    std::string kind = "error";
    if (dynamic_cast<const MemoryGuard*>(&e)) kind = "MemoryGuard";
    else if (dynamic_cast<const DivergentHalfDensity*>(&e)) kind = "DivergentHalfDensity";
    else if (dynamic_cast<const DivergentIntegral*>(&e)) kind = "DivergentIntegral";
    else if (dynamic_cast<const NoConvergence*>(&e)) kind = "NoConvergence";
    else if (dynamic_cast<const UnboundedBelow*>(&e)) kind = "UnboundedBelow";
    else if (dynamic_cast<const NegativeSupport*>(&e)) kind = "NegativeSupport";
    else if (dynamic_cast<const NonFiniteMean*>(&e)) kind = "NonFiniteMean";
    else if (dynamic_cast<const ZeroMassCell*>(&e)) kind = "ZeroMassCell";
    else if (dynamic_cast<const UnsupportedRule*>(&e)) kind = "UnsupportedRule";
    else if (dynamic_cast<const InvalidArgument*>(&e)) kind = "InvalidArgument";
    else if (dynamic_cast<const NumericError*>(&e)) kind = "NumericError";
    return kind + ": " + e.what();
}

/// A quantization of a continuous law by one of the CLI methods.
struct MethodResult {
    DiscreteMeasure measure;
    double w1 = 0.0;
    W1Method w1_method = W1Method::CdfIntegral;
    std::optional<double> residual;
};

inline MethodResult run_method(const Distribution& d, Method method, int n)
{
    if (auto rule = split_rule_of(method)) {
        auto m = quantize(d, *rule, n);
        auto err = quantization_error(d, *rule, n);
        return {std::move(m), err.value, err.method, std::nullopt};
    }
    detail::check_depth(n);
    int count = 1 << n;
    if (method == Method::Optimal) {
        auto rep = optimal_quantizer_report(d, count);
        double w1 = w1_continuous_discrete(d, rep.measure);
        return {std::move(rep.measure), w1, W1Method::CdfIntegral, rep.residual};
    }
    auto m = asymptotically_optimal_quantizer(d, count);
    double w1 = w1_continuous_discrete(d, m);
    return {std::move(m), w1, W1Method::CdfIntegral, std::nullopt};
}

/// Compression after an arithmetic step, per method.
inline DiscreteMeasure compress_for(Method method, const DiscreteMeasure& m, int n)
{
    if (auto rule = split_rule_of(method)) return compress(m, *rule, n);
    if (method == Method::Asympt) return compress_asymptotic(m, 1 << n);
    throw UnsupportedRule("the optimal quantizer has no discrete compression; it is excluded from arithmetic");
}

inline std::vector<DistributionPtr> resolve_dists(const Config& cfg)
{
    std::vector<DistributionPtr> out;
    for (const auto& spec : cfg.dists) {
        try {
            out.push_back(parse_distribution(spec));
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
    }
    if (out.empty()) throw ConfigError("no distribution selected");
    return out;
}

// Default method sets leave out the asymptotically optimal and optimal
// quantizers for laws where the half-density is not integrable.
inline bool method_selected(const Config& cfg, Method m, const Distribution& d)
{
    if (cfg.methods_given) return true;
    if (m == Method::Asympt || m == Method::Optimal) return asymptotic_conditions_hold(d);
    return true;
}

struct QuantizeOutput {
    std::string csv;
    nlohmann::json sidecar;
};

inline QuantizeOutput cmd_quantize(const Config& cfg)
{
    auto dists = resolve_dists(cfg);
    if (dists.size() != 1) throw ConfigError("quantize takes exactly one --dist");
    if (cfg.methods.size() != 1) throw ConfigError("quantize takes exactly one --method");
    if (cfg.depths.size() != 1) throw ConfigError("quantize takes exactly one --n or --rep-size");
    const Distribution& d = *dists.front();
    Method method = cfg.methods.front();
    int n = cfg.depths.front();

    MethodResult r = run_method(d, method, n);
    Csv csv({"position", "weight"});
    for (const auto& a : r.measure.atoms()) csv.add({fmt(a.position), fmt(a.weight)});

    nlohmann::json j;
    j["distribution"] = d.name();
    j["method"] = to_string(method);
    j["n"] = n;
    j["rep_size"] = 1LL << n;
    j["atoms"] = r.measure.size();
    j["mean"] = r.measure.mean();
    j["true_mean"] = d.mean();
    j["w1"] = r.w1;
    j["w1_method"] = to_string(r.w1_method);
    if (r.residual) j["optimal_residual"] = *r.residual;
    nlohmann::json bounds = nullptr;
    if (auto rule = split_rule_of(method)) {
        try {
            auto b = theorem48_bound(d, *rule, n);
            bounds = {{"thm48_upper", b.thm48_upper}, {"tail_lower", b.tail_lower}, {"omega", b.omega}};
            bounds["zador_lower"] = b.zador_lower ? nlohmann::json(*b.zador_lower) : nlohmann::json(nullptr);
        } catch (const Error& e) {
            bounds = {{"unavailable", error_text(e)}};
        }
    }
    j["bounds"] = bounds;
    return {csv.str(), j};
}

inline std::string cmd_sweep_repsize(const Config& cfg)
{
    auto dists = resolve_dists(cfg);
    struct Task {
        DistributionPtr d;
        Method method;
        int n;
    };
    std::vector<Task> tasks;
    for (const auto& d : dists) {
        for (Method m : cfg.methods) {
            if (!method_selected(cfg, m, *d)) continue;
            for (int n : cfg.depths) tasks.push_back({d, m, n});
        }
    }
    std::vector<std::vector<std::string>> rows(tasks.size());
    parallel_for(tasks.size(), [&](std::size_t i) {
        const Task& t = tasks[i];
        std::string w1;
        std::string zador;
        std::string upper;
        std::string lower;
        std::string wall = "0";
        std::string error;
        try {
            auto start = std::chrono::steady_clock::now();
            MethodResult r = run_method(*t.d, t.method, t.n);
            auto stop = std::chrono::steady_clock::now();
            if (cfg.timing) wall = fmt(std::chrono::duration<double>(stop - start).count());
            w1 = fmt(r.w1);
            try {
                zador = fmt(zador_constant(*t.d) / std::ldexp(1.0, t.n));
            } catch (const DivergentIntegral&) {
            }
            auto rule = split_rule_of(t.method);
            if (rule && c_factor(*rule) && std::isfinite(t.d->support().lo)) {
                auto b = theorem48_bound(*t.d, *rule, t.n);
                upper = fmt(b.thm48_upper);
                lower = fmt(b.tail_lower);
            }
        } catch (const std::exception& e) {
            error = error_text(e);
        }
        rows[i] = {t.d->name(), std::string(to_string(t.method)), std::to_string(t.n), std::to_string(1LL << t.n),
                   w1, zador, upper, lower, wall, error};
    }, cfg.threads);

    Csv csv({"distribution", "method", "n", "rep_size", "w1", "zador_lower", "thm48_upper", "tail_lower",
             "wall_seconds", "error"});
    for (const auto& r : rows) csv.add(r);
    return csv.str();
}

inline std::string cmd_sweep_arith(const Config& cfg)
{
    auto dists = resolve_dists(cfg);
    if (cfg.k < 1) throw ConfigError("--k must be at least 1");
    int grid_n = 0;
    for (int n : cfg.depths) grid_n = std::max(grid_n, n + 4);
    grid_n = std::min(grid_n, kMaxDepth);

    struct Task {
        DistributionPtr d;
        int n;
    };
    std::vector<Task> tasks;
    for (const auto& d : dists) {
        for (int n : cfg.depths) tasks.push_back({d, n});
    }
    std::vector<std::vector<std::vector<std::string>>> blocks(tasks.size());
    parallel_for(tasks.size(), [&](std::size_t i) {
        const Task& t = tasks[i];
        const std::string name = t.d->name();
        std::vector<Method> methods;
        for (Method m : cfg.methods) {
            if (method_selected(cfg, m, *t.d)) methods.push_back(m);
        }
        std::vector<std::optional<DiscreteMeasure>> operand(methods.size());
        std::vector<std::optional<DiscreteMeasure>> acc(methods.size());
        std::vector<std::string> broken(methods.size());
        std::optional<ReferenceFold> ref;
        std::string ref_error;
        try {
            ref.emplace(cfg.op, grid_n);
        } catch (const std::exception& e) {
            ref_error = error_text(e);
        }
        for (int k = 1; k <= cfg.k; ++k) {
            std::optional<Reference> current;
            if (ref && ref_error.empty()) {
                try {
                    ref->push(t.d);
                    current = ref->current();
                } catch (const std::exception& e) {
                    ref_error = error_text(e);
                }
            }
            for (std::size_t j = 0; j < methods.size(); ++j) {
                std::string w1;
                std::string mean;
                std::string error = broken[j];
                if (error.empty()) {
                    try {
                        if (k == 1) {
                            operand[j] = run_method(*t.d, methods[j], t.n).measure;
                            acc[j] = operand[j];
                        } else {
                            acc[j] = compress_for(methods[j], convolve(*acc[j], *operand[j], cfg.op), t.n);
                        }
                        mean = fmt(acc[j]->mean());
                    } catch (const std::exception& e) {
                        broken[j] = error = error_text(e);
                    }
                }
                if (error.empty()) {
                    if (current) {
                        try {
                            w1 = fmt(current->w1_to(*acc[j]));
                        } catch (const std::exception& e) {
                            error = error_text(e);
                        }
                    } else {
                        error = ref_error;
                    }
                }
                blocks[i].push_back({name, std::string(to_string(methods[j])), std::string(to_string(cfg.op)),
                                     std::to_string(k), w1, current ? current->kind : std::string(),
                                     std::to_string(1LL << t.n), mean, error});
            }
        }
    }, cfg.threads);

    Csv csv({"distribution", "method", "op", "k", "w1_vs_reference", "reference_kind", "rep_size", "result_mean",
             "error"});
    for (const auto& b : blocks) {
        for (const auto& r : b) csv.add(r);
    }
    return csv.str();
}

inline std::string cmd_mc_compare(const Config& cfg)
{
    auto dists = resolve_dists(cfg);
    if (cfg.k < 1) throw ConfigError("--k must be at least 1");
    if (cfg.replicates < 1) throw ConfigError("--replicates must be at least 1");
    Csv csv({"distribution", "target_method", "target_n", "target_w1", "asymptotic_constant", "equivalent_mc_count",
             "measured_mc_mean_w1", "op", "k", "replicates", "statistic", "error"});
    const std::string statistic = cfg.statistic == Statistic::Mean ? "mean" : "p95";
    for (const auto& d : dists) {
        for (Method method : cfg.methods) {
            if (!method_selected(cfg, method, *d)) continue;
            for (int n : cfg.depths) {
                std::string target;
                std::string constant;
                std::string count;
                std::string measured;
                std::string error;
                try {
                    std::vector<DistributionPtr> operands(static_cast<std::size_t>(cfg.k), d);
                    double target_w1 = 0.0;
                    double c = 0.0;
                    std::function<double(std::uint64_t, std::size_t)> sample_w1;
                    std::optional<Reference> ref;
                    if (cfg.k == 1) {
                        target_w1 = run_method(*d, method, n).w1;
                        target = fmt(target_w1);
                        c = asymptotic_constant(*d);
                        sample_w1 = [&](std::uint64_t s, std::size_t count_) { return empirical_w1(*d, count_, s); };
                    } else {
                        ReferenceFold fold_ref(cfg.op, std::min(n + 4, kMaxDepth));
                        for (const auto& op_d : operands) fold_ref.push(op_d);
                        ref = fold_ref.current();
                        DiscreteMeasure operand = run_method(*d, method, n).measure;
                        DiscreteMeasure acc = operand;
                        for (int k = 2; k <= cfg.k; ++k) acc = compress_for(method, convolve(acc, operand, cfg.op), n);
                        target_w1 = ref->w1_to(acc);
                        target = fmt(target_w1);
                        c = asymptotic_constant(*ref);
                        sample_w1 = [&](std::uint64_t s, std::size_t count_) {
                            return empirical_w1(*ref, operands, cfg.op, count_, s);
                        };
                    }
                    constant = fmt(c);
                    std::uint64_t samples = equivalent_mc_count_for_constant(c, target_w1);
                    count = std::to_string(samples);
                    if (samples > cfg.mc_max_samples) {
                        error = "skipped measurement: count exceeds --mc-max-samples";
                    } else {
                        auto rep = run_replicates(
                            samples, cfg.replicates, cfg.seed,
                            [&](std::uint64_t s) { return sample_w1(s, static_cast<std::size_t>(samples)); },
                            cfg.threads);
                        measured = fmt(cfg.statistic == Statistic::Mean ? rep.mean_w1 : rep.p95_w1);
                    }
                } catch (const std::exception& e) {
                    error = error_text(e);
                }
                csv.add({d->name(), std::string(to_string(method)), std::to_string(n), target, constant, count, measured,
                         std::string(to_string(cfg.op)), std::to_string(cfg.k), std::to_string(cfg.replicates),
                         statistic, error});
            }
        }
    }
    return csv.str();
}

inline std::string cmd_bounds(const Config& cfg)
{
    auto dists = resolve_dists(cfg);
    Csv csv({"distribution", "method", "n", "zador_lower", "thm48_upper", "tail_lower", "w1", "omega", "error"});
    for (const auto& d : dists) {
        for (Method method : cfg.methods) {
            for (int n : cfg.depths) {
                std::string zador;
                std::string upper;
                std::string lower;
                std::string w1;
                std::string omega;
                std::string error;
                try {
                    auto rule = split_rule_of(method);
                    if (!rule) throw UnsupportedRule("bounds are defined for split methods only");
                    w1 = fmt(quantization_error(*d, *rule, n).value);
                    auto b = theorem48_bound(*d, *rule, n);
                    zador = fmt(b.zador_lower);
                    upper = fmt(b.thm48_upper);
                    lower = fmt(b.tail_lower);
                    for (std::size_t i = 0; i < b.omega.size(); ++i) omega += (i ? ";" : "") + fmt(b.omega[i]);
                } catch (const std::exception& e) {
                    error = error_text(e);
                }
                csv.add({d->name(), std::string(to_string(method)), std::to_string(n), zador, upper, lower, w1, omega,
                         error});
            }
        }
    }
    return csv.str();
}

} // namespace dcq::cli
