#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <toml.hpp>

#include "dcq/commands.hpp"

namespace {

using namespace dcq;
using namespace dcq::cli;

struct Flags {
    std::vector<std::string> dists;
    std::vector<std::string> methods;
    std::vector<std::string> depths;
    std::vector<long long> rep_sizes;
    std::string op;
    int k = 0;
    std::uint64_t seed = 0;
    std::string out;
    std::string config;
    std::size_t replicates = 0;
    std::uint64_t mc_max_samples = 0;
    unsigned threads = 0;
    bool timing = false;
    std::string statistic;
};

struct Options {
    CLI::Option* dist = nullptr;
    CLI::Option* method = nullptr;
    CLI::Option* n = nullptr;
    CLI::Option* rep_size = nullptr;
    CLI::Option* op = nullptr;
    CLI::Option* k = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* out = nullptr;
    CLI::Option* replicates = nullptr;
    CLI::Option* mc_max_samples = nullptr;
    CLI::Option* threads = nullptr;
    CLI::Option* timing = nullptr;
    CLI::Option* statistic = nullptr;
};

Options add_options(CLI::App* cmd, Flags& f)
{
    Options o;
    o.dist = cmd->add_option("--dist", f.dists, "distribution as name:params, repeatable (e.g. exp:1, gaussian:0,1)");
    o.method = cmd->add_option("--method", f.methods, "mean, median, geomean, optimal or asympt; repeatable or comma separated");
    o.n = cmd->add_option("--n", f.depths, "depth(s): 5, 2,4,6 or a range 0:12");
    o.rep_size = cmd->add_option("--rep-size", f.rep_sizes, "representation size(s), powers of two");
    o.op = cmd->add_option("--op", f.op, "arithmetic operation")->check(CLI::IsMember({"add", "mul", "sub"}));
    o.k = cmd->add_option("--k", f.k, "number of operands");
    o.seed = cmd->add_option("--seed", f.seed, "base seed for Monte Carlo streams");
    o.out = cmd->add_option("--out", f.out, "output CSV path (stdout if omitted)");
    cmd->add_option("--config", f.config, "TOML file with the same keys; flags win");
    o.replicates = cmd->add_option("--replicates", f.replicates, "Monte Carlo replicates");
    o.mc_max_samples = cmd->add_option("--mc-max-samples", f.mc_max_samples, "skip measured MC above this sample count");
    o.threads = cmd->add_option("--threads", f.threads, "worker threads (0 = hardware)");
    o.timing = cmd->add_flag("--timing", f.timing, "fill wall_seconds (makes output run-dependent)");
    o.statistic = cmd->add_option("--statistic", f.statistic, "Monte Carlo statistic")->check(CLI::IsMember({"mean", "p95"}));
    return o;
}

std::vector<std::string> toml_strings(const toml::node& node, const std::string& key)
{
    std::vector<std::string> out;
    if (auto s = node.value<std::string>()) {
        out.push_back(*s);
    } else if (auto i = node.value<std::int64_t>()) {
        out.push_back(std::to_string(*i));
    } else if (const auto* arr = node.as_array()) {
        for (const auto& item : *arr) {
            if (auto s = item.value<std::string>()) {
                out.push_back(*s);
            } else if (auto i = item.value<std::int64_t>()) {
                out.push_back(std::to_string(*i));
            } else {
                throw ConfigError("config key '" + key + "' holds an unsupported value");
            }
        }
    } else {
        throw ConfigError("config key '" + key + "' must be a string, integer or array");
    }
    return out;
}

template <class T>
T toml_scalar(const toml::node& node, const std::string& key)
{
    auto v = node.value<T>();
    if (!v) throw ConfigError("config key '" + key + "' has the wrong type");
    return *v;
}

std::vector<Method> parse_methods(const std::vector<std::string>& items)
{
    std::vector<Method> out;
    for (const auto& item : items) {
        for (const auto& m : split_list(item, ',')) out.push_back(parse_method(m));
    }
    return out;
}

std::vector<int> depths_of(const std::vector<std::string>& specs, const std::vector<long long>& rep_sizes)
{
    std::vector<int> out;
    for (const auto& s : specs) {
        auto d = parse_depths(s);
        out.insert(out.end(), d.begin(), d.end());
    }
    for (long long r : rep_sizes) out.push_back(depth_from_rep_size(r));
    return out;
}

struct Defaults {
    std::vector<std::string> dists;
    std::vector<Method> methods;
    std::vector<int> depths;
    int k = 1;
};

Defaults defaults_for(const std::string& command)
{
    if (command == "quantize") return {{}, {Method::Mean}, {8}, 1};
    if (command == "sweep-repsize") {
        return {experiment_catalog(), {Method::Mean, Method::Median, Method::Optimal, Method::Asympt}, parse_depths("0:12"), 1};
    }
    if (command == "sweep-arith") return {experiment_catalog(), {Method::Mean, Method::Median, Method::Asympt}, {6}, 10};
    if (command == "mc-compare") return {{"exp:1", "gaussian:0,1"}, {Method::Mean}, {8}, 1};
    return {experiment_catalog(), {Method::Mean, Method::Median}, parse_depths("0:10"), 1};
}

Config build_config(const std::string& command, const Flags& f, const Options& o)
{
    Defaults def = defaults_for(command);
    Config cfg;
    cfg.dists = def.dists;
    cfg.methods = def.methods;
    cfg.depths = def.depths;
    cfg.k = def.k;

    if (!f.config.empty()) {
        toml::table table;
        try {
            table = toml::parse_file(f.config);
        } catch (const toml::parse_error& e) {
            throw ConfigError("cannot read config '" + f.config + "': " + std::string(e.description()));
        }
        std::vector<std::string> depth_specs;
        std::vector<long long> rep_sizes;
        bool depth_keys = false;
        for (const auto& [k, node] : table) {
            std::string key(k.str());
            if (key == "dist") {
                cfg.dists = toml_strings(node, key);
                cfg.dists_given = true;
            } else if (key == "method") {
                cfg.methods = parse_methods(toml_strings(node, key));
                cfg.methods_given = true;
            } else if (key == "n") {
                depth_specs = toml_strings(node, key);
                depth_keys = true;
            } else if (key == "rep_size") {
                for (const auto& s : toml_strings(node, key)) rep_sizes.push_back(parse_int(s, "rep_size"));
                depth_keys = true;
            } else if (key == "op") {
                cfg.op = parse_arith_op(toml_scalar<std::string>(node, key));
            } else if (key == "k") {
                cfg.k = static_cast<int>(toml_scalar<std::int64_t>(node, key));
            } else if (key == "seed") {
                cfg.seed = static_cast<std::uint64_t>(toml_scalar<std::int64_t>(node, key));
            } else if (key == "out") {
                cfg.out = toml_scalar<std::string>(node, key);
            } else if (key == "replicates") {
                cfg.replicates = static_cast<std::size_t>(toml_scalar<std::int64_t>(node, key));
            } else if (key == "mc_max_samples") {
                cfg.mc_max_samples = static_cast<std::uint64_t>(toml_scalar<std::int64_t>(node, key));
            } else if (key == "threads") {
                cfg.threads = static_cast<unsigned>(toml_scalar<std::int64_t>(node, key));
            } else if (key == "timing") {
                cfg.timing = toml_scalar<bool>(node, key);
            } else if (key == "statistic") {
                std::string s = toml_scalar<std::string>(node, key);
                if (s != "mean" && s != "p95") throw ConfigError("statistic must be mean or p95");
                cfg.statistic = s == "mean" ? Statistic::Mean : Statistic::P95;
            } else {
                throw ConfigError("unknown config key '" + key + "'");
            }
        }
        if (depth_keys) cfg.depths = depths_of(depth_specs, rep_sizes);
    }

    if (o.dist->count() > 0) {
        cfg.dists = f.dists;
        cfg.dists_given = true;
    }
    if (o.method->count() > 0) {
        cfg.methods = parse_methods(f.methods);
        cfg.methods_given = true;
    }
    if (o.n->count() > 0 || o.rep_size->count() > 0) cfg.depths = depths_of(f.depths, f.rep_sizes);
    if (o.op->count() > 0) cfg.op = parse_arith_op(f.op);
    if (o.k->count() > 0) cfg.k = f.k;
    if (o.seed->count() > 0) cfg.seed = f.seed;
    if (o.out->count() > 0) cfg.out = f.out;
    if (o.replicates->count() > 0) cfg.replicates = f.replicates;
    if (o.mc_max_samples->count() > 0) cfg.mc_max_samples = f.mc_max_samples;
    if (o.threads->count() > 0) cfg.threads = f.threads;
    if (o.timing->count() > 0) cfg.timing = f.timing;
    if (o.statistic->count() > 0) cfg.statistic = f.statistic == "mean" ? Statistic::Mean : Statistic::P95;

    if (cfg.methods.empty()) throw ConfigError("no method selected");
    if (cfg.depths.empty()) throw ConfigError("no depth selected");
    return cfg;
}

void write_text(const std::string& path, const std::string& text)
{
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw ConfigError("cannot open '" + path + "' for writing");
    file << text;
    if (!file) throw ConfigError("failed writing '" + path + "'");
}

std::string sidecar_path(const std::string& csv_path)
{
    const std::string ext = ".csv";
    if (csv_path.size() > ext.size() && csv_path.compare(csv_path.size() - ext.size(), ext.size(), ext) == 0) {
        return csv_path.substr(0, csv_path.size() - ext.size()) + ".json";
    }
    return csv_path + ".json";
}

int run(const std::string& command, const Config& cfg)
{
    if (command == "quantize") {
        auto q = cmd_quantize(cfg);
        write_text(cfg.out, q.csv);
        if (!cfg.out.empty()) write_text(sidecar_path(cfg.out), q.sidecar.dump(2) + "\n");
        return kOk;
    }
    std::string csv;
    if (command == "sweep-repsize") csv = cmd_sweep_repsize(cfg);
    else if (command == "sweep-arith") csv = cmd_sweep_arith(cfg);
    else if (command == "mc-compare") csv = cmd_mc_compare(cfg);
    else csv = cmd_bounds(cfg);
    write_text(cfg.out, csv);
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Divide-and-conquer quantization of probability distributions"};
    app.require_subcommand(1);
    const std::vector<std::pair<std::string, std::string>> commands{
        {"quantize", "quantize one distribution; CSV of atoms plus a JSON sidecar"},
        {"sweep-repsize", "W1 error and bounds against representation size"},
        {"sweep-arith", "W1 error of compressed arithmetic against operand count"},
        {"mc-compare", "equivalent Monte Carlo sample counts"},
        {"bounds", "upper and lower error envelopes with the omega sequence"},
    };
    std::vector<Flags> flags(commands.size());
    std::vector<Options> options(commands.size());
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        subs.push_back(app.add_subcommand(commands[i].first, commands[i].second));
        options[i] = add_options(subs.back(), flags[i]);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        for (std::size_t i = 0; i < subs.size(); ++i) {
            if (!subs[i]->parsed()) continue;
            Config cfg = build_config(commands[i].first, flags[i], options[i]);
            return run(commands[i].first, cfg);
        }
    } catch (const ConfigError& e) {
        std::cerr << "dcq: " << e.what() << "\n";
        return kConfigError;
    } catch (const dcq::InvalidArgument& e) {
        std::cerr << "dcq: " << e.what() << "\n";
        return kConfigError;
    } catch (const dcq::Error& e) {
        std::cerr << "dcq: " << error_text(e) << "\n";
        return kNumericFailure;
    } catch (const std::exception& e) {
        std::cerr << "dcq: " << e.what() << "\n";
        return 1;
    }
    return kConfigError;
}
