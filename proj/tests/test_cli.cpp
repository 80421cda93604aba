#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dcq/commands.hpp"

using namespace dcq;
using namespace dcq::cli;

namespace {

using Row = std::map<std::string, std::string>;

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<Row> parse_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    auto header = split_csv_line(line);
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        auto fields = split_csv_line(line);
        EXPECT_EQ(fields.size(), header.size()) << line;
        Row r;
        for (std::size_t i = 0; i < header.size() && i < fields.size(); ++i) r[header[i]] = fields[i];
        rows.push_back(r);
    }
    return rows;
}

Config config(std::vector<std::string> dists, std::vector<Method> methods, std::vector<int> depths)
{
    Config c;
    c.dists = std::move(dists);
    c.methods = std::move(methods);
    c.depths = std::move(depths);
    c.dists_given = true;
    c.methods_given = true;
    return c;
}

int run_cli(const std::string& args)
{
    std::string cmd = std::string(DCQ_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(CliParsing, Depths)
{
    EXPECT_EQ(parse_depths("5"), std::vector<int>{5});
    EXPECT_EQ(parse_depths("2,4,6"), (std::vector<int>{2, 4, 6}));
    EXPECT_EQ(parse_depths("0:3"), (std::vector<int>{0, 1, 2, 3}));
    EXPECT_THROW(parse_depths("31"), ConfigError);
    EXPECT_THROW(parse_depths("4:2"), ConfigError);
    EXPECT_THROW(parse_depths("x"), ConfigError);
    EXPECT_EQ(depth_from_rep_size(256), 8);
    EXPECT_EQ(depth_from_rep_size(1), 0);
    EXPECT_THROW(depth_from_rep_size(100), ConfigError);
}

TEST(CliParsing, Methods)
{
    for (auto m : {Method::Mean, Method::Median, Method::GeoMean, Method::Optimal, Method::Asympt}) {
        EXPECT_EQ(parse_method(to_string(m)), m);
    }
    EXPECT_THROW(parse_method("best"), ConfigError);
}

TEST(CliFormat, RoundTripsDoubles)
{
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23}) EXPECT_EQ(std::stod(fmt(v)), v);
    EXPECT_EQ(fmt(std::nan("")), "nan");
    EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_field("say \"x\""), "\"say \"\"x\"\"\"");
}

TEST(CliQuantize, ExponentialMeanDepthThree)
{
    auto out = cmd_quantize(config({"exp:1"}, {Method::Mean}, {3}));
    auto rows = parse_csv(out.csv);
    ASSERT_EQ(rows.size(), 8u);
    double mean = 0.0;
    for (const auto& r : rows) mean += std::stod(r.at("position")) * std::stod(r.at("weight"));
    EXPECT_NEAR(mean, 1.0, 1e-10);
    EXPECT_NEAR(out.sidecar["mean"].get<double>(), 1.0, 1e-10);
    EXPECT_EQ(out.sidecar["atoms"].get<int>(), 8);
    EXPECT_EQ(out.sidecar["w1_method"].get<std::string>(), "cell_decomposition");
    EXPECT_TRUE(out.sidecar["bounds"].contains("thm48_upper"));
}

TEST(CliQuantize, UniformMedianDepthTwo)
{
    auto rows = parse_csv(cmd_quantize(config({"uniform:0,1"}, {Method::Median}, {2})).csv);
    ASSERT_EQ(rows.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(std::stod(rows[i].at("position")), (2.0 * static_cast<double>(i) + 1.0) / 8.0, 1e-15);
    }
}

TEST(CliQuantize, ParetoSingleAtom)
{
    auto rows = parse_csv(cmd_quantize(config({"pareto:2,1"}, {Method::Mean}, {0})).csv);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_NEAR(std::stod(rows[0].at("position")), 2.0, 1e-14);
}

TEST(CliQuantize, OptimalReportsResidual)
{
    auto out = cmd_quantize(config({"gaussian:0,1"}, {Method::Optimal}, {4}));
    EXPECT_LE(out.sidecar["optimal_residual"].get<double>(), 1e-10);
    EXPECT_TRUE(out.sidecar["bounds"].is_null());
    EXPECT_THROW(cmd_quantize(config({"exp:1", "bimodal"}, {Method::Mean}, {3})), ConfigError);
    EXPECT_THROW(cmd_quantize(config({"nope"}, {Method::Mean}, {3})), ConfigError);
}

TEST(CliSweepRepsize, UniformRowsAreExact)
{
    auto cfg = config({"uniform:0,1"}, {Method::Mean}, parse_depths("0:10"));
    auto rows = parse_csv(cmd_sweep_repsize(cfg));
    ASSERT_EQ(rows.size(), 11u);
    for (const auto& r : rows) {
        int n = std::stoi(r.at("n"));
        EXPECT_NEAR(std::stod(r.at("w1")), std::ldexp(1.0, -(n + 2)), 1e-12);
        EXPECT_EQ(std::stoll(r.at("rep_size")), 1LL << n);
        EXPECT_EQ(r.at("wall_seconds"), "0");
        EXPECT_TRUE(r.at("error").empty());
    }
}

TEST(CliSweepRepsize, DefaultsSkipDivergentMethods)
{
    Config cfg;
    cfg.dists = experiment_catalog();
    cfg.methods = {Method::Mean, Method::Median, Method::Optimal, Method::Asympt};
    cfg.depths = parse_depths("0:8");
    auto text = cmd_sweep_repsize(cfg);
    EXPECT_EQ(text, cmd_sweep_repsize(cfg));
    auto rows = parse_csv(text);
    std::map<std::string, double> w1;
    for (const auto& r : rows) {
        EXPECT_TRUE(r.at("error").empty()) << r.at("distribution") << " " << r.at("method") << ": " << r.at("error");
        if (r.at("distribution") == "heavytailed") {
            EXPECT_TRUE(r.at("method") == "mean" || r.at("method") == "median");
            EXPECT_TRUE(r.at("zador_lower").empty());
        }
        w1[r.at("distribution") + "/" + r.at("method") + "/" + r.at("n")] = std::stod(r.at("w1"));
        int n = std::stoi(r.at("n"));
        if (n >= 6 && !r.at("zador_lower").empty()) {
            EXPECT_GE(std::stod(r.at("w1")), 0.75 * std::stod(r.at("zador_lower"))) << r.at("distribution");
        }
    }
    for (const auto* d : {"gaussian:0,1", "exp:1", "pareto:2,1", "bimodal"}) {
        for (int n = 0; n <= 8; ++n) {
            auto key = [&](const char* m) { return std::string(d) + "/" + m + "/" + std::to_string(n); };
            EXPECT_LE(w1[key("optimal")], w1[key("asympt")] + 1e-10) << key("optimal");
            EXPECT_LE(w1[key("optimal")], w1[key("mean")] + 1e-10) << key("optimal");
        }
    }
}

TEST(CliSweepArith, SingleOperandIsPlainError)
{
    auto cfg = config({"exp:1"}, {Method::Mean, Method::Asympt}, {6});
    cfg.k = 1;
    auto rows = parse_csv(cmd_sweep_arith(cfg));
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].at("reference_kind"), "operand");
    EXPECT_NEAR(std::stod(rows[0].at("w1_vs_reference")), w1_via_cells(Exponential(1.0), SplitRule::Mean, 6), 1e-15);
}

TEST(CliSweepArith, GaussianSumKeepsMean)
{
    auto cfg = config({"gaussian:0,1"}, {Method::Mean}, {6});
    cfg.k = 2;
    auto rows = parse_csv(cmd_sweep_arith(cfg));
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1].at("reference_kind"), "gaussian_closed_form");
    EXPECT_TRUE(std::isfinite(std::stod(rows[1].at("w1_vs_reference"))));
    EXPECT_NEAR(std::stod(rows[1].at("result_mean")), 0.0, 1e-8);
}

TEST(CliSweepArith, RefinementAtFixedK)
{
    auto cfg = config({"exp:1"}, {Method::Mean}, {4, 5, 6, 7});
    cfg.k = 3;
    auto rows = parse_csv(cmd_sweep_arith(cfg));
    double prev = kInf;
    for (const auto& r : rows) {
        if (r.at("k") != "3") continue;
        EXPECT_EQ(r.at("reference_kind"), "erlang_closed_form");
        double w = std::stod(r.at("w1_vs_reference"));
        EXPECT_LT(w, prev);
        prev = w;
    }
    EXPECT_LT(prev, 0.02);
}

TEST(CliSweepArith, OptimalIsReportedAsError)
{
    auto cfg = config({"exp:1"}, {Method::Optimal}, {3});
    cfg.k = 2;
    auto rows = parse_csv(cmd_sweep_arith(cfg));
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_TRUE(rows[0].at("error").empty());
    EXPECT_NE(rows[1].at("error").find("UnsupportedRule"), std::string::npos);
}

TEST(CliMcCompare, GaussianCount)
{
    auto cfg = config({"gaussian:0,1"}, {Method::Mean}, {8});
    cfg.replicates = 4;
    auto rows = parse_csv(cmd_mc_compare(cfg));
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].at("equivalent_mc_count"), "61341");
    double measured = std::stod(rows[0].at("measured_mc_mean_w1"));
    double target = std::stod(rows[0].at("target_w1"));
    EXPECT_NEAR(measured / target, 1.0, 0.25);
}

TEST(CliMcCompare, SkipsLargeCounts)
{
    auto cfg = config({"exp:1"}, {Method::Mean}, {12});
    cfg.replicates = 2;
    cfg.mc_max_samples = 1000;
    auto rows = parse_csv(cmd_mc_compare(cfg));
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_TRUE(rows[0].at("measured_mc_mean_w1").empty());
    EXPECT_NE(rows[0].at("error").find("skipped"), std::string::npos);
}

TEST(CliBounds, OmegaAndErrors)
{
    auto rows = parse_csv(cmd_bounds(config({"exp:1", "gaussian:0,1"}, {Method::Mean, Method::GeoMean}, {3})));
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0].at("omega"), "0;1;2;3;4");
    EXPECT_LE(std::stod(rows[0].at("tail_lower")), std::stod(rows[0].at("w1")));
    EXPECT_LE(std::stod(rows[0].at("w1")), std::stod(rows[0].at("thm48_upper")));
    EXPECT_NE(rows[1].at("error").find("UnsupportedRule"), std::string::npos);
    EXPECT_NE(rows[2].at("error").find("UnboundedBelow"), std::string::npos);
}

TEST(CliBinary, ExitCodes)
{
    EXPECT_EQ(run_cli("quantize --dist exp:1 --n 3"), 0);
    EXPECT_EQ(run_cli("quantize --dist nope --n 3"), 2);
    EXPECT_EQ(run_cli("quantize --dist exp:1 --n 31"), 2);
    EXPECT_EQ(run_cli("quantize --dist exp:1 --bogus"), 2);
    EXPECT_EQ(run_cli("quantize --dist heavytailed --method asympt --n 3"), 3);
}

TEST(CliBinary, WritesCsvAndSidecar)
{
    auto dir = std::filesystem::temp_directory_path() / "dcq_cli_test";
    std::filesystem::create_directories(dir);
    auto csv = dir / "q.csv";
    auto toml = dir / "cfg.toml";
    {
        std::ofstream t(toml);
        t << "dist = \"uniform:0,1\"\nmethod = \"mean\"\nn = 2\n";
    }
    ASSERT_EQ(run_cli("quantize --config " + toml.string() + " --out " + csv.string()), 0);
    std::ifstream in(csv);
    std::stringstream text;
    text << in.rdbuf();
    EXPECT_EQ(parse_csv(text.str()).size(), 4u);
    EXPECT_TRUE(std::filesystem::exists(dir / "q.json"));
    {
        std::ofstream t(toml);
        t << "dist = \"uniform:0,1\"\ncolour = \"red\"\n";
    }
    EXPECT_EQ(run_cli("quantize --config " + toml.string()), 2);
    std::filesystem::remove_all(dir);
}
