#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = epsopt::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

bool has_line(const std::string& text, const std::string& line) {
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);)
        if (l == line) return true;
    return false;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("epsopt_cli_" + name)).string();
}

std::string write_temp(const std::string& name, const std::string& text) {
    const auto path = temp_path(name);
    std::ofstream(path) << text;
    return path;
}

}  // namespace

TEST(CliBound, BalancedDesign) {
    const auto r = run({"bound", "--n", "100"});
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(has_line(r.out, "prop1: 0.0428882")) << r.out;
    EXPECT_TRUE(has_line(r.out, "prop2_balanced: 0.0832555"));
    EXPECT_EQ(r.out.find("partial_validity"), std::string::npos);
    const auto k = run({"bound", "--n", "100", "--kappa", "0.05"});
    EXPECT_NE(k.out.find("partial_validity_prop1:"), std::string::npos);
    EXPECT_NE(k.out.find("partial_validity_prop2:"), std::string::npos);
}

TEST(CliBound, MultiGroupDocument) {
    const auto path = write_temp("multi.yaml",
                                 "groups:\n  - {probability: 0.5, sizes: [5, 5]}\n"
                                 "  - {probability: 0.5, sizes: [7, 9]}\n");
    const auto r = run({"bound", "--design", path});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("covariate_prop1:"), std::string::npos);
    EXPECT_NE(r.out.find("covariate_prop2:"), std::string::npos);
    EXPECT_EQ(r.out.find("\nprop1:"), std::string::npos);
    EXPECT_NE(r.out.rfind("prop1:", 0), 0u);
}

TEST(CliBound, OverridesAndRoundTrip) {
    const auto path = write_temp("one.yaml", "groups:\n  - sizes: [100, 100]\nkappa: 0.1\n");
    const auto out = temp_path("canonical.yaml");
    const auto r = run({"bound", "--design", path, "--range", "0", "2", "--kappa", "0.05", "--out", out});
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(has_line(r.err, "warning: --range overrides document field 'outcome'"));
    EXPECT_TRUE(has_line(r.err, "warning: --kappa overrides document field 'kappa'"));
    EXPECT_TRUE(has_line(r.out, "prop1: 0.0857764"));
    const auto again = run({"bound", "--design", out});
    EXPECT_EQ(again.out, r.out);
    EXPECT_TRUE(again.err.empty());
}

TEST(CliBound, MalformedDocument) {
    const auto path = write_temp("bad.yaml", "groups:\n  - sizes: [10, x]\n");
    const auto r = run({"bound", "--design", path});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("line 2, column 17"), std::string::npos) << r.err;
}

TEST(CliSize, Examples) {
    EXPECT_TRUE(has_line(run({"size", "--epsilon", "0.15", "--treatments", "7", "--bound", "prop2"}).out,
                         "sufficient n per arm: 81"));
    EXPECT_TRUE(has_line(run({"size", "--epsilon", "0.01", "--bound", "prop1"}).out,
                         "sufficient n per arm: 1840"));
    const auto best = run({"size", "--epsilon", "0.05"});
    EXPECT_TRUE(has_line(best.out, "prop1: 74"));
    EXPECT_TRUE(has_line(best.out, "sufficient n per arm: 74"));
    const auto inf = run({"size", "--epsilon", "0.1", "--kappa", "0.2"});
    EXPECT_EQ(inf.code, 3);
    EXPECT_NE(inf.err.find("kappa * (high - low)"), std::string::npos);
    const auto pv = run({"size", "--epsilon", "0.1", "--kappa", "0.05", "--bound", "prop1"});
    EXPECT_EQ(pv.code, 0);
    EXPECT_TRUE(has_line(pv.out, "adjusted epsilon: 0.0526316"));
    EXPECT_EQ(run({"size"}).code, 2);
    EXPECT_EQ(run({"size", "--epsilon", "-1"}).code, 2);
}

TEST(CliExact, Examples) {
    EXPECT_TRUE(has_line(run({"exact", "--rule", "es", "--epsilon", "0.05"}).out, "minimum n per arm: 6"));
    EXPECT_TRUE(has_line(run({"exact", "--rule", "ztest", "--alpha", "0.05", "--n", "309"}).out,
                         "max regret: 0.0337781"));
    const auto es1 = run({"exact", "--rule", "es", "--n", "1"});
    EXPECT_TRUE(has_line(es1.out, "max regret: 0.125"));
    EXPECT_NE(es1.out.find("argmax state: mu_a="), std::string::npos);
    const auto power = run({"exact", "--rule", "ztest", "--delta", "0.15", "--beta", "0.1"});
    EXPECT_NE(power.out.find("): 189"), std::string::npos) << power.out;
    const auto miss = run({"exact", "--epsilon", "0.001", "--n-max", "20"});
    EXPECT_EQ(miss.code, 4);
    EXPECT_NE(miss.err.find("best regret found"), std::string::npos);
    EXPECT_EQ(run({"exact", "--n", "3", "--epsilon", "0.1"}).code, 2);
    EXPECT_EQ(run({"exact", "--n", "3", "--range", "0", "5"}).code, 2);
}

TEST(CliTables, CsvOutput) {
    const auto t1 = run({"tables", "1"});
    EXPECT_EQ(t1.code, 0);
    EXPECT_EQ(t1.out.rfind("bound,T2,T3,T4,T5,T6,T7\nprop1,0.42888", 0), 0u) << t1.out;
    EXPECT_EQ(t1.out.find('\r'), std::string::npos);
    EXPECT_EQ(std::count(t1.out.begin(), t1.out.end(), '\n'), 4);

    const auto path = temp_path("t3.csv");
    std::remove(path.c_str());
    EXPECT_EQ(run({"tables", "1", "--out", path}).code, 0);
    std::ifstream in(path);
    std::stringstream s;
    s << in.rdbuf();
    EXPECT_EQ(s.str(), t1.out);

    EXPECT_EQ(run({"tables", "1", "--out", "/nonexistent-dir/t.csv"}).code, 2);
    EXPECT_EQ(run({"tables", "4"}).code, 2);
}

TEST(CliAllocate, Examples) {
    const auto r = run({"allocate", "--probs", "0.8,0.2", "--budget", "200"});
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(has_line(r.out, "integer allocation per treatment: 72, 28"));
    EXPECT_NE(r.out.find("ratio check"), std::string::npos);
    EXPECT_TRUE(has_line(run({"allocate", "--probs", "0.5,0.5", "--budget", "20"}).out,
                         "integer allocation per treatment: 5, 5"));
    EXPECT_EQ(run({"allocate", "--probs", "0.5,0.5", "--budget", "3"}).code, 3);
    EXPECT_EQ(run({"allocate", "--probs", "0.5,0.4", "--budget", "30"}).code, 2);
    EXPECT_EQ(run({"allocate", "--probs", "0.5,x", "--budget", "30"}).code, 2);
}

TEST(CliSimulate, Reports) {
    const auto point = run({"simulate", "--n", "4", "--means", "0.3,0.3", "--dist", "point", "--reps", "100"});
    EXPECT_EQ(point.code, 0);
    EXPECT_TRUE(has_line(point.out, "regret estimate: 0 +/- 0"));
    EXPECT_NE(point.out.find("verdict: ok"), std::string::npos);

    const std::vector<std::string> args{"simulate", "--n",    "1",   "--means", "0.2,0.6",
                                        "--reps",   "200000", "--seed", "11"};
    const auto a = run(args), b = run(args);
    EXPECT_EQ(a.out, b.out);
    auto threaded = args;
    threaded.insert(threaded.end(), {"--threads", "3"});
    EXPECT_EQ(run(threaded).out, a.out);
    EXPECT_NE(a.out.find("regret estimate: 0.1"), std::string::npos) << a.out;

    const auto doc = write_temp("sim.yaml",
                                "outcome: {low: 0, high: 10}\ngroups:\n"
                                "  - {probability: 0.4, sizes: [3, 3], means: [2, 7]}\n"
                                "  - {probability: 0.6, sizes: [5, 4], means: [5, 5]}\n");
    const auto beta = run({"simulate", "--design", doc, "--dist", "beta", "--reps", "5000"});
    EXPECT_EQ(beta.code, 0) << beta.err;
    EXPECT_NE(beta.out.find("verdict: ok"), std::string::npos);
    EXPECT_EQ(run({"simulate", "--n", "3"}).code, 2);
    EXPECT_EQ(run({"simulate", "--n", "3", "--means", "0.2"}).code, 2);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"--help"}).code, 0);
    EXPECT_EQ(run({"bound", "--n", "5", "--bogus"}).code, 2);
}
