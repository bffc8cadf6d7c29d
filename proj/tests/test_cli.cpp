#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "cli_app.hpp"
#include "expresslane/io.hpp"

using namespace expresslane;

namespace {

const std::string kData = EXPRESSLANE_TEST_DATA;

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    std::ostringstream out;
    std::ostringstream err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s)
{
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);)
        out.push_back(l);
    return out;
}

std::size_t data_rows(const std::string& csv)
{
    std::size_t n = 0;
    for (const auto& l : lines(csv))
        n += !l.empty() && l[0] != '#';
    return n - 1;
}

std::string digest_line(const std::string& csv)
{
    return lines(csv).at(1);
}

}  // namespace

TEST(Cli, ValidateAcceptsDag)
{
    auto r = run({"validate", "--network", kData + "/triangle_network.json", "--scenario",
                  kData + "/triangle_scenario.json"});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    auto j = nlohmann::json::parse(r.out);
    EXPECT_TRUE(j["valid"].get<bool>());
    EXPECT_EQ(j["topological_order"], (nlohmann::json{"o", "a", "d"}));
    EXPECT_EQ(j["provenance"]["version"], std::string(version()));
}

TEST(Cli, ValidateRejectsCycleWithCode2)
{
    auto path = (std::filesystem::temp_directory_path() / "expresslane_cli_violations.json").string();
    auto r = run({"validate", "--network", kData + "/cyclic_network.json", "--out", path});
    EXPECT_EQ(r.code, cli::kValidationFailure);
    EXPECT_NE(r.err.find("CycleDetected"), std::string::npos);
    auto j = nlohmann::json::parse(read_file(path));
    EXPECT_FALSE(j["valid"].get<bool>());
    EXPECT_EQ(j["violations"][0]["code"], "CycleDetected");
    std::filesystem::remove(path);
}

TEST(Cli, IoErrorsExit1)
{
    EXPECT_EQ(run({"validate", "--network", kData + "/missing.json"}).code, cli::kIoError);
    EXPECT_EQ(run({"solve", "--network", kData + "/single_edge_network.json"}).code, cli::kIoError);
    EXPECT_EQ(run({"curves", "--bogus"}).code, cli::kIoError);
    EXPECT_EQ(run({}).code, cli::kIoError);
}

TEST(Cli, SolveCase1)
{
    auto r = run({"solve", "--network", kData + "/single_edge_network.json", "--scenario", kData + "/case1_cbcp.json",
                  "--gap-tol", "1e-10"});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    auto j = nlohmann::json::parse(r.out)["result"];
    EXPECT_TRUE(j["converged"].get<bool>());
    EXPECT_NEAR(j["flows"][0][0][0][0].get<double>(), 0.3, 1e-6);
    EXPECT_NEAR(j["flows"][0][0][0][1].get<double>(), 0.0, 1e-6);
    EXPECT_NEAR(j["budget_spent"][0].get<double>(), 0.06, 1e-7);
}

TEST(Cli, SolveNotConvergedExit3)
{
    auto r = run({"solve", "--network", kData + "/triangle_network.json", "--scenario",
                  kData + "/triangle_scenario.json", "--max-iters", "1", "--gap-tol", "1e-15"});
    EXPECT_EQ(r.code, cli::kNotConverged);
    EXPECT_NE(r.err.find("NotConverged"), std::string::npos);
    EXPECT_FALSE(nlohmann::json::parse(r.out)["result"]["converged"].get<bool>());
}

TEST(Cli, SolveRejectsMismatchedPolicy)
{
    auto r = run({"solve", "--network", kData + "/triangle_network.json", "--scenario", kData + "/case1_cbcp.json"});
    EXPECT_EQ(r.code, cli::kValidationFailure) << r.err;
}

TEST(Cli, CurvesCsv)
{
    auto r = run({"curves", "--b", "0.25", "--p", "2", "--tau", "0.2"});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    auto ls = lines(r.out);
    EXPECT_EQ(ls[0], "# expresslane " + std::string(version()));
    EXPECT_EQ(ls[1].rfind("# config-digest ", 0), 0u);
    double a1 = 0.0;
    double a2 = 0.0;
    std::string tag;
    std::istringstream(ls[2]) >> tag >> tag >> tag >> tag >> a1 >> a2;
    EXPECT_EQ(ls[2].rfind("# regime SingleGroup thresholds ", 0), 0u);
    EXPECT_NEAR(a1, 0.1, 1e-12);
    EXPECT_NEAR(a2, 1.0 / 6.0, 1e-12);
    EXPECT_EQ(ls[3], "alpha,yC,yD,yC_credit,yC_pocket");
    EXPECT_EQ(data_rows(r.out), 101u);
    EXPECT_EQ(ls[4].substr(0, 2), "0,");

    auto mixed = run({"curves", "--b", "0.0625", "--p", "4", "--tau", "0.7", "--vi", "1.25", "--alpha-step", "0.05"});
    ASSERT_EQ(mixed.code, cli::kOk) << mixed.err;
    EXPECT_NE(mixed.out.find("# regime HighTollHighRatio thresholds 0.19999999999999996 0.367"), std::string::npos);
    EXPECT_EQ(data_rows(mixed.out), 21u);
}

TEST(Cli, CurvesAssumptionViolationExit2)
{
    auto r = run({"curves", "--b", "0.0625", "--p", "4", "--tau", "0.6"});
    EXPECT_EQ(r.code, cli::kValidationFailure);
    EXPECT_NE(r.err.find("AssumptionViolated"), std::string::npos);
}

TEST(Cli, DigestTracksContentNotJobs)
{
    std::vector<std::string> grid{"grid",      "--network", kData + "/corridor_network.json",
                                  "--scenario", kData + "/corridor_scenario.json",
                                  "--tolls",   "5,10",      "--budgets", "20"};
    auto a = run(grid);
    grid.insert(grid.end(), {"--jobs", "3"});
    auto b = run(grid);
    ASSERT_EQ(a.code, cli::kOk) << a.err;
    EXPECT_EQ(a.out, b.out);
    auto c = run({"curves", "--b", "0.25", "--p", "2", "--tau", "0.2"});
    auto d = run({"curves", "--b", "0.25", "--p", "2", "--tau", "0.15"});
    EXPECT_NE(digest_line(c.out), digest_line(d.out));
    EXPECT_EQ(digest_line(c.out), digest_line(run({"curves", "--b", "0.25", "--p", "2", "--tau", "0.2"}).out));
}

TEST(Cli, GridCsv)
{
    auto r = run({"grid", "--network", kData + "/corridor_network.json", "--scenario",
                  kData + "/corridor_scenario.json", "--tolls", "0:20:10", "--budgets", "0,45,90", "--jobs", "2"});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_NE(r.out.find("tau,budget,f_lambda,pct_express_all,pct_express_eligible,pct_express_ineligible,"
                         "tt_express,tt_general,converged"),
              std::string::npos);
    EXPECT_NE(r.out.find("# kind cbcp weights 1 1 1"), std::string::npos);
    EXPECT_NE(r.out.find("# best tau "), std::string::npos);
    EXPECT_EQ(data_rows(r.out), 9u);

    auto bad = run({"grid", "--network", kData + "/corridor_network.json", "--scenario",
                    kData + "/corridor_scenario.json", "--weights", "1,1"});
    EXPECT_EQ(bad.code, cli::kIoError);
}

TEST(Cli, Sensitivity)
{
    auto v = run({"sensitivity-vot", "--vi-bar", "1.5,2", "--alpha-step", "0.5", "--seed", "2"});
    ASSERT_EQ(v.code, cli::kOk) << v.err;
    EXPECT_NE(v.out.find("alpha,yC,yD,vI_bar"), std::string::npos);
    EXPECT_EQ(data_rows(v.out), 6u);

    auto d = run({"sensitivity-demand", "--tau", "0.2", "--di", "0,1", "--alpha-step", "0.5"});
    ASSERT_EQ(d.code, cli::kOk) << d.err;
    EXPECT_NE(d.out.find("alpha,yC,yD,dI"), std::string::npos);
    EXPECT_EQ(data_rows(d.out), 6u);
}

TEST(Cli, OutFlagWritesFile)
{
    auto path = (std::filesystem::temp_directory_path() / "expresslane_cli_curves.csv").string();
    auto r = run({"curves", "--b", "0.25", "--p", "2", "--tau", "0.2", "--out", path});
    ASSERT_EQ(r.code, cli::kOk);
    EXPECT_TRUE(r.out.empty());
    EXPECT_EQ(data_rows(read_file(path)), 101u);
    std::filesystem::remove(path);
}
