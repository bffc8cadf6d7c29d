#include <cstdio>
#include <filesystem>

#include <gtest/gtest.h>

#include "expresslane/errors.hpp"
#include "expresslane/io.hpp"

using namespace expresslane;
using nlohmann::json;

namespace {

const char* kNetwork = R"({
  "nodes": ["o", "a", "d"],
  "edges": [
    {"id": "oa", "tail": "o", "head": "a",
     "express": {"form": "monomial", "b": 0.5, "p": 2},
     "general": {"form": "bpr", "a": 0.1, "b": 0.15, "c": 1.0, "p": 4}},
    {"tail": "a", "head": "d",
     "express": {"form": "polynomial", "coefficients": [0.1, 0.0, 0.3]},
     "general": {"form": "monomial", "a": 0.2, "b": 1, "p": 3}},
    {"tail": "o", "head": "d",
     "express": {"form": "monomial", "b": 1, "p": 2},
     "general": {"form": "monomial", "b": 1, "p": 2}}
  ],
  "origin": "o",
  "destination": ["d"]
})";

const char* kScenario = R"({
  "horizon": 2,
  "groups": [
    {"id": "E", "eligible": true, "vot": 1.0},
    {"eligible": false, "demand": 0.5, "vot": [1.5, 1.7]}
  ],
  "policy": {"kind": "cbcp", "tolls": [[0.2, 0.3], [0.0, 0.1], [0.4, 0.4]], "budget": 0.25}
})";

std::string parse_error(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ParseError);
        return e.what();
    }
    ADD_FAILURE() << "no exception";
    return {};
}

}  // namespace

TEST(Io, ParseNetwork)
{
    Network n = parse_network(json::parse(kNetwork));
    ASSERT_EQ(n.edges.size(), 3u);
    EXPECT_EQ(n.edges[0].id, "oa");
    EXPECT_EQ(n.edges[1].id, "e1");
    EXPECT_EQ(n.edges[0].general.form(), LatencyForm::Bpr);
    EXPECT_DOUBLE_EQ(n.edges[1].express.eval(2.0), 1.3);
    EXPECT_DOUBLE_EQ(n.edges[1].general.eval(1.0), 1.2);
    EXPECT_EQ(n.origins, std::vector<std::string>{"o"});
    EXPECT_NO_THROW(validate(n));
}

TEST(Io, ParseScenarioBroadcastsVot)
{
    Scenario s = parse_scenario(json::parse(kScenario));
    EXPECT_EQ(s.horizon, 2u);
    ASSERT_EQ(s.groups.size(), 2u);
    EXPECT_EQ(s.groups[0].vot, (std::vector<double>{1.0, 1.0}));
    EXPECT_EQ(s.groups[1].id, "g1");
    EXPECT_EQ(s.groups[1].demand, 0.5);
    EXPECT_EQ(std::get<CbcpPolicy>(s.policy).budget, 0.25);
}

TEST(Io, RoundTrip)
{
    Network n = parse_network(json::parse(kNetwork));
    Network n2 = parse_network(network_to_json(n));
    ASSERT_EQ(n2.edges.size(), n.edges.size());
    for (std::size_t e = 0; e < n.edges.size(); ++e) {
        EXPECT_EQ(n2.edges[e].express, n.edges[e].express);
        EXPECT_EQ(n2.edges[e].general, n.edges[e].general);
        EXPECT_EQ(n2.edges[e].id, n.edges[e].id);
    }
    Scenario s = parse_scenario(json::parse(kScenario));
    EXPECT_EQ(scenario_to_json(parse_scenario(scenario_to_json(s))), scenario_to_json(s));
}

TEST(Io, ErrorsNameFieldPaths)
{
    json bad = json::parse(kNetwork);
    bad["edges"][1]["express"]["form"] = "cubic";
    EXPECT_NE(parse_error([&] { parse_network(bad, "net.json"); }).find("net.json: edges[1].express.form"),
              std::string::npos);
    bad = json::parse(kNetwork);
    bad["edges"][2].erase("head");
    EXPECT_NE(parse_error([&] { parse_network(bad, "n"); }).find("edges[2].head: missing"), std::string::npos);
    json sc = json::parse(kScenario);
    sc["groups"][1]["vot"][1] = "fast";
    EXPECT_NE(parse_error([&] { parse_scenario(sc, "s"); }).find("groups[1].vot[1]"), std::string::npos);
    parse_error([] { parse_json("{not json", "x"); });
    parse_error([] { read_file("/nonexistent/file.json"); });
}

TEST(Io, LibraryErrorsKeepTheirCode)
{
    json sc = json::parse(kScenario);
    sc["policy"]["budget"] = -1.0;
    try {
        parse_scenario(sc, "s");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidPolicy);
        EXPECT_NE(std::string(e.what()).find("s: policy"), std::string::npos);
    }
    json net = json::parse(kNetwork);
    net["edges"][0]["express"]["p"] = 1;
    try {
        parse_network(net, "n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidLatency);
    }
}

TEST(Io, ResultJsonLayout)
{
    Network n = parse_network(json::parse(kNetwork));
    auto net = validate(n, 1.5);
    Scenario s = parse_scenario(json::parse(kScenario));
    auto r = solve(net, s);
    json j = result_to_json(r, s.groups);
    EXPECT_EQ(j["kind"], "cbcp");
    EXPECT_EQ(j["groups"], (json{"E", "g1"}));
    ASSERT_EQ(j["flows"].size(), 2u);
    ASSERT_EQ(j["flows"][0].size(), 2u);
    ASSERT_EQ(j["flows"][0][0].size(), 3u);
    ASSERT_EQ(j["flows"][0][0][0].size(), 3u);
    EXPECT_EQ(j["flows"][1][1][2][2].get<double>(), r.flows.at(1, 1, 2, FlowSlot::General));
    EXPECT_EQ(j["aggregate"][1][0][0].get<double>(), r.aggregate.at(1, 0, Lane::Express));
    EXPECT_EQ(j["converged"], r.converged);
}

TEST(Io, FormatAndDigest)
{
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(90.0), "90");
    EXPECT_EQ(format_double(1e-20), "1e-20");
    EXPECT_EQ(hex64(fnv1a64("")), "cbf29ce484222325");
    EXPECT_EQ(hex64(fnv1a64("a")), "af63dc4c8601ec8c");
}

TEST(Io, CsvTable)
{
    CsvTable t({"alpha", "yC"}, "00000000000000ff");
    t.add_comment("regime LowToll");
    t.add_row({"0", "0.1"});
    EXPECT_THROW(t.add_row({"1"}), Error);
    std::string s = t.str();
    EXPECT_EQ(s, "# expresslane " + std::string(version()) +
                     "\n# config-digest 00000000000000ff\n# regime LowToll\nalpha,yC\n0,0.1\n");
}

TEST(Io, FileRoundTrip)
{
    auto path = std::filesystem::temp_directory_path() / "expresslane_io_test.json";
    write_file(path.string(), kNetwork);
    Network n = load_network(path.string());
    EXPECT_EQ(n.edges.size(), 3u);
    std::filesystem::remove(path);
}
