#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "expresslane/analysis.hpp"
#include "expresslane/errors.hpp"
#include "expresslane/single_edge.hpp"

using namespace expresslane;

namespace {

const LatencyFn kQuad = LatencyFn::monomial(0.25, 2.0);

template <class F>
ErrorCode code_of(F f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no exception";
    return ErrorCode::InvalidArgument;
}

SolverOptions tight()
{
    SolverOptions o;
    o.gap_tol = 1e-10;
    return o;
}

}  // namespace

TEST(CostBreakdown, HandComputedDbcp)
{
    auto net = validate(make_single_edge_network(kQuad, kQuad), 2.0);
    std::vector<UserGroup> g{{"E", true, 1.0, {1.0}}, {"I", false, 1.0, {1.25}}};
    Policy p = DbcpPolicy{{{0.4}}, {{0.5}}};
    auto r = require_converged(solve(net, Scenario{g, p, 1}, tight()));
    // Eligible: 0.8 express at toll 0.2, 0.2 general; ineligible all general.
    double le = kQuad.eval(0.8);
    double lg = kQuad.eval(1.2);
    auto c = cost_breakdown(r, net, g, p);
    EXPECT_NEAR(c.eligible, 0.8 * (le + 0.2) + 0.2 * lg, 1e-6);
    EXPECT_NEAR(c.ineligible, 1.25 * lg, 1e-6);
    EXPECT_NEAR(c.revenue, 0.8 * 0.2, 1e-6);
    EXPECT_NEAR(societal_cost(r, net, g, p, {1.0, 2.0, 0.5}), c.eligible + 2.0 * c.ineligible - 0.5 * c.revenue,
                1e-12);
}

TEST(CostBreakdown, CreditIsNotRevenue)
{
    auto net = validate(make_single_edge_network(kQuad, kQuad));
    std::vector<UserGroup> g{{"E", true, 1.0, {1.0}}};
    Policy p = CbcpPolicy{{{0.2}}, 0.06};
    auto r = require_converged(solve(net, Scenario{g, p, 1}, tight()));
    auto c = cost_breakdown(r, net, g, p);
    EXPECT_NEAR(c.revenue, 0.0, 1e-9);
    EXPECT_NEAR(c.eligible, 0.3 * kQuad.eval(0.3) + 0.7 * kQuad.eval(0.7), 1e-6);
    EXPECT_NEAR(societal_cost(r, net, g, p, {1.0, 0.0, 0.0}), 0.0925, 1e-6);
    EXPECT_NEAR(societal_cost(r, net, g, p, {0.0, 0.0, 1.0}), 0.0, 1e-9);
    EXPECT_NEAR(societal_cost(r, net, g, p, {2.0, 2.0, 2.0}), 2.0 * societal_cost(r, net, g, p, {}), 1e-12);
}

TEST(SocietalCost, RequiresConvergenceAndValidWeights)
{
    auto net = validate(make_single_edge_network(kQuad, kQuad));
    std::vector<UserGroup> g{{"E", true, 1.0, {1.0}}};
    Policy p = CbcpPolicy{{{0.2}}, 0.06};
    auto r = solve(net, Scenario{g, p, 1});
    EXPECT_EQ(code_of([&] { societal_cost(r, net, g, p, {-1.0, 1.0, 1.0}); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([&] { societal_cost(r, net, g, p, {0.0, 0.0, 0.0}); }), ErrorCode::InvalidArgument);
    r.converged = false;
    EXPECT_EQ(code_of([&] { societal_cost(r, net, g, p, {}); }), ErrorCode::NotConverged);
}

TEST(Grid, LinearGridAndPolicy)
{
    EXPECT_EQ(linear_grid(0, 20, 1).size(), 21u);
    auto b = linear_grid(0, 90, 5);
    ASSERT_EQ(b.size(), 19u);
    EXPECT_EQ(b.back(), 90.0);
    auto a = linear_grid(0, 1, 0.05);
    ASSERT_EQ(a.size(), 21u);
    EXPECT_EQ(a[3], 0.15);
    EXPECT_EQ(a.back(), 1.0);
    EXPECT_EQ(code_of([] { linear_grid(1, 0, 1); }), ErrorCode::InvalidArgument);

    auto d = std::get<DbcpPolicy>(grid_policy(PolicyKind::Dbcp, 2, 5, 10.0, 30.0));
    EXPECT_DOUBLE_EQ(d.discounts[1][4], 0.6);
    EXPECT_DOUBLE_EQ(std::get<DbcpPolicy>(grid_policy(PolicyKind::Dbcp, 1, 5, 10.0, 90.0)).discounts[0][0], 1.0);
    EXPECT_EQ(std::get<DbcpPolicy>(grid_policy(PolicyKind::Dbcp, 1, 5, 0.0, 30.0)).discounts[0][0], 0.0);
    auto c = std::get<CbcpPolicy>(grid_policy(PolicyKind::Cbcp, 1, 5, 10.0, 30.0));
    EXPECT_EQ(c.budget, 30.0);
    EXPECT_EQ(c.tolls[0][3], 10.0);
}

TEST(Grid, ParallelForCoversAndRethrows)
{
    std::vector<std::atomic<int>> hits(257);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i].fetch_add(1); });
    for (auto& h : hits)
        EXPECT_EQ(h.load(), 1);
    EXPECT_THROW(parallel_for(100, 3,
                              [](std::size_t i) {
                                  if (i == 17)
                                      throw std::runtime_error("boom");
                              }),
                 std::runtime_error);
}

TEST(Grid, SmallSearchIsConsistent)
{
    auto l = LatencyFn::monomial(0.5, 2.0, 0.2);
    auto net = validate(make_single_edge_network(l, l), 2.0);
    std::vector<UserGroup> g{{"E", true, 1.0, {1.0, 1.0}}, {"I", false, 1.0, {1.5, 1.5}}};
    std::vector<double> tolls{0.0, 0.2, 0.4};
    std::vector<double> budgets{0.0, 0.2, 0.4};
    SocietalWeights w{1.0, 1.0, 0.5};
    for (auto kind : {PolicyKind::Cbcp, PolicyKind::Dbcp}) {
        auto rep = pareto_grid_search(net, g, tolls, budgets, w, kind, tight(), 3);
        ASSERT_EQ(rep.rows.size(), 9u);
        EXPECT_EQ(rep.rows[5].budget, 0.2);
        EXPECT_EQ(rep.rows[5].toll, 0.4);
        ASSERT_TRUE(rep.best.has_value());
        for (const auto& row : rep.rows) {
            EXPECT_TRUE(row.converged);
            EXPECT_NEAR(row.f_lambda, societal_cost(row.result, net, g, row.policy, w), 1e-12);
            EXPECT_GE(row.f_lambda, rep.rows[*rep.best].f_lambda);
            EXPECT_GE(row.pct_express_all, 0.0);
            EXPECT_LE(row.pct_express_all, 100.0);
        }
        for (double k : {0.1, 3.0, 1000.0})
            EXPECT_EQ(best_row(rep, w.scaled(k)), rep.best);
    }
}

TEST(Sensitivity, DrawVots)
{
    auto a = draw_vots(1.5, 0.1, 5, 7);
    EXPECT_EQ(a, draw_vots(1.5, 0.1, 5, 7));
    EXPECT_NE(a, draw_vots(1.5, 0.1, 5, 8));
    for (double v : a) {
        EXPECT_GE(v, 1.4);
        EXPECT_LE(v, 1.6);
    }
    for (double v : draw_vots(1.5, 0.0, 5, 7))
        EXPECT_EQ(v, 1.5);
}

TEST(Sensitivity, CreditCurveIsAlpha)
{
    VotSweep s;
    s.alphas = {0.0, 0.3, 0.7, 1.0};
    s.delta = 0.2;
    s.seed = 3;
    s.jobs = 2;
    for (const auto& p : sensitivity_vot(s)) {
        EXPECT_TRUE(p.converged);
        EXPECT_NEAR(p.yC, p.alpha, 1e-6);
    }
    s.vi_bar = 1.05;
    EXPECT_EQ(code_of([&] { sensitivity_vot(s); }), ErrorCode::AssumptionViolated);
}

TEST(Sensitivity, DemandEndpointsMatchOracles)
{
    DemandSweep s;
    s.toll = 0.2;
    s.demands = {0.0, 1.0};
    s.alphas = {0.1, 0.5, 0.9};
    s.jobs = 2;
    auto curves = sensitivity_demand(s);
    ASSERT_EQ(curves.size(), 2u);
    for (const auto& p : curves[0].points) {
        EXPECT_NEAR(p.yC, yC_case1(p.alpha, kQuad, 0.2, 1.0).total, 1e-4);
        EXPECT_NEAR(p.yD, yD_case1(p.alpha, kQuad, 0.2, 1.0), 1e-4);
    }
    for (const auto& p : curves[1].points) {
        EXPECT_NEAR(p.yC, yC_case2(p.alpha), 1e-4);
        EXPECT_NEAR(p.yD, yD_case2(p.alpha, kQuad, 0.2, 1.0, 1.25), 1e-4);
    }
}

TEST(Sensitivity, StaticSweepReproducesClosedForms)
{
    VotSweep s;
    s.vi_bar = 1.25;
    s.horizon = 1;
    s.alphas = linear_grid(0.0, 1.0, 0.1);
    auto pts = sensitivity_vot(s);
    for (const auto& p : pts) {
        EXPECT_NEAR(p.yC, yC_case2(p.alpha), 1e-6);
        // At alpha = 1 - vE/vI the eligible split is not unique.
        if (std::abs(p.alpha - 0.2) > 1e-9) {
            EXPECT_NEAR(p.yD, yD_case2(p.alpha, kQuad, 0.4, 1.0, 1.25), 1e-6);
        }
    }
    s.horizon = 5;
    s.delta = 0.1;
    s.seed = 4;
    auto a = sensitivity_vot(s);
    auto b = sensitivity_vot(s);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].yC, b[i].yC);
        EXPECT_EQ(a[i].yD, b[i].yD);
    }
}

TEST(Sensitivity, NoSubsidyColumnAgrees)
{
    DemandSweep s;
    s.demands = {0.0, 0.5, 1.5};
    s.alphas = {0.0};
    for (const auto& c : sensitivity_demand(s))
        EXPECT_NEAR(c.points[0].yC, c.points[0].yD, 1e-6) << c.demand_ineligible;
}
