#include "expresslane/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "expresslane/errors.hpp"
#include "expresslane/rng.hpp"

namespace expresslane {

void check_weights(const SocietalWeights& w)
{
    for (double v : {w.eligible, w.ineligible, w.revenue})
        if (!std::isfinite(v) || v < 0.0)
            throw Error(ErrorCode::InvalidArgument, "Pareto weights must be finite and >= 0");
    if (w.eligible == 0.0 && w.ineligible == 0.0 && w.revenue == 0.0)
        throw Error(ErrorCode::InvalidArgument, "Pareto weights must not all be zero");
}

CostBreakdown cost_breakdown(const EquilibriumResult& result, const ValidatedNetwork& net,
                             const std::vector<UserGroup>& groups, const Policy& policy)
{
    const FlowPattern& y = result.flows;
    const AggregateFlows& x = result.aggregate;
    const EdgeTimeTable& tolls = tolls_of(policy);
    const auto* dbcp = std::get_if<DbcpPolicy>(&policy);
    CostBreakdown out;
    for (std::size_t g = 0; g < y.groups(); ++g) {
        const UserGroup& grp = groups.at(g);
        double cost = 0.0;
        for (std::size_t t = 0; t < y.horizon(); ++t)
            for (std::size_t e = 0; e < y.edges(); ++e) {
                double le = net.edge(e).express.eval(x.at(t, e, Lane::Express));
                double lg = net.edge(e).general.eval(x.at(t, e, Lane::General));
                double v = grp.vot_at(t);
                cost += v * (le * y.lane(g, t, e, Lane::Express) + lg * y.lane(g, t, e, Lane::General));
                double rate = tolls[e][t];
                if (dbcp && grp.eligible)
                    rate *= 1.0 - dbcp->discounts[e][t];
                double paid = rate * y.at(g, t, e, FlowSlot::ExpressPaid);
                cost += paid;
                out.revenue += paid;
            }
        (grp.eligible ? out.eligible : out.ineligible) += cost;
    }
    return out;
}

double societal_cost(const EquilibriumResult& result, const ValidatedNetwork& net, const std::vector<UserGroup>& groups,
                     const Policy& policy, const SocietalWeights& weights)
{
    check_weights(weights);
    require_converged(result);
    return cost_breakdown(result, net, groups, policy).weighted(weights);
}

Policy grid_policy(PolicyKind kind, std::size_t edges, std::size_t horizon, double toll, double budget)
{
    EdgeTimeTable tolls = uniform_table(edges, horizon, toll);
    if (kind == PolicyKind::Cbcp)
        return CbcpPolicy{std::move(tolls), budget};
    double alpha = toll > 0.0 ? std::clamp(budget / (toll * static_cast<double>(horizon)), 0.0, 1.0) : 0.0;
    return DbcpPolicy{std::move(tolls), uniform_table(edges, horizon, alpha)};
}

namespace {

double pct(double part, double whole)
{
    return whole > 0.0 ? 100.0 * part / whole : 0.0;
}

void fill_stats(GridRow& row, const ValidatedNetwork& net, const std::vector<UserGroup>& groups)
{
    const FlowPattern& y = row.result.flows;
    const AggregateFlows& x = row.result.aggregate;
    double ex_all = 0.0, tot_all = 0.0, ex_el = 0.0, tot_el = 0.0, ex_in = 0.0, tot_in = 0.0;
    for (std::size_t g = 0; g < y.groups(); ++g)
        for (std::size_t t = 0; t < y.horizon(); ++t)
            for (std::size_t e = 0; e < y.edges(); ++e) {
                double ex = y.lane(g, t, e, Lane::Express);
                double tot = ex + y.lane(g, t, e, Lane::General);
                ex_all += ex;
                tot_all += tot;
                (groups[g].eligible ? ex_el : ex_in) += ex;
                (groups[g].eligible ? tot_el : tot_in) += tot;
            }
    row.pct_express_all = pct(ex_all, tot_all);
    row.pct_express_eligible = pct(ex_el, tot_el);
    row.pct_express_ineligible = pct(ex_in, tot_in);

    double te = 0.0, fe = 0.0, tg = 0.0, fg = 0.0;
    for (std::size_t t = 0; t < x.horizon(); ++t)
        for (std::size_t e = 0; e < x.edges(); ++e) {
            double xe = x.at(t, e, Lane::Express);
            double xg = x.at(t, e, Lane::General);
            te += xe * net.edge(e).express.eval(xe);
            fe += xe;
            tg += xg * net.edge(e).general.eval(xg);
            fg += xg;
        }
    row.tt_express = fe > 0.0 ? te / fe : 0.0;
    row.tt_general = fg > 0.0 ? tg / fg : 0.0;
}

}  // namespace

GridSearchReport pareto_grid_search(const ValidatedNetwork& net, const std::vector<UserGroup>& groups,
                                    const std::vector<double>& tolls, const std::vector<double>& budgets,
                                    const SocietalWeights& weights, PolicyKind kind, const SolverOptions& options,
                                    unsigned jobs)
{
    check_weights(weights);
    if (tolls.empty() || budgets.empty())
        throw Error(ErrorCode::InvalidArgument, "toll and budget grids must be nonempty");
    if (groups.empty())
        throw Error(ErrorCode::InvalidGroup, "at least one user group is required");
    const std::size_t horizon = groups.front().vot.size();

    GridSearchReport rep;
    rep.kind = kind;
    rep.weights = weights;
    rep.rows.resize(tolls.size() * budgets.size());
    parallel_for(rep.rows.size(), jobs, [&](std::size_t i) {
        GridRow& row = rep.rows[i];
        row.budget = budgets[i / tolls.size()];
        row.toll = tolls[i % tolls.size()];
        row.policy = grid_policy(kind, net.edge_count(), horizon, row.toll, row.budget);
        if (const auto* d = std::get_if<DbcpPolicy>(&row.policy))
            row.discount = d->discounts.empty() ? 0.0 : d->discounts[0][0];
        Scenario sc{groups, row.policy, horizon};
        row.result = solve(net, sc, options);
        row.converged = row.result.converged;
        row.vi_gap = row.result.vi_gap;
        row.costs = cost_breakdown(row.result, net, groups, row.policy);
        row.f_lambda = row.costs.weighted(weights);
        fill_stats(row, net, groups);
    });
    rep.best = best_row(rep, weights);
    return rep;
}

std::optional<std::size_t> best_row(const GridSearchReport& report, const SocietalWeights& weights)
{
    check_weights(weights);
    std::optional<std::size_t> best;
    double best_f = 0.0;
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const GridRow& row = report.rows[i];
        if (!row.converged)
            continue;
        double f = row.costs.weighted(weights);
        if (!best || f < best_f) {
            best = i;
            best_f = f;
        }
    }
    return best;
}

std::vector<double> linear_grid(double lo, double hi, double step)
{
    if (!(step > 0.0) || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi))
        throw Error(ErrorCode::InvalidArgument, "grid needs lo <= hi and step > 0");
    std::vector<double> out;
    auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    // Snap to 12 decimals so 0.05 * 3 prints as 0.15.
    for (std::size_t i = 0; i <= n; ++i)
        out.push_back(std::round((lo + static_cast<double>(i) * step) * 1e12) / 1e12);
    return out;
}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn)
{
    unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::min<std::size_t>(n, 1024))));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n)
                return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next.store(n);
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back(work);
    for (auto& th : pool)
        th.join();
    if (failure)
        std::rethrow_exception(failure);
}

std::vector<double> draw_vots(double vi_bar, double delta, std::size_t horizon, std::uint64_t seed)
{
    CounterRng rng(seed);
    std::vector<double> v(horizon);
    for (std::size_t t = 0; t < horizon; ++t)
        v[t] = vi_bar + rng.symmetric() * delta;
    return v;
}

namespace {

ValidatedNetwork single_edge(const LatencyFn& l, double demand)
{
    return validate(make_single_edge_network(l, l), demand);
}

double mean_eligible_express(const EquilibriumResult& r, std::size_t eligible_group)
{
    double acc = 0.0;
    for (std::size_t t = 0; t < r.flows.horizon(); ++t)
        acc += r.flows.lane(eligible_group, t, 0, Lane::Express);
    return acc / static_cast<double>(r.flows.horizon());
}

CurvePoint curve_point(const ValidatedNetwork& net, const std::vector<UserGroup>& groups, double toll, double alpha,
                       const SolverOptions& options)
{
    const std::size_t horizon = groups.front().vot.size();
    CbcpPolicy credit{uniform_table(1, horizon, toll), alpha * toll * static_cast<double>(horizon)};
    DbcpPolicy discount{uniform_table(1, horizon, toll), uniform_table(1, horizon, alpha)};
    EquilibriumResult rc = solve_cbcp(net, groups, credit, options);
    EquilibriumResult rd = solve_dbcp(net, groups, discount, options);
    return {alpha, mean_eligible_express(rc, 0), mean_eligible_express(rd, 0), rc.converged && rd.converged};
}

}  // namespace

std::vector<CurvePoint> sensitivity_vot(const VotSweep& sweep)
{
    if (sweep.horizon < 1)
        throw Error(ErrorCode::InvalidHorizon, "horizon must be at least 1");
    if (!(sweep.delta >= 0.0))
        throw Error(ErrorCode::InvalidArgument, "VoT spread must be >= 0");
    std::vector<double> vi = draw_vots(sweep.vi_bar, sweep.delta, sweep.horizon, sweep.seed);
    for (double v : vi)
        if (!(v > sweep.vot_eligible))
            throw Error(ErrorCode::AssumptionViolated, "perturbed ineligible VoT must exceed the eligible VoT");
    std::vector<UserGroup> groups{
        {"eligible", true, 1.0, std::vector<double>(sweep.horizon, sweep.vot_eligible)},
        {"ineligible", false, 1.0, vi},
    };
    ValidatedNetwork net = single_edge(sweep.latency, 2.0);
    std::vector<CurvePoint> out(sweep.alphas.size());
    parallel_for(out.size(), sweep.jobs, [&](std::size_t i) {
        out[i] = curve_point(net, groups, sweep.toll, sweep.alphas[i], sweep.options);
    });
    return out;
}

std::vector<DemandCurve> sensitivity_demand(const DemandSweep& sweep)
{
    for (double d : sweep.demands)
        if (!std::isfinite(d) || d < 0.0)
            throw Error(ErrorCode::InvalidArgument, "ineligible demand must be >= 0");
    std::vector<DemandCurve> out;
    for (double d : sweep.demands)
        out.push_back({d, std::vector<CurvePoint>(sweep.alphas.size())});
    const std::size_t na = sweep.alphas.size();
    parallel_for(sweep.demands.size() * na, sweep.jobs, [&](std::size_t k) {
        double d = sweep.demands[k / na];
        std::vector<UserGroup> groups{
            {"eligible", true, 1.0, {sweep.vot_eligible}},
            {"ineligible", false, d, {sweep.vot_ineligible}},
        };
        ValidatedNetwork net = single_edge(sweep.latency, 1.0 + d);
        out[k / na].points[k % na] = curve_point(net, groups, sweep.toll, sweep.alphas[k % na], sweep.options);
    });
    return out;
}

}  // namespace expresslane
