#include "expresslane/equilibrium.hpp"

#include "expresslane/errors.hpp"

namespace expresslane {

ExtremeFlow linear_subproblem_dbcp(const ValidatedNetwork& net, double demand, const LaneCostVector& costs)
{
    ExtremeFlow out;
    out.flows.assign(net.edge_count() * kSlots, 0.0);
    Route r = cheapest_route(net, costs);
    for (const auto& leg : r.legs) {
        FlowSlot s = leg.lane == Lane::Express ? FlowSlot::ExpressPaid : FlowSlot::General;
        out.flows[leg.edge * kSlots + slot_index(s)] = demand;
    }
    out.cost = demand * r.cost;
    return out;
}

namespace {

struct Priced {
    std::vector<double> flows;
    double spend = 0.0;
    double cost = 0.0;
};

// Route for one time at multiplier mu. Credit is used on an express leg
// when mu < 1 and the toll is positive.
Priced price_time(const ValidatedNetwork& net, double demand, const LaneCostVector& travel,
                  const EdgeTimeTable& tolls, std::size_t t, double mu)
{
    const std::size_t m = net.edge_count();
    LaneCostVector eff;
    eff.unit = CostUnit::Money;
    eff.cost.resize(m);
    for (std::size_t e = 0; e < m; ++e) {
        double tau = tolls[e][t];
        double rate = mu < 1.0 ? mu : 1.0;
        eff.cost[e] = {travel.cost[e][0] + rate * tau, travel.cost[e][1]};
    }
    Route r = cheapest_route(net, eff);
    Priced p;
    p.flows.assign(m * kSlots, 0.0);
    for (const auto& leg : r.legs) {
        std::size_t e = leg.edge;
        double tau = tolls[e][t];
        if (leg.lane == Lane::General) {
            p.flows[e * kSlots + slot_index(FlowSlot::General)] = demand;
            p.cost += demand * travel.cost[e][1];
        } else if (mu < 1.0 && tau > 0.0) {
            p.flows[e * kSlots + slot_index(FlowSlot::ExpressCredit)] = demand;
            p.spend += demand * tau;
            p.cost += demand * travel.cost[e][0];
        } else {
            p.flows[e * kSlots + slot_index(FlowSlot::ExpressPaid)] = demand;
            p.cost += demand * (travel.cost[e][0] + tau);
        }
    }
    return p;
}

struct Horizon {
    std::vector<Priced> per_time;
    double spend = 0.0;
};

Horizon price_all(const ValidatedNetwork& net, double demand, const std::vector<LaneCostVector>& travel,
                  const EdgeTimeTable& tolls, double mu)
{
    Horizon h;
    for (std::size_t t = 0; t < travel.size(); ++t) {
        h.per_time.push_back(price_time(net, demand, travel[t], tolls, t, mu));
        h.spend += h.per_time.back().spend;
    }
    return h;
}

ExtremeFlow assemble(const Horizon& h, std::size_t m)
{
    ExtremeFlow out;
    out.flows.assign(h.per_time.size() * m * kSlots, 0.0);
    for (std::size_t t = 0; t < h.per_time.size(); ++t) {
        const auto& p = h.per_time[t];
        std::copy(p.flows.begin(), p.flows.end(), out.flows.begin() + static_cast<std::ptrdiff_t>(t * m * kSlots));
        out.cost += p.cost;
        out.budget_used += p.spend;
    }
    return out;
}

}  // namespace

ExtremeFlow linear_subproblem_cbcp_eligible(const ValidatedNetwork& net, double demand,
                                            const std::vector<LaneCostVector>& travel, const EdgeTimeTable& tolls,
                                            double budget)
{
    const std::size_t m = net.edge_count();
    if (budget <= 0.0) {
        ExtremeFlow out = assemble(price_all(net, demand, travel, tolls, 1.0), m);
        out.multiplier = 1.0;
        return out;
    }
    Horizon free = price_all(net, demand, travel, tolls, 0.0);
    if (free.spend <= budget)
        return assemble(free, m);

    double lo = 0.0;
    double hi = 1.0;
    for (int i = 0; i < 64; ++i) {
        double mid = 0.5 * (lo + hi);
        if (price_all(net, demand, travel, tolls, mid).spend > budget)
            lo = mid;
        else
            hi = mid;
    }
    Horizon rich = price_all(net, demand, travel, tolls, lo);
    Horizon lean = price_all(net, demand, travel, tolls, hi);

    // Start from the lean choice everywhere and upgrade times in ascending
    // order until the budget is exhausted; the critical time is mixed.
    Horizon mixed = lean;
    double spent = lean.spend;
    for (std::size_t t = 0; t < travel.size(); ++t) {
        double extra = rich.per_time[t].spend - lean.per_time[t].spend;
        if (extra <= 0.0)
            continue;
        if (spent + extra <= budget) {
            mixed.per_time[t] = rich.per_time[t];
            spent += extra;
            continue;
        }
        double theta = (budget - spent) / extra;
        auto& p = mixed.per_time[t];
        const auto& r = rich.per_time[t];
        for (std::size_t i = 0; i < p.flows.size(); ++i)
            p.flows[i] = (1.0 - theta) * p.flows[i] + theta * r.flows[i];
        p.cost = (1.0 - theta) * p.cost + theta * r.cost;
        p.spend = (1.0 - theta) * p.spend + theta * r.spend;
        break;
    }
    mixed.spend = 0.0;
    for (const auto& p : mixed.per_time)
        mixed.spend += p.spend;
    ExtremeFlow out = assemble(mixed, m);
    out.multiplier = hi;
    return out;
}

}  // namespace expresslane
