#include "expresslane/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "expresslane/errors.hpp"

namespace expresslane {

EdgeTimeTable uniform_table(std::size_t edges, std::size_t horizon, double value)
{
    return EdgeTimeTable(edges, std::vector<double>(horizon, value));
}

PolicyKind kind_of(const Policy& policy)
{
    return std::holds_alternative<DbcpPolicy>(policy) ? PolicyKind::Dbcp : PolicyKind::Cbcp;
}

const EdgeTimeTable& tolls_of(const Policy& policy)
{
    if (const auto* d = std::get_if<DbcpPolicy>(&policy))
        return d->tolls;
    return std::get<CbcpPolicy>(policy).tolls;
}

FlowPattern::FlowPattern(std::size_t groups, std::size_t horizon, std::size_t edges)
    : groups_(groups), horizon_(horizon), edges_(edges), data_(groups * horizon * edges * kSlots, 0.0)
{
}

double FlowPattern::lane(std::size_t g, std::size_t t, std::size_t e, Lane lane) const
{
    if (lane == Lane::General)
        return at(g, t, e, FlowSlot::General);
    return at(g, t, e, FlowSlot::ExpressCredit) + at(g, t, e, FlowSlot::ExpressPaid);
}

AggregateFlows::AggregateFlows(std::size_t horizon, std::size_t edges)
    : horizon_(horizon), edges_(edges), data_(horizon * edges * kLanes, 0.0)
{
}

AggregateFlows aggregate(const FlowPattern& flows)
{
    AggregateFlows x(flows.horizon(), flows.edges());
    for (std::size_t g = 0; g < flows.groups(); ++g)
        for (std::size_t t = 0; t < flows.horizon(); ++t)
            for (std::size_t e = 0; e < flows.edges(); ++e) {
                x.at(t, e, Lane::Express) += flows.lane(g, t, e, Lane::Express);
                x.at(t, e, Lane::General) += flows.lane(g, t, e, Lane::General);
            }
    return x;
}

double dbcp_cost(const UserGroup& group, const ValidatedNetwork& net, std::size_t e, Lane lane,
                 std::size_t t, const AggregateFlows& x, const DbcpPolicy& policy)
{
    double travel = group.vot_at(t) * net.edge(e).latency(lane).eval(x.at(t, e, lane));
    if (lane == Lane::General)
        return travel;
    double toll = policy.tolls.at(e).at(t);
    if (group.eligible)
        toll *= 1.0 - policy.discounts.at(e).at(t);
    return travel + toll;
}

CbcpCosts cbcp_costs(const UserGroup& group, const ValidatedNetwork& net, std::size_t e, std::size_t t,
                     const AggregateFlows& x, const CbcpPolicy& policy)
{
    double v = group.vot_at(t);
    double express = v * net.edge(e).express.eval(x.at(t, e, Lane::Express));
    double general = v * net.edge(e).general.eval(x.at(t, e, Lane::General));
    return {express, express + policy.tolls.at(e).at(t), general};
}

double conservation_residual(const ValidatedNetwork& net, const std::vector<UserGroup>& groups,
                             const FlowPattern& flows)
{
    double worst = 0.0;
    for (std::size_t g = 0; g < flows.groups(); ++g) {
        for (std::size_t t = 0; t < flows.horizon(); ++t) {
            for (std::size_t v = 0; v < net.node_count(); ++v) {
                if (v == net.destination())
                    continue;
                double balance = v == net.origin() ? -groups.at(g).demand : 0.0;
                for (std::size_t e : net.out_edges(v))
                    balance += flows.lane(g, t, e, Lane::Express) + flows.lane(g, t, e, Lane::General);
                for (std::size_t e : net.in_edges(v))
                    balance -= flows.lane(g, t, e, Lane::Express) + flows.lane(g, t, e, Lane::General);
                worst = std::max(worst, std::abs(balance));
            }
        }
    }
    return worst;
}

double negativity_residual(const FlowPattern& flows)
{
    double worst = 0.0;
    for (double v : flows.raw())
        worst = std::max(worst, -v);
    return worst;
}

std::vector<double> budget_spent(const FlowPattern& flows, const std::vector<UserGroup>& groups,
                                 const EdgeTimeTable& tolls)
{
    std::vector<double> spent(flows.groups(), 0.0);
    for (std::size_t g = 0; g < flows.groups(); ++g) {
        if (!groups.at(g).eligible)
            continue;
        for (std::size_t t = 0; t < flows.horizon(); ++t)
            for (std::size_t e = 0; e < flows.edges(); ++e)
                spent[g] += flows.at(g, t, e, FlowSlot::ExpressCredit) * tolls.at(e).at(t);
    }
    return spent;
}

void check_groups(const std::vector<UserGroup>& groups, std::size_t horizon)
{
    if (horizon == 0)
        throw Error(ErrorCode::InvalidHorizon, "horizon must be at least 1");
    if (groups.empty())
        throw Error(ErrorCode::InvalidGroup, "at least one user group is required");
    for (const auto& g : groups) {
        if (!std::isfinite(g.demand) || g.demand < 0.0)
            throw Error(ErrorCode::InvalidGroup, "group '" + g.id + "' demand must be >= 0");
        if (g.vot.size() != horizon)
            throw Error(ErrorCode::InvalidHorizon, "group '" + g.id + "' has " + std::to_string(g.vot.size()) +
                                                       " VoT entries, horizon is " + std::to_string(horizon));
        for (double v : g.vot)
            if (!std::isfinite(v) || v <= 0.0)
                throw Error(ErrorCode::InvalidGroup, "group '" + g.id + "' VoT must be > 0");
    }
}

namespace {

void check_table(const EdgeTimeTable& table, std::size_t edges, std::size_t horizon, const char* name,
                 double lo, double hi)
{
    if (table.size() != edges)
        throw Error(ErrorCode::InvalidHorizon, std::string(name) + " has " + std::to_string(table.size()) +
                                                   " rows, network has " + std::to_string(edges) + " edges");
    for (const auto& row : table) {
        if (row.size() != horizon)
            throw Error(ErrorCode::InvalidHorizon, std::string(name) + " row length " +
                                                       std::to_string(row.size()) + " differs from horizon " +
                                                       std::to_string(horizon));
        for (double v : row)
            if (!std::isfinite(v) || v < lo || v > hi)
                throw Error(ErrorCode::InvalidPolicy, std::string(name) + " entry " + std::to_string(v) +
                                                          " out of range");
    }
}

}  // namespace

void check_policy(const Policy& policy, std::size_t edges, std::size_t horizon)
{
    const double inf = std::numeric_limits<double>::infinity();
    check_table(tolls_of(policy), edges, horizon, "tolls", 0.0, inf);
    if (const auto* d = std::get_if<DbcpPolicy>(&policy)) {
        check_table(d->discounts, edges, horizon, "discounts", 0.0, 1.0);
    } else {
        double b = std::get<CbcpPolicy>(policy).budget;
        if (!std::isfinite(b) || b < 0.0)
            throw Error(ErrorCode::InvalidPolicy, "budget must be finite and >= 0");
    }
}

void require_constant_eligible_vot(const std::vector<UserGroup>& groups)
{
    for (const auto& g : groups) {
        if (!g.eligible || g.vot.empty())
            continue;
        for (double v : g.vot)
            if (v != g.vot.front())
                throw Error(ErrorCode::TimeVaryingEligibleVot, "eligible group '" + g.id + "' VoT varies over time");
    }
}

}  // namespace expresslane
