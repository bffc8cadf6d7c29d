#include "expresslane/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "expresslane/errors.hpp"
#include "expresslane/rng.hpp"

namespace expresslane {

namespace {

Lane slot_lane(std::size_t s)
{
    return s == slot_index(FlowSlot::General) ? Lane::General : Lane::Express;
}

struct Atom {
    double weight;
    std::vector<double> flow;
};

// One group's flows over a time window [t0, t1). DBCP and ineligible CBCP
// groups get one block per time; eligible CBCP groups get the whole horizon
// because the budget couples their periods.
struct Block {
    std::size_t group;
    std::size_t t0;
    std::size_t t1;
    bool budgeted;
    std::vector<Atom> atoms;
};

struct Gaps {
    double vi = 0.0;
    double fw = 0.0;
    double total_cost = 0.0;
};

class Engine {
public:
    Engine(const ValidatedNetwork& net, const std::vector<UserGroup>& groups, const Policy& policy)
        : net_(net), groups_(groups), kind_(kind_of(policy)), tolls_(tolls_of(policy))
    {
        if (groups.empty())
            throw Error(ErrorCode::InvalidGroup, "at least one user group is required");
        horizon_ = groups.front().vot.size();
        check_groups(groups, horizon_);
        check_policy(policy, net.edge_count(), horizon_);
        if (kind_ == PolicyKind::Cbcp) {
            require_constant_eligible_vot(groups);
            budget_ = std::get<CbcpPolicy>(policy).budget;
        }
        edges_ = net.edge_count();
        flows_ = FlowPattern(groups.size(), horizon_, edges_);
        x_ = AggregateFlows(horizon_, edges_);
        lat_.assign(horizon_ * edges_ * kLanes, 0.0);

        lin_.assign(groups.size() * horizon_ * edges_ * kSlots, 0.0);
        for (std::size_t g = 0; g < groups.size(); ++g)
            for (std::size_t t = 0; t < horizon_; ++t)
                for (std::size_t e = 0; e < edges_; ++e) {
                    double tau = tolls_[e][t];
                    double v = groups[g].vot[t];
                    double paid = tau / v;
                    if (kind_ == PolicyKind::Dbcp && groups[g].eligible)
                        paid = (1.0 - std::get<DbcpPolicy>(policy).discounts[e][t]) * tau / v;
                    lin_[lin_index(g, t, e, FlowSlot::ExpressPaid)] = paid;
                }

        for (std::size_t g = 0; g < groups.size(); ++g) {
            if (kind_ == PolicyKind::Cbcp && groups[g].eligible) {
                blocks_.push_back({g, 0, horizon_, true, {}});
            } else {
                for (std::size_t t = 0; t < horizon_; ++t)
                    blocks_.push_back({g, t, t + 1, false, {}});
            }
        }
    }

    std::size_t horizon() const { return horizon_; }

    void start_general()
    {
        for (auto& b : blocks_) {
            std::vector<double> s = lmo_with(b, [](std::size_t, std::size_t, Lane lane) {
                return lane == Lane::Express ? 1.0 : 0.0;
            });
            b.atoms = {{1.0, std::move(s)}};
            write_block(b);
        }
        refresh_all();
    }

    void start_random(std::uint64_t seed)
    {
        CounterRng rng(seed, 0x5eed);
        for (auto& b : blocks_) {
            b.atoms.clear();
            double total = 0.0;
            for (int k = 0; k < 3; ++k) {
                std::vector<double> draws((b.t1 - b.t0) * edges_ * kLanes);
                for (double& d : draws)
                    d = rng.u01();
                std::vector<double> s = lmo_with(b, [&](std::size_t t, std::size_t e, Lane lane) {
                    return draws[((t - b.t0) * edges_ + e) * kLanes + lane_index(lane)];
                });
                double w = 0.05 + rng.u01();
                total += w;
                add_atom(b, w, std::move(s));
            }
            for (auto& a : b.atoms)
                a.weight /= total;
            write_block(b);
        }
        refresh_all();
    }

    void load(const FlowPattern& flows)
    {
        for (auto& b : blocks_) {
            std::size_t n = block_size(b);
            const double* src = flows.group_data(b.group) + b.t0 * edges_ * kSlots;
            b.atoms = {{1.0, std::vector<double>(src, src + n)}};
            write_block(b);
        }
        refresh_all();
    }

    Gaps gaps()
    {
        Gaps out;
        for (auto& b : blocks_) {
            std::vector<double> grad = time_gradient(b);
            std::vector<double> s = lmo(b);
            const double* y = block_data(b);
            for (std::size_t i = 0; i < grad.size(); ++i) {
                double v = vot_of(b, i);
                out.fw += grad[i] * (y[i] - s[i]);
                out.vi += v * grad[i] * (y[i] - s[i]);
                out.total_cost += v * grad[i] * y[i];
            }
        }
        return out;
    }

    double objective() const
    {
        double obj = 0.0;
        for (std::size_t t = 0; t < horizon_; ++t)
            for (std::size_t e = 0; e < edges_; ++e)
                for (Lane lane : {Lane::Express, Lane::General})
                    obj += net_.edge(e).latency(lane).integral(x_.at(t, e, lane));
        const auto& raw = flows_.raw();
        for (std::size_t i = 0; i < raw.size(); ++i)
            obj += lin_[i] * raw[i];
        return obj;
    }

    // One pass over all blocks; returns true if any flow moved.
    bool sweep(LineSearch mode, std::uint64_t k)
    {
        bool moved = false;
        for (auto& b : blocks_) {
            if (groups_[b.group].demand == 0.0)
                continue;
            moved |= mode == LineSearch::Exact ? pairwise_step(b) : harmonic_step(b, k);
        }
        return moved;
    }

    const FlowPattern& flows() const { return flows_; }
    const AggregateFlows& aggregate() const { return x_; }

    std::vector<double> per_group_cost() const
    {
        std::vector<double> cost(groups_.size(), 0.0);
        for (std::size_t g = 0; g < groups_.size(); ++g)
            for (std::size_t t = 0; t < horizon_; ++t)
                for (std::size_t e = 0; e < edges_; ++e)
                    for (std::size_t s = 0; s < kSlots; ++s) {
                        FlowSlot slot = static_cast<FlowSlot>(s);
                        double grad = lat_[lat_index(t, e, slot_lane(s))] + lin_[lin_index(g, t, e, slot)];
                        cost[g] += groups_[g].vot[t] * grad * flows_.at(g, t, e, slot);
                    }
        return cost;
    }

private:
    std::size_t lin_index(std::size_t g, std::size_t t, std::size_t e, FlowSlot s) const
    {
        return ((g * horizon_ + t) * edges_ + e) * kSlots + slot_index(s);
    }
    std::size_t lat_index(std::size_t t, std::size_t e, Lane lane) const
    {
        return (t * edges_ + e) * kLanes + lane_index(lane);
    }
    std::size_t block_size(const Block& b) const { return (b.t1 - b.t0) * edges_ * kSlots; }
    double* block_data(const Block& b) { return flows_.group_data(b.group) + b.t0 * edges_ * kSlots; }
    double vot_of(const Block& b, std::size_t i) const
    {
        return groups_[b.group].vot[b.t0 + i / (edges_ * kSlots)];
    }

    std::vector<double> time_gradient(const Block& b) const
    {
        std::vector<double> grad(block_size(b));
        for (std::size_t t = b.t0; t < b.t1; ++t)
            for (std::size_t e = 0; e < edges_; ++e)
                for (std::size_t s = 0; s < kSlots; ++s) {
                    FlowSlot slot = static_cast<FlowSlot>(s);
                    grad[((t - b.t0) * edges_ + e) * kSlots + s] =
                        lat_[lat_index(t, e, slot_lane(s))] + lin_[lin_index(b.group, t, e, slot)];
                }
        return grad;
    }

    // Linear minimization over the block's feasible set. cost(t, e, lane)
    // gives the money travel cost; tolls are added here.
    template <class CostFn>
    std::vector<double> lmo_with(const Block& b, CostFn cost)
    {
        const UserGroup& grp = groups_[b.group];
        std::vector<double> out;
        out.reserve(block_size(b));
        if (b.budgeted) {
            std::vector<LaneCostVector> travel(horizon_);
            for (std::size_t t = 0; t < horizon_; ++t) {
                travel[t].cost.resize(edges_);
                for (std::size_t e = 0; e < edges_; ++e)
                    travel[t].cost[e] = {cost(t, e, Lane::Express), cost(t, e, Lane::General)};
            }
            return linear_subproblem_cbcp_eligible(net_, grp.demand, travel, tolls_, budget_).flows;
        }
        for (std::size_t t = b.t0; t < b.t1; ++t) {
            LaneCostVector c;
            c.cost.resize(edges_);
            for (std::size_t e = 0; e < edges_; ++e) {
                double paid = grp.vot[t] * lin_[lin_index(b.group, t, e, FlowSlot::ExpressPaid)];
                c.cost[e] = {cost(t, e, Lane::Express) + paid, cost(t, e, Lane::General)};
            }
            auto s = linear_subproblem_dbcp(net_, grp.demand, c).flows;
            out.insert(out.end(), s.begin(), s.end());
        }
        return out;
    }

    std::vector<double> lmo(const Block& b)
    {
        const UserGroup& grp = groups_[b.group];
        return lmo_with(b, [&](std::size_t t, std::size_t e, Lane lane) {
            return grp.vot[t] * lat_[lat_index(t, e, lane)];
        });
    }

    void add_atom(Block& b, double w, std::vector<double> flow)
    {
        for (auto& a : b.atoms)
            if (a.flow == flow) {
                a.weight += w;
                return;
            }
        b.atoms.push_back({w, std::move(flow)});
    }

    void write_block(Block& b)
    {
        std::erase_if(b.atoms, [](const Atom& a) { return !(a.weight > 0.0); });
        double* y = block_data(b);
        std::size_t n = block_size(b);
        std::fill(y, y + n, 0.0);
        for (const auto& a : b.atoms)
            for (std::size_t i = 0; i < n; ++i)
                y[i] += a.weight * a.flow[i];
        for (std::size_t i = 0; i < n; ++i)
            if (y[i] < 0.0)
                y[i] = 0.0;
    }

    void refresh_times(std::size_t t0, std::size_t t1)
    {
        for (std::size_t t = t0; t < t1; ++t)
            for (std::size_t e = 0; e < edges_; ++e) {
                double ex = 0.0;
                double ge = 0.0;
                for (std::size_t g = 0; g < groups_.size(); ++g) {
                    ex += flows_.lane(g, t, e, Lane::Express);
                    ge += flows_.lane(g, t, e, Lane::General);
                }
                x_.at(t, e, Lane::Express) = ex;
                x_.at(t, e, Lane::General) = ge;
                lat_[lat_index(t, e, Lane::Express)] = net_.edge(e).express.eval(ex);
                lat_[lat_index(t, e, Lane::General)] = net_.edge(e).general.eval(ge);
            }
    }

    void refresh_all() { refresh_times(0, horizon_); }

    // Derivative of the objective along direction d at step gamma.
    double slope(const Block& b, const std::vector<double>& dx, double lin, double gamma) const
    {
        double acc = lin;
        for (std::size_t t = b.t0; t < b.t1; ++t)
            for (std::size_t e = 0; e < edges_; ++e)
                for (Lane lane : {Lane::Express, Lane::General}) {
                    double delta = dx[((t - b.t0) * edges_ + e) * kLanes + lane_index(lane)];
                    if (delta == 0.0)
                        continue;
                    double x = std::max(0.0, x_.at(t, e, lane) + gamma * delta);
                    acc += net_.edge(e).latency(lane).eval(x) * delta;
                }
        return acc;
    }

    double exact_step(const Block& b, const std::vector<double>& d, double gamma_max)
    {
        std::vector<double> dx((b.t1 - b.t0) * edges_ * kLanes, 0.0);
        double lin = 0.0;
        for (std::size_t t = b.t0; t < b.t1; ++t)
            for (std::size_t e = 0; e < edges_; ++e)
                for (std::size_t s = 0; s < kSlots; ++s) {
                    double v = d[((t - b.t0) * edges_ + e) * kSlots + s];
                    dx[((t - b.t0) * edges_ + e) * kLanes + lane_index(slot_lane(s))] += v;
                    lin += lin_[lin_index(b.group, t, e, static_cast<FlowSlot>(s))] * v;
                }
        if (slope(b, dx, lin, 0.0) >= 0.0)
            return 0.0;
        if (slope(b, dx, lin, gamma_max) <= 0.0)
            return gamma_max;
        double lo = 0.0;
        double hi = gamma_max;
        for (int i = 0; i < 200; ++i) {
            double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi)
                break;
            if (slope(b, dx, lin, mid) < 0.0)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    }

    bool pairwise_step(Block& b)
    {
        std::vector<double> grad = time_gradient(b);
        std::vector<double> s = lmo(b);
        auto dot = [&](const std::vector<double>& v) {
            double acc = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i)
                acc += grad[i] * v[i];
            return acc;
        };
        std::size_t away = 0;
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < b.atoms.size(); ++i) {
            double val = dot(b.atoms[i].flow);
            if (val > worst) {
                worst = val;
                away = i;
            }
        }
        if (!(dot(s) < worst))
            return false;
        if (b.atoms[away].flow == s)
            return false;

        std::vector<double> d(s.size());
        for (std::size_t i = 0; i < s.size(); ++i)
            d[i] = s[i] - b.atoms[away].flow[i];
        double gamma_max = b.atoms[away].weight;
        double gamma = exact_step(b, d, gamma_max);
        if (!(gamma > 0.0))
            return false;
        if (gamma >= gamma_max)
            b.atoms[away].weight = 0.0;
        else
            b.atoms[away].weight -= gamma;
        add_atom(b, gamma, std::move(s));
        write_block(b);
        refresh_times(b.t0, b.t1);
        return true;
    }

    bool harmonic_step(Block& b, std::uint64_t k)
    {
        std::vector<double> s = lmo(b);
        double gamma = 2.0 / (static_cast<double>(k) + 2.0);
        for (auto& a : b.atoms)
            a.weight *= 1.0 - gamma;
        add_atom(b, gamma, std::move(s));
        write_block(b);
        refresh_times(b.t0, b.t1);
        return true;
    }

    const ValidatedNetwork& net_;
    const std::vector<UserGroup>& groups_;
    PolicyKind kind_;
    const EdgeTimeTable& tolls_;
    double budget_ = 0.0;
    std::size_t horizon_ = 0;
    std::size_t edges_ = 0;
    std::vector<double> lin_;
    FlowPattern flows_;
    AggregateFlows x_;
    std::vector<double> lat_;
    std::vector<Block> blocks_;
};

// share_of_one splits the "1 +" in the stopping rule between independent
// sub-solves so that their gaps add up to the joint contract.
EquilibriumResult run(const ValidatedNetwork& net, const std::vector<UserGroup>& groups, const Policy& policy,
                      const SolverOptions& opt, double share_of_one)
{
    if (!(opt.gap_tol > 0.0))
        throw Error(ErrorCode::InvalidArgument, "gap_tol must be > 0");
    if (opt.max_iters < 1)
        throw Error(ErrorCode::InvalidArgument, "max_iters must be >= 1");

    Engine eng(net, groups, policy);
    if (opt.randomize_start)
        eng.start_random(opt.seed);
    else
        eng.start_general();

    EquilibriumResult res;
    res.kind = kind_of(policy);
    double best_obj = std::numeric_limits<double>::infinity();
    Gaps best_gaps;
    std::uint64_t k = 0;
    bool stalled = false;
    for (;; ++k) {
        Gaps gp = eng.gaps();
        double obj = eng.objective();
        if (opt.record_trace)
            res.trace.push_back({k, obj, gp.fw, gp.vi});
        bool done = gp.vi <= opt.gap_tol * (share_of_one + std::abs(gp.total_cost));
        if (obj < best_obj || done || k == 0) {
            best_obj = obj;
            best_gaps = gp;
            res.flows = eng.flows();
            res.aggregate = eng.aggregate();
            res.per_group_cost = eng.per_group_cost();
        }
        if (done) {
            res.converged = true;
            break;
        }
        if (k >= opt.max_iters || stalled)
            break;
        stalled = !eng.sweep(opt.line_search, k);
    }
    res.iterations = k;
    res.vi_gap = best_gaps.vi;
    res.fw_gap = best_gaps.fw;
    res.total_cost = best_gaps.total_cost;
    res.objective = best_obj;
    res.budget_spent = budget_spent(res.flows, groups, tolls_of(policy));
    return res;
}

std::vector<UserGroup> slice_groups(const std::vector<UserGroup>& groups, std::size_t t)
{
    std::vector<UserGroup> out = groups;
    for (auto& g : out)
        g.vot = {g.vot.at(t)};
    return out;
}

EdgeTimeTable slice_table(const EdgeTimeTable& table, std::size_t t)
{
    EdgeTimeTable out;
    for (const auto& row : table)
        out.push_back({row.at(t)});
    return out;
}

}  // namespace

EquilibriumResult solve_dbcp(const ValidatedNetwork& net, const std::vector<UserGroup>& groups,
                             const DbcpPolicy& policy, const SolverOptions& options)
{
    if (groups.empty())
        throw Error(ErrorCode::InvalidGroup, "at least one user group is required");
    const std::size_t horizon = groups.front().vot.size();
    check_groups(groups, horizon);
    check_policy(policy, net.edge_count(), horizon);
    const std::size_t m = net.edge_count();

    EquilibriumResult res;
    res.kind = PolicyKind::Dbcp;
    res.flows = FlowPattern(groups.size(), horizon, m);
    res.aggregate = AggregateFlows(horizon, m);
    res.per_group_cost.assign(groups.size(), 0.0);
    res.converged = true;
    for (std::size_t t = 0; t < horizon; ++t) {
        auto sub_groups = slice_groups(groups, t);
        DbcpPolicy sub{slice_table(policy.tolls, t), slice_table(policy.discounts, t)};
        SolverOptions sub_opt = options;
        sub_opt.seed = options.seed + t;
        EquilibriumResult r = run(net, sub_groups, sub, sub_opt, 1.0 / static_cast<double>(horizon));
        for (std::size_t g = 0; g < groups.size(); ++g) {
            for (std::size_t e = 0; e < m; ++e)
                for (std::size_t s = 0; s < kSlots; ++s)
                    res.flows.at(g, t, e, static_cast<FlowSlot>(s)) = r.flows.at(g, 0, e, static_cast<FlowSlot>(s));
            res.per_group_cost[g] += r.per_group_cost[g];
        }
        for (std::size_t e = 0; e < m; ++e)
            for (Lane lane : {Lane::Express, Lane::General})
                res.aggregate.at(t, e, lane) = r.aggregate.at(0, e, lane);
        res.vi_gap += r.vi_gap;
        res.fw_gap += r.fw_gap;
        res.objective += r.objective;
        res.total_cost += r.total_cost;
        res.iterations = std::max(res.iterations, r.iterations);
        res.converged = res.converged && r.converged;
        for (auto entry : r.trace)
            res.trace.push_back(entry);
    }
    res.budget_spent.assign(groups.size(), 0.0);
    return res;
}

EquilibriumResult solve_cbcp(const ValidatedNetwork& net, const std::vector<UserGroup>& groups,
                             const CbcpPolicy& policy, const SolverOptions& options)
{
    return run(net, groups, policy, options, 1.0);
}

EquilibriumResult solve(const ValidatedNetwork& net, const Scenario& scenario, const SolverOptions& options)
{
    for (const auto& g : scenario.groups)
        if (g.vot.size() != scenario.horizon)
            throw Error(ErrorCode::InvalidHorizon, "group '" + g.id + "' VoT length differs from horizon");
    if (const auto* d = std::get_if<DbcpPolicy>(&scenario.policy))
        return solve_dbcp(net, scenario.groups, *d, options);
    return solve_cbcp(net, scenario.groups, std::get<CbcpPolicy>(scenario.policy), options);
}

const EquilibriumResult& require_converged(const EquilibriumResult& result)
{
    if (!result.converged)
        throw Error(ErrorCode::NotConverged, "solver stopped after " + std::to_string(result.iterations) +
                                                 " iterations with vi_gap " + std::to_string(result.vi_gap));
    return result;
}

namespace {

void check_feasible(const FlowPattern& flows, const ValidatedNetwork& net, const std::vector<UserGroup>& groups,
                    const Policy& policy)
{
    if (flows.groups() != groups.size() || flows.edges() != net.edge_count() ||
        (!groups.empty() && flows.horizon() != groups.front().vot.size()))
        throw Error(ErrorCode::InfeasibleFlow, "flow pattern shape does not match the scenario");
    double demand = 0.0;
    for (const auto& g : groups)
        demand = std::max(demand, g.demand);
    if (negativity_residual(flows) > 1e-12)
        throw Error(ErrorCode::InfeasibleFlow, "negative flow component");
    if (conservation_residual(net, groups, flows) > 1e-8 * (1.0 + demand))
        throw Error(ErrorCode::InfeasibleFlow, "flow conservation violated");
    PolicyKind kind = kind_of(policy);
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (std::size_t t = 0; t < flows.horizon(); ++t)
            for (std::size_t e = 0; e < flows.edges(); ++e)
                if (flows.at(g, t, e, FlowSlot::ExpressCredit) > 0.0 &&
                    (kind == PolicyKind::Dbcp || !groups[g].eligible))
                    throw Error(ErrorCode::InfeasibleFlow, "credit-paid flow outside an eligible CBCP group");
    if (kind == PolicyKind::Cbcp) {
        double b = std::get<CbcpPolicy>(policy).budget;
        for (double spent : budget_spent(flows, groups, tolls_of(policy)))
            if (spent > b + 1e-9)
                throw Error(ErrorCode::InfeasibleFlow, "budget exceeded");
    }
}

}  // namespace

double vi_gap(const FlowPattern& flows, const ValidatedNetwork& net, const std::vector<UserGroup>& groups,
              const Policy& policy)
{
    check_feasible(flows, net, groups, policy);
    Engine eng(net, groups, policy);
    eng.load(flows);
    return eng.gaps().vi;
}

double objective(const FlowPattern& flows, const ValidatedNetwork& net, const std::vector<UserGroup>& groups,
                 const Policy& policy)
{
    Engine eng(net, groups, policy);
    eng.load(flows);
    return eng.objective();
}

}  // namespace expresslane
