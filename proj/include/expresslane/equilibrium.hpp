#ifndef EXPRESSLANE_EQUILIBRIUM_HPP
#define EXPRESSLANE_EQUILIBRIUM_HPP

#include <cstdint>
#include <vector>

#include "expresslane/network.hpp"
#include "expresslane/policies.hpp"

namespace expresslane {

enum class LineSearch { Exact, Harmonic };

struct SolverOptions {
    std::uint64_t max_iters = 200000;
    /// Relative VI gap: converged when vi_gap <= gap_tol * (1 + |total cost|).
    double gap_tol = 1e-6;
    LineSearch line_search = LineSearch::Exact;
    /// Start from a random feasible point instead of all-general-lane flow.
    bool randomize_start = false;
    std::uint64_t seed = 0;
    bool record_trace = false;
};

struct TraceEntry {
    std::uint64_t iteration;
    double objective;
    double fw_gap;
    double vi_gap;
};

struct EquilibriumResult {
    PolicyKind kind = PolicyKind::Dbcp;
    FlowPattern flows;
    AggregateFlows aggregate;
    /// Money units.
    double vi_gap = 0.0;
    /// Frank-Wolfe gap of the convex program, time units.
    double fw_gap = 0.0;
    /// Convex-program objective, time units.
    double objective = 0.0;
    /// Money cost borne by all users (travel plus out-of-pocket tolls).
    double total_cost = 0.0;
    std::uint64_t iterations = 0;
    std::vector<double> per_group_cost;
    std::vector<double> budget_spent;
    bool converged = false;
    std::vector<TraceEntry> trace;

    /// Express flow of group g on edge e at time t.
    double express(std::size_t g, std::size_t e = 0, std::size_t t = 0) const
    {
        return flows.lane(g, t, e, Lane::Express);
    }
};

EquilibriumResult solve_dbcp(const ValidatedNetwork& net, const std::vector<UserGroup>& groups,
                             const DbcpPolicy& policy, const SolverOptions& options = {});

EquilibriumResult solve_cbcp(const ValidatedNetwork& net, const std::vector<UserGroup>& groups,
                             const CbcpPolicy& policy, const SolverOptions& options = {});

EquilibriumResult solve(const ValidatedNetwork& net, const Scenario& scenario, const SolverOptions& options = {});

/// Throws NotConverged if the result is flagged.
const EquilibriumResult& require_converged(const EquilibriumResult& result);

/// Total best-response improvement available to all groups, money units.
/// Throws InfeasibleFlow when the pattern violates its feasible set.
double vi_gap(const FlowPattern& flows, const ValidatedNetwork& net, const std::vector<UserGroup>& groups,
              const Policy& policy);

/// Convex-program objective at the given flows, time units.
double objective(const FlowPattern& flows, const ValidatedNetwork& net, const std::vector<UserGroup>& groups,
                 const Policy& policy);

/// Extreme flow of a linear subproblem laid out [time][edge][slot].
struct ExtremeFlow {
    std::vector<double> flows;
    double cost = 0.0;
    double budget_used = 0.0;
    /// Budget multiplier; 0 when the budget does not bind.
    double multiplier = 0.0;
};

/// All demand on the cheapest route for the given lane costs. Express flow
/// goes to the ExpressPaid slot.
ExtremeFlow linear_subproblem_dbcp(const ValidatedNetwork& net, double demand, const LaneCostVector& costs);

/// Minimizes sum of credit * c + paid * (c + toll) + general * g over the
/// horizon subject to sum of credit * toll <= budget. travel[t] holds the
/// money travel cost per (edge, lane) at time t.
ExtremeFlow linear_subproblem_cbcp_eligible(const ValidatedNetwork& net, double demand,
                                            const std::vector<LaneCostVector>& travel, const EdgeTimeTable& tolls,
                                            double budget);

}  // namespace expresslane

#endif
