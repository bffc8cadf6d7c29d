#ifndef EXPRESSLANE_ANALYSIS_HPP
#define EXPRESSLANE_ANALYSIS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "expresslane/equilibrium.hpp"
#include "expresslane/latency.hpp"

namespace expresslane {

struct SocietalWeights {
    double eligible = 1.0;
    double ineligible = 1.0;
    double revenue = 1.0;

    SocietalWeights scaled(double k) const { return {eligible * k, ineligible * k, revenue * k}; }
};

void check_weights(const SocietalWeights& w);

/// Money totals over the horizon.
struct CostBreakdown {
    /// Travel plus out-of-pocket tolls of eligible groups.
    double eligible = 0.0;
    double ineligible = 0.0;
    /// Out-of-pocket toll payments of all groups.
    double revenue = 0.0;

    double weighted(const SocietalWeights& w) const
    {
        return w.eligible * eligible + w.ineligible * ineligible - w.revenue * revenue;
    }
};

CostBreakdown cost_breakdown(const EquilibriumResult& result, const ValidatedNetwork& net,
                             const std::vector<UserGroup>& groups, const Policy& policy);

/// f_λ of a converged result; throws NotConverged otherwise.
double societal_cost(const EquilibriumResult& result, const ValidatedNetwork& net, const std::vector<UserGroup>& groups,
                     const Policy& policy, const SocietalWeights& weights);

struct GridRow {
    double toll = 0.0;
    double budget = 0.0;
    /// Discount used for DBCP rows, B / (τ T) clamped to [0, 1].
    double discount = 0.0;
    CostBreakdown costs;
    double f_lambda = 0.0;
    double pct_express_all = 0.0;
    double pct_express_eligible = 0.0;
    double pct_express_ineligible = 0.0;
    double tt_express = 0.0;
    double tt_general = 0.0;
    bool converged = false;
    double vi_gap = 0.0;
    Policy policy;
    EquilibriumResult result;
};

struct GridSearchReport {
    PolicyKind kind = PolicyKind::Cbcp;
    SocietalWeights weights;
    /// Budget-major order: rows[i * tolls + j] holds budgets[i], tolls[j].
    std::vector<GridRow> rows;
    std::optional<std::size_t> best;
};

/// Policy at one grid point: the toll applies to every edge and time.
Policy grid_policy(PolicyKind kind, std::size_t edges, std::size_t horizon, double toll, double budget);

GridSearchReport pareto_grid_search(const ValidatedNetwork& net, const std::vector<UserGroup>& groups,
                                    const std::vector<double>& tolls, const std::vector<double>& budgets,
                                    const SocietalWeights& weights, PolicyKind kind, const SolverOptions& options = {},
                                    unsigned jobs = 1);

/// Index of the converged row minimizing f for other weights; ties go to the
/// lowest index.
std::optional<std::size_t> best_row(const GridSearchReport& report, const SocietalWeights& weights);

/// Uniform grid lo, lo + step, ..., hi (inclusive, tolerant to rounding).
std::vector<double> linear_grid(double lo, double hi, double step);

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception
/// thrown by any task is rethrown after all threads finish.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

struct CurvePoint {
    double alpha;
    double yC;
    double yD;
    bool converged;
};

struct VotSweep {
    LatencyFn latency = LatencyFn::monomial(0.25, 2.0);
    double toll = 0.4;
    double vot_eligible = 1.0;
    double vi_bar = 1.5;
    double delta = 0.0;
    std::size_t horizon = 5;
    std::uint64_t seed = 0;
    std::vector<double> alphas;
    SolverOptions options = tight_options();
    unsigned jobs = 1;

    static SolverOptions tight_options()
    {
        SolverOptions o;
        o.gap_tol = 1e-10;
        return o;
    }
};

/// v^I_t = v̄ + u_t Δ with u_t uniform on [-1, 1] drawn from the seed.
std::vector<double> draw_vots(double vi_bar, double delta, std::size_t horizon, std::uint64_t seed);

/// Time-averaged eligible express flow under CBCP with B = α τ T and under
/// DBCP with discount α, per α.
std::vector<CurvePoint> sensitivity_vot(const VotSweep& sweep);

struct DemandSweep {
    LatencyFn latency = LatencyFn::monomial(0.25, 2.0);
    double toll = 0.4;
    double vot_eligible = 1.0;
    double vot_ineligible = 1.25;
    std::vector<double> demands;
    std::vector<double> alphas;
    SolverOptions options = VotSweep::tight_options();
    unsigned jobs = 1;
};

struct DemandCurve {
    double demand_ineligible;
    std::vector<CurvePoint> points;
};

std::vector<DemandCurve> sensitivity_demand(const DemandSweep& sweep);

}  // namespace expresslane

#endif
