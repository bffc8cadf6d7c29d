#ifndef EXPRESSLANE_SINGLE_EDGE_HPP
#define EXPRESSLANE_SINGLE_EDGE_HPP

#include <optional>
#include <string_view>
#include <vector>

#include "expresslane/latency.hpp"
#include "expresslane/policies.hpp"

namespace expresslane {

/// One edge, both lanes share `latency`; eligible demand is 1.
struct SingleEdgeScenario {
    LatencyFn latency;
    double toll;
    double vot_eligible = 1.0;
    std::optional<double> vot_ineligible;
    double demand_ineligible = 1.0;
};

enum class PopulationCase { EligibleOnly, Mixed };

/// EligibleOnly without an ineligible group (or with zero ineligible
/// demand), Mixed with unit ineligible demand; UnknownCase otherwise.
PopulationCase population_case(const SingleEdgeScenario& s);

/// Throws AssumptionViolated unless the toll bound of the population case
/// holds (and v^E < v^I for the mixed case).
void check_assumptions(const SingleEdgeScenario& s);

/// Solves v ℓ(y) + (1 - alpha) τ = v ℓ(D - y) on [0, D/2] by bisection.
double fixed_point_flow(const LatencyFn& l, double vot, double toll, double alpha, double demand);

double alpha1(const LatencyFn& l, double toll, double vot);
double alpha2(const LatencyFn& l, double toll, double vot);
/// Interior root of ℓ(a) + (1 - a) τ / v = ℓ(2 - a); throws NoInteriorCrossing
/// when τ <= 2 v ℓ'(1).
double alpha3(const LatencyFn& l, double toll, double vot);

struct CreditSplit {
    double total;
    double credit;
    double pocket;
};

CreditSplit yC_case1(double alpha, const LatencyFn& l, double toll, double vot);
double yD_case1(double alpha, const LatencyFn& l, double toll, double vot);
double yC_case2(double alpha);
double yD_case2(double alpha, const LatencyFn& l, double toll, double vot_eligible, double vot_ineligible);

enum class Regime { LowToll, HighTollHighRatio, HighTollLowRatio, SingleGroup };

std::string_view to_string(Regime r);

enum class Larger { Credit, Discount };

struct DominanceInterval {
    double lo;
    double hi;
    Larger larger;
};

struct RegimeReport {
    Regime regime;
    /// Mixed case: {1 - v^E/v^I} or {1 - v^E/v^I, α₃}. Single group: {α₁, α₂}.
    std::vector<double> thresholds;
    std::vector<DominanceInterval> intervals;

    /// Which curve is larger at alpha according to the intervals.
    Larger larger_at(double alpha) const;
};

RegimeReport classify_regime(const LatencyFn& l, double toll, double vot_eligible, double vot_ineligible);
/// Dominance of y^D over y^C for the eligible-only population.
RegimeReport single_group_report(const LatencyFn& l, double toll, double vot);

struct SingleEdgeFlows {
    double eligible_credit = 0.0;
    double eligible_paid = 0.0;
    double eligible_general = 0.0;
    double ineligible_express = 0.0;
    double ineligible_general = 0.0;

    double eligible_express() const { return eligible_credit + eligible_paid; }
};

/// Closed-form equilibrium of the single-edge game for the given discount
/// (DBCP) or budget share alpha = B / τ (CBCP).
SingleEdgeFlows equilibrium_flows(const SingleEdgeScenario& s, PolicyKind kind, double alpha);

/// Largest violation of the KKT system (time units) at the candidate flows,
/// with multipliers rebuilt from the candidate's lane latencies.
double kkt_residual(const SingleEdgeScenario& s, const SingleEdgeFlows& y, PolicyKind kind, double alpha);

}  // namespace expresslane

#endif
