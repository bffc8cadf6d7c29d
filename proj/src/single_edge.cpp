#include "expresslane/single_edge.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "expresslane/errors.hpp"

namespace expresslane {

namespace {

constexpr int kMaxIter = 200;

// Root of f on [lo, hi] given f(lo) < 0 <= f(hi). Stops when the bracket
// can no longer be split.
template <class F>
double bisect(F f, double lo, double hi)
{
    for (int i = 0; i < kMaxIter; ++i) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (f(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

void require_positive(double v, const char* what)
{
    if (!(v > 0.0) || !std::isfinite(v))
        throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be positive and finite");
}

void require_alpha(double alpha)
{
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0, 1]");
}

void case1_assumption(const LatencyFn& l, double toll, double vot)
{
    require_positive(toll, "toll");
    require_positive(vot, "VoT");
    double bound = vot * (l.eval(1.0) - l.eval(0.0));
    if (!(toll < bound))
        throw Error(ErrorCode::AssumptionViolated,
                    "toll " + std::to_string(toll) + " must be below v(ℓ(1) - ℓ(0)) = " + std::to_string(bound));
}

void case2_assumption(const LatencyFn& l, double toll, double ve, double vi)
{
    require_positive(toll, "toll");
    require_positive(ve, "eligible VoT");
    require_positive(vi, "ineligible VoT");
    if (!(ve < vi))
        throw Error(ErrorCode::AssumptionViolated, "eligible VoT must be below ineligible VoT");
    double bound = ve * (l.eval(2.0) - l.eval(0.0));
    if (!(toll < bound))
        throw Error(ErrorCode::AssumptionViolated,
                    "toll " + std::to_string(toll) + " must be below v^E(ℓ(2) - ℓ(0)) = " + std::to_string(bound));
}

// Lower branch of the pricing-out boundary is closed. 1 - v^E/v^I is not
// exactly representable, so the comparison carries a small tolerance.
bool priced_out(double alpha, double ratio_threshold)
{
    return alpha <= ratio_threshold + 1e-12;
}

// Ineligible express flow y solving ℓ(base + y) + τ/v^I = ℓ(1 + d - base - y)
// where base is the eligible express flow; clamped to [0, d].
double ineligible_express(const LatencyFn& l, double toll, double vi, double base, double demand)
{
    auto h = [&](double y) { return l.eval(base + y) + toll / vi - l.eval(1.0 + demand - base - y); };
    if (h(0.0) >= 0.0)
        return 0.0;
    if (h(demand) <= 0.0)
        return demand;
    return bisect(h, 0.0, demand);
}

}  // namespace

PopulationCase population_case(const SingleEdgeScenario& s)
{
    if (!s.vot_ineligible || s.demand_ineligible == 0.0)
        return PopulationCase::EligibleOnly;
    if (s.demand_ineligible == 1.0)
        return PopulationCase::Mixed;
    throw Error(ErrorCode::UnknownCase, "closed forms need ineligible demand 0 or 1, got " +
                                            std::to_string(s.demand_ineligible));
}

void check_assumptions(const SingleEdgeScenario& s)
{
    if (population_case(s) == PopulationCase::EligibleOnly)
        case1_assumption(s.latency, s.toll, s.vot_eligible);
    else
        case2_assumption(s.latency, s.toll, s.vot_eligible, *s.vot_ineligible);
}

double fixed_point_flow(const LatencyFn& l, double vot, double toll, double alpha, double demand)
{
    require_positive(vot, "VoT");
    require_positive(demand, "demand");
    require_alpha(alpha);
    if (toll < 0.0)
        throw Error(ErrorCode::InvalidArgument, "toll must be >= 0");
    double offset = (1.0 - alpha) * toll;
    if (offset == 0.0)
        return 0.5 * demand;
    auto h = [&](double y) { return vot * l.eval(y) + offset - vot * l.eval(demand - y); };
    if (h(0.0) >= 0.0)
        throw Error(ErrorCode::NotBracketed, "v ℓ(0) + (1 - alpha) τ >= v ℓ(D); no interior fixed point");
    return bisect(h, 0.0, 0.5 * demand);
}

double alpha1(const LatencyFn& l, double toll, double vot)
{
    case1_assumption(l, toll, vot);
    return fixed_point_flow(l, vot, toll, 0.0, 1.0);
}

double alpha2(const LatencyFn& l, double toll, double vot)
{
    double a1 = alpha1(l, toll, vot);
    auto k = [&](double a) { return vot * l.eval(a) + (1.0 - a) * toll - vot * l.eval(1.0 - a); };
    double a2 = bisect(k, a1, 0.5);
    if (!(a1 < a2 && a2 < 0.5))
        throw Error(ErrorCode::AssumptionViolated, "alpha2 outside (alpha1, 1/2)");
    return a2;
}

double alpha3(const LatencyFn& l, double toll, double vot)
{
    require_positive(toll, "toll");
    require_positive(vot, "VoT");
    double r = toll / vot;
    if (!(toll > 2.0 * vot * l.prime(1.0)))
        throw Error(ErrorCode::NoInteriorCrossing, "toll " + std::to_string(toll) + " <= 2 v ℓ'(1) = " +
                                                       std::to_string(2.0 * vot * l.prime(1.0)));
    auto g = [&](double a) { return l.eval(a) + (1.0 - a) * r - l.eval(2.0 - a); };
    auto dg = [&](double a) { return l.prime(a) + l.prime(2.0 - a) - r; };
    if (!(g(0.0) < 0.0))
        throw Error(ErrorCode::AssumptionViolated, "ℓ(0) + τ/v must be below ℓ(2)");
    if (!(dg(0.0) > 0.0))
        throw Error(ErrorCode::NoInteriorCrossing, "crossing function is not increasing at 0");
    // g rises to its maximum at a_m and falls back to g(1) = 0.
    double a_m = bisect([&](double a) { return -dg(a); }, 0.0, 1.0);
    if (!(g(a_m) > 0.0))
        throw Error(ErrorCode::NoInteriorCrossing, "crossing function never becomes positive");
    return bisect(g, 0.0, a_m);
}

CreditSplit yC_case1(double alpha, const LatencyFn& l, double toll, double vot)
{
    require_alpha(alpha);
    double a1 = alpha1(l, toll, vot);
    double total = std::clamp(alpha, a1, 0.5);
    double credit = std::min(alpha, total);
    return {total, credit, total - credit};
}

double yD_case1(double alpha, const LatencyFn& l, double toll, double vot)
{
    return fixed_point_flow(l, vot, toll, alpha, 1.0);
}

double yC_case2(double alpha)
{
    require_alpha(alpha);
    return alpha;
}

double yD_case2(double alpha, const LatencyFn& l, double toll, double vot_eligible, double vot_ineligible)
{
    case2_assumption(l, toll, vot_eligible, vot_ineligible);
    require_alpha(alpha);
    if (priced_out(alpha, 1.0 - vot_eligible / vot_ineligible))
        return 0.0;
    return fixed_point_flow(l, vot_eligible, toll, alpha, 2.0);
}

std::string_view to_string(Regime r)
{
    switch (r) {
    case Regime::LowToll: return "LowToll";
    case Regime::HighTollHighRatio: return "HighTollHighRatio";
    case Regime::HighTollLowRatio: return "HighTollLowRatio";
    case Regime::SingleGroup: return "SingleGroup";
    }
    return "Unknown";
}

Larger RegimeReport::larger_at(double alpha) const
{
    // Upper ends are closed, with the slack used by yD_case2.
    for (const auto& iv : intervals)
        if (alpha > iv.lo + 1e-12 && alpha <= iv.hi + 1e-12)
            return iv.larger;
    return intervals.empty() ? Larger::Credit : intervals.front().larger;
}

RegimeReport classify_regime(const LatencyFn& l, double toll, double vot_eligible, double vot_ineligible)
{
    case2_assumption(l, toll, vot_eligible, vot_ineligible);
    double r = 1.0 - vot_eligible / vot_ineligible;
    RegimeReport rep;
    if (toll <= 2.0 * vot_eligible * l.prime(1.0)) {
        rep.regime = Regime::LowToll;
        rep.thresholds = {r};
        rep.intervals = {{0.0, r, Larger::Credit}, {r, 1.0, Larger::Discount}};
        return rep;
    }
    double a3 = alpha3(l, toll, vot_eligible);
    rep.thresholds = {r, a3};
    if (r < a3) {
        rep.regime = Regime::HighTollHighRatio;
        rep.intervals = {{0.0, r, Larger::Credit}, {r, a3, Larger::Discount}, {a3, 1.0, Larger::Credit}};
    } else {
        rep.regime = Regime::HighTollLowRatio;
        rep.intervals = {{0.0, 1.0, Larger::Credit}};
    }
    return rep;
}

RegimeReport single_group_report(const LatencyFn& l, double toll, double vot)
{
    double a1 = alpha1(l, toll, vot);
    double a2 = alpha2(l, toll, vot);
    RegimeReport rep;
    rep.regime = Regime::SingleGroup;
    rep.thresholds = {a1, a2};
    rep.intervals = {{0.0, a2, Larger::Discount}, {a2, 1.0, Larger::Credit}};
    return rep;
}

SingleEdgeFlows equilibrium_flows(const SingleEdgeScenario& s, PolicyKind kind, double alpha)
{
    check_assumptions(s);
    require_alpha(alpha);
    SingleEdgeFlows y;
    const LatencyFn& l = s.latency;
    if (population_case(s) == PopulationCase::EligibleOnly) {
        if (kind == PolicyKind::Cbcp) {
            CreditSplit c = yC_case1(alpha, l, s.toll, s.vot_eligible);
            y.eligible_credit = c.credit;
            y.eligible_paid = c.pocket;
            y.eligible_general = 1.0 - c.total;
        } else {
            y.eligible_paid = yD_case1(alpha, l, s.toll, s.vot_eligible);
            y.eligible_general = 1.0 - y.eligible_paid;
        }
        return y;
    }

    double vi = *s.vot_ineligible;
    if (kind == PolicyKind::Cbcp) {
        y.eligible_credit = yC_case2(alpha);
        y.eligible_general = 1.0 - alpha;
        y.ineligible_express = ineligible_express(l, s.toll, vi, alpha, 1.0);
    } else {
        double yd = yD_case2(alpha, l, s.toll, s.vot_eligible, vi);
        y.eligible_paid = yd;
        y.eligible_general = 1.0 - yd;
        if (yd == 0.0)
            y.ineligible_express = ineligible_express(l, s.toll, vi, 0.0, 1.0);
    }
    y.ineligible_general = 1.0 - y.ineligible_express;
    return y;
}

double kkt_residual(const SingleEdgeScenario& s, const SingleEdgeFlows& y, PolicyKind kind, double alpha)
{
    const PopulationCase pc = population_case(s);
    require_alpha(alpha);
    const LatencyFn& l = s.latency;
    const double ve = s.vot_eligible;
    const bool mixed = pc == PopulationCase::Mixed;

    double worst = 0.0;
    auto note = [&](double v) { worst = std::max(worst, v); };

    for (double v : {y.eligible_credit, y.eligible_paid, y.eligible_general, y.ineligible_express,
                     y.ineligible_general})
        note(-v);
    note(std::abs(y.eligible_credit + y.eligible_paid + y.eligible_general - 1.0));
    if (mixed)
        note(std::abs(y.ineligible_express + y.ineligible_general - s.demand_ineligible));
    else
        note(std::max(std::abs(y.ineligible_express), std::abs(y.ineligible_general)));

    double x1 = std::max(0.0, y.eligible_credit + y.eligible_paid + y.ineligible_express);
    double x2 = std::max(0.0, y.eligible_general + y.ineligible_general);
    double l1 = l.eval(x1);
    double l2 = l.eval(x2);
    double tau = s.toll;

    if (kind == PolicyKind::Cbcp) {
        double pocket = l1 + tau / ve;
        double mu = std::clamp(l2 - l1, 0.0, tau / ve);
        double lambda = std::min({l1 + mu, pocket, l2});
        note(y.eligible_credit - alpha);
        note((l1 + mu - lambda) * std::max(0.0, y.eligible_credit));
        note((pocket - lambda) * std::max(0.0, y.eligible_paid));
        note((l2 - lambda) * std::max(0.0, y.eligible_general));
        note(mu * std::max(0.0, alpha - y.eligible_credit));
    } else {
        note(std::abs(y.eligible_credit));
        double express = l1 + (1.0 - alpha) * tau / ve;
        double lambda = std::min(express, l2);
        note((express - lambda) * std::max(0.0, y.eligible_paid));
        note((l2 - lambda) * std::max(0.0, y.eligible_general));
    }
    if (mixed) {
        double express = l1 + tau / *s.vot_ineligible;
        double lambda = std::min(express, l2);
        note((express - lambda) * std::max(0.0, y.ineligible_express));
        note((l2 - lambda) * std::max(0.0, y.ineligible_general));
    }
    return worst;
}

}  // namespace expresslane
