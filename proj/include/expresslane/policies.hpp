#ifndef EXPRESSLANE_POLICIES_HPP
#define EXPRESSLANE_POLICIES_HPP

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "expresslane/network.hpp"

namespace expresslane {

struct UserGroup {
    std::string id;
    bool eligible = false;
    double demand = 1.0;
    /// Value of time per period, money per time unit.
    std::vector<double> vot;

    double vot_at(std::size_t t) const { return vot.at(t); }
};

/// Values indexed [edge][time].
using EdgeTimeTable = std::vector<std::vector<double>>;

EdgeTimeTable uniform_table(std::size_t edges, std::size_t horizon, double value);

struct DbcpPolicy {
    EdgeTimeTable tolls;
    EdgeTimeTable discounts;
};

struct CbcpPolicy {
    EdgeTimeTable tolls;
    /// Credit per eligible group over the whole horizon.
    double budget = 0.0;
};

using Policy = std::variant<DbcpPolicy, CbcpPolicy>;

enum class PolicyKind { Dbcp, Cbcp };

PolicyKind kind_of(const Policy& policy);
const EdgeTimeTable& tolls_of(const Policy& policy);

struct Scenario {
    std::vector<UserGroup> groups;
    Policy policy;
    std::size_t horizon = 1;
};

inline constexpr std::size_t kSlots = 3;

/// Express flow is split into credit-paid and out-of-pocket parts. Under
/// DBCP all express flow sits in ExpressPaid.
enum class FlowSlot : int { ExpressCredit = 0, ExpressPaid = 1, General = 2 };

inline std::size_t slot_index(FlowSlot s) { return static_cast<std::size_t>(s); }

/// Dense per-group flows laid out [group][time][edge][slot].
class FlowPattern {
public:
    FlowPattern() = default;
    FlowPattern(std::size_t groups, std::size_t horizon, std::size_t edges);

    std::size_t groups() const noexcept { return groups_; }
    std::size_t horizon() const noexcept { return horizon_; }
    std::size_t edges() const noexcept { return edges_; }

    double& at(std::size_t g, std::size_t t, std::size_t e, FlowSlot s)
    {
        return data_[offset(g, t, e) + slot_index(s)];
    }
    double at(std::size_t g, std::size_t t, std::size_t e, FlowSlot s) const
    {
        return data_[offset(g, t, e) + slot_index(s)];
    }
    /// Lane flow; express is credit plus paid.
    double lane(std::size_t g, std::size_t t, std::size_t e, Lane lane) const;

    /// Contiguous block of one group: [time][edge][slot].
    double* group_data(std::size_t g) { return data_.data() + offset(g, 0, 0); }
    const double* group_data(std::size_t g) const { return data_.data() + offset(g, 0, 0); }
    std::size_t group_size() const noexcept { return horizon_ * edges_ * kSlots; }

    const std::vector<double>& raw() const noexcept { return data_; }

private:
    std::size_t offset(std::size_t g, std::size_t t, std::size_t e) const
    {
        return ((g * horizon_ + t) * edges_ + e) * kSlots;
    }

    std::size_t groups_ = 0;
    std::size_t horizon_ = 0;
    std::size_t edges_ = 0;
    std::vector<double> data_;
};

/// Lane totals laid out [time][edge][lane].
class AggregateFlows {
public:
    AggregateFlows() = default;
    AggregateFlows(std::size_t horizon, std::size_t edges);

    std::size_t horizon() const noexcept { return horizon_; }
    std::size_t edges() const noexcept { return edges_; }

    double& at(std::size_t t, std::size_t e, Lane lane) { return data_[(t * edges_ + e) * kLanes + lane_index(lane)]; }
    double at(std::size_t t, std::size_t e, Lane lane) const
    {
        return data_[(t * edges_ + e) * kLanes + lane_index(lane)];
    }

    const std::vector<double>& raw() const noexcept { return data_; }
    std::vector<double>& raw() noexcept { return data_; }

private:
    std::size_t horizon_ = 0;
    std::size_t edges_ = 0;
    std::vector<double> data_;
};

AggregateFlows aggregate(const FlowPattern& flows);

/// Money cost of one unit of group flow on (edge, lane) at time t.
double dbcp_cost(const UserGroup& group, const ValidatedNetwork& net, std::size_t e, Lane lane,
                 std::size_t t, const AggregateFlows& x, const DbcpPolicy& policy);

struct CbcpCosts {
    double credit;
    double pocket;
    double general;
};

CbcpCosts cbcp_costs(const UserGroup& group, const ValidatedNetwork& net, std::size_t e, std::size_t t,
                     const AggregateFlows& x, const CbcpPolicy& policy);

/// Largest absolute flow-conservation error over groups, times and nodes
/// other than the destination.
double conservation_residual(const ValidatedNetwork& net, const std::vector<UserGroup>& groups,
                             const FlowPattern& flows);

/// Most negative flow component reported as a positive number, or 0.
double negativity_residual(const FlowPattern& flows);

/// Credit spent by each group; zero for ineligible groups.
std::vector<double> budget_spent(const FlowPattern& flows, const std::vector<UserGroup>& groups,
                                 const EdgeTimeTable& tolls);

void check_groups(const std::vector<UserGroup>& groups, std::size_t horizon);
void check_policy(const Policy& policy, std::size_t edges, std::size_t horizon);
/// Throws TimeVaryingEligibleVot if any eligible group's VoT changes over time.
void require_constant_eligible_vot(const std::vector<UserGroup>& groups);

}  // namespace expresslane

#endif
